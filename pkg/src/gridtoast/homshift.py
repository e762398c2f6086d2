"""Hom-shift constructor: graph homomorphisms from lattice regions to a
finite connected non-bipartite graph H.

Every region is filled with a v/w checkerboard keyed to the parity of its
least cell, where (v, w) is the least edge of H.  An inner region whose
phase disagrees with the ambient one is glued in through a radial shell
that walks an even connector v_0 ... v_N of H: a cell at Chebyshev
distance h from the inner region carries v_h or v_{h-1}, picked by the
cell's parity so that every lattice edge steps at most once along the
walk.  Period breaking places two distinct cube patterns at E and beta+E
deep inside each component.
"""

from __future__ import annotations

import itertools
import sys

import numpy as np

from . import kernels
from .geometry import Box, Region, add, parity
from .pipeline import beta_sequence
from .toast import PeriodBreaker, containment_forest, select_period_breaker


class FiniteGraph:
    """Finite undirected graph on vertices 0..n-1; loops allowed.

    Loading verifies connectivity and the existence of an odd closed walk
    (a loop or an odd cycle); bipartite graphs are rejected.
    """

    def __init__(self, n, edges):
        self.n = int(n)
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        self.edges = sorted({(min(a, b), max(a, b)) for a, b in edges})
        adj = np.zeros((self.n, self.n), dtype=bool)
        for a, b in self.edges:
            if not (0 <= a <= b < self.n):
                raise ValueError(f"edge ({a},{b}) out of range")
            adj[a, b] = adj[b, a] = True
        self.adj = adj
        self._check()

    def _check(self):
        seen = np.zeros(self.n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            u = stack.pop()
            for x in np.flatnonzero(self.adj[u]):
                if not seen[x]:
                    seen[x] = True
                    stack.append(int(x))
        if not seen.all():
            raise ValueError("graph is not connected")
        if any(a == b for a, b in self.edges):
            return  # a loop is an odd closed walk
        color = np.full(self.n, -1, dtype=np.int64)
        color[0] = 0
        stack = [0]
        while stack:
            u = stack.pop()
            for x in np.flatnonzero(self.adj[u]):
                if color[x] < 0:
                    color[x] = 1 - color[u]
                    stack.append(int(x))
                elif color[x] == color[u]:
                    return
        raise ValueError("graph is bipartite (no odd cycle)")

    def adjacent(self, a, b):
        return bool(self.adj[a, b])

    def neighbors(self, a):
        return [int(x) for x in np.flatnonzero(self.adj[a])]

    def to_json(self):
        return {"vertices": self.n, "edges": [list(e) for e in self.edges]}

    @staticmethod
    def from_json(obj):
        return FiniteGraph(obj["vertices"], [tuple(e) for e in obj["edges"]])


def complete_graph(n):
    return FiniteGraph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def cycle_graph(n):
    return FiniteGraph(n, [(a, (a + 1) % n) for a in range(n)])


def base_edge(H):
    """Lexicographically least proper edge (v, w); a lone looped vertex
    falls back to (v, v)."""
    for a, b in H.edges:
        if a != b:
            return a, b
    return H.edges[0]


def even_connector(H, v, w):
    """Minimal even N admitting a length-N walk from v to w, plus the
    lexicographically least such walk (vertices may repeat).

    Walks of length m from u to w exist iff m has the right parity and
    m >= dist[u, m % 2], where dist is computed on H x {even, odd}; the
    walk is rebuilt greedily, always taking the least feasible neighbor.
    """
    if not H.adjacent(v, w):
        raise ValueError(f"({v},{w}) is not an edge")
    inf = 1 << 30
    dist = np.full((H.n, 2), inf, dtype=np.int64)
    dist[w, 0] = 0
    frontier = [(w, 0)]
    while frontier:
        nxt = []
        for u, p in frontier:
            for x in H.neighbors(u):
                if dist[x, 1 - p] > dist[u, p] + 1:
                    dist[x, 1 - p] = dist[u, p] + 1
                    nxt.append((x, 1 - p))
        frontier = nxt
    n = int(dist[v, 0])
    if n >= inf:
        raise ValueError("no even walk exists (graph is bipartite)")
    walk = [v]
    cur = v
    for m in range(n, 0, -1):
        for x in H.neighbors(cur):
            if dist[x, (m - 1) % 2] <= m - 1:
                walk.append(x)
                cur = x
                break
    return n, walk


class HomPattern:
    """Pattern on a region: a map from its cells to vertices of H."""

    def __init__(self, support: Region, values):
        self.support = support
        self.values = dict(values)
        if set(self.values) != support.cells:
            raise ValueError("values do not cover the support exactly")

    def __getitem__(self, cell):
        return self.values[tuple(cell)]

    def __eq__(self, other):
        return isinstance(other, HomPattern) and self.values == other.values

    def translate(self, delta):
        return HomPattern(self.support.translate(delta),
                          {add(c, delta): x for c, x in self.values.items()})

    def problems(self, H):
        """Adjacency on every internal lattice edge, plus the v/w parity
        boundary condition relative to the support's least cell."""
        v, w = base_edge(H)
        pa = parity(self.support.anchor())
        probs = []
        cells = self.support.cells
        d = self.support.d
        for c in sorted(cells):
            x = self.values[c]
            on_boundary = False
            for ax in range(d):
                for s in (1, -1):
                    nb = tuple(cc + (s if a == ax else 0)
                               for a, cc in enumerate(c))
                    if nb in cells:
                        if s == 1 and not H.adjacent(x, self.values[nb]):
                            probs.append(f"edge {c}-{nb} maps to the "
                                         f"non-edge ({x},{self.values[nb]})")
                    else:
                        on_boundary = True
            if on_boundary:
                want = v if parity(c) == pa else w
                if x != want:
                    probs.append(f"boundary cell {c} carries {x}, "
                                 f"expected {want}")
        return probs

    def to_json(self):
        cells = sorted(self.support.cells)
        return {"cells": [list(c) for c in cells],
                "values": [self.values[c] for c in cells]}

    @staticmethod
    def from_json(obj):
        cells = [tuple(c) for c in obj["cells"]]
        return HomPattern(Region(cells), dict(zip(cells, obj["values"])))


def checkerboard(C, H, anchor_parity=None):
    """v/w two-coloring of the grid union by cell parity; the anchor's
    parity class receives v."""
    v, w = base_edge(H)
    region = C.region()
    pa = parity(region.anchor()) if anchor_parity is None else anchor_parity % 2
    return HomPattern(region, {c: (v if parity(c) == pa else w)
                               for c in region.cells})


def _ball(cells, m, d):
    offs = list(itertools.product((-1, 0, 1), repeat=d))
    cur = set(cells)
    for _ in range(m):
        cur = {add(c, o) for c in cur for o in offs}
    return cur


def _shell_value(walk, h, phi):
    """Value of a shell cell at Chebyshev distance h from an inner region
    of opposite phase; phi is the cell's parity relative to the inner
    anchor.  Successive lattice neighbors differ by at most one walk step,
    and the rule meets the inner checkerboard at h=1 and the ambient one
    just past h=N."""
    return walk[h] if (h + phi) % 2 == 0 else walk[h - 1]


def extend_hom(C, inner, Nprime, H):
    """Extend inner patterns to all of C: ambient checkerboard keyed to
    C's least cell, with radial connector shells around inner regions of
    the opposite phase.

    `inner` is a list of (GridUnion, HomPattern) pairs whose N'-collars
    must be pairwise disjoint and contained in C; N' must reach the even
    connector length of H.
    """
    v, w = base_edge(H)
    n_conn, walk = even_connector(H, v, w)
    if Nprime < n_conn:
        raise ValueError(f"collar width {Nprime} is below the connector "
                         f"length {n_conn}")
    region = C.region()
    cells = region.cells
    d = region.d
    p_amb = parity(region.anchor())
    collars = []
    taken = set()
    for idx, (gu, pat) in enumerate(inner):
        reg = gu.region()
        if pat.support.cells != reg.cells:
            raise ValueError(f"inner pattern {idx} does not match its "
                             "grid union")
        probs = pat.problems(H)
        if probs:
            raise ValueError(f"inner pattern {idx} invalid: {probs[0]}")
        collar = _ball(reg.cells, Nprime, d)
        if not collar <= cells:
            raise ValueError(f"collar of inner component {idx} leaves "
                             "the region")
        for jdx, other in collars:
            if collar & other:
                raise ValueError(f"collars of inner components {jdx} "
                                 f"and {idx} overlap")
        collars.append((idx, collar))
        taken |= reg.cells
    values = {c: (v if parity(c) == p_amb else w) for c in cells - taken}
    for gu, pat in inner:
        values.update(pat.values)
        reg = gu.region()
        p_in = parity(reg.anchor())
        if p_in == p_amb:
            continue
        ball = set(reg.cells)
        for h in range(1, n_conn + 1):
            grown = _ball(ball, 1, d)
            for c in (grown - ball) & cells:
                values[c] = _shell_value(walk, h, (parity(c) + p_in) % 2)
            ball = grown
    return HomPattern(region, values)


def first_two_patterns(H, cube: Box, boundary_value):
    """First two proper cube patterns in lexicographic order, both
    compatible with the forced exterior values (`boundary_value(cell)`
    for cells axis-adjacent to the cube).  Raises when fewer than two
    exist (period breaking would be impossible)."""
    cells = sorted(cube.cells())
    inside = set(cells)
    d = cube.d
    found = []
    assign = {}

    def rec(i):
        if i == len(cells):
            found.append(dict(assign))
            return
        c = cells[i]
        for x in range(H.n):
            ok = True
            for ax in range(d):
                for s in (1, -1):
                    nb = tuple(cc + (s if a == ax else 0)
                               for a, cc in enumerate(c))
                    if nb in assign:
                        ok = H.adjacent(assign[nb], x)
                    elif nb not in inside:
                        ok = H.adjacent(boundary_value(nb), x)
                    if not ok:
                        break
                if not ok:
                    break
            if ok:
                assign[c] = x
                rec(i + 1)
                del assign[c]
                if len(found) >= 2:
                    return

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, len(cells) + 200))
    try:
        rec(0)
    finally:
        sys.setrecursionlimit(old_limit)
    if len(found) < 2:
        raise ValueError("fewer than two admissible cube patterns on a "
                         f"side-{cube.sides} cube; period breaking "
                         "impossible (cube too small for H)")
    return found[0], found[1]


class HomCertificate:
    """Global hom pattern on the torus plus its period-breaking data."""

    def __init__(self, H, L, d, v, w, walk, values, betas, breakers, seed):
        self.H = H
        self.L = L
        self.d = d
        self.v = v
        self.w = w
        self.walk = list(walk)
        self.values = values  # integer array of shape (L,)*d
        self.betas = [tuple(b) for b in betas]
        self.breakers = list(breakers)
        self.seed = seed

    def to_json(self):
        return {"family": "hom", "H": self.H.to_json(), "L": self.L,
                "d": self.d, "v": self.v, "w": self.w, "walk": self.walk,
                "seed": self.seed, "betas": [list(b) for b in self.betas],
                "breakers": [pb.to_json() for pb in self.breakers],
                "values": self.values.reshape(-1).tolist()}

    @staticmethod
    def from_json(obj):
        values = np.array(obj["values"], dtype=np.int16).reshape(
            (obj["L"],) * obj["d"])
        return HomCertificate(
            FiniteGraph.from_json(obj["H"]), obj["L"], obj["d"], obj["v"],
            obj["w"], obj["walk"], values,
            [tuple(b) for b in obj["betas"]],
            [PeriodBreaker.from_json(b) for b in obj["breakers"]],
            obj["seed"])


def parity_array(L, d):
    """Torus array of cell parities (sum of coordinates mod 2)."""
    par = np.zeros((L,) * d, dtype=np.int8)
    line = (np.arange(L) % 2).astype(np.int8)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = L
        par ^= line.reshape(shape)
    return par


def component_anchor(comp):
    """Least realized cell of a component (lifted coordinates)."""
    base = add(comp.grid.offset, (1,) * comp.d)
    return add(base, min(comp.grid.cells))


def run_hom_pipeline(toast, H, seed=0):
    """Pattern the whole torus level by level.

    Each component gets its ambient checkerboard (phase keyed to its
    least cell), connector shells around its maximal opposite-phase inner
    components, and a period-breaker pair e at E, e' at beta+E with
    e != e'.  Levels are processed bottom-up and finished components are
    never touched again, so every component's pattern is in P_C at the
    moment its level completes.
    """
    params = toast.params
    L, d, k, n = params.L, params.d, params.k, params.n
    if L % 2:
        raise ValueError("torus side must be even (checkerboard parity)")
    v, w = base_edge(H)
    if v == w:
        raise ValueError("H has no proper edge")
    n_conn, walk = even_connector(H, v, w)
    if n < n_conn + 1:
        raise ValueError(f"toast collar n = {n} must exceed the connector "
                         f"length {n_conn}")
    # |beta| >= 3k keeps the k-collars of E and beta+E disjoint; even
    # coordinate sums keep the checkerboard boundary of beta+E in phase
    betas = beta_sequence(toast, seed=seed, min_norm=3 * k, even=True)
    arr = np.full((L,) * d, -1, dtype=np.int16)
    par = parity_array(L, d)
    _, children = containment_forest(toast)
    breakers = []
    for li, level in enumerate(toast.levels):
        for ci, comp in enumerate(level):
            kids = [toast.levels[a][b] for a, b in children[(li, ci)]]
            _fill_component(comp, kids, arr, par, L, d, v, w, walk, n_conn)
            try:
                pb = select_period_breaker(toast, comp, betas[li])
            except ValueError as exc:
                raise ValueError(f"component ({li},{ci}): {exc}") from exc
            _write_breaker(arr, pb, comp, H, v, w, L)
            breakers.append(pb)
    if (arr < 0).any():
        raise AssertionError("pipeline left unassigned cells")
    return HomCertificate(H, L, d, v, w, walk, arr, betas, breakers, seed)


def _fill_component(comp, kids, arr, par, L, d, v, w, walk, n_conn):
    if comp.is_root:
        wlo = (0,) * d
        shape = arr.shape
        cmask = np.ones(shape, dtype=bool)
        p_amb = 0
    else:
        win = comp.bbox()
        wlo = win.lo
        shape = win.sides
        cmask = np.zeros(shape, dtype=bool)
        comp.paint(cmask, wlo, L)
        p_amb = parity(component_anchor(comp))
    free = cmask.copy()
    for ch in kids:
        m = np.zeros(shape, dtype=bool)
        ch.paint(m, wlo, L)
        free &= ~m
    if comp.is_root:
        arr[free] = np.where(par[free] == p_amb, v, w).astype(arr.dtype)
    else:
        idx = np.argwhere(free)
        tor = tuple((idx[:, a] + wlo[a]) % L for a in range(d))
        arr[tor] = np.where(par[tor] == p_amb, v, w).astype(arr.dtype)
    # connector shells around opposite-phase inner components
    for ch in kids:
        p_in = parity(component_anchor(ch))
        if p_in == p_amb:
            continue
        cwin = ch.bbox().expand(n_conn + 1)
        dmask = np.zeros(cwin.sides, dtype=bool)
        ch.paint(dmask, cwin.lo, L)
        prev = dmask
        for h in range(1, n_conn + 1):
            grown = kernels.dilate_linf(prev, 1)
            ridx = np.argwhere(grown & ~prev)
            tor = tuple((ridx[:, a] + cwin.lo[a]) % L for a in range(d))
            phi = (par[tor] + p_in) % 2
            arr[tor] = np.where((h + phi) % 2 == 0, walk[h],
                                walk[h - 1]).astype(arr.dtype)
            prev = grown
    return p_amb


def _write_breaker(arr, pb, comp, H, v, w, L):
    p_amb = 0 if comp.is_root else parity(component_anchor(comp))

    def boundary_value(cell):
        return v if parity(cell) == p_amb else w

    e, e2 = first_two_patterns(H, pb.cube, boundary_value)
    for pattern, off in ((e, (0,) * len(pb.beta)), (e2, pb.beta)):
        for cell, val in pattern.items():
            arr[tuple((x + o) % L for x, o in zip(cell, off))] = val
