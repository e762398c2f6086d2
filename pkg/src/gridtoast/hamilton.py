"""Directed Hamiltonian cycles and paths on boxes, grid unions and tori.

The building block is the serpentine cycle c_{l,m}: a clockwise boundary
ring with one edge deleted and the interior filled by horizontal
back-and-forth rows (teeth near the bottom fix the parity when m is odd).
Cycles on adjacent regions are merged by swapping a pair of antiparallel
edges (`join_cycles`); d-dimensional boxes stack serpentine layers of
alternating orientation; `extend_hamiltonian` assembles a path on a grid
union from a hamiltonian-grade almost-k-box tiling, splicing in prescribed
inner paths, and `run_ham_pipeline` closes the construction into a single
cycle on the torus.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import Box, GridUnion, add, sub, unit_vector
from .pipeline import beta_sequence
from .tiling import aftf_graph, tile_complement


def step_vectors(d):
    """Unit vectors by direction code: 0..d-1 = +e_1..+e_d, d..2d-1 = -e_i."""
    out = [unit_vector(d, i + 1) for i in range(d)]
    out += [unit_vector(d, i + 1, -1) for i in range(d)]
    return out


def _neg(v):
    return tuple(-x for x in v)


class DirectedPath:
    """A directed Hamiltonian path or cycle on a finite set of cells.

    `step` maps each cell to the unit vector towards its successor;
    `endpoints` is "cycle" or a (start, end) pair, and the end cell of a
    path carries no step.
    """

    def __init__(self, step, endpoints="cycle", meta=None):
        self.step = dict(step)
        self.endpoints = endpoints if endpoints == "cycle" else \
            (tuple(endpoints[0]), tuple(endpoints[1]))
        self.meta = meta or {}

    @property
    def d(self):
        return len(next(iter(self.step)))

    def support(self):
        cells = set(self.step)
        if self.endpoints != "cycle":
            cells.add(self.endpoints[1])
        return cells

    def __len__(self):
        return len(self.support())

    def __eq__(self, other):
        return (isinstance(other, DirectedPath) and self.step == other.step
                and self.endpoints == other.endpoints)

    def edges(self):
        for g in sorted(self.step):
            yield g, add(g, self.step[g])

    def translate(self, v):
        ep = self.endpoints
        if ep != "cycle":
            ep = (add(ep[0], v), add(ep[1], v))
        return DirectedPath({add(g, v): s for g, s in self.step.items()},
                            ep, dict(self.meta))

    def reverse(self):
        rev = {add(g, s): _neg(s) for g, s in self.step.items()}
        if self.endpoints == "cycle":
            return DirectedPath(rev)
        start, end = self.endpoints
        return DirectedPath(rev, (end, start))

    def problems(self):
        """Structural check: unit steps, in-degree one (zero at a path
        start), and a single walk covering the whole support."""
        out = []
        if not self.step:
            return ["empty path"]
        if self.endpoints == "cycle":
            support = set(self.step)
            start = min(support)
            end = None
        else:
            start, end = self.endpoints
            support = set(self.step) | {end}
            if end in self.step:
                out.append(f"end {end} has an outgoing edge")
            if start not in self.step:
                out.append(f"start {start} has no outgoing edge")
            if start == end:
                out.append("start equals end")
            if out:
                return out
        indeg = {}
        for g, s in self.step.items():
            if sum(abs(x) for x in s) != 1:
                return [f"non-unit step {s} at {g}"]
            h = add(g, s)
            if h not in support:
                return [f"edge at {g} leaves the support"]
            indeg[h] = indeg.get(h, 0) + 1
        for c in support:
            want = 0 if (end is not None and c == start) else 1
            if indeg.get(c, 0) != want:
                return [f"cell {c} has in-degree {indeg.get(c, 0)}, "
                        f"expected {want}"]
        seen = 1
        cur = start
        while seen <= len(support):
            if end is not None and cur == end:
                break
            cur = add(cur, self.step[cur])
            if end is None and cur == start:
                break
            seen += 1
        if seen != len(support):
            out.append(f"walk from {start} covers {seen} of "
                       f"{len(support)} cells")
        return out

    def to_json(self):
        cells = sorted(self.step)
        d = self.d
        codes = {v: i for i, v in enumerate(step_vectors(d))}
        obj = {"d": d,
               "cells": [list(c) for c in cells],
               "codes": [codes[self.step[c]] for c in cells],
               "endpoints": "cycle" if self.endpoints == "cycle"
               else [list(self.endpoints[0]), list(self.endpoints[1])]}
        return obj

    @staticmethod
    def from_json(obj):
        vecs = step_vectors(obj["d"])
        step = {tuple(c): vecs[k] for c, k in zip(obj["cells"], obj["codes"])}
        ep = obj["endpoints"]
        if ep != "cycle":
            ep = (tuple(ep[0]), tuple(ep[1]))
        return DirectedPath(step, ep)


def _serp_seq(l, m):
    """Cell sequence of the clockwise serpentine cycle on [1,l] x [1,m].

    Boundary ring clockwise with the edge (1,m-2)->(1,m-1) deleted (the
    feasible edge nearest the top-left corner); the interior snake runs
    horizontal rows top-to-bottom over x in [2,l-2] (direction forced by
    the distance-from-top parity), returns through the corridor column
    x = l-1 and finishes along the top interior row. When m is odd the
    two bottom interior rows are covered by vertical teeth instead.
    """
    seq = [(1, m - 1), (1, m)]
    seq += [(x, m) for x in range(2, l + 1)]
    seq += [(l, y) for y in range(m - 1, 0, -1)]
    seq += [(x, 1) for x in range(l - 1, 0, -1)]
    seq += [(1, y) for y in range(2, m - 1)]
    low = 1 if m % 2 == 0 else 3
    for y in range(m - 2, low, -1):
        xs = range(2, l - 1) if (m - y) % 2 == 0 else range(l - 2, 1, -1)
        seq += [(x, y) for x in xs]
    if m % 2:
        # teeth over rows 2 and 3, entered from (2, 4) going down
        for x in range(2, l - 1):
            seq += [(x, 3), (x, 2)] if x % 2 == 0 else [(x, 2), (x, 3)]
    seq += [(l - 1, y) for y in range(2, m)]
    seq += [(x, m - 1) for x in range(l - 2, 1, -1)]
    return seq


def serpentine_cycle(l, m, orientation="cw"):
    """The serpentine Hamiltonian cycle c_{l,m} on [1,l] x [1,m] (or its
    edge reversal d_{l,m} for orientation="ccw")."""
    if orientation not in ("cw", "ccw"):
        raise ValueError(f"orientation must be cw or ccw, got {orientation!r}")
    if l < 6 or m < 6:
        raise ValueError(f"serpentine needs l,m >= 6, got {l}x{m}")
    if (l * m) % 2:
        raise ValueError(f"serpentine needs l*m even, got {l}x{m}")
    seq = _serp_seq(l, m)
    step = {}
    for g, h in zip(seq, seq[1:] + seq[:1]):
        step[g] = sub(h, g)
    cyc = DirectedPath(step)
    return cyc.reverse() if orientation == "ccw" else cyc


def serpentine_problems(path, l, m, orientation="cw"):
    """Check the two serpentine features literally on [1,l] x [1,m]:

    (1) the cycle contains every boundary-ring edge, oriented clockwise
        (counterclockwise for orientation="ccw"), except exactly one;
    (2) at l-inf distance greater than 4 from the boundary every edge is
        +eps^1 at even distance from the top edge and -eps^1 at odd
        distance (signs swapped for "ccw").
    """
    out = []
    want_cells = set(Box((1, 1), (l + 1, m + 1)).cells())
    if set(path.step) != want_cells:
        return [f"support is not the {l}x{m} box"]
    ring = []
    ring += [((x, m), (1, 0)) for x in range(1, l)]
    ring += [((l, y), (0, -1)) for y in range(m, 1, -1)]
    ring += [((x, 1), (-1, 0)) for x in range(l, 1, -1)]
    ring += [((1, y), (0, 1)) for y in range(1, m)]
    missing = []
    for g, w in ring:
        if orientation == "cw":
            present = path.step.get(g) == w
        else:
            present = path.step.get(add(g, w)) == _neg(w)
        if not present:
            missing.append((g, w))
    if len(missing) != 1:
        out.append(f"{len(missing)} boundary edges missing or misoriented "
                   f"(expected exactly 1): {missing[:3]}")
    for (x, y), s in sorted(path.step.items()):
        if min(x - 1, l - x, y - 1, m - y) > 4:
            want = (1, 0) if (m - y) % 2 == 0 else (-1, 0)
            if orientation == "ccw":
                want = _neg(want)
            if s != want:
                out.append(f"interior cell ({x}, {y}) steps {s}, "
                           f"expected {want}")
                break
    return out


def join_cycles(c1, c2, bridge):
    """Merge two disjoint cycles by swapping a pair of edges.

    `bridge` = (alpha, beta, gamma, delta) with (alpha, beta) an edge of
    c1, (gamma, delta) an edge of c2, alpha adjacent to delta and beta
    adjacent to gamma; the result replaces them with (alpha, delta) and
    (gamma, beta).
    """
    alpha, beta, gamma, delta = (tuple(v) for v in bridge)
    if c1.endpoints != "cycle" or c2.endpoints != "cycle":
        raise ValueError("join_cycles needs two cycles")
    common = set(c1.step) & set(c2.step)
    if common:
        raise ValueError(f"cycle supports overlap at {sorted(common)[0]}")
    if c1.step.get(alpha) != sub(beta, alpha):
        raise ValueError(f"({alpha}, {beta}) is not an edge of the first cycle")
    if c2.step.get(gamma) != sub(delta, gamma):
        raise ValueError(f"({gamma}, {delta}) is not an edge of the second cycle")
    if sum(abs(x) for x in sub(delta, alpha)) != 1:
        raise ValueError(f"{alpha} is not adjacent to {delta}")
    if sum(abs(x) for x in sub(gamma, beta)) != 1:
        raise ValueError(f"{beta} is not adjacent to {gamma}")
    step = dict(c1.step)
    step.update(c2.step)
    step[alpha] = sub(delta, alpha)
    step[gamma] = sub(beta, gamma)
    return DirectedPath(step)


def find_bridge(c1, c2):
    """Lexicographically first bridge joining two disjoint cycles: an edge
    (alpha, beta) of c1 with an antiparallel edge of c2 one lattice step
    away. Raises when no such pair exists (parallel edges cannot bridge)."""
    d = c1.d
    units = step_vectors(d)
    for alpha in sorted(c1.step):
        w = c1.step[alpha]
        beta = add(alpha, w)
        for eta in units:
            gamma = add(beta, eta)
            if c2.step.get(gamma) == _neg(w):
                return alpha, beta, gamma, add(gamma, _neg(w))
    raise ValueError("no bridge between the cycles")


def box_cycle(box: Box, typ="even"):
    """Directed Hamiltonian cycle on a box: serpentine layers perpendicular
    to eps^1 x eps^2, clockwise on even layer vectors and counterclockwise
    on odd ones, joined along a BFS spanning tree of the layer lattice by
    swapping deep antiparallel eps^1 edges. typ="odd" reverses every edge."""
    if typ not in ("even", "odd"):
        raise ValueError(f"cycle type must be even or odd, got {typ!r}")
    d = box.d
    sides = box.sides
    if d < 2:
        raise ValueError("box cycles need d >= 2")
    if sides[0] < 6 or sides[1] < 6:
        raise ValueError(f"layer sides must be >= 6, got {sides[0]}x{sides[1]}")
    if (sides[0] * sides[1]) % 2:
        raise ValueError(f"layer area {sides[0]}x{sides[1]} must be even")
    base = serpentine_cycle(sides[0], sides[1])
    off2 = (box.lo[0] - 1, box.lo[1] - 1)
    if d == 2:
        cyc = base.translate(off2)
        return cyc.reverse() if typ == "odd" else cyc
    ccw = base.reverse()
    # horizontal-step cells, deepest first (layers of side <= 11 have no
    # cells at distance > 4, so shallower edges serve as a fallback)
    deep = sorted(((x, y) for (x, y), s in base.step.items()
                   if abs(s[0]) == 1),
                  key=lambda c: (-min(c[0] - 1, sides[0] - c[0],
                                      c[1] - 1, sides[1] - c[1]), c))
    step = {}

    def paste(gam):
        src = base if sum(gam) % 2 == 0 else ccw
        for (x, y), s in src.step.items():
            step[(x + off2[0], y + off2[1]) + gam] = s + (0,) * (d - 2)

    layers = sorted(itertools.product(
        *(range(box.lo[t], box.hi[t]) for t in range(2, d))))
    layer_set = set(layers)
    paste(layers[0])
    placed = {layers[0]}
    queue = [layers[0]]
    while queue:
        cur = queue.pop(0)
        for t in range(d - 2):
            for sgn in (1, -1):
                nb = tuple(x + (sgn if i == t else 0)
                           for i, x in enumerate(cur))
                if nb not in layer_set or nb in placed:
                    continue
                paste(nb)
                eta = (0, 0) + tuple(-sgn if i == t else 0
                                     for i in range(d - 2))
                joined = False
                for (x, y) in deep:
                    g = (x + off2[0], y + off2[1]) + nb
                    w = step[g]
                    a = add(add(g, w), eta)
                    if step.get(a) == _neg(w):
                        step[a] = _neg(eta)
                        step[g] = eta
                        joined = True
                        break
                if not joined:
                    raise ValueError(f"no join between layers {nb} and {cur}")
                placed.add(nb)
                queue.append(nb)
    if len(placed) != len(layers):
        raise ValueError("layer lattice of the box is disconnected")
    cyc = DirectedPath(step)
    return cyc.reverse() if typ == "odd" else cyc


@lru_cache(maxsize=None)
def _box_codes(sides, typ, par):
    """Direction-code array of a box cycle, cacheable by shape, type and
    the parity of the layer coordinates of the box's low corner."""
    d = len(sides)
    lo = (0, 0) if d == 2 else (0, 0, par) + (0,) * (d - 3)
    cyc = box_cycle(Box(lo, add(lo, sides)), typ)
    codes = {v: i for i, v in enumerate(step_vectors(d))}
    arr = np.full(sides, -1, dtype=np.int8)
    for g, s in cyc.step.items():
        arr[sub(g, lo)] = codes[s]
    return arr


@dataclass(frozen=True)
class HamBoundarySpec:
    """Entry/exit prescription for a Hamiltonian path on a grid union: the
    designated boundary k-box cprime, the start cell alpha on its +eps^1
    face at offset k-17 from the face top, and the end alpha + eps^2."""

    cprime: Box
    start: tuple
    end: tuple

    def to_json(self):
        return {"cprime": self.cprime.to_json(),
                "start": list(self.start), "end": list(self.end)}

    @staticmethod
    def from_json(obj):
        return HamBoundarySpec(Box.from_json(obj["cprime"]),
                               tuple(obj["start"]), tuple(obj["end"]))


def build_boundary_spec(C: GridUnion, k):
    """Canonical boundary spec: the lexicographically least k-box of C's
    k-grid whose +eps^1 face lies on the boundary of C; the start cell
    sits 16 cells below the top of that face, with the layer coordinates
    adjusted to even parity so the clockwise layer contains the exit edge."""
    d = C.d
    if k % 2 or k < 18:
        raise ValueError(f"boundary spec needs k even and >= 18, got {k}")
    if C.k % k:
        raise ValueError(f"component scale {C.k} is not a multiple of k={k}")
    corners = set()
    for b in C.cell_boxes():
        for c in itertools.product(*(range(lo, hi, k)
                                     for lo, hi in zip(b.lo, b.hi))):
            corners.add(c)
    free = sorted(t for t in corners
                  if (t[0] + k,) + t[1:] not in corners)
    if not free:
        raise ValueError("grid union has no +eps^1 boundary k-box")
    t = free[0]
    alpha = [t[0] + k - 1, t[1] + k - 17] + list(t[2:])
    if d > 2 and sum(alpha[2:]) % 2:
        alpha[2] += 1
    alpha = tuple(alpha)
    return HamBoundarySpec(Box(t, tuple(x + k for x in t)),
                           alpha, add(alpha, unit_vector(d, 2)))


class _Canvas:
    """Dense direction-code scratchpad, windowed or torus-wrapped."""

    def __init__(self, d, lo, shape, torus=None):
        self.codes = np.full(shape, -1, dtype=np.int8)
        self.lo = lo
        self.torus = torus
        self.vecs = step_vectors(d)
        self.code_of = {v: i for i, v in enumerate(self.vecs)}

    def normalize(self, cell):
        if self.torus is not None:
            return tuple(x % self.torus for x in cell)
        return tuple(cell)

    def _idx(self, cell):
        if self.torus is not None:
            return tuple(x % self.torus for x in cell)
        idx = sub(cell, self.lo)
        if any(x < 0 or x >= s for x, s in zip(idx, self.codes.shape)):
            return None
        return idx

    def get(self, cell):
        idx = self._idx(cell)
        if idx is None:
            return None
        c = self.codes[idx]
        return None if c < 0 else self.vecs[c]

    def set(self, cell, v):
        idx = self._idx(cell)
        if idx is None:
            raise ValueError(f"cell {cell} outside the canvas")
        self.codes[idx] = -1 if v is None else self.code_of[v]

    def paste(self, box, arr):
        idx = self._idx(box.lo)
        sl = tuple(slice(o, o + s) for o, s in zip(idx, arr.shape))
        self.codes[sl] = arr


def _touches(a, b, torus):
    return (a - b) % torus == 0 if torus is not None else a == b


def _bridge_candidates(canvas, box, arr, nbr, reserved):
    """All bridge candidates (g, w, a, eta) joining the freshly cut cycle
    `arr` on `box` to the placed structure across its faces towards `nbr`:
    the edge (g, g+w) of the new cycle is antiparallel to the placed edge
    at a = g + w + eta one step away."""
    d = box.d
    out = []
    for ax in range(d):
        sigs = []
        if _touches(box.lo[ax], nbr.hi[ax], canvas.torus):
            sigs.append((-1, 0))
        if _touches(nbr.lo[ax], box.hi[ax], canvas.torus):
            sigs.append((1, box.sides[ax] - 1))
        for sign, layer in sigs:
            eta = unit_vector(d, ax + 1, sign)
            spans = [range(s) for s in arr.shape]
            spans[ax] = [layer]
            for rel in itertools.product(*spans):
                w = canvas.vecs[arr[rel]]
                g = add(box.lo, rel)
                a = add(add(g, w), eta)
                if (canvas.normalize(g) in reserved
                        or canvas.normalize(a) in reserved):
                    continue
                if canvas.get(a) == _neg(w):
                    out.append((g, w, a, eta))
    return out


def _slab_candidates(slab_sides, d):
    """Hamiltonian cycles on the low eps^1 slab, in slab-relative cells
    (first coordinate 0), rotated into the eps^2 x eps^3 plane.

    For d = 3 the family spans both serpentine axis alignments and
    two-band splits with both split parities: together these realize
    every combination of the step direction at the exit cell and the
    row phase at the interface, so a bridge-compatible slab always
    exists (the split plays the role of a local perturbation of the
    plain serpentine).
    """
    if d > 3:
        for t in ("even", "odd"):
            cyc = box_cycle(Box((1,) * (d - 1),
                                tuple(s + 1 for s in slab_sides)), t)
            yield {(0,) + tuple(x - 1 for x in g): (0,) + s
                   for g, s in cyc.step.items()}
        return
    ky, kz = slab_sides

    def rows(cyc, zoff=0):
        return {(0, g[0] - 1, g[1] - 1 + zoff): (0,) + s
                for g, s in cyc.step.items()}

    def cols(cyc):
        return {(0, g[1] - 1, g[0] - 1): (0, s[1], s[0])
                for g, s in cyc.step.items()}

    for o in ("cw", "ccw"):
        yield rows(serpentine_cycle(ky, kz, o))
    for o in ("cw", "ccw"):
        yield cols(serpentine_cycle(kz, ky, o))
    for h in (6, 7):
        for o in ("cw", "ccw"):
            low = DirectedPath(rows(serpentine_cycle(ky, h, o)))
            high = DirectedPath(rows(serpentine_cycle(ky, kz - h, o), h))
            yield join_cycles(low, high, find_bridge(low, high)).step


def _repair_codes(box, typ, a, reserved):
    """Direction codes for an exit tile whose required +eps^2 step at `a`
    is incompatible with the ambient orientation field.

    The tile is split into its low eps^1 slab and the remainder. The
    remainder carries the ambient-type cycle, so every join the tile
    offers to its neighbours survives; the slab carries a cycle rotated
    into the eps^2 x eps^3 plane that provides the +eps^2 step at `a`,
    and the two cycles are merged by swapping a pair of antiparallel
    edges across the interface.
    """
    d = box.d
    if d < 3:
        raise ValueError("orientation repair only arises for d >= 3")
    a_rel = sub(a, box.lo)
    if a_rel[0] != 0:
        raise ValueError(f"exit cell {a} is not on its tile's low "
                         "eps^1 face")
    par = sum(box.lo[2:]) % 2
    sub_sides = (box.sides[0] - 1,) + box.sides[1:]
    interior = _box_codes(sub_sides, "even" if typ == 0 else "odd", par)
    vecs = step_vectors(d)
    codes = {v: i for i, v in enumerate(vecs)}
    e1 = unit_vector(d, 1)
    e2 = unit_vector(d, 2)
    for slab in _slab_candidates(box.sides[1:], d):
        if slab.get(a_rel) != e2:
            continue
        for g in sorted(slab):
            if g == a_rel:
                continue
            w = slab[g]
            gam = add(add(g, w), e1)
            if vecs[interior[sub(gam, e1)]] != _neg(w):
                continue
            if add(box.lo, g) in reserved or add(box.lo, gam) in reserved:
                continue
            arr = np.full(box.sides, -1, dtype=np.int8)
            arr[1:] = interior
            for c, s in slab.items():
                arr[c] = codes[s]
            arr[g] = codes[e1]
            arr[gam] = codes[_neg(e1)]
            return arr
    raise ValueError(f"no slab cycle provides the exit edge at {a} and "
                     "joins the interior cycle")


def _assemble(canvas, tiling, rng, reserved=frozenset(), root_type=0,
              repairs=None):
    """Place a cycle on every tile of a hamiltonian-grade tiling and merge
    them, in BFS order over the almost-face-to-face graph, into one cycle.

    `root_type` fixes the orientation type of the first tile and thereby
    of the whole assembly: a bridge exists between adjacent tiles exactly
    when they share a type, so the field is globally coherent. `repairs`
    maps tile indices to exit cells whose required edge direction opposes
    that field; those tiles get a locally rebuilt cycle and are recorded
    in the returned `repaired` list. Bridges never modify cells in
    `reserved` (given in canvas-normalized coordinates).
    """
    repairs = repairs or {}
    boxes = tiling.tiles
    adj = aftf_graph(tiling)
    root = min(range(len(boxes)), key=lambda i: boxes[i].lo)
    order = [root]
    seen = {root}
    qi = 0
    while qi < len(order):
        for j in sorted(adj[order[qi]]):
            if j not in seen:
                seen.add(j)
                order.append(j)
        qi += 1
    if len(order) != len(boxes):
        raise ValueError("almost-face-to-face graph is disconnected")
    d = tiling.d
    types = {}
    repaired = []
    for idx in order:
        box = boxes[idx]
        par = 0 if d == 2 else sum(box.lo[2:]) % 2
        if idx in repairs:
            variants = {root_type: _repair_codes(box, root_type,
                                                 repairs[idx], reserved)}
            repaired.append(box.lo)
        else:
            variants = {t: _box_codes(box.sides,
                                      "even" if t == 0 else "odd", par)
                        for t in (0, 1)}
        if idx == root:
            if root_type not in variants:
                raise ValueError("root tile cannot carry the required "
                                 "orientation type")
            canvas.paste(box, variants[root_type])
            types[idx] = root_type
            continue
        feas = {}
        for t, arr in variants.items():
            for j in sorted(adj[idx]):
                if j not in types:
                    continue
                cands = _bridge_candidates(canvas, box, arr, boxes[j],
                                           reserved)
                if cands:
                    feas[t] = (arr, cands)
                    break
        if not feas:
            raise ValueError(f"no bridge joins tile at {box.lo} "
                             "to the assembly")
        opts = sorted(feas)
        t = opts[rng.randrange(len(opts))] if len(opts) > 1 else opts[0]
        arr, cands = feas[t]
        g, w, a, eta = cands[rng.randrange(len(cands))]
        canvas.paste(box, arr)
        canvas.set(a, _neg(eta))
        canvas.set(g, eta)
        types[idx] = t
    return types, repaired


def extend_hamiltonian(C: GridUnion, inner, k, N=100, collar_margin=None,
                       seed=0, min_k=32, bspec=None):
    """Extend directed Hamiltonian paths on inner grid unions to one on C.

    `inner` is a list of (GridUnion, DirectedPath, HamBoundarySpec)
    triples; each path must satisfy its spec. The complement is tiled at
    hamiltonian grade, a cycle is assembled over it, the inner paths are
    spliced in through their exit edges, and one edge is opened along the
    +eps^1 boundary of C so the result meets C's own boundary spec
    (returned in meta["spec"] together with orientation bookkeeping).
    """
    d = C.d
    if min_k < 18:
        raise ValueError("min_k below the construction floor of 18")
    if k % 2 or k < min_k:
        raise ValueError(f"k must be even and >= {min_k}, got {k}")
    if bspec is None:
        bspec = build_boundary_spec(C, k)
    e1 = unit_vector(d, 1)
    e2 = unit_vector(d, 2)
    reserved = {bspec.end}
    exits = []
    gus = []
    for gu, path, isp in inner:
        probs = path.problems()
        if probs:
            raise ValueError(f"inner path invalid: {probs[0]}")
        if (path.endpoints == "cycle" or path.endpoints[0] != isp.start
                or path.endpoints[1] != isp.end):
            raise ValueError("inner path endpoints do not match its "
                             "boundary spec")
        if isp.end != add(isp.start, e2):
            raise ValueError("boundary spec must end at start + eps^2")
        if path.support() != gu.region().cells:
            raise ValueError("inner path does not cover its component")
        a = add(isp.start, e1)
        reserved.add(a)
        exits.append((path, isp, a))
        gus.append(gu)
    tiling = tile_complement(C, gus, k, N, hamiltonian_grade=True,
                             collar_margin=collar_margin, ham_threshold=k)
    boxes = tiling.tiles
    cell_boxes = list(C.cell_boxes())
    lo = tuple(min(b.lo[a] for b in cell_boxes) for a in range(d))
    hi = tuple(max(b.hi[a] for b in cell_boxes) for a in range(d))
    canvas = _Canvas(d, lo, sub(hi, lo))
    cpi = next((i for i, b in enumerate(boxes) if b == bspec.cprime), None)
    if cpi is None:
        raise ValueError("designated boundary box is not a tile of the "
                         "complement")
    tau = 0 if d == 2 else sum(bspec.start[2:]) % 2
    repairs = {}
    for path, isp, a in exits:
        ridx = next((i for i, b in enumerate(boxes) if b.contains(a)), None)
        if ridx is None:
            raise ValueError(f"no tile contains the inner exit cell {a}")
        want = 0 if d == 2 else sum(a[2:]) % 2
        if want == tau:
            continue
        if ridx == cpi:
            raise ValueError("conflicting orientation requirements on the "
                             "designated boundary box")
        if ridx in repairs:
            raise ValueError(f"two exits need repairs in the tile at "
                             f"{boxes[ridx].lo}")
        repairs[ridx] = a
    rng = random.Random(seed)
    types, repaired = _assemble(canvas, tiling, rng, reserved,
                                root_type=tau, repairs=repairs)
    for path, isp, a in exits:
        if canvas.get(a) != e2:
            raise ValueError(f"exit tile lost its vertical edge at {a}")
        canvas.set(a, _neg(e1))
        for g, s in path.step.items():
            canvas.set(g, s)
        canvas.set(isp.end, e1)
    if canvas.get(bspec.end) != _neg(e2):
        raise ValueError(f"boundary box carries no exit edge at {bspec.end}")
    canvas.set(bspec.end, None)
    step = {}
    for cell in C.region():
        v = canvas.get(cell)
        if v is None:
            if cell != bspec.end:
                raise ValueError(f"cell {cell} left uncovered")
            continue
        step[cell] = v
    return DirectedPath(step, (bspec.start, bspec.end),
                        meta={"spec": bspec, "repaired": repaired,
                              "tiles": len(boxes)})


class HamCertificate:
    """Dense direction codes of a directed Hamiltonian cycle on the torus."""

    def __init__(self, L, codes, meta=None):
        self.L = L
        self.codes = np.asarray(codes, dtype=np.int8)
        self.meta = meta or {}

    @property
    def d(self):
        return self.codes.ndim

    def to_json(self):
        return {"family": "ham", "L": self.L, "d": self.d,
                "endpoints": "cycle",
                "step": [int(x) for x in self.codes.ravel()],
                "meta": {k: self.meta[k] for k in sorted(self.meta)}}

    @staticmethod
    def from_json(obj):
        L, d = obj["L"], obj["d"]
        codes = np.array(obj["step"], dtype=np.int8).reshape((L,) * d)
        return HamCertificate(L, codes, dict(obj.get("meta", {})))


def run_ham_pipeline(toast, seed=0):
    """Single directed Hamiltonian cycle covering the whole torus.

    Runs on root-only toasts: the torus is tiled by exact k-boxes at
    hamiltonian grade and assembled into one cycle whose bridge positions
    (and, where feasible, tile orientations) are drawn from a seeded rng,
    which breaks every candidate period. The boundary opening required on
    finite windows is kept closed here, so the result is a cycle; path
    semantics are recovered on any lift.
    """
    params = toast.params
    d, L = params.d, params.L
    if L % 2:
        raise ValueError(f"torus side {L} is odd: the cycle cannot close")
    if len(toast.levels) != 1:
        raise ValueError("the Hamiltonian pipeline needs a root-only toast")
    k, N = params.k, params.N
    if k % 2 or k < 18:
        raise ValueError(f"toast grid k must be even and >= 18, got {k}")
    root = toast.levels[-1][0]
    tiling = tile_complement(root.grid, [], k, N, hamiltonian_grade=True,
                             torus=L, ham_threshold=k)
    canvas = _Canvas(d, (0,) * d, (L,) * d, torus=L)
    rng = random.Random(seed)
    types, repaired = _assemble(canvas, tiling, rng)
    if (canvas.codes < 0).any():
        bad = tuple(int(x) for x in np.argwhere(canvas.codes < 0)[0])
        raise ValueError(f"assembly left cell {bad} uncovered")
    betas = beta_sequence(toast, seed=seed)
    meta = {"seed": seed, "k": k, "N": N,
            "betas": [list(b) for b in betas],
            "repaired": [list(c) for c in repaired]}
    return HamCertificate(L, canvas.codes, meta)
