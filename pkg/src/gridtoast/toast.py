"""Hierarchical almost-cube decompositions ("toast") of a finite torus.

A toast is a leveled family of components.  Each component is a coconnected
M-grid union sandwiched between concentric cubes of sides r_i and
(1+delta)r_i; components of different levels are either nested or have
disjoint n-collars; a final root level consisting of the whole torus closes
the hierarchy, so every cell belongs to some level.

Construction per level: paint seed cubes around a maximal discrete net,
absorb nearby lower-level components together with a safety ball of radius
2 r_lower, snap each connected component to the M-grid anchored at its
least cell, and fill bounded complement holes.  Relaxed parameters are
allowed; validity is always judged by the output invariants (check_toast),
never assumed from the hypotheses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .geometry import Box, GridUnion, add, norm_inf


def _fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)):
        return Fraction(int(x[0]), int(x[1]))
    return Fraction(x)


@dataclass(frozen=True)
class ToastParams:
    """Parameters of a toast build; raises on inconsistent values."""

    d: int
    L: int
    delta: Fraction
    k: int
    N: int
    n: int
    r_seq: tuple
    seed: int
    strict: bool = False

    def __post_init__(self):
        object.__setattr__(self, "delta", _fraction(self.delta))
        object.__setattr__(self, "r_seq", tuple(int(r) for r in self.r_seq))
        probs = self.problems()
        if probs:
            raise ValueError("bad toast parameters: " + "; ".join(probs))

    @property
    def M(self):
        return self.N * self.k

    def problems(self):
        p = []
        if self.d < 1:
            p.append("d must be positive")
        if not (0 < self.delta < 1):
            p.append("delta must lie in (0,1)")
        if self.k < 1 or self.N < 1:
            p.append("k and N must be positive")
        if self.n < 1:
            p.append("n must be positive")
        if self.r_seq and self.r_seq[0] < 1:
            p.append("r_seq entries must be positive")
        if any(a >= b for a, b in zip(self.r_seq, self.r_seq[1:])):
            p.append("r_seq must be strictly increasing")
        if self.L < 1 or self.L % self.M:
            p.append(f"L must be a positive multiple of M={self.M} "
                     "(the root level is an aligned M-grid union)")
        if self.strict:
            for i, r in enumerate(self.r_seq):
                s = 24 * sum(self.r_seq[:i])
                if not s < self.delta * r:
                    p.append(f"strict: 24*sum(r_j, j<{i + 1}) = {s} "
                             f">= delta*r_{i + 1} = {self.delta * r}")
            if self.r_seq:
                bound = 2 * self.n + Fraction(12 * self.M) / self.delta
                if not self.r_seq[0] > bound:
                    p.append(f"strict: r_1 = {self.r_seq[0]} <= "
                             f"2n + 12M/delta = {bound}")
        elif self.r_seq:
            need = 4 * (1 + self.delta) * max(self.r_seq)
            if not self.L > need:
                p.append(f"L = {self.L} <= 4(1+delta)max(r) = {need}")
        return p

    def to_json(self):
        return {"d": self.d, "L": self.L, "delta": str(self.delta),
                "k": self.k, "N": self.N, "n": self.n,
                "r_seq": list(self.r_seq), "seed": self.seed,
                "strict": self.strict}

    @staticmethod
    def from_json(obj):
        return ToastParams(obj["d"], obj["L"], _fraction(obj["delta"]),
                           obj["k"], obj["N"], obj["n"],
                           tuple(obj["r_seq"]), obj["seed"],
                           obj.get("strict", False))


class Component:
    """One toast component: an M-grid union on a lift of the torus.

    Non-root components are stored in lifted coordinates (their realized
    diameter is below L/2, so the lift is unique up to L-translation);
    the root component is the whole torus.
    """

    __slots__ = ("level", "r", "grid", "center", "is_root", "_bbox")

    def __init__(self, level, r, grid, center, is_root=False):
        self.level = level
        self.r = r
        self.grid = grid
        self.center = tuple(center)
        self.is_root = is_root
        self._bbox = None

    @property
    def d(self):
        return len(self.grid.offset)

    def bbox(self):
        """Realized bounding box in lifted coordinates."""
        if self._bbox is None:
            M = self.grid.k
            lo = [None] * self.d
            hi = [None] * self.d
            for c in self.grid.cells:
                for i, x in enumerate(c):
                    lo[i] = x if lo[i] is None else min(lo[i], x)
                    hi[i] = x if hi[i] is None else max(hi[i], x)
            base = add(self.grid.offset, (1,) * self.d)
            self._bbox = Box(add(tuple(lo), base),
                             add(tuple(x + M for x in hi), base))
        return self._bbox

    def volume(self):
        return len(self.grid.cells) * self.grid.k ** self.d

    def paint(self, mask, window_lo, L):
        """OR the realized region into a window (torus wraparound aware)."""
        if self.is_root:
            mask[...] = True
            return
        for b in self.grid.cell_boxes():
            _paint_box_torus(mask, b.lo, b.sides, window_lo, L)

    def to_json(self):
        return {"level": self.level, "r": self.r,
                "offset": list(self.grid.offset),
                "cells": [list(c) for c in sorted(self.grid.cells)],
                "center": list(self.center), "root": self.is_root}

    @staticmethod
    def from_json(obj, M):
        grid = GridUnion(M, tuple(obj["offset"]),
                         frozenset(tuple(c) for c in obj["cells"]))
        return Component(obj["level"], obj["r"], grid, tuple(obj["center"]),
                         obj.get("root", False))


class Toast:
    """Leveled family of components; the last level is the torus root."""

    def __init__(self, params, levels):
        self.params = params
        self.levels = levels

    def all_components(self):
        for li, lev in enumerate(self.levels):
            for ci, c in enumerate(lev):
                yield (li, ci), c

    def component_id(self, comp):
        for cid, c in self.all_components():
            if c is comp:
                return cid
        raise ValueError("component not part of this toast")

    def to_json(self):
        rs = list(self.params.r_seq) + [self.params.L]
        return {"params": self.params.to_json(),
                "levels": [{"r": rs[li],
                            "components": [c.to_json() for c in lev]}
                           for li, lev in enumerate(self.levels)]}

    @staticmethod
    def from_json(obj):
        params = ToastParams.from_json(obj["params"])
        levels = [[Component.from_json(c, params.M) for c in lev["components"]]
                  for lev in obj["levels"]]
        return Toast(params, levels)


@dataclass(frozen=True)
class PeriodBreaker:
    """A side-k cube E inside a component whose beta-translate also sits
    deep inside it, with all collar conditions verified."""

    component: tuple  # (level, index)
    cube: Box
    beta: tuple

    def to_json(self):
        return {"component": list(self.component), "cube": self.cube.to_json(),
                "beta": list(self.beta)}

    @staticmethod
    def from_json(obj):
        return PeriodBreaker(tuple(obj["component"]),
                             Box.from_json(obj["cube"]), tuple(obj["beta"]))


# -- torus raster helpers ---------------------------------------------------

def _paint_cube(mask, lo, side):
    L = mask.shape[0]
    idx = [np.arange(l, l + side) % L for l in lo]
    mask[np.ix_(*idx)] = True


def _paint_box_torus(mask, lo, sides, window_lo, L, value=True):
    """Paint a lifted box into a window whose origin is window_lo; both are
    interpreted modulo L. Window sides must not exceed L."""
    segs = []
    for a, s, w, size in zip(lo, sides, window_lo, mask.shape):
        rel = (a - w) % L
        pieces = []
        if rel < size:
            pieces.append((rel, rel + min(s, size - rel)))
        wrap = rel + s - L
        if wrap > 0:
            pieces.append((0, min(wrap, size)))
        if not pieces:
            return
        segs.append(pieces)
    for combo in itertools.product(*segs):
        mask[tuple(slice(a, b) for a, b in combo)] = value


def _torus_dilate(mask, m):
    """Chebyshev dilation by m with wraparound (separable, doubling)."""
    out = mask
    for ax in range(mask.ndim):
        cur = out.copy()
        total = 0
        while total < m:
            s = min(max(total, 1), m - total)
            cur |= np.roll(cur, s, axis=ax) | np.roll(cur, -s, axis=ax)
            total += s
        out = cur
    return out


def _torus_label(mask):
    """Connected components with wraparound, via plain labeling plus a
    union-find merge across opposite faces."""
    labels, count = kernels.label_components(np.ascontiguousarray(mask))
    if count <= 1:
        return labels, count
    parent = list(range(count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ax in range(mask.ndim):
        lo = np.take(labels, 0, axis=ax).ravel()
        hi = np.take(labels, -1, axis=ax).ravel()
        ok = (lo >= 0) & (hi >= 0)
        for a, b in zip(lo[ok], hi[ok]):
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    remap = np.full(count, -1, dtype=labels.dtype)
    nxt = 0
    for c in range(count):
        root = find(c)
        if remap[root] < 0:
            remap[root] = nxt
            nxt += 1
        remap[c] = remap[root]
    out = labels.copy()
    out[mask] = remap[labels[mask]]
    return out, nxt


def _shift_mask(mask, vec, torus):
    """Translate True cells by vec (zero fill off-torus, wrap on-torus)."""
    if torus:
        return np.roll(mask, vec, axis=tuple(range(mask.ndim)))
    out = np.zeros_like(mask)
    src, dst = [], []
    for s, size in zip(vec, mask.shape):
        if abs(s) >= size:
            return out
        if s >= 0:
            src.append(slice(0, size - s))
            dst.append(slice(s, size))
        else:
            src.append(slice(-s, size))
            dst.append(slice(0, size + s))
    out[tuple(dst)] = mask[tuple(src)]
    return out


def _dilate(mask, m, torus):
    return _torus_dilate(mask, m) if torus else kernels.dilate_linf(mask, m)


# -- net --------------------------------------------------------------------

def maximal_discrete_net(L, d, r, seed):
    """Greedy maximal 6r-discrete subset of the torus (Z/L)^d.

    Points are pairwise at torus Chebyshev distance >= 6r and no further
    point can be added. Deterministic: cells are visited in a seeded random
    order and accepted whenever far enough from all earlier points.
    """
    if 6 * r >= L:
        raise ValueError(f"6r = {6 * r} must be smaller than L = {L}")
    rng = np.random.default_rng(seed)
    total = L ** d
    perm = rng.permutation(total)
    blocked = np.zeros((L,) * d, dtype=bool)
    flat = blocked.reshape(-1)
    pts = []
    pos = 0
    chunk = 1 << 16
    m = 6 * r - 1  # cells within distance < 6r of a point are blocked
    while pos < total:
        block = perm[pos:pos + chunk]
        open_ = ~flat[block]
        j = int(np.argmax(open_))
        if not open_[j]:
            pos += len(block)
            continue
        pos += j + 1
        p = tuple(int(x) for x in np.unravel_index(int(block[j]), blocked.shape))
        pts.append(p)
        idx = [np.arange(x - m, x + m + 1) % L for x in p]
        blocked[np.ix_(*idx)] = True
    return sorted(pts)


# -- construction -----------------------------------------------------------

def _lift_cells(cells, L):
    """Lift the torus cells of one connected component to Z^d by cutting
    each axis at an unoccupied coordinate."""
    out = cells.copy()
    for ax in range(cells.shape[1]):
        occupied = np.zeros(L, dtype=bool)
        occupied[cells[:, ax]] = True
        if occupied.all():
            raise ValueError(f"component wraps the torus along axis {ax + 1}")
        g = int(np.argmax(~occupied))
        out[:, ax] = (cells[:, ax] - g) % L + g
        if out[:, ax].max() - out[:, ax].min() + 1 > L // 2:
            raise ValueError(
                f"component diameter exceeds L/2 along axis {ax + 1}; "
                "no unique lift (parameters too tight)")
    return out


def _snap_and_fill(cells, M):
    """Snap lifted component cells to the M-grid anchored at the least cell
    and fill bounded complement holes (at M-cell resolution, which agrees
    with cell resolution for aligned grid unions)."""
    order = np.lexsort(cells.T[::-1])
    alpha = cells[order[0]]
    q = (cells - alpha) // M
    qlo = q.min(axis=0)
    qhi = q.max(axis=0)
    occ = np.zeros(tuple(int(x) for x in (qhi - qlo + 3)), dtype=bool)
    occ[tuple((q - qlo + 1).T)] = True
    comp_labels, cnt = kernels.label_components(occ ^ True)
    if cnt > 1:
        border = set()
        for ax in range(occ.ndim):
            border.update(np.unique(np.take(comp_labels, 0, axis=ax)).tolist())
            border.update(np.unique(np.take(comp_labels, -1, axis=ax)).tolist())
        border.discard(-1)
        hole = (~occ) & ~np.isin(comp_labels, sorted(border))
        occ |= hole
    cellset = frozenset(
        tuple(int(v) * M for v in idx + qlo - 1) for idx in np.argwhere(occ))
    offset = tuple(int(a) - 1 for a in alpha)
    return GridUnion(M, offset, cellset)


def _component_cells_by_label(mask, labels, count):
    cells = np.argwhere(mask)
    labs = labels[mask]
    order = np.argsort(labs, kind="stable")
    cells = cells[order]
    labs = labs[order]
    bounds = np.searchsorted(labs, np.arange(count + 1))
    return [cells[bounds[c]:bounds[c + 1]] for c in range(count)]


def build_toast(params: ToastParams) -> Toast:
    """Build a toast and verify its invariants; raises (naming the failed
    invariant) rather than returning an invalid decomposition."""
    L, d, M = params.L, params.d, params.M
    shape = (L,) * d
    levels = []
    for i, r in enumerate(params.r_seq):
        ss = np.random.SeedSequence([params.seed, i])
        if 6 * r < L:
            net = maximal_discrete_net(L, d, r, ss)
        else:
            # the torus is too small for a nontrivial net: one seeded point
            rng = np.random.default_rng(ss)
            net = [tuple(int(x) for x in rng.integers(0, L, size=d))]
        mask = np.zeros(shape, dtype=bool)
        for p in net:
            _paint_cube(mask, tuple(x - r // 2 for x in p), r)
        # absorb lower-level components (highest level first, to a fixpoint)
        # together with a padding ball; strict mode uses the full 2 r_lower
        # radius, relaxed mode the smallest radius that still guarantees
        # collar separation, so almost-cube growth stays within delta*r
        for lev in range(i - 1, -1, -1):
            rl = params.r_seq[lev]
            reach = 2 * rl if params.strict else \
                max(2 * params.n + M, 3 * params.k + M)
            pending = list(levels[lev])
            while pending:
                dil = _torus_dilate(mask, reach)
                absorbed = np.zeros(shape, dtype=bool)
                keep = []
                for comp in pending:
                    near = any(
                        dil[np.ix_(*[np.arange(b.lo[a], b.hi[a]) % L
                                     for a in range(d)])].any()
                        for b in comp.grid.cell_boxes())
                    if near:
                        comp.paint(absorbed, (0,) * d, L)
                    else:
                        keep.append(comp)
                if len(keep) == len(pending):
                    break
                mask |= _torus_dilate(absorbed, reach)
                pending = keep
        labels, cnt = _torus_label(mask)
        point_label = {p: int(labels[p]) for p in net}
        comps = []
        for c, cells in enumerate(_component_cells_by_label(mask, labels, cnt)):
            lifted = _lift_cells(cells, L)
            grid = _snap_and_fill(lifted, M)
            centers = sorted(p for p, lab in point_label.items() if lab == c)
            if not centers:
                raise ValueError("component without a net point (absorption "
                                 "ball detached; parameters too tight)")
            comps.append(Component(i, r, grid, centers[0]))
        comps.sort(key=lambda comp: (tuple(x % L for x in comp.bbox().lo),
                                     comp.bbox().lo))
        levels.append(comps)
    root_cells = frozenset(itertools.product(range(0, L, M), repeat=d))
    root = Component(len(params.r_seq), L,
                     GridUnion(M, (-1,) * d, root_cells), (0,) * d,
                     is_root=True)
    levels.append([root])
    toast = Toast(params, levels)
    probs = check_toast(toast)
    if probs:
        raise ValueError("toast invariants violated: " + "; ".join(probs[:5])
                         + (f"; ... {len(probs) - 5} more" if len(probs) > 5
                            else ""))
    return toast


# -- invariant checker ------------------------------------------------------

def _occupancy(comp):
    """M-cell occupancy array of a component with a 1-cell margin."""
    M = comp.grid.k
    cells = np.array(sorted(comp.grid.cells)) // M
    qlo = cells.min(axis=0)
    occ = np.zeros(tuple(int(x) for x in (cells.max(axis=0) - qlo + 3)),
                   dtype=bool)
    occ[tuple((cells - qlo + 1).T)] = True
    return occ


def _axis_dist(lo1, hi1, lo2, hi2, L):
    """Torus distance between half-open intervals (0 when they overlap)."""
    if ((lo2 - lo1) % L) < (hi1 - lo1) or ((lo1 - lo2) % L) < (hi2 - lo2):
        return 0
    return min((lo2 - (hi1 - 1)) % L, (lo1 - (hi2 - 1)) % L)


def _bbox_dist(b1, b2, L):
    return max(_axis_dist(l1 % L, l1 % L + (h1 - l1), l2 % L,
                          l2 % L + (h2 - l2), L)
               for l1, h1, l2, h2 in zip(b1.lo, b1.hi, b2.lo, b2.hi))


def _pair_problem(ca, cb, ida, idb, L, n):
    """Detailed nesting / n-collar check for one pair (neither is root)."""
    lower, higher = (ca, cb) if ca.level <= cb.level else (cb, ca)
    win = lower.bbox().expand(2 * n + 1)
    ml = np.zeros(win.sides, dtype=bool)
    lower.paint(ml, win.lo, L)
    mh = np.zeros(win.sides, dtype=bool)
    higher.paint(mh, win.lo, L)
    if (ml & mh).any():
        if ca.level == cb.level:
            return f"components {ida} and {idb} at the same level overlap"
        if (ml & ~mh).any():
            return (f"components {ida} and {idb} overlap without "
                    "containment")
        return None
    if (kernels.dilate_linf(ml, n) & kernels.dilate_linf(mh, n)).any():
        return f"n-collars of disjoint components {ida} and {idb} intersect"
    return None


def check_toast(toast: Toast):
    """Verify invariants (a)-(d); returns a list of problem strings."""
    params = toast.params
    L, d, n, delta, M = params.L, params.d, params.n, params.delta, params.M
    problems = []
    rs = list(params.r_seq) + [L]
    nonroot = []
    root_ok = False
    for cid, c in toast.all_components():
        if c.is_root:
            if c.volume() == L ** d:
                root_ok = True
            else:
                problems.append(f"root component {cid} does not cover the torus")
            continue
        nonroot.append((cid, c))
        if c.level < len(rs) and c.r != rs[c.level]:
            problems.append(f"component {cid} has r={c.r}, level says {rs[c.level]}")
        # (a) connected + coconnected (M-cell resolution is exact for
        # aligned grid unions)
        occ = _occupancy(c)
        _, cnt = kernels.label_components(occ)
        if cnt != 1:
            problems.append(f"component {cid} is not connected")
        _, ccnt = kernels.label_components(~occ)
        if ccnt != 1:
            problems.append(f"component {cid} is not coconnected")
        # (b) sandwiched between concentric cubes of sides r and (1+delta)r
        bbox = c.bbox()
        mid = [(lo + hi) // 2 for lo, hi in zip(bbox.lo, bbox.hi)]
        ctr = tuple(x + L * ((m - x + L // 2) // L) for x, m in zip(c.center, mid))
        r = c.r
        lo_in = tuple(x - r // 2 for x in ctr)
        base = add(c.grid.offset, (1,) * d)
        ranges = []
        for ax in range(d):
            q0 = (lo_in[ax] - base[ax]) // M
            q1 = (lo_in[ax] + r - 1 - base[ax]) // M
            ranges.append(range(q0 * M, (q1 + 1) * M, M))
        missing = next((q for q in itertools.product(*ranges)
                        if q not in c.grid.cells), None)
        if missing is not None:
            problems.append(f"component {cid} does not contain the side-{r} "
                            f"cube at its net point (missing M-cell {missing})")
        s2 = int((1 + delta) * r)
        half = (s2 - r + 1) // 2
        for ax in range(d):
            a = max(0, lo_in[ax] - bbox.lo[ax])
            b = max(0, bbox.hi[ax] - (lo_in[ax] + r))
            if a > half or b > half or a + b > s2 - r:
                problems.append(
                    f"component {cid} exceeds the concentric (1+delta)r "
                    f"cube on axis {ax + 1} (overhangs {a},{b}, allowed "
                    f"{s2 - r})")
                break
    # (c) coverage
    if not root_ok:
        full = np.zeros((L,) * d, dtype=bool)
        for _, c in toast.all_components():
            c.paint(full, (0,) * d, L)
        if not full.all():
            problems.append("levels do not cover the torus")
    # same-level disjointness via a paint counter
    for li, lev in enumerate(toast.levels):
        if len(lev) < 2:
            continue
        count = np.zeros((L,) * d, dtype=np.uint8)
        for c in lev:
            for b in c.grid.cell_boxes():
                count[np.ix_(*[np.arange(b.lo[a], b.hi[a]) % L
                               for a in range(d)])] += 1
        if (count > 1).any():
            where = tuple(int(x) for x in np.argwhere(count > 1)[0])
            problems.append(f"level {li} components overlap at {where}")
    # (d) nesting / collar separation for all pairs (root contains all)
    for idx_a in range(len(nonroot)):
        ida, ca = nonroot[idx_a]
        for idx_b in range(idx_a + 1, len(nonroot)):
            idb, cb = nonroot[idx_b]
            if _bbox_dist(ca.bbox(), cb.bbox(), L) > 2 * n:
                continue
            prob = _pair_problem(ca, cb, ida, idb, L, n)
            if prob:
                problems.append(prob)
    return problems


# -- queries ----------------------------------------------------------------

def component_contains(outer: Component, inner: Component, L):
    """True iff inner's realized torus region is a subset of outer's."""
    if outer.is_root:
        return True
    if _bbox_dist(outer.bbox(), inner.bbox(), L) > 0:
        return False
    win = inner.bbox().expand(1)
    ml = np.zeros(win.sides, dtype=bool)
    inner.paint(ml, win.lo, L)
    mh = np.zeros(win.sides, dtype=bool)
    outer.paint(mh, win.lo, L)
    return not (ml & ~mh).any()


def inner_components(toast: Toast, component: Component):
    """All strictly-lower-level components contained in the component."""
    L = toast.params.L
    out = []
    for (li, _), c in toast.all_components():
        if li >= component.level or c is component:
            continue
        if component_contains(component, c, L):
            out.append(c)
    return out


def containment_forest(toast: Toast):
    """Map each component id to the id of the smallest-level component
    strictly containing it (the root contains everything)."""
    L = toast.params.L
    comps = list(toast.all_components())
    parent = {}
    for cid, c in comps:
        if c.is_root:
            continue
        best = None
        for pid, p in comps:
            if pid[0] <= cid[0] or (best is not None and pid[0] >= best[0]):
                continue
            if component_contains(p, c, L):
                best = pid
        parent[cid] = best
    children = {cid: [] for cid, _ in comps}
    for cid, pid in parent.items():
        children[pid].append(cid)
    for lst in children.values():
        lst.sort()
    return parent, children


def select_period_breaker(toast: Toast, component: Component, beta,
                          collar=None) -> PeriodBreaker:
    """Find a side-k cube E deep inside the component whose beta-translate
    is also deep inside it, avoiding all inner-component collars.

    Walks inside the eroded interior from a cell whose beta-translate falls
    outside it to the first cell whose translate lies inside (breadth-first,
    lexicographic tie-break). The returned cube is re-verified against the
    collar conditions; failures raise with coordinates.
    """
    params = toast.params
    k, L, n, d = params.k, params.L, params.n, params.d
    r = component.r
    beta = tuple(int(b) for b in beta)
    bnorm = norm_inf(beta)
    if not (r <= 4 * bnorm and 2 * bnorm <= r):
        raise ValueError(f"|beta| = {bnorm} outside [r/4, r/2] for r = {r}")
    w = collar
    if w is None:
        # the eroded interior must keep an axis extent above |beta| <= r/2,
        # so small components scale the 3k collar down; never below the
        # k + k//2 needed to keep the cube's k-collar inside the component
        w = min(3 * k, (r - r // 2 - 1) // 2)
        w = max(w, k + k // 2)
    if 2 * w + k > r:
        raise ValueError(f"component side {r} too small for collar width {w}")
    torus = component.is_root
    if torus:
        shape = (L,) * d
        wlo = (0,) * d
        cmask = np.ones(shape, dtype=bool)
    else:
        win = component.bbox().expand(1)
        wlo = win.lo
        shape = win.sides
        cmask = np.zeros(shape, dtype=bool)
        component.paint(cmask, wlo, L)
    inner = inner_components(toast, component)
    cbar = cmask.copy()
    if not torus:
        cbar &= ~kernels.dilate_linf(~cmask, w)
    dmask = np.zeros(shape, dtype=bool)
    for dc in inner:
        dc.paint(dmask, wlo, L)
    if inner:
        cbar &= ~_dilate(dmask, w, torus)
    if not cbar.any():
        raise ValueError("eroded component interior is empty; "
                         "collar width too large for these parameters")
    labels, cnt = (_torus_label(cbar) if torus
                   else kernels.label_components(np.ascontiguousarray(cbar)))
    fwd = _shift_mask(cbar, tuple(-b for b in beta), torus)  # x : x+beta ok
    if not (cbar & fwd).any():
        raise ValueError("no cell has its beta-translate inside the "
                         "eroded interior")
    # the walk stays inside one connected piece of the eroded interior
    # (inner collars near the component boundary can pinch off pockets);
    # take the first piece, in label order, that contains a target
    wcell = None
    for lab in range(cnt):
        sub = cbar & (labels == lab)
        targets = sub & fwd
        if not targets.any():
            continue
        outside = sub & ~fwd
        if outside.any():
            start = tuple(int(v) for v in np.argwhere(outside)[0])
            wcell = _bfs_first(sub, start, targets, torus)
        else:
            # this piece is closed under the beta shift (torus root):
            # any cell works; take the canonical one
            wcell = tuple(int(v) for v in np.argwhere(targets)[0])
        break
    if wcell is None:
        raise ValueError("eroded interior walk found no valid cell")
    center = add(wcell, wlo)
    lo = tuple(x - k // 2 for x in center)
    cube = Box(lo, tuple(x + k for x in lo))
    probs = _breaker_problems(cube, beta, cmask, dmask, inner, wlo, k, n,
                              torus, L)
    if probs:
        raise ValueError("period breaker invalid: " + "; ".join(probs))
    return PeriodBreaker(toast.component_id(component), cube, beta)


def _bfs_first(allowed, start, targets, torus):
    """Cell of `targets` nearest to `start` inside `allowed` (BFS layers,
    lexicographic tie-break within a layer)."""
    frontier = np.zeros_like(allowed)
    frontier[start] = True
    visited = frontier.copy()
    dim = allowed.ndim
    while frontier.any():
        hits = frontier & targets
        if hits.any():
            return tuple(int(v) for v in np.argwhere(hits)[0])
        nxt = np.zeros_like(frontier)
        for ax in range(dim):
            for s in (1, -1):
                vec = [0] * dim
                vec[ax] = s
                nxt |= _shift_mask(frontier, tuple(vec), torus)
        frontier = nxt & allowed & ~visited
        visited |= frontier
    return None


def _breaker_problems(cube, beta, cmask, dmask, inner, wlo, k, n, torus, L):
    """Independent re-check of the period-breaker collar conditions."""
    shape = cmask.shape
    emask = np.zeros(shape, dtype=bool)
    _paint_box_torus(emask, cube.lo, cube.sides, wlo, L)
    ebmask = np.zeros(shape, dtype=bool)
    _paint_box_torus(ebmask, add(cube.lo, beta), cube.sides, wlo, L)
    probs = []
    allowed = cmask & ~dmask
    for name, m in (("E", emask), ("beta+E", ebmask)):
        coll = _dilate(m, k, torus) & ~m
        if ((m | coll) & ~allowed).any():
            probs.append(f"k-collar of {name} leaves the component minus "
                         "inner components")
    colle = _dilate(emask, k, torus) & ~emask
    colleb = _dilate(ebmask, k, torus) & ~ebmask
    if (colle & colleb).any():
        probs.append("k-collars of E and beta+E intersect")
    if inner:
        colld = _dilate(dmask, k, torus) & ~dmask
        if (colle & colld).any() or (colleb & colld).any():
            probs.append("k-collar of E or beta+E meets an inner collar")
        if k > n:
            # the toast's n-collar separation no longer implies disjoint
            # k-collars between inner components; check them pairwise
            marks = np.zeros(shape, dtype=np.uint8)
            for dc in inner:
                m = np.zeros(shape, dtype=bool)
                dc.paint(m, wlo, L)
                marks += (_dilate(m, k, torus) & ~m).astype(np.uint8)
            if (marks > 1).any():
                probs.append("k-collars of two inner components intersect")
    return probs
