"""Almost-k-box tilings of grid-union complements.

The two workhorses are `tile_collar` (tiles the collar between a union of
Nk-boxes and its shifted/expanded version, by axis-by-axis interpolation)
and `tile_complement` (tiles a grid union minus well-separated inner grid
unions, snapping each inner component to the outer k-grid and tiling its
collar). `hamiltonian_grade` additionally checks the face-to-face,
boundary-agreement and almost-face-to-face properties needed downstream.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .geometry import Box, GridUnion, Region, add, sub


def is_almost_k_box(box: Box, k: int) -> bool:
    """All sides in [k,2k] and at most one side different from k."""
    sides = box.sides
    if any(s < k or s > 2 * k for s in sides):
        return False
    return sum(1 for s in sides if s != k) <= 1


@dataclass(frozen=True)
class AlmostBoxSpec:
    k: int

    def ok(self, box: Box) -> bool:
        return is_almost_k_box(box, self.k)


@dataclass
class Tiling:
    """A list of pairwise-disjoint boxes covering a declared support.

    For torus-supported tilings (`torus` = side length L) tiles are stored
    on a lift and occupancy is interpreted coordinate-wise mod L.
    """

    tiles: list
    support: Region | None = None
    torus: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.tiles[0].d if self.tiles else (self.support.d if self.support else 0)

    def owner(self):
        """Map cell -> tile index (small tilings only)."""
        out = {}
        for idx, t in enumerate(self.tiles):
            for c in t.cells():
                if self.torus is not None:
                    c = tuple(x % self.torus for x in c)
                out[c] = idx
        return out

    def to_json(self):
        obj = {"tiles": [t.to_json() for t in self.tiles]}
        if self.support is not None:
            obj["support"] = self.support.to_json()
        if self.torus is not None:
            obj["torus"] = self.torus
        return obj

    @staticmethod
    def from_json(obj):
        return Tiling([Box.from_json(t) for t in obj["tiles"]],
                      support=Region.from_json(obj["support"]) if "support" in obj else None,
                      torus=obj.get("torus"))


def split_lengths(s: int, k: int):
    """Cut a length s >= k into almost-k pieces: all k except the last,
    which absorbs the remainder and has length k + (s mod k) in [k, 2k)."""
    if s < k:
        raise ValueError(f"cannot split length {s} into pieces of >= {k}")
    if s < 2 * k:
        return [s]
    n = s // k - 1
    return [k] * n + [k + s % k]


def _union_intervals(intervals):
    """Union of half-open intervals as a sorted disjoint list."""
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _subtract_intervals(plus, minus):
    """Set difference of two unions of half-open intervals."""
    plus = _union_intervals(plus)
    minus = _union_intervals(minus)
    out = []
    for lo, hi in plus:
        cur = lo
        for mlo, mhi in minus:
            if mhi <= cur or mlo >= hi:
                continue
            if mlo > cur:
                out.append((cur, mlo))
            cur = max(cur, mhi)
            if cur >= hi:
                break
        if cur < hi:
            out.append((cur, hi))
    return out


def _collar_tiles(offsets, gamma, N, k):
    """Tile B \\ A by almost k-boxes, where A = U_beta beta+[0,Nk)^d and
    B = U_beta beta+gamma+[-3k,(N+3)k)^d, for any |gamma_i| < k.

    Axis-by-axis interpolation: the i-th step tiles the part of the collar
    reached by relaxing axis i, as boxes that are k-cells of a mixed grid
    (already-relaxed axes carry the gamma offset) stretched along axis i.
    """
    d = len(gamma)
    Nk = N * k
    offsets = sorted({tuple(b) for b in offsets})
    if any(any(x % Nk for x in b) for b in offsets):
        raise ValueError("collar offsets must lie in NkZ^d")
    if any(abs(g) >= k for g in gamma):
        raise ValueError(f"collar shift {gamma} must have |gamma_i| < k")
    tiles = []
    for i in range(d):
        # projection of each beta-box onto the axes != i (the "columns"):
        # axes j < i are already shifted/expanded, axes j > i are not.
        def proj(b):
            spans = []
            for j in range(d):
                if j == i:
                    continue
                if j < i:
                    spans.append((b[j] + gamma[j] - 3 * k,
                                  b[j] + gamma[j] + (N + 3) * k))
                else:
                    spans.append((b[j], b[j] + Nk))
            return spans
        # every span endpoint is congruent to the column grid offset mod k,
        # so column k-cells either lie inside a projection or miss it
        footprints = set()
        projs = [proj(b) for b in offsets]
        for spans in projs:
            for corner in itertools.product(*(range(lo, hi, k) for lo, hi in spans)):
                footprints.add(corner)
        for col in sorted(footprints):
            plus, minus = [], []
            for b, spans in zip(offsets, projs):
                if all(lo <= c and c + k <= hi for c, (lo, hi) in zip(col, spans)):
                    plus.append((b[i] + gamma[i] - 3 * k,
                                 b[i] + gamma[i] + (N + 3) * k))
                    minus.append((b[i], b[i] + Nk))
            for lo, hi in _subtract_intervals(plus, minus):
                cur = lo
                for piece in split_lengths(hi - lo, k):
                    blo = list(col[:i]) + [cur] + list(col[i:])
                    bhi = [x + k for x in col[:i]] + [cur + piece] + \
                          [x + k for x in col[i:]]
                    tiles.append(Box(tuple(blo), tuple(bhi)))
                    cur += piece
    return tiles


def tile_collar(offsets, gamma, N, k, strict=True):
    """Tile B \\ A by almost k-boxes (A, B as in `_collar_tiles`), for
    0 <= gamma_i < k. `strict` enforces N,k >= 10; otherwise N,k >= 4."""
    lo_bound = 10 if strict else 4
    if N < lo_bound or k < lo_bound:
        raise ValueError(f"need N,k >= {lo_bound}, got N={N}, k={k}")
    if any(g < 0 or g >= k for g in gamma):
        raise ValueError(f"gamma {gamma} must satisfy 0 <= gamma_i < k")
    tiles = _collar_tiles(offsets, gamma, N, k)
    d = len(gamma)
    support = set()
    for b in offsets:
        big = Box(tuple(x + g - 3 * k for x, g in zip(b, gamma)),
                  tuple(x + g + (N + 3) * k for x, g in zip(b, gamma)))
        support.update(big.cells())
    for b in offsets:
        inner = Box(tuple(b), tuple(x + N * k for x in b))
        support.difference_update(inner.cells())
    return Tiling(tiles, support=Region(support))


def _snap_vector(q, k):
    """Minimal-length (then lexicographically smallest) vector g with
    q + g in kZ^d and |g_i| < k."""
    out = []
    for x in q:
        up = (-x) % k
        down = up - k
        # |down| = k - up; prefer strictly smaller magnitude, ties -> down
        out.append(down if k - up <= up else up)
    return tuple(out)


def tile_complement(C: GridUnion, inner, k, N, hamiltonian_grade=False,
                    collar_margin=None, torus=None, ham_threshold=None):
    """Tile C minus the inner grid unions by almost k-boxes.

    C and every inner component must be grid unions at scale Nk. Inner
    components are enlarged to k-grid-aligned collars (snap vector of
    minimal length, lexicographic tie-break) handled by the collar tiler;
    the rest of C is covered by exact k-boxes of C's own k-grid.

    With `torus` = L, C must be the full torus (k | L) and occupancy is
    mod L. `collar_margin` defaults to 10k; smaller margins are allowed
    but enlarged collars are then re-verified for disjointness/containment.
    """
    Nk = N * k
    d = C.d
    if C.k != Nk:
        raise ValueError(f"outer grid union must have scale Nk={Nk}, got {C.k}")
    if collar_margin is None:
        collar_margin = 10 * k
    if torus is not None and torus % k:
        raise ValueError(f"torus side {torus} not a multiple of k={k}")
    p0 = add(C.offset, (1,) * d)  # C's k-grid origin
    # the k-cells of C, as low corners on C's grid
    c_cells = set()
    for box in C.cell_boxes():
        for corner in itertools.product(*(range(lo, hi, k) for lo, hi in
                                          zip(box.lo, box.hi))):
            c_cells.add(corner)
    region_C = None if torus is not None else C.region()

    enlarged = []  # per inner: (list of D' boxes, collar tiles)
    all_dprime_cells = set()
    for D in inner:
        if D.k != Nk:
            raise ValueError(f"inner grid union must have scale Nk={Nk}")
        base = add(D.offset, (1,) * d)  # abs low corner of D's cell grid
        q = sub(base, p0)
        gD = _snap_vector(q, k)
        shift = add(base, gD)  # k-aligned on C's grid
        col_tiles = [t.translate(base) for t in
                     _collar_tiles(sorted(D.cells), gD, N, k)]
        dprime_cells = set()
        for c in sorted(D.cells):
            lo = tuple(x + y - 3 * k for x, y in zip(shift, c))
            hi = tuple(x + y + (N + 3) * k for x, y in zip(shift, c))
            for corner in itertools.product(*(range(l, h, k) for l, h in zip(lo, hi))):
                dprime_cells.add(corner)
        if torus is not None:
            reduced = {tuple(x % torus for x in c) for c in dprime_cells}
            if len(reduced) != len(dprime_cells):
                raise ValueError("inner collar wraps the torus")
            dprime_cells = reduced
        missing = dprime_cells - c_cells
        if missing:
            raise ValueError(
                f"enlarged inner component leaves the outer region at {sorted(missing)[0]}")
        overlap = all_dprime_cells & dprime_cells
        if overlap:
            raise ValueError(
                f"enlarged inner components overlap at {sorted(overlap)[0]}")
        all_dprime_cells |= dprime_cells
        enlarged.append(col_tiles)
    _check_margins(C, inner, collar_margin, torus)
    tiles = []
    for corner in sorted(c_cells - all_dprime_cells):
        tiles.append(Box(corner, tuple(x + k for x in corner)))
    for col_tiles in enlarged:
        tiles.extend(col_tiles)

    support = None
    if torus is None:
        support = region_C
        for D in inner:
            support = support.difference(D.region())
    tiling = Tiling(tiles, support=support, torus=torus)
    tiling.meta["k"] = k
    tiling.meta["N"] = N
    if hamiltonian_grade:
        threshold = ham_threshold if ham_threshold is not None else 100 ** d
        if k < threshold and ham_threshold is None:
            raise ValueError(f"hamiltonian grade needs k >= {threshold}")
        problems = check_hamiltonian_grade(tiling, C, inner, k)
        if problems:
            raise ValueError("hamiltonian-grade check failed: " + problems[0])
        tiling.meta["hamiltonian_grade"] = True
    return tiling


def _check_margins(C, inner, margin, torus):
    """Inner components' margin-collars must be pairwise disjoint and,
    off the torus, inside C."""
    from . import kernels

    creg = None
    seen = []
    for D in inner:
        reg = D.region()
        window = reg.bbox().expand(margin)
        dil = kernels.dilate_linf(reg.mask(window), margin)
        cells = Region.from_mask(dil, window.lo).cells
        if torus is not None:
            cells = {tuple(x % torus for x in c) for c in cells}
        else:
            if creg is None:
                creg = C.region().cells
            out = cells - creg
            if out:
                raise ValueError(
                    f"{margin}-collar of an inner component leaves C at {sorted(out)[0]}")
        for prev in seen:
            hit = prev & cells
            if hit:
                raise ValueError(
                    f"{margin}-collars of inner components overlap at {sorted(hit)[0]}")
        seen.append(cells)


def _face_interval(lo, hi, L):
    """Interval possibly reduced mod L (length assumed < L)."""
    if L is None:
        return (lo, hi)
    return (lo % L, lo % L + (hi - lo))


def _interval_overlap(a, b, L):
    """Overlap length of two half-open intervals, circularly if L given."""
    if L is None:
        return max(0, min(a[1], b[1]) - max(a[0], b[0]))
    total = 0
    for sa in (0, L, -L):
        total += max(0, min(a[1] + sa, b[1]) - max(a[0] + sa, b[0]))
    return total


def adjacency_pairs(tiling: Tiling):
    """Pairs (i, j, axis) of tiles that meet across axis faces."""
    L = tiling.torus
    d = tiling.d
    by_plane = {}
    for idx, t in enumerate(tiling.tiles):
        for ax in range(d):
            hi = t.hi[ax] % L if L is not None else t.hi[ax]
            lo = t.lo[ax] % L if L is not None else t.lo[ax]
            by_plane.setdefault((ax, hi, "hi"), []).append(idx)
            by_plane.setdefault((ax, lo, "lo"), []).append(idx)
    pairs = set()
    for (ax, coord, side), idxs in by_plane.items():
        if side != "hi":
            continue
        lows = by_plane.get((ax, coord, "lo"), [])
        for i in idxs:
            for j in lows:
                if i == j:
                    continue
                ti, tj = tiling.tiles[i], tiling.tiles[j]
                if all(_interval_overlap(
                        _face_interval(ti.lo[a], ti.hi[a], L),
                        _face_interval(tj.lo[a], tj.hi[a], L), L) > 0
                       for a in range(d) if a != ax):
                    pairs.add((min(i, j), max(i, j), ax))
    return sorted(pairs)


def aftf_graph(tiling: Tiling):
    """Almost-face-to-face graph on tile indices: tiles A,B are adjacent iff
    faces A', B' across a generator overlap in at least a 1/12^d fraction of
    the smaller face (exact integer test: 12^d * overlap >= min volume)."""
    d = tiling.d
    L = tiling.torus
    factor = 12 ** d
    adj = {i: set() for i in range(len(tiling.tiles))}
    for i, j, ax in adjacency_pairs(tiling):
        ti, tj = tiling.tiles[i], tiling.tiles[j]
        overlap = 1
        fi = 1
        fj = 1
        for a in range(d):
            if a == ax:
                continue
            overlap *= _interval_overlap(
                _face_interval(ti.lo[a], ti.hi[a], L),
                _face_interval(tj.lo[a], tj.hi[a], L), L)
            fi *= ti.sides[a]
            fj *= tj.sides[a]
        if factor * overlap >= min(fi, fj):
            adj[i].add(j)
            adj[j].add(i)
    return adj


def graph_connected(adj):
    if not adj:
        return True
    seen = set()
    start = next(iter(adj))
    stack = [start]
    seen.add(start)
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(adj)


def check_hamiltonian_grade(tiling: Tiling, C: GridUnion, inner, k):
    """Check properties (1)-(3) of the graded tiling; returns a list of
    human-readable problems (empty = pass).

    (1) face-to-face with each inner component's k-grid on its axis-1 faces;
    (2) agreement with C's k-box grid on the boundary of C;
    (3) connected almost-face-to-face graph.
    """
    problems = []
    d = tiling.d
    L = tiling.torus
    p0 = add(C.offset, (1,) * d)

    def aligned(t: Box):
        return (all((x - y) % k == 0 for x, y in zip(t.lo, p0))
                and t.sides == (k,) * d)

    # (2): tiles touching the outer boundary of C are exact grid k-boxes.
    if L is None:
        creg = C.region()
        border = {c for c in creg
                  if any(add(c, e) not in creg for e in _generators(d))}
        for t in tiling.tiles:
            if any(c in border for c in t.cells()):
                if not aligned(t):
                    problems.append(f"tile {t.lo}-{t.hi} misaligned on the outer boundary")
                    break
    # (1): tiles meeting an inner D across an axis-1 face share full k-faces
    # with D's k-grid.
    for D in inner:
        base = add(D.offset, (1,) * d)
        dreg = D.region()
        lo1 = min(c[0] for c in dreg.cells)
        hi1 = max(c[0] for c in dreg.cells) + 1
        for t in tiling.tiles:
            touches = (t.hi[0] == lo1 or t.lo[0] == hi1)
            if not touches:
                continue
            near = any(
                tuple([lo1 if t.hi[0] == lo1 else hi1 - 1] + list(c[1:])) in dreg.cells
                for c in t.face(1, +1 if t.hi[0] == lo1 else -1).cells())
            if not near:
                continue
            if not (all((t.lo[a] - base[a]) % k == 0 for a in range(1, d))
                    and all(t.sides[a] == k for a in range(1, d))):
                problems.append(
                    f"tile {t.lo}-{t.hi} not face-to-face with inner grid on axis 1")
    # (3)
    if not graph_connected(aftf_graph(tiling)):
        problems.append("almost-face-to-face graph is disconnected")
    return problems


def _generators(d):
    out = []
    for i in range(d):
        v = [0] * d
        v[i] = 1
        out.append(tuple(v))
        v = [0] * d
        v[i] = -1
        out.append(tuple(v))
    return out
