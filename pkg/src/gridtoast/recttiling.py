"""Coprime rectangular tiling constructor, domino tilings included.

A tile set is a finite list of boxes whose side lengths on every axis
have gcd 1; k is the product of all side lengths.  Any almost-k-box can
then be tiled: cut the long axis by a Frobenius (coin-problem)
decomposition over the tile lengths on that axis and fill each slab with
a grid of one tile.  Extension tiles the complement of the inner regions
by almost-k-boxes (tile_complement) and fills each box; period breaking
reserves two cube-shaped holes E and beta+E and fills them with two
different cube tilings.
"""

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np

from .geometry import Box, GridUnion, Region, add, sub
from .pipeline import beta_sequence
from .tiling import is_almost_k_box, tile_complement
from .toast import select_period_breaker


class TileSet:
    """Boxes T_1..T_s, normalized to their side tuples; per-axis side
    lengths must be coprime (gcd 1), which makes every length >= k
    representable as a sum of multiples of the axis lengths."""

    def __init__(self, boxes):
        self.boxes = [tuple(int(s) for s in b) for b in boxes]
        if not self.boxes:
            raise ValueError("tile set must be nonempty")
        d = len(self.boxes[0])
        if any(len(b) != d or min(b) < 1 for b in self.boxes):
            raise ValueError("tiles must be same-dimension positive boxes")
        for ax in range(d):
            g = math.gcd(*(b[ax] for b in self.boxes))
            if g != 1:
                raise ValueError(f"axis-{ax + 1} side lengths have "
                                 f"gcd {g}; tile set is not coprime")
        self.k = 1
        for b in self.boxes:
            for s in b:
                self.k *= s

    @property
    def d(self):
        return len(self.boxes[0])

    def volume(self, t):
        v = 1
        for s in self.boxes[t]:
            v *= s
        return v

    def to_json(self):
        return {"boxes": [list(b) for b in self.boxes]}

    @staticmethod
    def from_json(obj):
        return TileSet(obj["boxes"])


def dominoes(d=2):
    """The d-dimensional domino tile set: one 2-long box per axis."""
    boxes = []
    for ax in range(d):
        b = [1] * d
        b[ax] = 2
        boxes.append(tuple(b))
    return TileSet(boxes)


class RectCertificate:
    """Placement list partitioning a support into tile-set translates.

    Placements are stored as parallel arrays (tile index, anchor); the
    support is either a finite Region or the whole torus of side `torus`
    (anchors then live on a lift and occupancy is read mod torus).
    """

    def __init__(self, tileset, tiles, anchors, support=None, torus=None,
                 meta=None):
        self.tileset = tileset
        self.tiles = np.asarray(tiles, dtype=np.int32).reshape(-1)
        self.anchors = np.asarray(anchors, dtype=np.int64).reshape(
            len(self.tiles), tileset.d)
        self.support = support
        self.torus = torus
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.tiles)

    def placements(self):
        for t, a in zip(self.tiles, self.anchors):
            yield int(t), tuple(int(x) for x in a)

    def placement_map(self):
        """Map cell -> (tile index, anchor); small certificates only."""
        out = {}
        for t, a in self.placements():
            box = Box(a, add(a, self.tileset.boxes[t]))
            for c in box.cells():
                if self.torus is not None:
                    c = tuple(x % self.torus for x in c)
                out[c] = (t, a)
        return out

    def translate(self, delta):
        return RectCertificate(
            self.tileset, self.tiles, self.anchors + np.asarray(delta),
            support=self.support.translate(delta) if self.support else None,
            torus=self.torus, meta=self.meta)

    def to_json(self):
        obj = {"family": "rect", "tiles": self.tileset.to_json(),
               "placements": [[t, list(a)] for t, a in self.placements()],
               "meta": {k: v for k, v in sorted(self.meta.items())}}
        if self.support is not None:
            obj["support"] = self.support.to_json()
        if self.torus is not None:
            obj["torus"] = self.torus
        return obj

    @staticmethod
    def from_json(obj):
        tiles = [p[0] for p in obj["placements"]]
        anchors = [p[1] for p in obj["placements"]]
        return RectCertificate(
            TileSet.from_json(obj["tiles"]), tiles, anchors,
            support=Region.from_json(obj["support"])
            if "support" in obj else None,
            torus=obj.get("torus"), meta=obj.get("meta"))


def _coin_reachable(lengths, limit):
    reach = np.zeros(limit + 1, dtype=bool)
    reach[0] = True
    for x in range(1, limit + 1):
        for l in lengths:
            if x >= l and reach[x - l]:
                reach[x] = True
                break
    return reach


def frobenius_decompose(N, lengths):
    """Write N as a sum of multiples of the given lengths.

    Returns {length: multiplicity} with every listed length used at least
    once.  Deterministic: subsets of distinct lengths are tried by size
    then lexicographically, and the remainder is distributed by always
    taking the smallest feasible length.  Raises when N is not
    representable (possible only below the Frobenius number).
    """
    N = int(N)
    pool = sorted({int(l) for l in lengths})
    if not pool or pool[0] < 1:
        raise ValueError("lengths must be positive")
    if N < 1:
        raise ValueError("N must be positive")
    for size in range(1, len(pool) + 1):
        for subset in itertools.combinations(pool, size):
            base = sum(subset)
            if base > N:
                continue
            rest = N - base
            reach = _coin_reachable(subset, rest)
            if not reach[rest]:
                continue
            counts = {l: 1 for l in subset}
            while rest:
                l = next(l for l in subset if rest >= l and reach[rest - l])
                counts[l] += 1
                rest -= l
            return counts
    raise ValueError(f"{N} is not representable over lengths {pool}")


def tile_almost_box(box: Box, tileset: TileSet):
    """Tile an almost-k-box by slabs perpendicular to its long axis.

    The long side is decomposed over the tile lengths on that axis; each
    thickness-l slab is filled with a grid of the first tile of length l
    (valid because every other side equals k, a multiple of every tile
    side).  An exact k-box gets the canonical all-T_1 grid.
    """
    k = tileset.k
    if not is_almost_k_box(box, k):
        raise ValueError(f"{box.sides} is not an almost-{k}-box")
    d = box.d
    sides = box.sides
    tiles, anchors = [], []
    if all(s == k for s in sides):
        t0 = tileset.boxes[0]
        for a in itertools.product(*(range(lo, hi, s) for lo, hi, s
                                     in zip(box.lo, box.hi, t0))):
            tiles.append(0)
            anchors.append(a)
        return RectCertificate(tileset, tiles, anchors,
                               support=box.region())
    ax = next(a for a, s in enumerate(sides) if s != k)
    lengths = sorted({b[ax] for b in tileset.boxes})
    counts = frobenius_decompose(sides[ax], lengths)
    pos = box.lo[ax]
    for l in sorted(counts):
        t = next(i for i, b in enumerate(tileset.boxes) if b[ax] == l)
        tb = tileset.boxes[t]
        for _ in range(counts[l]):
            ranges = [[pos] if a == ax else range(box.lo[a], box.hi[a], tb[a])
                      for a in range(d)]
            for a in itertools.product(*ranges):
                tiles.append(t)
                anchors.append(a)
            pos += l
    return RectCertificate(tileset, tiles, anchors, support=box.region())


def first_two_cube_tilings(tileset: TileSet, side):
    """Canonical period-breaker pair on the side^d cube: the first exact
    tiling in lexicographic placement order, and the first one whose
    placement at the least cell differs.  The second entry is None when
    no alternative exists (e.g. the {1 x ... x 1} tile set)."""
    cube = Box((0,) * tileset.d, (side,) * tileset.d)

    def solve(skip_first=None):
        free = set(cube.cells())
        chosen = []

        def rec():
            if not free:
                return True
            c = min(free)
            for t, b in enumerate(tileset.boxes):
                if not chosen and skip_first is not None and t <= skip_first:
                    continue
                cells = list(Box(c, add(c, b)).cells())
                if all(x in free for x in cells):
                    free.difference_update(cells)
                    chosen.append((t, c))
                    if rec():
                        return True
                    chosen.pop()
                    free.update(cells)
            return False

        return chosen if rec() else None

    first = solve()
    if first is None:
        raise ValueError(f"the {side}^d cube admits no exact tiling")
    second = solve(skip_first=first[0][0])

    def cert(chosen):
        return RectCertificate(tileset, [t for t, _ in chosen],
                               [c for _, c in chosen],
                               support=cube.region())

    return cert(first), (cert(second) if second is not None else None)


def _fill_tiling(tiling, tileset):
    """Fill every almost-k-box of a tiling; exact k-boxes get the
    canonical grid in one vectorized batch."""
    k = tileset.k
    d = tileset.d
    t0 = tileset.boxes[0]
    offs0 = np.array(list(itertools.product(
        *(range(0, k, s) for s in t0))), dtype=np.int64)
    exact = []
    tiles_parts, anchor_parts = [], []
    for b in tiling.tiles:
        if b.sides == (k,) * d:
            exact.append(b.lo)
        else:
            cert = tile_almost_box(b, tileset)
            tiles_parts.append(cert.tiles)
            anchor_parts.append(cert.anchors)
    if exact:
        a = np.asarray(exact, dtype=np.int64)
        grid = (a[:, None, :] + offs0[None, :, :]).reshape(-1, d)
        anchor_parts.append(grid)
        tiles_parts.append(np.zeros(len(grid), dtype=np.int32))
    if not tiles_parts:
        return (np.zeros(0, dtype=np.int32), np.zeros((0, d), dtype=np.int64))
    return np.concatenate(tiles_parts), np.concatenate(anchor_parts)


def extend_rect(C: GridUnion, inner, tileset: TileSet, N=10,
                collar_margin=None, torus=None, holes=()):
    """Tile C by tile-set members, extending the inner certificates.

    `inner` is a list of (GridUnion, RectCertificate); `holes` are extra
    grid unions left uncovered (the caller fills them).  The complement
    is tiled by almost-k-boxes via tile_complement (which snaps each
    inner component to C's k-grid and checks collar disjointness), and
    every box is filled by tile_almost_box.
    """
    for idx, (gu, cert) in enumerate(inner):
        if cert.support is None or cert.support.cells != gu.region().cells:
            raise ValueError(f"inner certificate {idx} does not cover its "
                             "grid union")
    tiling = tile_complement(C, [gu for gu, _ in inner] + list(holes),
                             k=tileset.k, N=N, collar_margin=collar_margin,
                             torus=torus)
    tiles, anchors = _fill_tiling(tiling, tileset)
    tiles_parts = [tiles] + [cert.tiles for _, cert in inner]
    anchor_parts = [anchors] + [cert.anchors for _, cert in inner]
    support = None
    if torus is None:
        support = C.region()
        for hole in holes:
            support = support.difference(hole.region())
    return RectCertificate(tileset, np.concatenate(tiles_parts),
                           np.concatenate(anchor_parts),
                           support=support, torus=torus)


def run_rect_pipeline(toast, tileset: TileSet, seed=0):
    """Tile the whole torus level by level.

    Every component's complement of its maximal inner components is
    tiled via tile_complement and filled; two cube holes E and beta+E
    are reserved per component and filled with two different cube
    tilings, breaking the beta_i period of every level-i component.
    Requires the toast grid cell to be the breaker cube (N=1) and its
    side k a multiple of the tile-set k with quotient >= 4.
    """
    from .toast import containment_forest

    params = toast.params
    L, d, M = params.L, params.d, params.M
    if tileset.d != d:
        raise ValueError("tile set dimension does not match the toast")
    if all(b == (1,) * d for b in tileset.boxes):
        warnings.warn("tile set {1x..x1} admits a single tiling; emitting "
                      "the trivial certificate, freeness unattainable")
        anchors = np.stack(np.meshgrid(*([np.arange(L)] * d), indexing="ij"),
                           axis=-1).reshape(-1, d)
        return RectCertificate(tileset, np.zeros(len(anchors), np.int32),
                               anchors, torus=L,
                               meta={"seed": seed, "degenerate": True})
    kt = tileset.k
    if M % kt or M // kt < 4 or kt < 4:
        raise ValueError(f"toast grid {M} must be N*k with N >= 4 for "
                         f"tile-set k = {kt} >= 4")
    if params.N != 1:
        raise ValueError("breaker cubes must be whole toast grid cells; "
                         "use toast N=1 with k = the grid scale")
    nscale = M // kt
    margin = min(10 * kt, max(2 * kt, params.n - 1))
    e1, e2 = first_two_cube_tilings(tileset, M)
    if e2 is None:
        warnings.warn("tile set admits a single cube tiling; period "
                      "breaking skipped")
    betas = beta_sequence(toast, seed=seed, min_norm=3 * params.k) \
        if e2 is not None else None
    _, children = containment_forest(toast)
    tiles_parts, anchor_parts = [], []
    breakers = []
    for li, level in enumerate(toast.levels):
        for ci, comp in enumerate(level):
            kids = [toast.levels[a][b] for a, b in children[(li, ci)]]
            torus = L if comp.is_root else None
            cgrid = comp.grid
            kid_gus = [_lift_to_frame(ch, comp, L) for ch in kids] \
                if not comp.is_root else [ch.grid for ch in kids]
            holes = []
            if e2 is not None:
                try:
                    pb = select_period_breaker(toast, comp, betas[li])
                except ValueError as exc:
                    raise ValueError(f"component ({li},{ci}): {exc}") from exc
                breakers.append(pb)
                for off in ((0,) * d, pb.beta):
                    lo = add(pb.cube.lo, off)
                    holes.append(GridUnion(M, sub(lo, (1,) * d),
                                           frozenset({(0,) * d})))
            try:
                tiling = tile_complement(cgrid, kid_gus + holes, k=kt,
                                         N=nscale, collar_margin=margin,
                                         torus=torus)
            except ValueError as exc:
                raise ValueError(f"component ({li},{ci}): {exc}") from exc
            tiles, anchors = _fill_tiling(tiling, tileset)
            tiles_parts.append(tiles)
            anchor_parts.append(anchors)
            if e2 is not None:
                for cube_cert, off in ((e1, (0,) * d), (e2, pb.beta)):
                    tiles_parts.append(cube_cert.tiles)
                    anchor_parts.append(cube_cert.anchors
                                        + np.asarray(add(pb.cube.lo, off)))
    meta = {"seed": seed}
    if e2 is not None:
        meta["betas"] = [list(b) for b in betas]
        meta["breakers"] = [pb.to_json() for pb in breakers]
    else:
        meta["degenerate"] = True
    return RectCertificate(tileset, np.concatenate(tiles_parts),
                           np.concatenate(anchor_parts), torus=L, meta=meta)


def _lift_to_frame(child, comp, L):
    """Translate a child component's grid by a multiple of L per axis so
    that it lies inside the parent's lifted frame."""
    cb = comp.bbox()
    kb = child.bbox()
    shift = tuple(
        L * ((cm - km + L // 2) // L)
        for cm, km in (((lo + hi) // 2, (klo + khi) // 2)
                       for lo, hi, klo, khi
                       in zip(cb.lo, cb.hi, kb.lo, kb.hi)))
    return GridUnion(child.grid.k, add(child.grid.offset, shift),
                     child.grid.cells)
