"""Z^d lattice primitives: points, boxes, regions, boundaries, grid unions.

Conventions used across the package:
  * the ambient dimension d is carried implicitly by tuple length;
  * distances are Chebyshev (l-infinity) everywhere;
  * boxes are half-open products prod [lo_i, hi_i);
  * a k-grid union realizes as offset + cells + [1,k]^d with cells in kZ^d,
    i.e. half-open k-cells anchored at offset + cell + 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels


def unit_vector(d, i, sign=1):
    """Standard generator +-e_i (axes are 1-based, matching math notation)."""
    v = [0] * d
    v[i - 1] = sign
    return tuple(v)


def add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def norm_inf(v):
    return max(abs(x) for x in v)


def parity(v):
    """Parity of the coordinate sum: 0 = even, 1 = odd."""
    return sum(v) % 2


@dataclass(frozen=True)
class Box:
    """Half-open axis-aligned box prod [lo_i, hi_i)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi dimension mismatch")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"degenerate box {self.lo}..{self.hi}")

    @property
    def d(self):
        return len(self.lo)

    @property
    def sides(self):
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def volume(self):
        v = 1
        for s in self.sides:
            v *= s
        return v

    def contains(self, p):
        return all(l <= x < h for x, l, h in zip(p, self.lo, self.hi))

    def contains_box(self, other):
        return all(l <= ol and oh <= h for l, h, ol, oh in
                   zip(self.lo, self.hi, other.lo, other.hi))

    def cells(self):
        return itertools.product(*(range(l, h) for l, h in zip(self.lo, self.hi)))

    def translate(self, v):
        return Box(add(self.lo, v), add(self.hi, v))

    def expand(self, m):
        return Box(tuple(l - m for l in self.lo), tuple(h + m for h in self.hi))

    def intersect(self, other):
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(l >= h for l, h in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def region(self):
        return Region(self.cells())

    def face(self, i, sign):
        """The inner face of the box in direction sign*e_i, as a Box."""
        lo, hi = list(self.lo), list(self.hi)
        if sign > 0:
            lo[i - 1] = hi[i - 1] - 1
        else:
            hi[i - 1] = lo[i - 1] + 1
        return Box(tuple(lo), tuple(hi))

    def to_json(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}

    @staticmethod
    def from_json(obj):
        return Box(tuple(obj["lo"]), tuple(obj["hi"]))


class Region:
    """Finite set of lattice points with deterministic iteration order."""

    __slots__ = ("cells", "_sorted", "_bbox")

    def __init__(self, cells):
        cells = frozenset(tuple(c) for c in cells)
        ds = {len(c) for c in cells}
        if len(ds) > 1:
            raise ValueError("mixed dimensions in region")
        self.cells = cells
        self._sorted = None
        self._bbox = None

    @property
    def d(self):
        if not self.cells:
            raise ValueError("empty region has no dimension")
        return len(next(iter(self.cells)))

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        if self._sorted is None:
            self._sorted = sorted(self.cells)
        return iter(self._sorted)

    def __contains__(self, p):
        return tuple(p) in self.cells

    def __eq__(self, other):
        return isinstance(other, Region) and self.cells == other.cells

    def __hash__(self):
        return hash(self.cells)

    def __repr__(self):
        return f"Region({len(self.cells)} cells)"

    def anchor(self):
        """Canonical anchor: lexicographically minimal cell (translation
        equivariant)."""
        return min(self.cells)

    def bbox(self):
        if self._bbox is None:
            if not self.cells:
                raise ValueError("empty region has no bbox")
            arr = np.array(sorted(self.cells))
            lo = tuple(int(x) for x in arr.min(axis=0))
            hi = tuple(int(x) + 1 for x in arr.max(axis=0))
            self._bbox = Box(lo, hi)
        return self._bbox

    def translate(self, v):
        return Region(add(c, v) for c in self.cells)

    def union(self, other):
        return Region(self.cells | other.cells)

    def difference(self, other):
        return Region(self.cells - other.cells)

    def mask(self, window: Box):
        """Boolean occupancy array over a window box (cells outside ignored)."""
        m = np.zeros(window.sides, dtype=bool)
        for c in self.cells:
            if window.contains(c):
                m[sub(c, window.lo)] = True
        return m

    @staticmethod
    def from_mask(mask, origin):
        idx = np.argwhere(mask)
        return Region(tuple(int(x) for x in add(tuple(row), origin)) for row in idx)

    def is_connected(self):
        if not self.cells:
            return True
        window = self.bbox()
        _, count = kernels.label_components(self.mask(window))
        return count == 1

    def to_json(self):
        return {"d": self.d if self.cells else 0,
                "cells": [list(c) for c in self]}

    @staticmethod
    def from_json(obj):
        return Region(tuple(c) for c in obj["cells"])


def boundary(region: Region, m: int) -> Region:
    """m-external boundary: cells at l-inf distance <= m from the region and
    not in it."""
    if m < 1:
        raise ValueError("m must be positive")
    if not region.cells:
        return Region([])
    window = region.bbox().expand(m)
    mask = region.mask(window)
    dil = kernels.dilate_linf(mask, m)
    return Region.from_mask(dil & ~mask, window.lo)


def directed_face(region: Region, i: int, sign: int) -> Region:
    """Inner boundary in direction sign*e_i: cells whose translate leaves the
    region."""
    if not region.cells:
        return Region([])
    d = region.d
    if not 1 <= i <= d:
        raise ValueError(f"axis {i} out of range for d={d}")
    e = unit_vector(d, i, 1 if sign > 0 else -1)
    return Region(c for c in region.cells if add(c, e) not in region.cells)


def is_coconnected(region: Region, ambient: Box) -> bool:
    """True iff ambient minus region is connected.

    Agrees with Z^d-complement connectivity when the ambient contains the
    1-boundary of the region plus a one-cell margin.
    """
    for c in region.cells:
        if not ambient.contains(c):
            raise ValueError(f"region cell {c} outside ambient box")
    comp = ~region.mask(ambient)
    if not comp.any():
        # complement empty within the window: degenerate, treated as
        # coconnected (used by the torus root component)
        return True
    _, count = kernels.label_components(comp)
    return count == 1


@dataclass(frozen=True)
class GridUnion:
    """Union of aligned k-cells: realized region = offset + cells + [1,k]^d."""

    k: int
    offset: tuple
    cells: frozenset  # subset of kZ^d

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        for c in self.cells:
            if any(x % self.k for x in c):
                raise ValueError(f"grid-union cell {c} not in {self.k}Z^d")

    @property
    def d(self):
        return len(self.offset)

    def cell_boxes(self):
        one = (1,) * self.d
        for c in sorted(self.cells):
            lo = add(add(self.offset, c), one)
            yield Box(lo, tuple(x + self.k for x in lo))

    def region(self) -> Region:
        out = set()
        for b in self.cell_boxes():
            out.update(b.cells())
        return Region(out)

    def translate(self, v):
        return GridUnion(self.k, add(self.offset, v), self.cells)

    def to_json(self):
        return {"k": self.k, "offset": list(self.offset),
                "cells": [list(c) for c in sorted(self.cells)]}

    @staticmethod
    def from_json(obj):
        return GridUnion(obj["k"], tuple(obj["offset"]),
                         frozenset(tuple(c) for c in obj["cells"]))


def as_grid_union(region: Region, k: int):
    """Decompose a region as a k-grid union with offset normalized to [0,k)^d,
    or return None when no such decomposition exists."""
    if k < 1:
        raise ValueError("k must be positive")
    if not region.cells:
        return None
    d = region.d
    mins = [min(c[i] for c in region.cells) for i in range(d)]
    # realized min corner = offset + cell + 1, so offset = (min - 1) mod k
    offset = tuple((m - 1) % k for m in mins)
    groups = {}
    for c in region.cells:
        rel = sub(sub(c, offset), (1,) * d)
        q = tuple((x // k) * k for x in rel)
        groups.setdefault(q, 0)
        groups[q] += 1
    if any(n != k ** d for n in groups.values()):
        return None
    gu = GridUnion(k, offset, frozenset(groups))
    realized = gu.region()
    if realized != region:
        return None
    if not realized.is_connected():
        return None
    if not is_coconnected(realized, realized.bbox().expand(2)):
        return None
    return gu
