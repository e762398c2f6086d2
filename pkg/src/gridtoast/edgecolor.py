"""Proper t-edge colourings of finite windows and tori (t >= 2d).

Edges parallel to eps^i are coloured i and i+d alternately on even boxes;
boxes with one odd side use a three-colour start along the odd axis and
three alternation rules for the crossing lines. Both recipes colour every
outward normal edge of a face by its axis, so tiles glue with no
conflicts; `extend_edge_coloring` covers a grid union minus prescribed
inner colourings tile by tile and `run_edge_pipeline` colours the torus
with seeded plaquette flips as period breakers.
"""

from __future__ import annotations

import numpy as np

from .geometry import Box, GridUnion, Region, add, sub
from .pipeline import beta_sequence
from .tiling import tile_complement
from .toast import select_period_breaker


def check_colour_count(t, d):
    if d < 2:
        raise ValueError(f"edge colourings need d >= 2, got d = {d}")
    if t < 2 * d:
        raise ValueError(f"proper edge colourings of Z^{d} exist exactly "
                         f"when t >= {2 * d}, got t = {t}")


class EdgeColoring:
    """Per-axis colour arrays over a window, 0 marking edges out of scope.

    The edge (cell, cell + eps^(a+1)) is stored at `cell` on axis a; the
    window extends one cell below the support so inward stubs have a home.
    `support` is the coloured region (None for a full torus of side
    `torus`).
    """

    def __init__(self, t, lo, colors, support=None, torus=None, meta=None):
        self.t = t
        self.lo = tuple(lo)
        self.colors = np.asarray(colors, dtype=np.int8)
        self.support = support
        self.torus = torus
        self.meta = meta or {}

    @property
    def d(self):
        return self.colors.ndim - 1

    def window(self):
        return Box(self.lo, add(self.lo, self.colors.shape[1:]))

    def color(self, cell, axis):
        """Colour of the edge (cell, cell + eps^(axis+1)); 0 if unset."""
        if self.torus is not None:
            cell = tuple(x % self.torus for x in cell)
        rel = sub(cell, self.lo)
        if any(x < 0 or x >= s for x, s in zip(rel, self.colors.shape[1:])):
            return 0
        return int(self.colors[(axis,) + rel])

    def used_colors(self):
        vals = np.unique(self.colors)
        return sorted(int(v) for v in vals if v > 0)

    def to_json(self):
        return {"family": "edge", "t": self.t, "d": self.d,
                "lo": list(self.lo),
                "shape": list(self.colors.shape[1:]),
                "torus": self.torus,
                "support": None if self.support is None
                else self.support.to_json(),
                "colors": [int(x) for x in self.colors.ravel()],
                "meta": {k: self.meta[k] for k in sorted(self.meta)}}

    @staticmethod
    def from_json(obj):
        shape = tuple(obj["shape"])
        colors = np.array(obj["colors"], dtype=np.int8).reshape(
            (obj["d"],) + shape)
        support = None if obj.get("support") is None \
            else Region.from_json(obj["support"])
        return EdgeColoring(obj["t"], tuple(obj["lo"]), colors,
                            support=support, torus=obj.get("torus"),
                            meta=dict(obj.get("meta", {})))


def _alternating_line(length, even_color, odd_color):
    return np.where(np.arange(length) % 2 == 0, even_color,
                    odd_color).astype(np.int8)


def _paint_axis_lines(colors, a, B, line):
    """Write `line` along axis a over the in-scope edge range of box B:
    window indices [0, side_a] on axis a, [1, side] elsewhere."""
    d = B.d
    idx = [slice(1, s + 1) for s in B.sides]
    idx[a] = slice(0, B.sides[a] + 1)
    shape = [1] * d
    shape[a] = -1
    colors[(a,) + tuple(idx)] = line.reshape(shape)


def color_even_box(B: Box, t):
    """Proper t-edge colouring of a box with all sides even: edges along
    eps^(a+1) alternate colours a+1 and a+1+d starting (and ending) with
    a+1 at the outward stubs."""
    d = B.d
    check_colour_count(t, d)
    odd = [s for s in B.sides if s % 2]
    if odd:
        raise ValueError(f"even-box colouring needs all sides even, "
                         f"got {B.sides}")
    lo = sub(B.lo, (1,) * d)
    colors = np.zeros((d,) + tuple(s + 1 for s in B.sides), dtype=np.int8)
    for a in range(d):
        _paint_axis_lines(colors, a, B,
                          _alternating_line(B.sides[a] + 1, a + 1, a + 1 + d))
    return EdgeColoring(t, lo, colors, support=B.region())


def color_odd_box(B: Box, odd_axis, t):
    """Proper t-edge colouring of a box with exactly one odd side.

    With u the odd axis and w the least other axis, the eps^(u+1) lines
    read u+1, w+1+d, u+1+d and then alternate u+1, u+1+d; the crossing
    eps^(w+1) lines are grouped by their u-coordinate -- the lowest
    alternates w+1 with u+1+d, the next with u+1, the rest with w+1+d --
    and every other axis alternates plainly. All outward stubs carry
    their axis colour.
    """
    d = B.d
    check_colour_count(t, d)
    odd = [a for a, s in enumerate(B.sides) if s % 2]
    if odd != [odd_axis]:
        raise ValueError(f"box sides {B.sides} do not have axis {odd_axis} "
                         "as the unique odd axis")
    u = odd_axis
    if B.sides[u] < 5:
        raise ValueError(f"odd side must be >= 5, got {B.sides[u]}")
    if any(s < 4 for a, s in enumerate(B.sides) if a != u):
        raise ValueError(f"even sides must be >= 4, got {B.sides}")
    w = min(a for a in range(d) if a != u)
    lo = sub(B.lo, (1,) * d)
    colors = np.zeros((d,) + tuple(s + 1 for s in B.sides), dtype=np.int8)
    for a in range(d):
        if a in (u, w):
            continue
        _paint_axis_lines(colors, a, B,
                          _alternating_line(B.sides[a] + 1, a + 1, a + 1 + d))
    uline = np.where(np.arange(B.sides[u] + 1) % 2 == 1, u + 1,
                     u + 1 + d).astype(np.int8)
    uline[0] = u + 1
    uline[1] = w + 1 + d
    _paint_axis_lines(colors, u, B, uline)
    # crossing lines, grouped by the value of the u-coordinate
    for group, partner in ((0, u + 1 + d), (1, u + 1)):
        idx = [slice(1, s + 1) for s in B.sides]
        idx[w] = slice(0, B.sides[w] + 1)
        idx[u] = slice(1 + group, 2 + group)
        shape = [1] * d
        shape[w] = -1
        colors[(w,) + tuple(idx)] = _alternating_line(
            B.sides[w] + 1, w + 1, partner).reshape(shape)
    idx = [slice(1, s + 1) for s in B.sides]
    idx[w] = slice(0, B.sides[w] + 1)
    idx[u] = slice(3, B.sides[u] + 1)
    shape = [1] * d
    shape[w] = -1
    colors[(w,) + tuple(idx)] = _alternating_line(
        B.sides[w] + 1, w + 1, w + 1 + d).reshape(shape)
    return EdgeColoring(t, lo, colors, support=B.region())


def color_tile(B: Box, t):
    """Colour a tile by side parity: even box, or box with one odd side."""
    odd = [a for a, s in enumerate(B.sides) if s % 2]
    if not odd:
        return color_even_box(B, t)
    if len(odd) == 1:
        return color_odd_box(B, odd[0], t)
    raise ValueError(f"tile {B.sides} has {len(odd)} odd sides; almost "
                     "k-boxes with k even never do")


def _paste(target, lo, piece, strict=True):
    """Copy the nonzero entries of an EdgeColoring into the big window
    with origin `lo`, raising on any crossing-edge conflict."""
    rel = sub(piece.lo, lo)
    sl = (slice(None),) + tuple(slice(r, r + s)
                                for r, s in zip(rel, piece.colors.shape[1:]))
    dst = target[sl]
    src = piece.colors
    mask = src != 0
    if strict:
        clash = mask & (dst != 0) & (dst != src)
        if clash.any():
            where = tuple(int(x) for x in np.argwhere(clash)[0])
            raise ValueError(f"crossing-edge colour conflict at window "
                             f"offset {where}")
    dst[mask] = src[mask]


def extend_edge_coloring(C: GridUnion, inner, t=None):
    """Extend proper edge colourings on inner grid unions to all of C.

    C and the inner components are grid unions at scale 100; the
    complement is tiled by almost 10-boxes, each tile coloured by its
    side parity, and the pieces glued -- every crossing edge is written
    from both sides and verified equal rather than assumed.
    """
    d = C.d
    if t is None:
        t = 2 * d
    check_colour_count(t, d)
    from .verify import validate_edge_certificate
    gus = []
    for gu, ec in inner:
        if ec.t != t:
            raise ValueError(f"inner colouring uses t = {ec.t}, expected {t}")
        if ec.support is None or ec.support.cells != gu.region().cells:
            raise ValueError("inner colouring does not cover its component")
        res = validate_edge_certificate(ec)
        if res != {"ok": True}:
            raise ValueError(f"inner colouring invalid: {res}")
        gus.append(gu)
    tiling = tile_complement(C, gus, 10, 10)
    cell_boxes = list(C.cell_boxes())
    lo = tuple(min(b.lo[a] for b in cell_boxes) - 1 for a in range(d))
    hi = tuple(max(b.hi[a] for b in cell_boxes) for a in range(d))
    colors = np.zeros((d,) + sub(hi, lo), dtype=np.int8)
    for tile in tiling.tiles:
        _paste(colors, lo, color_tile(tile, t))
    for gu, ec in inner:
        _paste(colors, lo, ec)
    return EdgeColoring(t, lo, colors, support=C.region(),
                        meta={"tiles": len(tiling.tiles)})


def base_torus_colors(L, d):
    """The periodic colouring of the torus: axis a alternates a+1 and
    a+1+d with colour a+1 on even coordinates. L must be even."""
    colors = np.zeros((d,) + (L,) * d, dtype=np.int8)
    for a in range(d):
        shape = [1] * d
        shape[a] = L
        colors[a] = _alternating_line(L, a + 1, a + 1 + d).reshape(shape)
    return colors


def flip_plaquette(colors, p, L):
    """Swap the four base colours around the unit square at p (both of
    p's first two coordinates even): the two eps^1 edges take colour 2
    and the two eps^2 edges colour 1. The result stays proper."""
    d = colors.ndim - 1
    if p[0] % 2 or p[1] % 2:
        raise ValueError(f"plaquette corner {p} must have even first two "
                         "coordinates")
    p = tuple(x % L for x in p)
    up = p[:1] + ((p[1] + 1) % L,) + p[2:]
    right = ((p[0] + 1) % L,) + p[1:]
    for cell in (p, up):
        colors[(0,) + cell] = 2
    for cell in (p, right):
        colors[(1,) + cell] = 1


def run_edge_pipeline(toast, t, seed=0):
    """Proper t-edge colouring of the whole torus.

    The base pattern alternates each axis; every toast component gets a
    period breaker -- a plaquette flip inside the beta-translate of a
    cube that is left untouched at its original position, so the
    component's colouring differs from its beta-shift.
    """
    params = toast.params
    d, L = params.d, params.L
    check_colour_count(t, d)
    if L % 2:
        raise ValueError(f"torus side {L} is odd: the alternation cannot "
                         "close")
    colors = base_torus_colors(L, d)
    betas = beta_sequence(toast, seed=seed)
    flips = []
    for li, level in enumerate(toast.levels):
        for ci, comp in enumerate(level):
            try:
                pb = select_period_breaker(toast, comp, betas[li])
            except ValueError as exc:
                raise ValueError(f"component ({li},{ci}): {exc}") from exc
            lo = add(pb.cube.lo, pb.beta)
            p = tuple((x + x % 2) if a < 2 else x
                      for a, x in enumerate(lo))
            flip_plaquette(colors, p, L)
            flips.append([int(x % L) for x in p])
    meta = {"seed": seed, "t": t, "betas": [list(b) for b in betas],
            "flips": flips}
    return EdgeColoring(t, (0,) * d, colors, torus=L, meta=meta)
