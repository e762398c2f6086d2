"""Renderers for certificate files: SVG for d=2, axis-slice ASCII for d=3.

All renderers consume the JSON dict of a certificate (the "family" field
selects the layout) and return text; `render` writes it to a path chosen
by extension.
"""

from __future__ import annotations

import numpy as np

PALETTE = ["#4c72b0", "#dd8452", "#55a35c", "#c44e52", "#8172b3",
           "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd",
           "#393b79", "#ad494a"]

GLYPHS = "0123456789abcdefghijklmnopqrstuvwxyz"

MAX_RENDER_SIDE = 512


def _fill(v):
    return PALETTE[int(v) % len(PALETTE)]


def _grid_and_kind(obj):
    """Dense value grid plus a drawing kind for a certificate dict."""
    family = obj.get("family")
    if family == "hom":
        L, d = obj["L"], obj["d"]
        arr = np.array(obj["values"]).reshape((L,) * d)
        return arr, "cells"
    if family == "ham":
        L, d = obj["L"], obj["d"]
        arr = np.array(obj["step"]).reshape((L,) * d)
        return arr, "steps"
    if family == "edge":
        d, shape = obj["d"], tuple(obj["shape"])
        arr = np.array(obj["colors"]).reshape((d,) + shape)
        return arr, "edges"
    if family == "rect":
        if obj.get("torus") is not None:
            L = obj["torus"]
            d = len(obj["placements"][0][1])
            arr = -np.ones((L,) * d, dtype=np.int64)
            lo = (0,) * d
        else:
            anchors = np.array([p[1] for p in obj["placements"]])
            sides = np.array([obj["tiles"]["boxes"][p[0]]
                              for p in obj["placements"]])
            lo = anchors.min(axis=0)
            hi = (anchors + sides).max(axis=0)
            arr = -np.ones(tuple(hi - lo), dtype=np.int64)
            L = None
        for i, (t, a) in enumerate(obj["placements"]):
            sides = obj["tiles"]["boxes"][t]
            idx = tuple(slice(x - o, x - o + s)
                        for x, o, s in zip(a, lo, sides))
            if L is None:
                arr[idx] = i
            else:
                for c in np.ndindex(*sides):
                    arr[tuple((x + y) % L for x, y in zip(a, c))] = i
        return arr, "cells"
    raise ValueError(f"cannot render family {family!r}")


def _steps(d):
    """Direction code -> unit vector: codes 0..d-1 step +e, d..2d-1 -e."""
    out = {}
    for a in range(d):
        e = [0] * d
        e[a] = 1
        out[a] = tuple(e)
        out[d + a] = tuple(-x for x in e)
    return out


def to_svg(obj, cell=8):
    """SVG text for a d=2 certificate."""
    arr, kind = _grid_and_kind(obj)
    grid = arr[0] if kind == "edges" else arr
    if grid.ndim != 2:
        raise ValueError("SVG rendering is for d = 2; use ASCII for d = 3")
    h, wdt = grid.shape
    if max(h, wdt) > MAX_RENDER_SIDE:
        raise ValueError(f"window side {max(h, wdt)} exceeds the render "
                         f"limit {MAX_RENDER_SIDE}")
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{wdt * cell}" height="{h * cell}" '
             f'viewBox="0 0 {wdt * cell} {h * cell}">']
    if kind == "cells":
        for (x, y), v in np.ndenumerate(grid):
            if v < 0:
                continue
            parts.append(f'<rect x="{y * cell}" y="{x * cell}" '
                         f'width="{cell}" height="{cell}" '
                         f'fill="{_fill(v)}" stroke="#fff" '
                         f'stroke-width="0.5"/>')
    elif kind == "steps":
        steps = _steps(2)
        half = cell // 2
        for (x, y), v in np.ndenumerate(grid):
            if int(v) not in steps:
                continue
            dx, dy = steps[int(v)]
            x0, y0 = y * cell + half, x * cell + half
            parts.append(f'<line x1="{x0}" y1="{y0}" '
                         f'x2="{x0 + dy * cell}" y2="{y0 + dx * cell}" '
                         f'stroke="#333" stroke-width="1.2"/>')
            parts.append(f'<circle cx="{x0}" cy="{y0}" r="1.5" '
                         f'fill="#c44e52"/>')
    else:
        half = cell // 2
        for a in range(2):
            for (x, y), v in np.ndenumerate(arr[a]):
                if v == 0:
                    continue
                x0, y0 = y * cell + half, x * cell + half
                dx, dy = (cell, 0) if a == 0 else (0, cell)
                parts.append(f'<line x1="{x0}" y1="{y0}" '
                             f'x2="{x0 + dy}" y2="{y0 + dx}" '
                             f'stroke="{_fill(v - 1)}" '
                             f'stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def to_ascii(obj, index=None):
    """ASCII text for a d=3 certificate: one axis-1 slice (default the
    middle one), values as glyphs, unset cells as '.'."""
    arr, kind = _grid_and_kind(obj)
    grid = arr[0] if kind == "edges" else arr
    if grid.ndim == 2:
        plane = grid
        head = ""
    elif grid.ndim == 3:
        if index is None:
            index = grid.shape[0] // 2
        plane = grid[index]
        head = f"slice x1 = {index}\n"
    else:
        raise ValueError(f"cannot render a {grid.ndim}-dimensional window")
    if max(plane.shape) > MAX_RENDER_SIDE:
        raise ValueError(f"window side {max(plane.shape)} exceeds the "
                         f"render limit {MAX_RENDER_SIDE}")
    rows = []
    for row in plane:
        rows.append("".join("." if v < 0 else GLYPHS[int(v) % len(GLYPHS)]
                            for v in row))
    return head + "\n".join(rows) + "\n"


def render(obj, path, index=None):
    """Write a certificate render chosen by the extension of `path`."""
    if str(path).endswith(".svg"):
        text = to_svg(obj)
    elif str(path).endswith(".txt"):
        text = to_ascii(obj, index=index)
    else:
        raise ValueError(f"unsupported render target {path!r}: "
                         "use .svg or .txt")
    with open(path, "w") as fh:
        fh.write(text)
    return text
