"""Independent validators and brute-force oracles.

Everything here re-derives the defining constraints from scratch; no code
is shared with the constructors, so a green validator is meaningful
evidence and a red one pinpoints the first violation with coordinates.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import kernels
from .geometry import Box, Region, add


def _budget(default=2_000_000):
    return int(os.environ.get("GRIDTOAST_BUDGET", default))


def violation(constraint, where, detail=""):
    return {"ok": False, "constraint": constraint,
            "where": list(where) if where is not None else None,
            "detail": detail}


OK = {"ok": True}


def validate_tiling(tiling, k=None, support=None, torus=None):
    """Check disjointness, exact cover of the declared support, and (when k
    is given) almost-k-box conformity. Returns OK or a violation dict."""
    torus = torus if torus is not None else tiling.torus
    support = support if support is not None else tiling.support
    seen = {}
    for idx, t in enumerate(tiling.tiles):
        if k is not None:
            sides = t.sides
            bad = (any(s < k or s > 2 * k for s in sides)
                   or sum(1 for s in sides if s != k) > 1)
            if bad:
                return violation("almost-k-box", t.lo,
                                 f"tile {idx} sides {sides} (k={k})")
        for c in t.cells():
            if torus is not None:
                c = tuple(x % torus for x in c)
            if c in seen:
                return violation("disjoint", c,
                                 f"tiles {seen[c]} and {idx} overlap")
            seen[c] = idx
    if support is not None:
        sup = {tuple(x % torus for x in c) for c in support.cells} \
            if torus is not None else set(support.cells)
        extra = set(seen) - sup
        if extra:
            return violation("support", sorted(extra)[0], "tile cell outside support")
        missing = sup - set(seen)
        if missing:
            return violation("support", sorted(missing)[0], "support cell uncovered")
    return OK


def _almost_boxes_at(cell, k, d):
    """All almost-k-boxes whose lexicographically least cell is `cell`."""
    for long_axis in range(d):
        for extra in range(k + 1):
            sides = [k] * d
            sides[long_axis] = k + extra
            yield Box(cell, tuple(c + s for c, s in zip(cell, sides)))
            if extra == 0:
                break  # the all-k box is the same for every long_axis


def _almost_box_shapes(k, d):
    shapes = [(k,) * d]
    for ax in range(d):
        for extra in range(1, k + 1):
            s = [k] * d
            s[ax] = k + extra
            shapes.append(tuple(s))
    return shapes


def _window_all(arr, shape):
    """Boolean array of anchors whose `shape` window is all-True in arr."""
    out = arr.astype(np.int32)
    for ax, w in enumerate(shape):
        c = np.cumsum(out, axis=ax)
        pad = [slice(None)] * arr.ndim
        head = [slice(None)] * arr.ndim
        pad[ax] = slice(w - 1, None)
        head[ax] = slice(None, -w)
        lead = c[tuple(pad)].copy()
        lead[tuple([slice(1, None) if a == ax else slice(None)
                    for a in range(arr.ndim)])] -= c[tuple(head)]
        out = lead
    return out == int(np.prod(shape))


def _window_any(arr, shape):
    """Boolean array: cell is inside some `shape` window anchored at a
    True cell of arr (arr indexed by anchors); shift-accumulate per axis."""
    cur = arr
    for ax, w in enumerate(shape):
        nxt_shape = list(cur.shape)
        nxt_shape[ax] += w - 1
        nxt = np.zeros(nxt_shape, dtype=bool)
        for s in range(w):
            sl = [slice(None)] * cur.ndim
            sl[ax] = slice(s, s + cur.shape[ax])
            nxt[tuple(sl)] |= cur
        cur = nxt
    return cur


def exact_cover_oracle(region: Region, tiles, budget=None, count=False):
    """Exhaustive exact-cover search over box tilings of `region`.

    `tiles` is either an integer k (tile by almost-k-boxes) or an explicit
    list of box side tuples (e.g. [(1,2),(2,1)] for dominoes). Returns
    (exists, one tiling as a list of Box or None), or the exact number of
    tilings when `count` is set. Branches on the lexicographically least
    free cell, where only boxes anchored at that cell can fit; prunes any
    branch that leaves some free cell coverable by no all-free box.
    """
    budget = budget if budget is not None else _budget()
    if len(region) > budget:
        raise ValueError(f"region size {len(region)} exceeds budget {budget}")
    d = region.d
    if isinstance(tiles, int):
        shapes = _almost_box_shapes(tiles, d)
    else:
        shapes = [tuple(s) for s in tiles]
    window = region.bbox()
    free = region.mask(window)
    n = int(free.sum())
    chosen = []
    nodes = 0
    node_cap = max(budget, 200 * max(n, 1))
    found = 0

    area_gcd = 0
    min_area = None
    for s in shapes:
        a = int(np.prod(s))
        area_gcd = math.gcd(area_gcd, a)
        min_area = a if min_area is None else min(min_area, a)

    def coverable_ok():
        cov = np.zeros_like(free)
        for s in shapes:
            if any(w > a for w, a in zip(s, free.shape)):
                continue
            cov |= _window_any(_window_all(free, s), s)
        if np.any(free & ~cov):
            return False
        # every free component must be fillable by whole tiles
        labels, cnt = kernels.label_components(free)
        if cnt > 1:
            sizes = np.bincount(labels[labels >= 0])
            if np.any(sizes % area_gcd) or np.any(sizes < min_area):
                return False
        return True

    max_side = max(max(s) for s in shapes)
    failed = set()

    def state_key(cell):
        # with lex-least-free branching every cell before the frontier is
        # covered and no placed box reaches beyond frontier_x + max_side,
        # so the free mask is determined by a thin band
        fx = int(cell[0])
        return (fx, free[fx:fx + max_side].tobytes())

    def solve(remaining):
        nonlocal nodes, found
        if remaining == 0:
            found += 1
            return not count
        nodes += 1
        if nodes > node_cap:
            raise ValueError(f"search budget exceeded ({node_cap} nodes)")
        idx = np.argmax(free)
        cell = np.unravel_index(idx, free.shape)
        key = None
        if not count:
            key = state_key(cell)
            if key in failed:
                return False
        for s in shapes:
            sl = tuple(slice(c, c + w) for c, w in zip(cell, s))
            if any(c + w > a for c, w, a in zip(cell, s, free.shape)):
                continue
            block = free[sl]
            if block.shape != s or not block.all():
                continue
            free[sl] = False
            if coverable_ok():
                chosen.append(Box(tuple(int(c) for c in cell),
                                  tuple(int(c) + w for c, w in zip(cell, s))))
                if solve(remaining - int(np.prod(s))):
                    free[sl] = True
                    return True
                chosen.pop()
            free[sl] = True
        if key is not None:
            failed.add(key)
        return False

    hit = solve(n)
    if count:
        return found
    if hit:
        origin = window.lo
        return True, [Box(add(b.lo, origin), add(b.hi, origin)) for b in chosen]
    return False, None


def count_patterns_oracle(family, box: Box, budget=None):
    """Exact pattern count on a box by brute-force backtracking.

    `family` is one of:
      ("full_shift", q)           -- all maps to a q-letter alphabet
      ("hom", edges)              -- graph homomorphisms into the graph
                                     given by an undirected edge set
      ("rect", [sides, ...])      -- exact tilings by the given boxes
    """
    budget = budget if budget is not None else _budget()
    kind = family[0]
    cells = sorted(box.cells())
    d = box.d
    if kind == "full_shift":
        q = family[1]
        n = q ** len(cells)
        if n > budget:
            raise ValueError("budget exceeded")
        return n

    if kind == "hom":
        edges = {frozenset(e) for e in family[1]}
        verts = sorted({v for e in family[1] for v in e})

        def adjacent(a, b):
            return frozenset((a, b)) in edges

        count = 0
        assign = {}

        def rec(i):
            nonlocal count
            if i == len(cells):
                count += 1
                if count > budget:
                    raise ValueError("budget exceeded")
                return
            c = cells[i]
            for v in verts:
                ok = True
                for ax in range(d):
                    nb = tuple(x - (1 if a == ax else 0) for a, x in enumerate(c))
                    if nb in assign and not adjacent(assign[nb], v):
                        ok = False
                        break
                if ok:
                    assign[c] = v
                    rec(i + 1)
                    del assign[c]

        rec(0)
        return count

    if kind == "rect":
        shapes = [tuple(s) for s in family[1]]
        cellset = set(cells)
        count = 0
        free = set(cellset)

        def rec():
            nonlocal count
            if not free:
                count += 1
                if count > budget:
                    raise ValueError("budget exceeded")
                return
            c = min(free)
            for s in shapes:
                bc = list(Box(c, tuple(x + l for x, l in zip(c, s))).cells())
                if all(x in free for x in bc):
                    free.difference_update(bc)
                    rec()
                    free.update(bc)

        rec()
        return count

    raise ValueError(f"unknown family kind {kind!r}")


def validate_hom_certificate(cert, toast=None):
    """Re-derive the hom-certificate constraints: vertex range, edge-of-H
    on every torus lattice edge, the v/w parity boundary condition on each
    toast component, and period breaking -- for each level i, every
    level-i component must contain a cell gamma with
    value(gamma) != value(gamma + beta_i), searched exhaustively."""
    from .homshift import component_anchor, parity_array

    H, L, d, arr = cert.H, cert.L, cert.d, cert.values
    if arr.shape != (L,) * d:
        return violation("shape", None, f"values shape {arr.shape}")
    if arr.min() < 0 or arr.max() >= H.n:
        bad = tuple(int(x) for x in
                    np.argwhere((arr < 0) | (arr >= H.n))[0])
        return violation("vertex-range", bad, f"value {int(arr[bad])}")
    for ax in range(d):
        ok = H.adj[arr, np.roll(arr, -1, axis=ax)]
        if not ok.all():
            where = tuple(int(x) for x in np.argwhere(~ok)[0])
            return violation("proper-edge", where,
                             f"axis-{ax + 1} edge maps to a non-edge of H")
    if toast is None:
        return OK
    par = parity_array(L, d)
    v, w = cert.v, cert.w
    for cid, comp in toast.all_components():
        if comp.is_root:
            continue
        win = comp.bbox().expand(1)
        m = np.zeros(win.sides, dtype=bool)
        comp.paint(m, win.lo, L)
        bd = m & kernels.dilate_linf(~m, 1)
        idx = np.argwhere(bd)
        tor = tuple((idx[:, a] + win.lo[a]) % L for a in range(d))
        pa = sum(component_anchor(comp)) % 2
        want = np.where(par[tor] == pa, v, w)
        bad = arr[tor] != want
        if bad.any():
            j = int(np.argmax(bad))
            where = tuple(int(t[j]) for t in tor)
            return violation("boundary-parity", where,
                             f"component {cid} boundary cell carries "
                             f"{int(arr[where])}")
    for li, beta in enumerate(cert.betas):
        if li >= len(toast.levels):
            break
        diff = arr != np.roll(arr, tuple(-b for b in beta),
                              axis=tuple(range(d)))
        for ci, comp in enumerate(toast.levels[li]):
            if comp.is_root:
                hit = diff.any()
            else:
                win = comp.bbox()
                m = np.zeros(win.sides, dtype=bool)
                comp.paint(m, win.lo, L)
                idx = np.argwhere(m)
                tor = tuple((idx[:, a] + win.lo[a]) % L for a in range(d))
                hit = bool(diff[tor].any())
            if not hit:
                return violation("period", None,
                                 f"component ({li},{ci}) is periodic "
                                 f"under beta = {beta}")
    return OK


def validate_rect_certificate(cert, toast=None):
    """Re-derive the rectangular-tiling constraints: every placement is a
    member of the tile set, the placements partition the support (each
    cell covered exactly once), and with a toast: no tile crosses a
    component boundary, and for each level i every level-i component
    contains a cell whose covering placement differs from the one at its
    beta_i translate -- searched exhaustively via a per-cell code array
    (tile index and within-tile offset)."""
    import itertools

    ts = cert.tileset
    d = ts.d
    P = len(cert.tiles)
    if cert.anchors.shape != (P, d):
        return violation("shape", None, f"anchor array {cert.anchors.shape}")
    if P and (cert.tiles.min() < 0 or cert.tiles.max() >= len(ts.boxes)):
        j = int(np.argmax((cert.tiles < 0) | (cert.tiles >= len(ts.boxes))))
        return violation("tile-range", j, f"tile index {int(cert.tiles[j])}")
    maxoff = max(ts.volume(t) for t in range(len(ts.boxes)))
    code = None
    if cert.torus is not None:
        L = cert.torus
        shape = (L,) * d
        count = np.zeros(shape, dtype=np.int32)
        code = np.full(shape, -1, dtype=np.int64)
        for t, b in enumerate(ts.boxes):
            A = cert.anchors[cert.tiles == t]
            if not len(A):
                continue
            for j, off in enumerate(itertools.product(
                    *(range(s) for s in b))):
                idx = tuple((A[:, a] + off[a]) % L for a in range(d))
                np.add.at(count, idx, 1)
                code[idx] = t * maxoff + j
        if not (count == 1).all():
            where = tuple(int(x) for x in np.argwhere(count != 1)[0])
            return violation("partition", where,
                             f"cell covered {int(count[where])} times")
    else:
        if cert.support is None:
            return violation("support", None,
                             "certificate has neither support nor torus")
        ms = max(max(b) for b in ts.boxes)
        win = cert.support.bbox().expand(ms)
        count = np.zeros(win.sides, dtype=np.int32)
        for t, b in enumerate(ts.boxes):
            A = cert.anchors[cert.tiles == t]
            if not len(A):
                continue
            inb = np.ones(len(A), dtype=bool)
            for a in range(d):
                inb &= (A[:, a] >= win.lo[a]) & (A[:, a] + b[a] <= win.hi[a])
            if not inb.all():
                j = int(np.argmax(~inb))
                return violation("support", tuple(int(x) for x in A[j]),
                                 "placement far outside the support")
            for off in itertools.product(*(range(s) for s in b)):
                idx = tuple(A[:, a] + off[a] - win.lo[a] for a in range(d))
                np.add.at(count, idx, 1)
        want = cert.support.mask(win).astype(np.int32)
        if not (count == want).all():
            idx0 = tuple(int(x) for x in np.argwhere(count != want)[0])
            where = tuple(x + l for x, l in zip(idx0, win.lo))
            return violation("partition", where,
                             f"cell covered {int(count[idx0])} times, "
                             f"expected {int(want[idx0])}")
    if toast is None or cert.torus is None:
        return OK
    L = cert.torus
    vols = [ts.volume(t) for t in range(len(ts.boxes))]
    for cid, comp in toast.all_components():
        if comp.is_root:
            continue
        win = comp.bbox()
        m = np.zeros(win.sides, dtype=bool)
        comp.paint(m, win.lo, L)
        tmask = np.zeros((L,) * d, dtype=bool)
        idx = np.argwhere(m)
        tmask[tuple((idx[:, a] + win.lo[a]) % L for a in range(d))] = True
        for t, b in enumerate(ts.boxes):
            A = cert.anchors[cert.tiles == t]
            if not len(A):
                continue
            s = np.zeros(len(A), dtype=np.int32)
            for off in itertools.product(*(range(x) for x in b)):
                s += tmask[tuple((A[:, a] + off[a]) % L for a in range(d))]
            bad = (s != 0) & (s != vols[t])
            if bad.any():
                j = int(np.argmax(bad))
                return violation("component-crossing",
                                 tuple(int(x) for x in A[j]),
                                 f"tile {t} crosses the boundary of "
                                 f"component {cid}")
    betas = cert.meta.get("betas")
    if betas is None:
        if cert.meta.get("degenerate"):
            return OK
        return violation("period", None, "certificate carries no "
                         "translation vectors")
    for li, beta in enumerate(betas):
        if li >= len(toast.levels):
            break
        diff = code != np.roll(code, tuple(-b for b in beta),
                               axis=tuple(range(d)))
        for ci, comp in enumerate(toast.levels[li]):
            if comp.is_root:
                hit = diff.any()
            else:
                win = comp.bbox()
                m = np.zeros(win.sides, dtype=bool)
                comp.paint(m, win.lo, L)
                idx = np.argwhere(m)
                tor = tuple((idx[:, a] + win.lo[a]) % L for a in range(d))
                hit = bool(diff[tor].any())
            if not hit:
                return violation("period", None,
                                 f"component ({li},{ci}) is periodic "
                                 f"under beta = {beta}")
    return OK


def _shift_in(arr, a, fill=0):
    """arr shifted one step towards lower axis-a indices, padding with
    `fill`: out[v] = arr[v + e^a] inside the window."""
    out = np.full_like(arr, fill)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[a] = slice(1, None)
    dst[a] = slice(None, -1)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def _shift_out(arr, a, fill=0):
    """arr shifted one step towards higher axis-a indices: out[v] =
    arr[v - e^a] inside the window."""
    out = np.full_like(arr, fill)
    src = [slice(None)] * arr.ndim
    dst = [slice(None)] * arr.ndim
    src[a] = slice(None, -1)
    dst[a] = slice(1, None)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def validate_edge_certificate(ec, toast=None):
    """Re-derive the proper edge colouring constraints: colours in range
    exactly on the in-scope edges, the 2d edges at every vertex pairwise
    distinct, outward stubs coloured by their axis on windows, and with a
    toast: period breaking per level and component, exhaustively."""
    t, d = ec.t, ec.d
    arr = ec.colors
    if t < 2 * d:
        return violation("colour-count", None, f"t = {t} below 2d = {2 * d}")
    if ec.torus is not None:
        L = ec.torus
        if arr.shape != (d,) + (L,) * d:
            return violation("shape", None, f"colour shape {arr.shape}")
        if arr.min() < 1 or arr.max() > t:
            bad = tuple(int(x) for x in
                        np.argwhere((arr < 1) | (arr > t))[0])
            return violation("colour-range", bad, f"colour {int(arr[bad])}")
        slots = []
        for a in range(d):
            slots.append(arr[a])
            slots.append(np.roll(arr[a], 1, axis=a))
    else:
        if ec.support is None:
            return violation("support", None, "no support and no torus")
        win = ec.window()
        if not (win.contains(ec.support.bbox().lo)
                and win.contains(tuple(x - 1 for x in ec.support.bbox().hi))):
            return violation("support", None, "support leaves the window")
        mask = ec.support.mask(win)
        for a in range(d):
            nbr = _shift_in(mask, a, fill=False)
            scope = mask | nbr
            off = (arr[a] != 0) & ~scope
            if off.any():
                bad = tuple(int(x) for x in np.argwhere(off)[0])
                return violation("scope", add(win.lo, bad),
                                 f"colour on an out-of-scope axis-{a} edge")
            low = (arr[a] < 1) | (arr[a] > t)
            miss = scope & low
            if miss.any():
                bad = tuple(int(x) for x in np.argwhere(miss)[0])
                return violation("colour-range", add(win.lo, bad),
                                 f"axis-{a} edge coloured {int(arr[a][bad])}")
            stubs = scope & (mask ^ nbr) & (arr[a] != a + 1)
            if stubs.any():
                bad = tuple(int(x) for x in np.argwhere(stubs)[0])
                return violation("boundary", add(win.lo, bad),
                                 f"outward axis-{a} stub coloured "
                                 f"{int(arr[a][bad])}, expected {a + 1}")
        slots = []
        for a in range(d):
            slots.append(np.where(mask, arr[a], 0))
            slots.append(np.where(mask, _shift_out(arr[a], a), 0))
    for i in range(2 * d):
        for j in range(i + 1, 2 * d):
            clash = (slots[i] == slots[j]) & (slots[i] != 0)
            if clash.any():
                bad = tuple(int(x) for x in np.argwhere(clash)[0])
                where = bad if ec.torus is not None \
                    else add(ec.window().lo, bad)
                return violation("proper", where,
                                 f"vertex sees colour {int(slots[i][bad])} "
                                 "twice")
    if toast is None:
        return OK
    if ec.torus is None:
        return violation("period", None,
                         "period checks need a torus certificate")
    betas = ec.meta.get("betas")
    if not betas:
        return violation("period", None,
                         "certificate carries no translation vectors")
    L = ec.torus
    for li, beta in enumerate(betas):
        if li >= len(toast.levels):
            break
        shift = tuple(-b for b in beta)
        diff = np.zeros((L,) * d, dtype=bool)
        for a in range(d):
            diff |= arr[a] != np.roll(arr[a], shift, axis=tuple(range(d)))
        for ci, comp in enumerate(toast.levels[li]):
            if comp.is_root:
                hit = bool(diff.any())
            else:
                win = comp.bbox()
                m = np.zeros(win.sides, dtype=bool)
                comp.paint(m, win.lo, L)
                w = np.argwhere(m)
                tor = tuple((w[:, a] + win.lo[a]) % L for a in range(d))
                hit = bool(diff[tor].any())
            if not hit:
                return violation("period", None,
                                 f"component ({li},{ci}) is periodic "
                                 f"under beta = {beta}")
    return OK


def validate_ham_certificate(cert, toast=None):
    """Re-derive the torus Hamiltonian-cycle constraints: direction codes
    in range, the successor map is a permutation (every cell has in-degree
    one), the walk from the origin closes after exactly L^d steps (one
    cycle), and with a toast: period breaking per level, exhaustively."""
    L, d = cert.L, cert.d
    arr = cert.codes
    if arr.shape != (L,) * d:
        return violation("shape", None, f"codes shape {arr.shape}")
    if arr.min() < 0 or arr.max() >= 2 * d:
        bad = tuple(int(x) for x in
                    np.argwhere((arr < 0) | (arr >= 2 * d))[0])
        return violation("code-range", bad, f"code {int(arr[bad])}")
    idx = np.arange(L ** d, dtype=np.int64).reshape(arr.shape)
    succ = np.empty(arr.shape, dtype=np.int64)
    for c in range(2 * d):
        mask = arr == c
        if mask.any():
            shift = -1 if c < d else 1
            succ[mask] = np.roll(idx, shift, axis=c % d)[mask]
    counts = np.bincount(succ.ravel(), minlength=L ** d)
    if (counts != 1).any():
        j = int(np.argmax(counts != 1))
        where = tuple(int(x) for x in np.unravel_index(j, arr.shape))
        return violation("in-degree", where,
                         f"cell has in-degree {int(counts[j])}")
    n = kernels.follow_cycle(succ.ravel(), 0)
    if n != L ** d:
        return violation("cycle-count", None,
                         f"cycle through the origin has length {n}, "
                         f"expected {L ** d}")
    if toast is None:
        return OK
    betas = cert.meta.get("betas")
    if not betas:
        return violation("period", None,
                         "certificate carries no translation vectors")
    for li, beta in enumerate(betas):
        if li >= len(toast.levels):
            break
        diff = arr != np.roll(arr, tuple(-b for b in beta),
                              axis=tuple(range(d)))
        for ci, comp in enumerate(toast.levels[li]):
            if comp.is_root:
                hit = bool(diff.any())
            else:
                win = comp.bbox()
                m = np.zeros(win.sides, dtype=bool)
                comp.paint(m, win.lo, L)
                w = np.argwhere(m)
                tor = tuple((w[:, a] + win.lo[a]) % L for a in range(d))
                hit = bool(diff[tor].any())
            if not hit:
                return violation("period", None,
                                 f"component ({li},{ci}) is periodic "
                                 f"under beta = {beta}")
    return OK


def domino_count_transfer_matrix(w, h):
    """Number of domino tilings of a w x h box via a column-by-column
    transfer matrix over row occupancy profiles."""
    if (w * h) % 2:
        return 0
    profiles = 1 << h

    def fills(prev):
        """Ways to complete a column given cells already covered by
        horizontal dominoes from the previous column; yields the profile
        of horizontal dominoes protruding into the next column."""
        out = []

        def rec(row, protrude):
            if row == h:
                out.append(protrude)
                return
            if prev & (1 << row):
                rec(row + 1, protrude)
                return
            # horizontal domino into the next column
            rec(row + 1, protrude | (1 << row))
            # vertical domino with the cell below
            if row + 1 < h and not prev & (1 << (row + 1)):
                rec(row + 2, protrude)

        rec(0, 0)
        return out

    vec = np.zeros(profiles, dtype=object)
    vec[0] = 1
    table = [fills(p) for p in range(profiles)]
    for _ in range(w):
        nxt = np.zeros(profiles, dtype=object)
        for p in range(profiles):
            if vec[p]:
                for q in table[p]:
                    nxt[q] += vec[p]
        vec = nxt
    return int(vec[0])


def entropy_from_count(count, volume):
    return math.log(count) / volume
