"""Marker machinery for pattern collections on k-boxes.

A pattern family enumerates, for each n, the legal patterns on the box
[0, nk)^d.  Markers are pattern sets M_t whose elements clash with every
nontrivial translate of each other: for a, b in M_t and 0 < |gamma| <
tk - r the shifted pattern sigma^gamma(a) disagrees with b somewhere on
the overlap.  `build_markers` assembles candidate marker sets from a
phase-packed boundary shell and a rigid centre, then verifies the marker
property exhaustively rather than trusting the construction.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .verify import _budget


class PatternFamily:
    """Legal patterns over the alphabet under a local constraint.

    `local_ok(arr, cell)` judges the value at `cell` against its already
    assigned neighbours (unset cells hold -1); a full assignment is legal
    iff every cell passes.  Enumeration backtracks over cells in raster
    order, so outputs are deterministic.  `gap` is the separation at
    which patterns of the family always extend to a common legal
    pattern (0 when any two patterns coexist).
    """

    def __init__(self, name, alphabet, d, k, local_ok, gap=0):
        self.name = name
        self.alphabet = tuple(alphabet)
        self.d = d
        self.k = k
        self.local_ok = local_ok
        self.gap = gap

    def __repr__(self):
        return (f"PatternFamily({self.name!r}, d={self.d}, k={self.k}, "
                f"|alphabet|={len(self.alphabet)})")

    def contains(self, arr):
        """True iff the fully assigned array is a legal pattern."""
        if (arr < 0).any():
            return False
        return all(self.local_ok(arr, tuple(c)) for c in np.ndindex(arr.shape))

    def template_ok(self, arr):
        """True iff the assigned cells of a partial array conflict nowhere."""
        return all(self.local_ok(arr, tuple(c))
                   for c in map(tuple, np.argwhere(arr >= 0)))

    def complete(self, template, budget=None):
        """All legal completions of a partial array (-1 marks free cells)."""
        budget = budget if budget is not None else _budget(100_000)
        if not self.template_ok(template):
            return []
        arr = template.copy()
        cells = [tuple(c) for c in np.argwhere(arr < 0)]
        out = []

        def rec(i):
            if i == len(cells):
                if len(out) >= budget:
                    raise ValueError(f"completion budget exceeded ({budget})")
                out.append(arr.copy())
                return
            c = cells[i]
            for v in self.alphabet:
                arr[c] = v
                if self.local_ok(arr, c):
                    rec(i + 1)
            arr[c] = -1

        rec(0)
        return out

    def enumerate_box(self, sides, budget=None):
        """All legal patterns on a box with the given sides."""
        return self.complete(-np.ones(tuple(sides), dtype=np.int64), budget)

    def patterns(self, n, budget=None):
        """All legal patterns on [0, nk)^d."""
        return self.enumerate_box((n * self.k,) * self.d, budget)

    # the enumerator under its collection-style name
    generator = patterns

    def count(self, sides, budget=None):
        """Exact number of legal patterns on a box with the given sides."""
        budget = budget if budget is not None else _budget(100_000)
        arr = -np.ones(tuple(sides), dtype=np.int64)
        cells = [tuple(c) for c in np.ndindex(arr.shape)]
        total = 0

        def rec(i):
            nonlocal total
            if i == len(cells):
                total += 1
                if total > budget:
                    raise ValueError(f"count budget exceeded ({budget})")
                return
            c = cells[i]
            for v in self.alphabet:
                arr[c] = v
                if self.local_ok(arr, c):
                    rec(i + 1)
            arr[c] = -1

        rec(0)
        return total


def _neighbors(cell, shape):
    for a in range(len(shape)):
        for s in (-1, 1):
            nb = tuple(x + (s if i == a else 0) for i, x in enumerate(cell))
            if all(0 <= x < w for x, w in zip(nb, shape)):
                yield a, s, nb


def full_shift_family(q, d, k=1):
    """Every map to a q-letter alphabet is legal."""
    return PatternFamily(f"full-{q}-shift", range(q), d, k,
                         lambda arr, cell: True, gap=0)


def hom_shift_family(q, d, k=1):
    """Homomorphisms to the complete graph K_q: proper q-colourings."""

    def ok(arr, cell):
        v = arr[cell]
        for _, _, nb in _neighbors(cell, arr.shape):
            if arr[nb] == v:
                return False
        return True

    return PatternFamily(f"hom-K{q}", range(q), d, k, ok, gap=2)


def domino_family(d=2, k=2):
    """Exact domino tilings; cell value 2a+(1-s)//2 points to the partner
    at cell + s*eps^(a+1)."""

    def ok(arr, cell):
        v = int(arr[cell])
        a, s = divmod(v, 2)
        s = 1 - 2 * s
        partner = tuple(x + (s if i == a else 0) for i, x in enumerate(cell))
        if not all(0 <= x < w for x, w in zip(partner, arr.shape)):
            return False
        opp = 2 * a + (1 - (-s)) // 2
        for ax, sg, nb in _neighbors(cell, arr.shape):
            w = arr[nb]
            if w < 0:
                continue
            here = nb == partner
            back = w == 2 * ax + (1 - (-sg)) // 2
            if here != back:
                return False
        return True

    return PatternFamily("dominoes", range(2 * d), d, k, ok, gap=0)


def clashes(a, b, gamma):
    """True iff sigma^gamma(a) and b disagree somewhere on their overlap
    (false when the overlap is empty)."""
    gamma = tuple(int(g) for g in gamma)
    lo = [max(g, 0) for g in gamma]
    hi = [min(g + sa, sb) for g, sa, sb in zip(gamma, a.shape, b.shape)]
    if any(l >= h for l, h in zip(lo, hi)):
        return False
    asl = tuple(slice(l - g, h - g) for l, h, g in zip(lo, hi, gamma))
    bsl = tuple(slice(l, h) for l, h in zip(lo, hi))
    return bool((a[asl] != b[bsl]).any())


def filter_no_period(patterns, r):
    """The patterns that clash with every nonzero self-shift in [-r,r]^d."""
    out = []
    for a in patterns:
        d = a.ndim
        if all(clashes(a, a, g)
               for g in itertools.product(range(-r, r + 1), repeat=d)
               if any(g)):
            out.append(a)
    return out


def check_marker_property(M, r):
    """Exhaustively test the marker property with tolerance r.

    For all a, b in M and |gamma| < min(side) - r, sigma^gamma(a) must
    clash with b unless gamma = 0 and a = b.  Returns {"ok": True} or
    {"ok": False, "witness": {"a": i, "b": j, "gamma": [...]}} with the
    first violating pair (by index into M).
    """
    M = list(M)
    if not M:
        return {"ok": True}
    shape = M[0].shape
    if any(p.shape != shape for p in M):
        raise ValueError("marker patterns must share a common box")
    pats = np.stack(M)
    bound = min(shape) - r
    d = len(shape)
    for gamma in itertools.product(range(-(bound - 1), bound), repeat=d):
        if bound <= 1:
            break
        lo = [max(g, 0) for g in gamma]
        hi = [min(g + s, s) for g, s in zip(gamma, shape)]
        asl = tuple(slice(l - g, h - g) for l, h, g in zip(lo, hi, gamma))
        bsl = tuple(slice(l, h) for l, h in zip(lo, hi))
        A = pats[(slice(None),) + asl].reshape(len(M), -1)
        B = pats[(slice(None),) + bsl].reshape(len(M), -1)
        agree = ~(A[:, None, :] != B[None, :, :]).any(axis=2)
        if not any(gamma):
            np.fill_diagonal(agree, False)
        if agree.any():
            i, j = map(int, np.argwhere(agree)[0])
            return {"ok": False,
                    "witness": {"a": i, "b": j, "gamma": list(gamma)}}
    return {"ok": True}


class MarkerSet:
    """A verified marker set: patterns on [0, tk)^d with tolerance r."""

    def __init__(self, family_name, t, k, patterns, r, meta=None):
        self.family_name = family_name
        self.t = t
        self.k = k
        self.patterns = list(patterns)
        self.r = r
        self.meta = meta or {}

    def __len__(self):
        return len(self.patterns)

    def to_json(self):
        return {"family": self.family_name, "t": self.t, "k": self.k,
                "r": self.r,
                "patterns": [p.tolist() for p in self.patterns],
                "meta": {k: self.meta[k] for k in sorted(self.meta)}}

    @staticmethod
    def from_json(obj):
        pats = [np.array(p, dtype=np.int64) for p in obj["patterns"]]
        return MarkerSet(obj["family"], obj["t"], obj["k"], pats, obj["r"],
                         meta=dict(obj.get("meta", {})))


def _depth(shape):
    """L-infinity distance of each cell to the boundary of the box."""
    grids = np.meshgrid(*(np.arange(s) for s in shape), indexing="ij")
    return np.min([np.minimum(g, s - 1 - g)
                   for g, s in zip(grids, shape)], axis=0)


def build_markers(family, t, params):
    """Marker set on [0, tk)^d from a phased shell and a rigid centre.

    The boundary of each marker is a stack of concentric annuli; annulus
    i carries the periodic packing of `a_prime` shifted by `phases[i]`,
    so a packing copy that touches the annulus counts in clipped form --
    its cells inside the annulus are pinned.  (Pinning overhanging
    copies in full would constrain neighbouring annuli of a different
    phase inconsistently once the annuli sit at relaxed widths.)  The
    central box carries `a_second` at offset `m_bar`; remaining cells
    range over all legal completions.  The marker property with
    tolerance `r` is verified exhaustively before returning.

    params: a_prime, a_second (patterns from `filter_no_period`), r,
    and optionally width (annulus width, default the a_prime side), gap
    (between annuli, default 0), phases (default the diagonal of
    [0, p)^d with p the packing period), m (packing gap, default the
    family gap; nonzero needs an explicit fundamental domain x_cell),
    m_bar (centre offset, default 0), budget.
    """
    ap = np.asarray(params["a_prime"])
    asec = np.asarray(params["a_second"])
    r = params["r"]
    d = family.d
    S = t * family.k
    na = ap.shape[0]
    if ap.shape != (na,) * d:
        raise ValueError(f"a_prime must be a cube, got {ap.shape}")
    m = params.get("m", family.gap if "x_cell" in params else 0)
    p = na + m
    if m == 0:
        x_cell = ap
    else:
        x_cell = np.asarray(params["x_cell"]) if "x_cell" in params else None
        if x_cell is None or x_cell.shape != (p,) * d:
            raise ValueError("packing gap m > 0 needs a fundamental domain "
                             f"x_cell of side {p}")
    w = params.get("width", na)
    g = params.get("gap", 0)
    phases = [tuple(ph) for ph in
              params.get("phases", [(i,) * d for i in range(p)])]
    theta = len(phases) * (w + g)
    cs = S - 2 * theta
    mb = params.get("m_bar", 0)
    mb = (mb,) * d if np.isscalar(mb) else tuple(mb)
    need = asec.shape[0] + max(mb)
    if cs < need:
        raise ValueError(f"layout infeasible at t = {t}: centre side {cs} "
                         f"cannot hold the a_second block ({need} needed)")

    template = -np.ones((S,) * d, dtype=np.int64)
    depth = _depth(template.shape)

    def x_of(idx, gamma):
        rel = tuple((i - gm) % p for i, gm in zip(idx, gamma))
        return x_cell[rel]

    for i, gamma in enumerate(phases):
        ring = (depth >= i * (w + g)) & (depth < i * (w + g) + w)
        for idx in map(tuple, np.argwhere(ring)):
            val = x_of(idx, gamma)
            if template[idx] >= 0 and template[idx] != val:
                raise ValueError(f"empty marker set: annulus phases "
                                 f"conflict at cell {idx}")
            template[idx] = val

    csl = tuple(slice(theta + o, theta + o + s)
                for o, s in zip(mb, asec.shape))
    block = template[csl]
    if ((block >= 0) & (block != asec)).any():
        raise ValueError("empty marker set: the centre block conflicts "
                         "with the shell")
    template[csl] = asec

    pats = family.complete(template, budget=params.get("budget"))
    if not pats:
        raise ValueError("empty marker set: the template admits no legal "
                         "completion")
    res = check_marker_property(pats, r)
    if not res["ok"]:
        wit = res["witness"]
        raise ValueError(f"marker property fails with tolerance {r}: "
                         f"patterns {wit['a']}, {wit['b']} at gamma = "
                         f"{tuple(wit['gamma'])}")
    meta = {"phases": [list(ph) for ph in phases], "width": w, "gap": g,
            "theta": theta, "m_bar": list(mb)}
    return MarkerSet(family.name, t, family.k, pats, r, meta=meta)


def entropy_estimate(family, n_max, budget=None):
    """Exact entropy estimates (1/(nk)^d) log|C_{[0,nk)^d}| for n <= n_max.

    Returns {"entries": [(n, count, estimate), ...], "aborted_at": n or
    None}; enumeration past the count budget aborts with the partial
    results and the offending n reported, never silently truncated.
    """
    entries = []
    aborted = None
    for n in range(1, n_max + 1):
        sides = (n * family.k,) * family.d
        try:
            c = family.count(sides, budget=budget)
        except ValueError:
            aborted = n
            break
        est = math.log(c) / (n * family.k) ** family.d if c else float("-inf")
        entries.append((n, c, est))
    return {"entries": entries, "aborted_at": aborted}
