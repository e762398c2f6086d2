"""Shared pipeline plumbing: period-breaking translation vectors.

Each toast level i (the torus root included) gets a vector beta_i whose
Chebyshev norm lies in [r_i/4, r_i/2].  Directions cycle through the pool
of primitive integer vectors, rotated by the seed and the level index, so
that as far as the window scale allows every direction eventually occurs.
"""

import itertools
import math


def primitive_directions(d, max_entry=2):
    """Primitive integer vectors with entries in [-max_entry, max_entry],
    first nonzero entry positive, sorted by (Chebyshev norm, lex)."""
    out = []
    for v in itertools.product(range(-max_entry, max_entry + 1), repeat=d):
        nz = [x for x in v if x]
        if not nz or nz[0] < 0:
            continue
        if math.gcd(*(abs(x) for x in v)) != 1:
            continue
        out.append(v)
    out.sort(key=lambda u: (max(abs(x) for x in u), u))
    return out


def beta_sequence(toast, seed=0, min_norm=1, even=False):
    """One translation vector per toast level, root included.

    For level radius r the vector is an integer multiple of a primitive
    direction with Chebyshev norm in [r/4, r/2] and at least min_norm;
    `even` additionally forces an even coordinate sum (so a vector never
    swaps checkerboard parity classes).
    """
    params = toast.params
    pool = primitive_directions(params.d)
    rs = list(params.r_seq) + [params.L]
    betas = []
    for i, r in enumerate(rs):
        beta = None
        for j in range(len(pool)):
            v = pool[(seed + i + j) % len(pool)]
            a = max(abs(x) for x in v)
            for m in (r // (2 * a), r // (2 * a) - 1):
                if m < 1:
                    continue
                norm = m * a
                if 4 * norm < r or 2 * norm > r or norm < min_norm:
                    continue
                if even and (m * sum(v)) % 2:
                    continue
                beta = tuple(m * x for x in v)
                break
            if beta is not None:
                break
        if beta is None:
            raise ValueError(
                f"no admissible translation vector for level {i} "
                f"(r={r}, min_norm={min_norm})")
        betas.append(beta)
    return betas
