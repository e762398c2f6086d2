"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Set GRIDTOAST_NUMBA=0 to force the numpy implementations (useful for
debugging and for the benchmark in benchmarks/bench_kernels.py). The two
paths are exercised against each other in the test suite.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("GRIDTOAST_NUMBA", "1") != "0"

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

def _np_label_components_fix(mask):
    """Pure-numpy component labelling: neighbour-min propagation to fixpoint."""
    labels = np.full(mask.shape, -1, dtype=np.int64)
    if not mask.any():
        return labels, 0
    big = np.iinfo(np.int64).max
    cur = np.where(mask, np.arange(mask.size, dtype=np.int64).reshape(mask.shape), big)
    changed = True
    while changed:
        nxt = cur.copy()
        for ax in range(mask.ndim):
            for shift in (1, -1):
                neigh = np.full(mask.shape, big, dtype=np.int64)
                if shift == 1:
                    src = [slice(None)] * mask.ndim
                    dst = [slice(None)] * mask.ndim
                    src[ax] = slice(1, None)
                    dst[ax] = slice(None, -1)
                else:
                    src = [slice(None)] * mask.ndim
                    dst = [slice(None)] * mask.ndim
                    src[ax] = slice(None, -1)
                    dst[ax] = slice(1, None)
                neigh[tuple(dst)] = cur[tuple(src)]
                np.minimum(nxt, np.where(mask, neigh, big), out=nxt)
        changed = not np.array_equal(nxt, cur)
        cur = nxt
    roots, inv = np.unique(cur[mask], return_inverse=True)
    labels[mask] = inv
    return labels, len(roots)


if USE_NUMBA:

    @njit(cache=True)
    def _nb_label_flat(mask_flat, shape, strides):
        n = mask_flat.size
        labels = np.full(n, -1, dtype=np.int64)
        stack = np.empty(n, dtype=np.int64)
        ndim = shape.size
        count = 0
        for start in range(n):
            if mask_flat[start] and labels[start] < 0:
                top = 0
                stack[0] = start
                labels[start] = count
                while top >= 0:
                    idx = stack[top]
                    top -= 1
                    rem = idx
                    for ax in range(ndim):
                        coord = rem // strides[ax]
                        rem = rem % strides[ax]
                        if coord > 0:
                            j = idx - strides[ax]
                            if mask_flat[j] and labels[j] < 0:
                                labels[j] = count
                                top += 1
                                stack[top] = j
                        if coord < shape[ax] - 1:
                            j = idx + strides[ax]
                            if mask_flat[j] and labels[j] < 0:
                                labels[j] = count
                                top += 1
                                stack[top] = j
                count += 1
        return labels, count

    @njit(cache=True)
    def _nb_follow_cycle(succ, start):
        n = succ.size
        cur = start
        length = 0
        for _ in range(n + 1):
            cur = succ[cur]
            length += 1
            if cur == start:
                return length
            if cur < 0:
                return -1
        return -1


def label_components(mask):
    """Connected components (axis adjacency) of a boolean ndarray.

    Returns (labels, count) where labels is int64 with -1 off-mask.
    """
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    if USE_NUMBA:
        shape = np.array(mask.shape, dtype=np.int64)
        strides = np.empty(mask.ndim, dtype=np.int64)
        acc = 1
        for ax in range(mask.ndim - 1, -1, -1):
            strides[ax] = acc
            acc *= mask.shape[ax]
        labels, count = _nb_label_flat(mask.ravel(), shape, strides)
        return labels.reshape(mask.shape), count
    return _np_label_components_fix(mask)


def follow_cycle(succ, start):
    """Length of the cycle through `start` in a successor array, or -1 if the
    walk escapes (hits an index marked -1) or fails to close within n steps."""
    succ = np.ascontiguousarray(succ, dtype=np.int64)
    if USE_NUMBA:
        return int(_nb_follow_cycle(succ, start))
    n = succ.size
    cur = start
    length = 0
    for _ in range(n + 1):
        cur = int(succ[cur])
        length += 1
        if cur == start:
            return length
        if cur < 0:
            return -1
    return -1


def dilate_linf(mask, m):
    """Chebyshev dilation: cells within l-inf distance m of the mask."""
    out = np.asarray(mask, dtype=np.bool_).copy()
    for ax in range(mask.ndim):
        acc = out.copy()
        for shift in range(1, m + 1):
            sl_lo = [slice(None)] * mask.ndim
            dl_lo = [slice(None)] * mask.ndim
            sl_lo[ax] = slice(shift, None)
            dl_lo[ax] = slice(None, -shift)
            acc[tuple(dl_lo)] |= out[tuple(sl_lo)]
            sl_hi = [slice(None)] * mask.ndim
            dl_hi = [slice(None)] * mask.ndim
            sl_hi[ax] = slice(None, -shift)
            dl_hi[ax] = slice(shift, None)
            acc[tuple(dl_hi)] |= out[tuple(sl_hi)]
        out = acc
    return out
