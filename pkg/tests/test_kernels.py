import numpy as np

from gridtoast import kernels


def brute_components(mask):
    seen = np.zeros(mask.shape, dtype=bool)
    count = 0
    for idx in np.argwhere(mask):
        idx = tuple(idx)
        if seen[idx]:
            continue
        count += 1
        stack = [idx]
        seen[idx] = True
        while stack:
            cur = stack.pop()
            for ax in range(mask.ndim):
                for s in (-1, 1):
                    nb = list(cur)
                    nb[ax] += s
                    nb = tuple(nb)
                    if all(0 <= nb[a] < mask.shape[a] for a in range(mask.ndim)):
                        if mask[nb] and not seen[nb]:
                            seen[nb] = True
                            stack.append(nb)
    return count


def test_label_components_random():
    rng = np.random.default_rng(3)
    for _ in range(30):
        d = int(rng.integers(1, 4))
        shape = tuple(int(rng.integers(1, 8)) for _ in range(d))
        mask = rng.random(shape) < 0.5
        labels, count = kernels.label_components(mask)
        assert count == brute_components(mask)
        assert (labels >= 0).sum() == mask.sum()
        assert np.all((labels >= 0) == mask)
        if count:
            assert set(np.unique(labels[mask])) == set(range(count))


def test_label_numpy_numba_agree():
    rng = np.random.default_rng(4)
    for _ in range(10):
        mask = rng.random((9, 9)) < 0.55
        la, ca = kernels.label_components(mask)
        lb, cb = kernels._np_label_components_fix(np.ascontiguousarray(mask))
        assert ca == cb
        # same partition up to relabeling
        if ca:
            pairs = {(int(a), int(b)) for a, b in zip(la[mask], lb[mask])}
            assert len({p[0] for p in pairs}) == len(pairs) == len({p[1] for p in pairs})


def test_follow_cycle():
    succ = np.array([1, 2, 0, 4, 3], dtype=np.int64)
    assert kernels.follow_cycle(succ, 0) == 3
    assert kernels.follow_cycle(succ, 3) == 2
    bad = np.array([1, -1, 0], dtype=np.int64)
    assert kernels.follow_cycle(bad, 0) == -1


def test_dilate_linf():
    mask = np.zeros((7, 7), dtype=bool)
    mask[3, 3] = True
    out = kernels.dilate_linf(mask, 2)
    assert out.sum() == 25
    assert out[1:6, 1:6].all()
    rng = np.random.default_rng(5)
    for _ in range(10):
        m = int(rng.integers(1, 4))
        a = rng.random((10, 10)) < 0.2
        out = kernels.dilate_linf(a, m)
        brute = np.zeros_like(a)
        for x, y in np.argwhere(a):
            brute[max(0, x - m):x + m + 1, max(0, y - m):y + m + 1] = True
        assert np.array_equal(out, brute)
