import itertools

import numpy as np
import pytest

from gridtoast import serialization
from gridtoast.geometry import Region, boundary
from gridtoast.toast import (
    Component, PeriodBreaker, Toast, ToastParams, build_toast, check_toast,
    inner_components, maximal_discrete_net, select_period_breaker,
)


def torus_dist(p, q, L):
    return max(min((a - b) % L, (b - a) % L) for a, b in zip(p, q))


def test_net_z12():
    for seed in range(5):
        pts = maximal_discrete_net(12, 1, 1, seed)
        assert len(pts) == 2
        assert torus_dist(pts[0], pts[1], 12) == 6


def test_net_small_torus_2d():
    for seed in range(5):
        pts = maximal_discrete_net(8, 2, 1, seed)
        assert 1 <= len(pts) <= 2
        # brute-force maximality: no cell is >= 6 away from every point
        for cell in itertools.product(range(8), repeat=2):
            assert min(torus_dist(cell, p, 8) for p in pts) < 6


def test_net_rejects_large_r():
    with pytest.raises(ValueError):
        maximal_discrete_net(12, 1, 2, 0)  # 6r = L
    with pytest.raises(ValueError):
        maximal_discrete_net(10, 2, 2, 0)


def test_net_properties_random():
    for seed in (0, 1, 2):
        for r in (2, 3):
            pts = maximal_discrete_net(64, 2, r, seed)
            for a, b in itertools.combinations(pts, 2):
                assert torus_dist(a, b, 64) >= 6 * r
            for cell in itertools.product(range(0, 64, 3), repeat=2):
                assert min(torus_dist(cell, p, 64) for p in pts) < 6 * r
        assert pts == maximal_discrete_net(64, 2, 3, seed)


def test_params_strict_violations():
    with pytest.raises(ValueError, match="24"):
        ToastParams(2, 8000, "1/2", 10, 10, 100, (2700, 3000), 0, strict=True)
    with pytest.raises(ValueError, match="2n"):
        ToastParams(2, 8000, "1/2", 10, 10, 100, (2600,), 0, strict=True)


def test_params_relaxed_l_bound():
    with pytest.raises(ValueError, match="4"):
        ToastParams(2, 128, "1/2", 2, 2, 4, (40,), 0)
    with pytest.raises(ValueError, match="multiple"):
        ToastParams(2, 255, "1/2", 2, 2, 4, (24,), 0)


def small_params(seed=0, L=256, r=(24,)):
    return ToastParams(2, L, "1/2", 2, 2, 4, r, seed)


def test_build_small_and_determinism():
    t1 = build_toast(small_params(seed=5))
    t2 = build_toast(small_params(seed=5))
    assert check_toast(t1) == []
    assert serialization.dumps(t1.to_json()) == serialization.dumps(t2.to_json())
    t3 = build_toast(small_params(seed=6))
    assert serialization.dumps(t1.to_json()) != serialization.dumps(t3.to_json())


def test_toast_json_roundtrip():
    t = build_toast(small_params(seed=1))
    blob = serialization.dumps(t.to_json())
    back = Toast.from_json(serialization.loads(blob))
    assert serialization.dumps(back.to_json()) == blob
    assert check_toast(back) == []


def test_coverage_brute():
    t = build_toast(small_params(seed=2))
    L = t.params.L
    covered = np.zeros((L, L), dtype=bool)
    for _, comp in t.all_components():
        for b in comp.grid.cell_boxes():
            for cell in b.cells():
                covered[cell[0] % L, cell[1] % L] = True
    assert covered.all()


def test_one_level_inner_components_empty():
    t = build_toast(small_params(seed=3))
    for _, comp in t.all_components():
        if not comp.is_root and comp.level == 0:
            assert inner_components(t, comp) == []
    root = t.levels[-1][0]
    assert len(inner_components(t, root)) == sum(
        len(lev) for lev in t.levels[:-1])


@pytest.fixture(scope="module")
def toast2():
    params = ToastParams(2, 2048, "1/2", 2, 2, 4, (12, 320), 11)
    return build_toast(params)


def test_two_level_invariants(toast2):
    assert check_toast(toast2) == []
    assert len(toast2.levels) == 3  # two built levels plus the torus root
    assert len(toast2.levels[0]) > 10
    assert len(toast2.levels[1]) >= 1


def test_two_level_inner_components(toast2):
    tops = toast2.levels[1]
    inner = [inner_components(toast2, c) for c in tops]
    assert any(inner)
    for c, inn in zip(tops, inner):
        creg = None
        for d in inn:
            assert d.level == 0
            # containment double-check at cell level on the torus
            L = toast2.params.L
            if creg is None:
                creg = {tuple(x % L for x in cell)
                        for b in c.grid.cell_boxes() for cell in b.cells()}
            dreg = {tuple(x % L for x in cell)
                    for b in d.grid.cell_boxes() for cell in b.cells()}
            assert dreg <= creg


def test_build_strict():
    params = ToastParams(2, 8200, "1/2", 10, 10, 100, (2700,), 7, strict=True)
    t = build_toast(params)
    assert check_toast(t) == []
    comp = t.levels[0][0]
    assert comp.bbox().sides == (2700, 2700)  # exactly an r-cube here


def breaker_toast(seed=0):
    params = ToastParams(2, 512, "1/2", 4, 4, 8, (80,), seed)
    return build_toast(params)


def test_period_breaker_basic():
    t = breaker_toast()
    comp = t.levels[0][0]
    pb = select_period_breaker(t, comp, (40, 0))
    assert pb.cube.sides == (4, 4)
    # independent re-check of the two collar conditions
    L = t.params.L
    creg = {tuple(x % L for x in cell)
            for b in comp.grid.cell_boxes() for cell in b.cells()}
    e = Region(pb.cube.cells())
    eb = e.translate(pb.beta)
    for reg in (e, eb):
        for cell in boundary(reg, t.params.k):
            assert tuple(x % L for x in cell) in creg
    be = {tuple(x % L for x in c) for c in boundary(e, t.params.k)}
    bb = {tuple(x % L for x in c) for c in boundary(eb, t.params.k)}
    assert not be & bb


def test_period_breaker_preconditions():
    t = breaker_toast(seed=1)
    comp = t.levels[0][0]
    with pytest.raises(ValueError):
        select_period_breaker(t, comp, (50, 0))  # above r/2
    with pytest.raises(ValueError):
        select_period_breaker(t, comp, (10, 0))  # below r/4


def test_period_breaker_root():
    t = breaker_toast(seed=2)
    root = t.levels[-1][0]
    pb = select_period_breaker(t, root, (128, 0))
    assert pb.component == (1, 0)
    assert pb.cube.sides == (4, 4)


def test_period_breaker_with_inner(toast2):
    tops = [c for c in toast2.levels[1]
            if inner_components(toast2, c)]
    comp = tops[0]
    pb = select_period_breaker(toast2, comp, (160, 0))
    L = toast2.params.L
    k = toast2.params.k
    e = Region(pb.cube.cells())
    be = {tuple(x % L for x in c) for c in boundary(e, k)}
    for d in inner_components(toast2, comp):
        dreg = Region(cell for b in d.grid.cell_boxes() for cell in b.cells())
        bd = {tuple(x % L for x in c) for c in boundary(dreg, k)}
        assert not be & bd
        for cell in be:
            assert cell not in {tuple(x % L for x in cc) for cc in dreg.cells}
