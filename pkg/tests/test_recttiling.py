import itertools

import numpy as np
import pytest

from gridtoast import serialization
from gridtoast.geometry import Box, GridUnion
from gridtoast.recttiling import (
    RectCertificate, TileSet, dominoes, extend_rect, first_two_cube_tilings,
    frobenius_decompose, run_rect_pipeline, tile_almost_box,
)
from gridtoast.toast import ToastParams, build_toast
from gridtoast.verify import validate_rect_certificate


def full_gu(M, lo, hi):
    """GridUnion at scale M realizing the box [lo, hi)."""
    cells = itertools.product(*(range(0, h - l, M) for l, h in zip(lo, hi)))
    return GridUnion(M, tuple(x - 1 for x in lo), frozenset(cells))


def placements(cert):
    return set(cert.placements())


def test_tileset_checks():
    assert dominoes(2).k == 4
    assert dominoes(3).k == 8
    assert TileSet([(1, 3), (3, 1), (1, 2)]).k == 18
    with pytest.raises(ValueError, match="coprime"):
        TileSet([(2, 2)])
    with pytest.raises(ValueError, match="coprime"):
        TileSet([(2, 3), (4, 5)])
    ts = TileSet.from_json(dominoes(2).to_json())
    assert ts.boxes == dominoes(2).boxes


def test_frobenius_examples():
    assert frobenius_decompose(7, [2, 3]) == {2: 2, 3: 1}
    assert frobenius_decompose(5, [1]) == {1: 5}
    # prefers fewer distinct lengths: 13 = 4 + 9, not 4 + 4 + 5 or similar
    assert frobenius_decompose(13, [4, 6, 9]) == {4: 1, 9: 1}
    with pytest.raises(ValueError, match="not representable"):
        frobenius_decompose(29, [6, 10, 15])


def test_tile_almost_box_dominoes():
    ts = dominoes(2)
    cert = tile_almost_box(Box((0, 0), (4, 4)), ts)
    assert len(cert) == 8
    assert validate_rect_certificate(cert) == {"ok": True}
    for lo, hi in (((10, -3), (15, 1)), ((0, 0), (4, 7))):
        cert = tile_almost_box(Box(lo, hi), ts)
        assert validate_rect_certificate(cert) == {"ok": True}
    with pytest.raises(ValueError, match="almost"):
        tile_almost_box(Box((0, 0), (9, 4)), ts)


def test_tile_almost_box_mixed_set():
    ts = TileSet([(1, 3), (3, 1), (1, 2)])  # k = 18
    for sides in ((18, 18), (25, 18), (18, 31)):
        cert = tile_almost_box(Box((0, 0), sides), ts)
        assert validate_rect_certificate(cert) == {"ok": True}


def test_cube_tiling_pair():
    ts = dominoes(2)
    e1, e2 = first_two_cube_tilings(ts, 4)
    for cert in (e1, e2):
        assert validate_rect_certificate(cert) == {"ok": True}
    # they differ in the placement covering the origin
    assert e1.placement_map()[(0, 0)] != e2.placement_map()[(0, 0)]
    assert e1.placement_map()[(0, 0)] == (0, (0, 0))
    _, none2 = first_two_cube_tilings(TileSet([(1, 1)]), 3)
    assert none2 is None


@pytest.fixture(scope="module")
def extend_setup():
    ts = dominoes(2)
    c = full_gu(16, (0, 0), (160, 160))
    inner = GridUnion(16, (64, 61), frozenset({(0, 0)}))
    icert = extend_rect(inner, [], ts, N=4)
    return ts, c, inner, icert


def test_extend_rect_inner_fidelity(extend_setup):
    ts, c, inner, icert = extend_setup
    assert validate_rect_certificate(icert) == {"ok": True}
    out = extend_rect(c, [(inner, icert)], ts, N=4)
    assert validate_rect_certificate(out) == {"ok": True}
    assert placements(icert) <= placements(out)
    with pytest.raises(ValueError, match="cover"):
        extend_rect(c, [(inner, extend_rect(c, [], ts, N=4))], ts, N=4)


def test_extend_rect_equivariance(extend_setup):
    ts, c, inner, icert = extend_setup
    out = extend_rect(c, [(inner, icert)], ts, N=4)
    delta = (3, 5)
    c2 = GridUnion(16, (2, 4), c.cells)
    inner2 = inner.translate(delta)
    out2 = extend_rect(c2, [(inner2, icert.translate(delta))], ts, N=4)
    assert placements(out2) == placements(out.translate(delta))


@pytest.fixture(scope="module")
def rect_toast():
    return build_toast(ToastParams(2, 784, "1/2", 16, 1, 20, (128,), 1))


def test_pipeline_small(rect_toast):
    t = rect_toast
    cert = run_rect_pipeline(t, dominoes(2), seed=0)
    assert validate_rect_certificate(cert, t) == {"ok": True}
    # a perfect matching: every cell is covered by one domino
    assert 4 * len(cert) == 2 * t.params.L ** 2


def test_pipeline_determinism_and_json(rect_toast):
    t = rect_toast
    ts = dominoes(2)
    cert = run_rect_pipeline(t, ts, seed=0)
    again = run_rect_pipeline(t, ts, seed=0)
    assert (serialization.dumps(cert.to_json())
            == serialization.dumps(again.to_json()))
    other = run_rect_pipeline(t, ts, seed=1)
    assert (serialization.dumps(cert.to_json())
            != serialization.dumps(other.to_json()))
    back = RectCertificate.from_json(
        serialization.loads(serialization.dumps(cert.to_json())))
    assert validate_rect_certificate(back, t) == {"ok": True}


def test_pipeline_rejections(rect_toast):
    with pytest.raises(ValueError, match="dimension"):
        run_rect_pipeline(rect_toast, dominoes(3), seed=0)
    fine_grid = build_toast(ToastParams(2, 784, "1/2", 4, 4, 20, (128,), 1))
    with pytest.raises(ValueError, match="grid cells"):
        run_rect_pipeline(fine_grid, dominoes(2), seed=0)
    small = build_toast(ToastParams(2, 512, "1/2", 4, 1, 5, (28,), 1))
    with pytest.raises(ValueError, match="N >= 4"):
        run_rect_pipeline(small, dominoes(2), seed=0)


def test_pipeline_degenerate_unit_tile(rect_toast):
    with pytest.warns(UserWarning, match="trivial"):
        cert = run_rect_pipeline(rect_toast, TileSet([(1, 1)]), seed=0)
    assert validate_rect_certificate(cert, rect_toast) == {"ok": True}
    assert cert.meta.get("degenerate") is True


def test_validator_rejects_bad_certificates(rect_toast):
    ts = dominoes(2)
    # overlap (tile 0 is the horizontal domino)
    bad = RectCertificate(ts, [0, 0], [(0, 0), (1, 0)],
                          support=Box((0, 0), (2, 2)).region())
    assert validate_rect_certificate(bad)["constraint"] == "partition"
    # gap on the torus
    anchors = [(x, 2 * y) for x in range(4) for y in range(2)]
    good = RectCertificate(ts, [1] * 8, anchors, torus=4)
    assert validate_rect_certificate(good) == {"ok": True}
    assert validate_rect_certificate(
        RectCertificate(ts, [1] * 7, anchors[:7], torus=4)
    )["constraint"] == "partition"
    # periodic placement map is caught exhaustively
    cert = run_rect_pipeline(rect_toast, ts, seed=0)
    L = rect_toast.params.L
    brick = RectCertificate(
        ts, np.ones(len(cert), np.int32),
        np.array([(x, 2 * y) for x in range(L) for y in range(L // 2)]),
        torus=L, meta=cert.meta)
    res = validate_rect_certificate(brick, rect_toast)
    assert res["constraint"] in ("period", "component-crossing")
