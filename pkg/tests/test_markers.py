import math

import numpy as np
import pytest

from gridtoast import serialization
from gridtoast.geometry import Box
from gridtoast.markers import (
    MarkerSet, build_markers, check_marker_property, clashes, domino_family,
    entropy_estimate, filter_no_period, full_shift_family, hom_shift_family,
)
from gridtoast.verify import count_patterns_oracle

K3_EDGES = [(0, 1), (0, 2), (1, 2)]


def test_clashes():
    a = np.array([[0, 1], [1, 0]])
    assert not clashes(a, a, (0, 0))
    assert not clashes(a, a, (5, 0))  # disjoint supports
    assert not clashes(a, a, (1, 1))  # overlap agrees at the corner
    assert clashes(a, a, (1, 0))
    b = np.array([[1, 0], [0, 1]])  # opposite-phase checkerboard
    assert clashes(a, b, (0, 0))


def test_filter_no_period():
    F = full_shift_family(2, 2)
    pats = F.patterns(2)
    kept = filter_no_period(pats, 1)
    assert filter_no_period(kept, 1) == kept  # idempotent
    assert not any((p == 0).all() for p in kept)  # constants removed
    checker = np.array([[0, 1], [1, 0]])
    assert not any((p == checker).all() for p in kept)  # period (1,1)
    ones = filter_no_period([np.array([[0]]), np.array([[1]])], 1)
    assert ones == []  # 1x1 overlaps are empty, so nothing self-clashes
    assert len(filter_no_period(F.patterns(3), 1)) == 440
    G = hom_shift_family(3, 2)
    assert len(filter_no_period(G.patterns(3), 1)) == 156


def test_family_counts_against_oracle():
    F = full_shift_family(2, 2)
    assert F.count((2, 2)) == 16
    assert F.count((2, 2)) == count_patterns_oracle(
        ("full_shift", 2), Box((0, 0), (2, 2)))
    G = hom_shift_family(3, 2)
    assert G.count((2, 2)) == 18
    assert G.count((3, 2)) == count_patterns_oracle(
        ("hom", K3_EDGES), Box((0, 0), (3, 2)))
    D = domino_family()
    assert D.count((4, 4)) == 36
    assert D.count((4, 4)) == count_patterns_oracle(
        ("rect", [(1, 2), (2, 1)]), Box((0, 0), (4, 4)))
    assert D.count((3, 3)) == 0  # odd area
    with pytest.raises(ValueError, match="budget"):
        F.count((4, 4), budget=100)


def test_entropy_estimate():
    F = full_shift_family(2, 2)
    out = entropy_estimate(F, 2)
    assert out["aborted_at"] is None
    assert out["entries"][0] == (1, 2, pytest.approx(math.log(2)))
    n, c, est = out["entries"][1]
    assert (n, c) == (2, 16) and est == pytest.approx(math.log(2))
    G = hom_shift_family(3, 2)
    assert entropy_estimate(G, 2)["entries"][1][1] == 18
    D = domino_family()
    assert entropy_estimate(D, 2)["entries"][1][1] == 36
    part = entropy_estimate(F, 3, budget=100)
    assert part["aborted_at"] == 3
    assert [e[0] for e in part["entries"]] == [1, 2]


def test_check_marker_property():
    assert check_marker_property([], 1) == {"ok": True}
    const = np.zeros((5, 5), dtype=int)
    res = check_marker_property([const], 1)
    assert not res["ok"]
    w = res["witness"]
    assert w["a"] == 0 and w["b"] == 0 and any(w["gamma"])
    mixed = const.copy()
    mixed[2, 2] = 1
    twin = np.roll(mixed, 1, axis=0)  # shift-compatible twin
    res = check_marker_property([mixed, twin], 1)
    assert not res["ok"]
    w = res["witness"]
    pair = [mixed, twin]
    assert not clashes(pair[w["a"]], pair[w["b"]], w["gamma"])
    assert any(w["gamma"]) or w["a"] != w["b"]
    spread = np.arange(25).reshape(5, 5)  # all cells distinct
    assert check_marker_property([spread], 1) == {"ok": True}
    with pytest.raises(ValueError, match="common box"):
        check_marker_property([const, np.zeros((4, 4), dtype=int)], 1)


@pytest.fixture(scope="module")
def shift_prime():
    F = full_shift_family(2, 2)
    return F, filter_no_period(F.patterns(3), 1)[0]


def test_build_markers_full_shift(shift_prime):
    F, ap = shift_prime
    ms = build_markers(F, 21, {"a_prime": ap, "a_second": ap, "r": 6})
    assert len(ms) == 1 and ms.patterns[0].shape == (21, 21)
    assert check_marker_property(ms.patterns, ms.r) == {"ok": True}
    obj = serialization.loads(serialization.dumps(ms.to_json()))
    back = MarkerSet.from_json(obj)
    assert back.t == 21 and back.r == 6
    assert (back.patterns[0] == ms.patterns[0]).all()


def test_build_markers_full_shift_multi(shift_prime):
    F, ap = shift_prime
    ms = build_markers(F, 22, {"a_prime": ap, "a_second": ap, "r": 8,
                               "m_bar": 1})
    assert len(ms) == 128  # 7 free cells around the centre block
    assert all(F.contains(p) for p in ms.patterns)
    # marker entropy stays below the parent family's log 2 per cell
    assert math.log(len(ms)) / 22 ** 2 <= math.log(2)


def test_build_markers_hom():
    G = hom_shift_family(3, 2)
    pats = G.enumerate_box((4, 4))

    def wrap_proper(a):
        return all(a[3, y] != a[0, y] for y in range(4)) and \
            all(a[x, 3] != a[x, 0] for x in range(4))

    ap = filter_no_period([a for a in pats if wrap_proper(a)], 1)[0]
    ms = build_markers(G, 28, {"a_prime": ap, "a_second": ap, "r": 6,
                               "phases": [(0, 0), (1, 1), (2, 2)]})
    assert len(ms) >= 1
    assert all(G.contains(p) for p in ms.patterns)


def test_build_markers_errors(shift_prime):
    F, ap = shift_prime
    with pytest.raises(ValueError, match="layout infeasible"):
        build_markers(F, 12, {"a_prime": ap, "a_second": ap, "r": 6})
    with pytest.raises(ValueError, match="marker property fails"):
        build_markers(F, 21, {"a_prime": np.zeros((3, 3), dtype=int),
                              "a_second": np.zeros((3, 3), dtype=int),
                              "r": 6})
    with pytest.raises(ValueError, match="cube"):
        build_markers(F, 21, {"a_prime": np.zeros((3, 4), dtype=int),
                              "a_second": ap, "r": 6})
    with pytest.raises(ValueError, match="x_cell"):
        build_markers(F, 21, {"a_prime": ap, "a_second": ap, "r": 6,
                              "m": 1})
    G = hom_shift_family(3, 2)
    bad = filter_no_period(G.patterns(3), 1)[0]
    with pytest.raises(ValueError, match="no legal completion"):
        build_markers(G, 21, {"a_prime": bad, "a_second": bad, "r": 6})
