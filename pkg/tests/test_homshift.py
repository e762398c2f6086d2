import itertools

import numpy as np
import pytest

from gridtoast import serialization
from gridtoast.geometry import Box, GridUnion
from gridtoast.homshift import (
    FiniteGraph, HomCertificate, base_edge, checkerboard, complete_graph,
    cycle_graph, even_connector, extend_hom, first_two_patterns,
    run_hom_pipeline,
)
from gridtoast.pipeline import beta_sequence, primitive_directions
from gridtoast.toast import ToastParams, build_toast
from gridtoast.verify import validate_hom_certificate


def box_gu(k, lo, hi):
    """GridUnion at scale k realizing the box [lo, hi)."""
    cells = itertools.product(*(range(0, h - l, k) for l, h in zip(lo, hi)))
    return GridUnion(k, tuple(x - 1 for x in lo), frozenset(cells))


def test_graph_load_checks():
    with pytest.raises(ValueError, match="bipartite"):
        FiniteGraph(2, [(0, 1)])
    with pytest.raises(ValueError, match="connected"):
        FiniteGraph(4, [(0, 1), (1, 2), (0, 2)])
    FiniteGraph(1, [(0, 0)])  # a loop is an odd closed walk
    with pytest.raises(ValueError, match="bipartite"):
        cycle_graph(6)
    assert base_edge(complete_graph(3)) == (0, 1)


def test_even_connector_examples():
    assert even_connector(complete_graph(3), 0, 1) == (2, [0, 2, 1])
    n, _ = even_connector(complete_graph(4), 0, 1)
    assert n == 2
    c5 = cycle_graph(5)
    v, w = base_edge(c5)
    n, walk = even_connector(c5, v, w)
    assert n == 4  # the long way around the 5-cycle
    assert walk[0] == v and walk[-1] == w and len(walk) == 5
    for a, b in zip(walk, walk[1:]):
        assert c5.adjacent(a, b)


def test_checkerboard_box_and_equivariance():
    k3 = complete_graph(3)
    gu = GridUnion(2, (-1, -1), frozenset({(0, 0)}))  # the 2x2 box at 0
    pat = checkerboard(gu, k3)
    assert [pat[c] for c in sorted(pat.support.cells)] == [0, 1, 1, 0]
    assert pat.problems(k3) == []
    big = box_gu(10, (0, 0), (40, 40))
    assert checkerboard(big, k3).problems(k3) == []
    shifted = GridUnion(10, (4, 6), frozenset(big.cells))
    assert (checkerboard(shifted, k3)
            == checkerboard(big, k3).translate((5, 7)))


def test_extend_hom_same_parity_is_checkerboard():
    k3 = complete_graph(3)
    c = box_gu(10, (0, 0), (60, 60))
    inner = box_gu(10, (20, 20), (40, 40))
    pat = extend_hom(c, [(inner, checkerboard(inner, k3))], 3, k3)
    assert pat == checkerboard(c, k3)


def test_extend_hom_opposite_parity():
    k3 = complete_graph(3)
    c = box_gu(10, (0, 0), (60, 60))
    inner = GridUnion(10, (20, 19), frozenset(
        box_gu(10, (0, 0), (20, 20)).cells))  # anchor (21, 20): odd parity
    ipat = checkerboard(inner, k3)
    out = extend_hom(c, [(inner, ipat)], 3, k3)
    assert out.problems(k3) == []
    # restriction is bit-identical to the inner pattern
    for cell, val in ipat.values.items():
        assert out[cell] == val
    # past the connector shell the ambient checkerboard takes over
    amb = checkerboard(c, k3)
    inner_cells = ipat.support.cells
    for cell in out.support.cells:
        h = min((max(abs(a - b) for a, b in zip(cell, ic))
                 for ic in inner_cells))
        if h > 2:
            assert out[cell] == amb[cell]
    # depth-1 shell cells carry walk values {0 (=v), 2}
    ring1 = {cell for cell in out.support.cells - inner_cells
             if min(max(abs(a - b) for a, b in zip(cell, ic))
                    for ic in inner_cells) == 1}
    assert {out[c2] for c2 in ring1} == {0, 2}


def test_extend_hom_no_inner_and_errors():
    k3 = complete_graph(3)
    c = box_gu(10, (0, 0), (60, 60))
    assert extend_hom(c, [], 3, k3) == checkerboard(c, k3)
    inner = box_gu(10, (20, 20), (40, 40))
    with pytest.raises(ValueError, match="connector"):
        extend_hom(c, [(inner, checkerboard(inner, k3))], 1, k3)
    with pytest.raises(ValueError, match="leaves"):
        near_edge = box_gu(10, (0, 0), (20, 20))
        extend_hom(c, [(near_edge, checkerboard(near_edge, k3))], 3, k3)
    with pytest.raises(ValueError, match="overlap"):
        a = box_gu(10, (10, 10), (20, 20))
        b = box_gu(10, (10, 24), (20, 34))
        extend_hom(c, [(a, checkerboard(a, k3)),
                       (b, checkerboard(b, k3))], 5, k3)


def test_extend_hom_equivariance():
    k3 = complete_graph(3)
    c = box_gu(10, (0, 0), (60, 60))
    inner = GridUnion(10, (20, 19), frozenset(
        box_gu(10, (0, 0), (20, 20)).cells))
    out = extend_hom(c, [(inner, checkerboard(inner, k3))], 3, k3)
    delta = (3, 5)
    c2 = GridUnion(10, (2, 4), frozenset(c.cells))
    inner2 = GridUnion(10, (23, 24), frozenset(inner.cells))
    out2 = extend_hom(c2, [(inner2, checkerboard(inner2, k3))], 3, k3)
    assert out2 == out.translate(delta)


def test_first_two_patterns_k3():
    k3 = complete_graph(3)
    cube = Box((0, 0), (4, 4))

    def bv(cell):
        return 0 if sum(cell) % 2 == 0 else 1

    e, e2 = first_two_patterns(k3, cube, bv)
    assert e != e2
    # the least completion is the surrounding checkerboard itself
    assert e == {c: bv(c) for c in cube.cells()}
    for pat in (e, e2):
        for c in cube.cells():
            for ax in range(2):
                nb = tuple(x + (1 if a == ax else 0) for a, x in enumerate(c))
                other = pat[nb] if nb in pat else bv(nb)
                assert k3.adjacent(pat[c], other)


def test_primitive_directions_and_betas():
    pool = primitive_directions(2)
    assert pool[0] == (0, 1)
    assert (2, 2) not in pool and (0, -1) not in pool
    assert all(p[[x != 0 for x in p].index(True)] > 0 for p in pool)
    t = build_toast(ToastParams(2, 512, "1/2", 4, 1, 5, (28,), 1))
    betas = beta_sequence(t, seed=0, min_norm=12, even=True)
    assert len(betas) == 2  # one level plus the root
    for beta, r in zip(betas, (28, 512)):
        norm = max(abs(b) for b in beta)
        assert r <= 4 * norm and 2 * norm <= r and norm >= 12
        assert sum(beta) % 2 == 0


@pytest.fixture(scope="module")
def small_cert():
    t = build_toast(ToastParams(2, 512, "1/2", 4, 1, 5, (28,), 1))
    k3 = complete_graph(3)
    return t, run_hom_pipeline(t, k3, seed=0)


def test_pipeline_one_level(small_cert):
    t, cert = small_cert
    assert validate_hom_certificate(cert, t) == {"ok": True}
    assert cert.values.min() >= 0 and cert.values.max() <= 2
    assert len(cert.breakers) == sum(len(lev) for lev in t.levels)


def test_pipeline_determinism_and_json(small_cert):
    t, cert = small_cert
    k3 = complete_graph(3)
    again = run_hom_pipeline(t, k3, seed=0)
    assert (serialization.dumps(cert.to_json())
            == serialization.dumps(again.to_json()))
    other = run_hom_pipeline(t, k3, seed=1)
    assert (serialization.dumps(cert.to_json())
            != serialization.dumps(other.to_json()))
    back = HomCertificate.from_json(
        serialization.loads(serialization.dumps(cert.to_json())))
    assert np.array_equal(back.values, cert.values)
    assert validate_hom_certificate(back, t) == {"ok": True}


def test_pipeline_rejects_bad_inputs(small_cert):
    t, _ = small_cert
    with pytest.raises(ValueError, match="bipartite"):
        run_hom_pipeline(t, FiniteGraph(2, [(0, 1)]), seed=0)
    c5 = cycle_graph(5)  # connector length 4 needs n >= 5
    tight = build_toast(ToastParams(2, 512, "1/2", 4, 1, 3, (28,), 1))
    with pytest.raises(ValueError, match="connector"):
        run_hom_pipeline(tight, c5, seed=0)


def test_pipeline_cycle_graph(small_cert):
    t, _ = small_cert
    cert = run_hom_pipeline(t, cycle_graph(5), seed=0)
    assert validate_hom_certificate(cert, t) == {"ok": True}


def test_pipeline_two_level():
    t = build_toast(ToastParams(2, 2048, "1/2", 4, 1, 5, (28, 320), 3))
    cert = run_hom_pipeline(t, complete_graph(3), seed=0)
    assert validate_hom_certificate(cert, t) == {"ok": True}
