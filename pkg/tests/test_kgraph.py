import itertools
import json
import math
import random
from pathlib import Path as FsPath

import numpy as np
import pytest

from ruelle_kit.catalog import cuntz_graph, tensor_graph, two_vertex_graph
from ruelle_kit.errors import DegenerateSpaceError, GraphError
from ruelle_kit.kgraph import (
    Dynamics,
    Edge,
    FiniteOperator,
    KGraph,
    adjoint,
    convolve,
    counting_matrix,
    cylinder_additivity_residual,
    factorize,
    is_primitive,
    is_strongly_connected,
    kgraph_beta_search,
    kgraph_rpf_solve,
    kms_check,
    kms_check_bruteforce,
    minimal_common_extensions,
    normalized_dynamics,
    omega,
    perron_log_eigenvalues,
    unnormalized_dynamics,
    validate,
    verify_rpf_identity,
    vertex_matrices,
)
from ruelle_kit.serialize import graph_from_json

DATA = FsPath(__file__).resolve().parents[1] / "data"
PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="module")
def tv():
    return two_vertex_graph()


def _adjacency(graph, color):
    idx = {v: i for i, v in enumerate(graph.vertices)}
    a = np.zeros((len(idx), len(idx)), dtype=int)
    for e in graph.edges.values():
        if e.color == color:
            a[idx[e.rng], idx[e.src]] += 1
    return a


def test_path_counts_match_matrix_products(tv):
    a = [_adjacency(tv, c) for c in range(2)]
    # unique factorization forces A_blue A_red == A_red A_blue
    assert (a[0] @ a[1] == a[1] @ a[0]).all()
    idx = {v: i for i, v in enumerate(tv.vertices)}
    for n in itertools.product(range(3), repeat=2):
        expect = np.linalg.matrix_power(a[0], n[0]) @ np.linalg.matrix_power(a[1], n[1])
        assert (counting_matrix(tv, n) == expect).all()
        got = np.zeros_like(expect)
        for p in tv.paths(n, exact_degree=True):
            got[idx[p.r], idx[p.s]] += 1
        assert (got == expect).all()


def test_factorization_roundtrip(tv):
    for lam in tv.paths((2, 2)):
        for m in itertools.product(*(range(d + 1) for d in lam.degree)):
            x, y = factorize(tv, lam, m)
            assert x.degree == tuple(m)
            assert tv.compose(x, y) == lam


def test_validation_reports(tv):
    report = validate(tv)
    assert report.valid and report.source_free and report.strongly_connected
    assert report.primitive_witness == (1, 1)
    broken = graph_from_json(json.loads((DATA / "missing_square_graph.json").read_text()))
    kinds = {v["kind"] for v in validate(broken).violations}
    assert "missing_square" in kinds and not validate(broken).valid
    assert validate(tensor_graph([2, 3, 2])).valid


def test_primitivity():
    cycle = KGraph(1, ["a", "b"], [Edge("e", 0, "a", "b"), Edge("f", 0, "b", "a")], [])
    assert is_strongly_connected(cycle)
    assert is_primitive(cycle) is None
    assert tuple(is_primitive(cuntz_graph(2))) == (1,)


def test_vertex_matrices_and_log_eigenvalues(tv):
    mats = vertex_matrices(tv, {e: 0.0 for e in tv.edges}, 0.0)
    assert (mats[0] == _adjacency(tv, 0)).all() and (mats[1] == _adjacency(tv, 1)).all()
    blue, red = perron_log_eigenvalues(tv, {e: 0.0 for e in tv.edges}, 0.0)
    assert blue == pytest.approx(math.log(PHI), abs=1e-12)
    assert red == pytest.approx(2 * math.log(PHI), abs=1e-12)
    # large theta does not overflow
    assert all(math.isfinite(x) for x in perron_log_eigenvalues(tv, tv.h, 900.0))


def test_rpf_measure_is_a_probability(tv):
    m = kgraph_rpf_solve(tv, tv.h, 0.7)
    assert sum(m.vertex_masses.values()) == pytest.approx(1.0, abs=1e-12)
    for n in [(1, 0), (0, 2), (2, 1)]:
        assert sum(m.mass(p) for p in tv.paths(n, exact_degree=True)) == pytest.approx(1.0, abs=1e-12)
    assert verify_rpf_identity(tv, m, tv.paths((1, 1)))
    assert max(cylinder_additivity_residual(m, p, 1) for p in tv.paths((1, 1))) <= 1e-12


def test_minimal_common_extensions(tv):
    b0 = tv.path(("b0",))
    r0 = tv.path(("r0",))
    ext = minimal_common_extensions(tv, b0, r0)
    for alpha, beta in ext:
        assert tv.compose(b0, alpha) == tv.compose(r0, beta)
        assert tv.compose(b0, alpha).degree == (1, 1)
    # a path and its own prefix extend trivially
    lam = tv.paths((2, 1), exact_degree=True)[0]
    pre, _ = factorize(tv, lam, (1, 0))
    ((alpha, beta),) = minimal_common_extensions(tv, pre, lam)
    assert tv.compose(pre, alpha) == lam and beta.degree == (0, 0)


def _random_op(graph, rng, paths, size=3):
    terms = {}
    for _ in range(size):
        a = rng.choice(paths)
        b = rng.choice([p for p in paths if p.s == a.s])
        terms[(a, b)] = complex(rng.randint(-3, 3), rng.randint(-3, 3))
    return FiniteOperator(graph, terms)


def test_convolution_algebra_laws(tv):
    rng = random.Random(4)
    paths = tv.paths((1, 1))
    for _ in range(15):
        a, b, c = (_random_op(tv, rng, paths) for _ in range(3))
        assert convolve(convolve(a, b), c).equals(convolve(a, convolve(b, c)), 1e-9)
        assert adjoint(convolve(a, b)).equals(convolve(adjoint(b), adjoint(a)), 1e-9)
        assert convolve(a, b + c).equals(convolve(a, b) + convolve(a, c), 1e-9)


def test_cuntz_krieger_relations(tv):
    for v in tv.vertices:
        pv = FiniteOperator.unit(tv, tv.vertex(v), tv.vertex(v))
        for color in range(2):
            total = FiniteOperator(tv)
            for e in tv.edges_into(v, color):
                p = tv.path((e,))
                total = total + FiniteOperator.unit(tv, p, p)
            assert pv.equals(total)
    for e in tv.edges:
        p = tv.path((e,))
        s = FiniteOperator.unit(tv, p, tv.vertex(tv.edges[e].src))
        assert convolve(adjoint(s), s).equals(FiniteOperator.unit(tv, tv.vertex(tv.edges[e].src), tv.vertex(tv.edges[e].src)))
    with pytest.raises(GraphError):
        FiniteOperator.unit(tv, tv.path(("b1",)), tv.path(("b0",)))


def test_omega_is_positive_and_normalized(tv):
    m = kgraph_rpf_solve(tv, tv.h, 0.7)
    one = FiniteOperator(tv, {(tv.vertex(v), tv.vertex(v)): 1 for v in tv.vertices})
    assert omega(m, one) == pytest.approx(1.0)
    rng = random.Random(8)
    paths = tv.paths((1, 1))
    for _ in range(10):
        a = _random_op(tv, rng, paths)
        assert omega(m, convolve(adjoint(a), a)).real >= -1e-12


@pytest.mark.parametrize("beta", [0.4, 1.0, 2.3])
@pytest.mark.parametrize("kind", ["normalized", "unnormalized"])
def test_sparse_kms_matches_bruteforce(tv, beta, kind):
    m = kgraph_rpf_solve(tv, tv.h, 0.7)
    dyn = normalized_dynamics(m, beta) if kind == "normalized" else unnormalized_dynamics(m)
    fast = kms_check(tv, m, beta, dyn, (1, 1))
    slow = kms_check_bruteforce(tv, m, beta, dyn, (1, 1))
    assert fast.pairs_nominal == slow.pairs_nominal
    assert fast.max_violation == pytest.approx(slow.max_violation, abs=1e-12)
    if kind == "normalized":
        assert fast.passed
    else:
        # the unnormalized potentials have eigenvalues far from 1
        assert not fast.passed


def test_kms_cuntz_beta_selects_ln_n():
    g = cuntz_graph(3)
    m = kgraph_rpf_solve(g, {e: 1.0 for e in g.edges}, -1.0)
    # normalized dynamics are built to be KMS at the requested beta
    for beta in (math.log(3), 1.0):
        dyn = normalized_dynamics(m, beta)
        assert kms_check(g, m, beta, dyn, (2,)).passed
        assert kms_check_bruteforce(g, m, beta, dyn, (1,)).passed
    # for the gauge action only ln 3 works
    gauge = Dynamics((1.0,), 0.0)
    assert kms_check(g, m, math.log(3), gauge, (2,)).passed
    assert not kms_check(g, m, 1.0, gauge, (2,)).passed


def test_degenerate_graph_refused():
    g = tensor_graph([1, 1])
    m = kgraph_rpf_solve(g, {e: 1.0 for e in g.edges}, 1.0)
    with pytest.raises(DegenerateSpaceError):
        kms_check(g, m, 1.0, unnormalized_dynamics(m), (1, 1))


def test_graph_beta_search():
    for n in (2, 5):
        res = kgraph_beta_search(cuntz_graph(n), theta=-1.0, beta_interval=(-5, 5))
        assert res.betas == pytest.approx([math.log(n)], abs=1e-9)
    res = kgraph_beta_search(tensor_graph([2, 3]), theta=-1.0, beta_interval=(-5, 5))
    assert res.betas == []
