import math

import numpy as np
import pytest

from grouptest.access import CorrectedAccess, QueryOracle, Witness, corrected_query
from grouptest.errors import DimMismatch, GroupMismatch
from grouptest.functions import MatrixFunction, ScalarFunction, class_function, constant, zero
from grouptest.groups import cyclic, symmetric
from grouptest.instances import generate
from grouptest.oracle import (
    distance_to_character_rays,
    distance_to_homomorphisms,
    exact_conjugation_rejection_probability,
)
from grouptest.reps import character, compute_irreps, normalized_character
from grouptest import testers as T
from grouptest.testers import (
    TesterConfig,
    character_core,
    char_rounds,
    conjinv_rounds,
    estimate_mean,
    expected_queries,
    homomorphism_core,
    hoeffding_sample_count,
    with_class_function_reduction,
    hom_query_bound,
)

S3, S4 = symmetric(3), symmetric(4)


def three_sigma(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


def transposition_split(G=S3):
    """Class function except on the transposition class, where values are {1, 1, -1}."""
    v = np.ones(G.order, dtype=complex)
    cls = next(c for c in G.classes if len(c) == 3)
    v[cls[0]] = -1
    return ScalarFunction(G, v)


# -- estimator ---------------------------------------------------------------

def test_hoeffding_count():
    assert hoeffding_sample_count(0.1, 0.01) == math.ceil(800 * math.log(400))


def test_estimate_constant_exact():
    o = QueryOracle(constant(S4, 0.3 - 0.1j))
    assert estimate_mean(o, 0.1, 0.01, np.random.default_rng(0)) == 0.3 - 0.1j
    assert o.count == hoeffding_sample_count(0.1, 0.01)
    assert estimate_mean(lambda r, k: np.full(k, 0.7), 0.2, 0.1) == 0.7


def test_estimate_failure_rate():
    rng = np.random.default_rng(5)
    fails = 0
    for _ in range(1000):
        z = estimate_mean(lambda r, k: r.choice([-1.0, 1.0], size=k), 0.2, 0.1, rng)
        fails += abs(z) > 0.2
    assert fails / 1000 <= 0.1 + three_sigma(0.1, 1000)


# -- conjugate invariance --------------------------------------------------------

@pytest.mark.parametrize("label", [phi.label for phi in compute_irreps(S4)])
def test_conjinv_accepts_characters(label):
    f = normalized_character(compute_irreps(S4)[label])
    cfg = TesterConfig(0.2, seed=1)
    r = T.test_conjugate_invariance(f, cfg)
    assert r.accepted and r.queries == 2 * conjinv_rounds(0.2, cfg) == 100


def test_conjinv_query_count_eps_01():
    r = T.test_conjugate_invariance(constant(S4), TesterConfig(0.1))
    assert r.rounds_run == 200 and r.queries == 400


def test_conjinv_rejection_rate_matches_exact():
    f = transposition_split()
    p = exact_conjugation_rejection_probability(f)
    assert p == pytest.approx(0.5 * (1 - 5 / 9))
    eps = 0.5
    s = conjinv_rounds(eps, TesterConfig(eps))
    target = 1 - (1 - p) ** s
    rej = sum(not T.test_conjugate_invariance(f, TesterConfig(eps, seed=k)).accepted for k in range(200))
    assert abs(rej / 200 - target) <= three_sigma(target, 200)


def test_conjinv_witness_revalidates():
    f = transposition_split()
    for k in range(20):
        r = T.test_conjugate_invariance(f, TesterConfig(0.3, seed=k))
        if not r.accepted:
            assert r.witness.kind == "conjugation"
            assert r.witness.revalidate(f)
            x, y = r.witness.elements
            assert r.queries == 2 * r.rounds_run
            assert r.rounds.columns["rejected"][-1]


def test_report_determinism():
    f = transposition_split()
    a = T.test_homomorphism(f, TesterConfig(0.3, seed=4)).to_dict()
    b = T.test_homomorphism(f, TesterConfig(0.3, seed=4)).to_dict()
    assert a == b


# -- self-correction ------------------------------------------------------------

def test_corrected_query_class_function():
    f = normalized_character(compute_irreps(S4)["d2.0"])
    rng = np.random.default_rng(0)
    for x in range(S4.order):
        assert corrected_query(f, x, 0.05, rng) == f.values[x]


def test_corrected_query_singleton():
    G = cyclic(5)
    f = ScalarFunction(G, np.arange(5))
    o = QueryOracle(f)
    assert corrected_query(o, 3, 0.1, np.random.default_rng(0)) == 3
    assert o.count == math.ceil(8 * math.log(20))


def test_corrected_query_even_split():
    # a class of size 6 split 3/3, so the plurality share is exactly 1/2
    cls = next(c for c in S4.classes if len(c) == 6)
    v = np.ones(S4.order, dtype=complex)
    v[cls[:3]] = -1
    f = ScalarFunction(S4, v)
    rng = np.random.default_rng(1)
    hits = 0
    for _ in range(1000):
        out = corrected_query(f, int(cls[0]), 0.05, rng)
        if isinstance(out, Witness):
            assert out.revalidate(f)
            hits += 1
    assert hits / 1000 >= 0.95 - three_sigma(0.95, 1000)


def test_bulk_correction_matches_sequential():
    """k corrected queries at one point, bulk versus one at a time."""
    f = transposition_split()
    x = int(next(c for c in S3.classes if len(c) == 3)[0])
    delta, const, k, trials = 0.5, 2.0, 2, 20000
    o = QueryOracle(f)
    acc = CorrectedAccess(o, delta, np.random.default_rng(2), const=const)
    assert acc.s == 3
    bulk_pure, bulk_sum = 0, 0.0
    for _ in range(trials):
        blk = acc.evaluate(np.zeros((1, 0), dtype=np.int64),
                           [(np.array([[x]]), np.array([[k]]), lambda v: v)])
        if blk.witness is None:
            bulk_pure += 1
            bulk_sum += blk.sums[0][0].real
        else:
            assert blk.witness.revalidate(f)
    rng = np.random.default_rng(3)
    seq_pure, seq_sum = 0, 0.0
    for _ in range(trials):
        outs = [corrected_query(QueryOracle(f), x, delta, rng, const=const) for _ in range(k)]
        if not any(isinstance(o_, Witness) for o_ in outs):
            seq_pure += 1
            seq_sum += sum(o_.real for o_ in outs)
    p = (1 / 3) ** k
    for pure in (bulk_pure, seq_pure):
        assert abs(pure / trials - p) <= 4 * math.sqrt(p * (1 - p) / trials)
    # conditional mean of the summed value: each pure run is 1 w.p. 8/9, -1 w.p. 1/9
    cond = k * (8 / 9 - 1 / 9)
    assert abs(bulk_sum / bulk_pure - cond) < 0.1
    assert abs(seq_sum / seq_pure - cond) < 0.1


# -- homomorphism ----------------------------------------------------------------

def test_hom_accepts_sign_and_zero():
    sign = next(character(phi) for phi in compute_irreps(S4).one_dimensional()
                if np.any(character(phi).values == -1))
    for f in (sign, zero(S4)):
        for k in range(20):
            r = T.test_homomorphism(f, TesterConfig(0.2, seed=k))
            assert r.accepted
            assert r.queries == expected_queries("homomorphism", 0.2, TesterConfig(0.2))


def test_hom_rejects_two_dim_character():
    f = normalized_character(compute_irreps(S3)["d2.0"])
    eps0 = distance_to_homomorphisms(f).distance
    rej = 0
    for k in range(200):
        r = T.test_homomorphism(f, TesterConfig(eps0 / 2, seed=k))
        if not r.accepted:
            rej += 1
            assert r.witness.revalidate(f)
    assert rej / 200 >= 2 / 3


def test_hom_core_witness():
    f = normalized_character(compute_irreps(S3)["d2.0"])
    r = homomorphism_core(f, TesterConfig(0.3, seed=0))
    assert not r.accepted and r.witness.kind == "homomorphism" and r.witness.revalidate(f)
    assert r.queries == 3 * r.rounds_run


def test_wrapper_stage_one_rejects_non_class():
    f = transposition_split()
    r = T.test_homomorphism(f, TesterConfig(0.6, seed=0))
    if not r.accepted:
        assert r.witness.revalidate(f)


def test_wrapper_matches_core_on_class_functions():
    """Accept rates of wrapped(eps) and core(eps/2) agree on class functions."""
    v = character(next(phi for phi in compute_irreps(S4).one_dimensional()
                       if np.any(character(phi).values == -1))).values.copy()
    small = next(c for c in S4.classes if len(c) == 3)
    v[small] = 0.5
    f = ScalarFunction(S4, v)
    cfg = dict(round_factor=math.log(3))
    wrapped = sum(T.test_homomorphism(f, TesterConfig(1.0, seed=k, **cfg)).accepted for k in range(200))
    core = sum(homomorphism_core(f, TesterConfig(0.5, seed=1000 + k, **cfg)).accepted for k in range(200))
    p = (wrapped + core) / 400
    assert 0.05 < p < 0.95
    assert abs(wrapped - core) / 200 <= 4 * math.sqrt(2 * p * (1 - p) / 200)


# -- character proportionality ------------------------------------------------------

def test_char_zero_gate():
    r = T.test_character_proportional(zero(S4), TesterConfig(0.3, seed=0))
    assert r.accepted
    inner = r.stages[1]
    assert inner.details["gate_accept"] and inner.rounds_run == 0
    assert r.queries == expected_queries("character", 0.3, TesterConfig(0.3), gate_accept=True)


def test_char_core_accepts_three_dim_character():
    f = normalized_character(compute_irreps(S4)["d3.0"])
    acc = sum(character_core(f, TesterConfig(0.3, seed=k)).accepted for k in range(200))
    assert acc / 200 >= 2 / 3


def test_char_rejects_mixture():
    B = compute_irreps(S4)
    f = ScalarFunction(S4, (normalized_character(B["d2.0"]).values + normalized_character(B["d3.0"]).values) / 2)
    assert f.values[0] == 1
    eps0 = distance_to_character_rays(f).distance
    eps = min(eps0, 0.3) / 2
    rej = sum(not T.test_character_proportional(f, TesterConfig(eps, seed=k)).accepted for k in range(200))
    assert rej / 200 >= 2 / 3


def test_char_core_queries():
    f = normalized_character(compute_irreps(S3)["d2.0"])
    cfg = TesterConfig(0.5, seed=3)
    r = character_core(f, cfg)
    assert r.rounds_run == char_rounds(0.5, cfg)
    assert r.queries == expected_queries("character-core", 0.5, cfg)


# -- unitary equivalence ------------------------------------------------------------

def _disk(rng, n, d):
    a = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    return a / np.linalg.norm(a, axis=(1, 2)).max()


def test_uniteq_identical():
    g = MatrixFunction(S3, _disk(np.random.default_rng(0), 6, 2))
    acc = sum(T.test_unitary_equivalence(g, g, TesterConfig(0.3, seed=k)).accepted for k in range(50))
    assert acc >= 2 / 3 * 50


def test_uniteq_planted_and_far():
    rng = np.random.default_rng(7)
    planted = generate("planted-unitary", S3, 2, rng)
    far = generate("far-unitary", S3, 2, rng)
    acc = sum(T.test_unitary_equivalence(planted.f, planted.g, TesterConfig(0.3, seed=k)).accepted for k in range(50))
    assert acc >= 2 / 3 * 50
    r = T.test_unitary_equivalence(far.f, far.g, TesterConfig(0.3, seed=0))
    assert not r.accepted
    assert r.queries == expected_queries("unitary-equivalence", 0.3, TesterConfig(0.3), dim=2)


def test_uniteq_errors():
    g2 = MatrixFunction(cyclic(8), np.zeros((8, 2, 2)))
    with pytest.raises(DimMismatch):
        T.test_unitary_equivalence(MatrixFunction(cyclic(8), np.zeros((8, 3, 3))), g2, TesterConfig(0.5))
    with pytest.raises(GroupMismatch):
        T.test_unitary_equivalence(MatrixFunction(S3, np.zeros((6, 2, 2))), g2, TesterConfig(0.5))


def test_config_validation():
    with pytest.raises(ValueError):
        TesterConfig(0.0)
    with pytest.raises(ValueError):
        TesterConfig(1.5)
    with pytest.raises(ValueError):
        TesterConfig(0.2, round_factor=1.0)
    with pytest.raises(ValueError):
        TesterConfig(0.2, hoeffding_const=1.0)


def test_custom_inner_tester():
    calls = []

    def inner(access, cfg, rng):
        calls.append(cfg.epsilon)
        return homomorphism_core(access, cfg, rng)

    r = with_class_function_reduction(inner, hom_query_bound, constant(S3), TesterConfig(0.4, seed=0))
    assert r.accepted and calls == [pytest.approx(0.2)]
