import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grouptest.errors import DimMismatch, GroupTooLarge
from grouptest.functions import MatrixFunction, ScalarFunction, class_function, constant, zero
from grouptest.groups import cyclic, dihedral, quaternion, symmetric
from grouptest.instances import FAMILIES, certify, check_compatible, generate
from grouptest.errors import IncompatibleFamily
from grouptest.oracle import (
    corrected_class_function,
    cubic_expectation,
    distance_to_character_rays,
    distance_to_class_functions,
    distance_to_homomorphisms,
    exact_conjugation_rejection_probability,
    mean_class_function,
    plant_unitary_equivalent,
    plurality_class_function,
    trace_gap_bound,
    unitary_equivalence_gap,
    weyl_defect,
    weyl_lower_bound,
)
from grouptest.reps import character, compute_irreps, distance, l2_norm, normalized_character, sample_haar_unitary

S3, S4 = symmetric(3), symmetric(4)


def size3_class(G=S3):
    return next(c for c in G.classes if len(c) == 3)


def test_canonical_functions_fix_class_functions():
    f = normalized_character(compute_irreps(S4)["d2.0"])
    for h in (plurality_class_function(f), mean_class_function(f), corrected_class_function(f)):
        assert np.array_equal(h.values, f.values)


def test_canonical_functions_on_split_class():
    v = np.ones(6, dtype=complex)
    c = size3_class()
    v[c[2]] = -1
    f = ScalarFunction(S3, v)
    assert plurality_class_function(f).values[c[0]] == 1
    assert mean_class_function(f).values[c[0]] == pytest.approx(1 / 3)
    assert corrected_class_function(f).values[c[0]] == 1


def test_half_split_uses_mean_and_tie_break():
    G = cyclic(1)
    # class {a, b} with values {1, -1}: use the two-element class of D_3's... build on S3 3-cycles
    c = next(cl for cl in S3.classes if len(cl) == 2)
    v = np.ones(6, dtype=complex)
    v[c[0]] = -1
    f = ScalarFunction(S3, v)
    assert corrected_class_function(f).values[c[0]] == 0
    assert plurality_class_function(f).values[c[0]] == -1
    assert G.order == 1


def test_rejection_probability_paths_agree():
    rng = np.random.default_rng(0)
    for G in (S3, S4, quaternion(), dihedral(5)):
        for _ in range(20):
            f = ScalarFunction(G, rng.choice([1, -1, 1j], size=G.order))
            a = exact_conjugation_rejection_probability(f)
            b = exact_conjugation_rejection_probability(f, method="naive")
            assert a == pytest.approx(b, abs=1e-12)


def test_rejection_probability_split_example():
    v = np.ones(6, dtype=complex)
    c = size3_class()
    v[c[2]] = -1
    p = exact_conjugation_rejection_probability(ScalarFunction(S3, v))
    assert p == pytest.approx((9 - (4 + 1)) / 9 * 9 / 18)
    assert exact_conjugation_rejection_probability(constant(S3)) == 0


def test_size_caps():
    G = symmetric(6)
    f = constant(G)
    with pytest.raises(GroupTooLarge):
        exact_conjugation_rejection_probability(f)
    with pytest.raises(GroupTooLarge):
        weyl_defect(f, method="brute")
    t, four, _ = cubic_expectation(constant(symmetric(5)), time_domain=False)
    assert t is None and four == pytest.approx(1)


def test_homomorphism_distances():
    B = compute_irreps(S3)
    assert distance_to_homomorphisms(character(B["d1.0"])).distance == 0
    assert distance_to_homomorphisms(zero(S3)).distance == 0
    f = normalized_character(B["d2.0"])
    cert = distance_to_homomorphisms(f)
    # ||chi~||^2 = 1/4 and <chi~, lambda> = 0 for each one-dimensional lambda
    assert cert.distance == pytest.approx(0.25)
    assert cert.optimizer["nearest"] == "zero"
    assert cert.revalidate()


def test_character_ray_distances():
    B = compute_irreps(S4)
    for phi in B:
        cert = distance_to_character_rays(normalized_character(phi) * 0.5)
        assert cert.distance == pytest.approx(0, abs=1e-12)
        assert cert.optimizer["c"] == pytest.approx(0.5 / phi.dim)
    assert distance_to_character_rays(zero(S4)).distance == 0
    f = ScalarFunction(S4, (normalized_character(B["d2.0"]).values + normalized_character(B["d3.0"]).values) / 2)
    cert = distance_to_character_rays(f)
    best = max(abs(np.vdot(character(phi).values, f.values) / S4.order) for phi in B)
    closed = 0.5 * np.sqrt(l2_norm(f) ** 2 - best**2)
    assert cert.lower_bound == pytest.approx(closed)
    assert cert.distance >= cert.lower_bound - 1e-12
    assert cert.revalidate()


def test_cubic_examples():
    B = compute_irreps(S4)
    for phi in B.one_dimensional():
        t, four, _ = cubic_expectation(character(phi), B)
        assert t == pytest.approx(1) and four == pytest.approx(1)
    t, four, _ = cubic_expectation(zero(S4), B)
    assert t == 0 and four == 0
    rng = np.random.default_rng(1)
    for _ in range(20):
        f = ScalarFunction(S3, rng.standard_normal(6) + 1j * rng.standard_normal(6))
        t, four, _ = cubic_expectation(f)
        assert abs(t - four) <= 1e-9


def test_cubic_diagonal_form_for_class_functions():
    rng = np.random.default_rng(2)
    for G in (S4, quaternion()):
        f = class_function(G, rng.standard_normal(G.num_classes) + 1j * rng.standard_normal(G.num_classes))
        t, four, diag = cubic_expectation(f)
        assert abs(t - diag) <= 1e-9 and abs(four - diag) <= 1e-9


def test_weyl_defect_examples():
    B = compute_irreps(S4)
    for phi in B:
        assert weyl_defect(normalized_character(phi)) == pytest.approx(0, abs=1e-20)
    assert weyl_defect(zero(S4)) == 0


def test_weyl_lower_bound_on_random_class_functions():
    rng = np.random.default_rng(3)
    B = compute_irreps(S4)
    for _ in range(50):
        vals = np.exp(2j * np.pi * rng.random(S4.num_classes)) * rng.random(S4.num_classes)
        vals[S4.class_of[0]] = 1
        f = class_function(S4, vals)
        a, b = weyl_defect(f), weyl_defect(f, method="brute")
        assert a == pytest.approx(b, abs=1e-12)
        assert a >= weyl_lower_bound(f, B) - 1e-12


def test_weyl_zero_iff_ray():
    B = compute_irreps(S4)
    rng = np.random.default_rng(4)
    for phi in B:
        for c in (1.0, 0.5j, 0.3):
            f = normalized_character(phi) * c
            assert weyl_defect(f) < 1e-20
            assert distance_to_character_rays(f, B).lower_bound < 1e-9
            g = ScalarFunction(S4, f.values + 0.05 * class_function(S4, rng.standard_normal(S4.num_classes)).values)
            assert weyl_defect(g) > 1e-8
            assert distance_to_character_rays(g, B).lower_bound > 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([S3, S4, quaternion(), dihedral(4)]))
def test_class_function_bounds(seed, G):
    rng = np.random.default_rng(seed)
    f = ScalarFunction(G, rng.choice([1, -1, 1j, -1j], size=G.order))
    near = distance(f, mean_class_function(f))
    assert distance(f, corrected_class_function(f)) <= 3 * near + 1e-12
    assert exact_conjugation_rejection_probability(f) >= distance(f, plurality_class_function(f)) ** 2 - 1e-12
    # mean minimises over class functions: perturbing it never helps
    for _ in range(3):
        h = mean_class_function(f).values + 0.1 * class_function(G, rng.standard_normal(G.num_classes)).values
        assert distance(f, ScalarFunction(G, h)) >= near - 1e-12


def test_unitary_gap_examples():
    rng = np.random.default_rng(5)
    g = MatrixFunction(S3, rng.standard_normal((6, 2, 2)) / 4)
    cert = unitary_equivalence_gap(g, g)
    assert cert.distance == 0 and np.allclose(cert.optimizer["U"], np.eye(2))
    f = plant_unitary_equivalent(g, sample_haar_unitary(2, rng))
    cert = unitary_equivalence_gap(f, g)
    assert cert.distance <= 1e-6 and cert.method == "heuristic" and cert.revalidate()
    delta = 0.1
    shifted = MatrixFunction(S3, g.values + delta * np.eye(2))
    assert trace_gap_bound(shifted, g) == pytest.approx(delta / np.sqrt(2))
    with pytest.raises(DimMismatch):
        unitary_equivalence_gap(MatrixFunction(S3, np.zeros((6, 3, 3))), g)


def test_instance_families():
    rng = np.random.default_rng(6)
    for fam in FAMILIES:
        param = 2 if fam in ("planted-unitary", "far-unitary") else 0.3
        inst = generate(fam, S4, param, rng)
        assert inst.f.bounded
        tester = "test-uniteq" if inst.g is not None else "test-char"
        cert = certify(inst, tester)
        if cert.method != "heuristic":
            assert cert.revalidate()
    far = generate("far-unitary", S4, 2, rng)
    assert trace_gap_bound(far.f, far.g) == pytest.approx(0.7)
    with pytest.raises(IncompatibleFamily):
        check_compatible("test-hom", "planted-unitary")
    with pytest.raises(IncompatibleFamily):
        check_compatible("test-uniteq", "random-function")
