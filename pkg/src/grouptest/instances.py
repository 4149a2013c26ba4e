"""Generators for test inputs with certified distances.

Each family produces an ``Instance`` from (group, parameter, rng); ``certify``
computes the oracle certificate for the property a given tester checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IncompatibleFamily
from .functions import MatrixFunction, ScalarFunction, class_function, load_function, save_function
from .oracle import (
    distance_to_character_rays,
    distance_to_class_functions,
    distance_to_homomorphisms,
    plant_unitary_equivalent,
    trace_gap_bound,
    unitary_equivalence_gap,
)
from .reps import character, compute_irreps, normalized_character, sample_haar_unitary

SCALAR_FAMILIES = (
    "exact-character",
    "perturbed-character",
    "random-class-function",
    "random-function",
    "homomorphism",
    "noisy-homomorphism",
)
MATRIX_FAMILIES = ("planted-unitary", "far-unitary")
FAMILIES = SCALAR_FAMILIES + MATRIX_FAMILIES

# property checked by each tester id
TESTER_PROPERTY = {
    "test-conjinv": "conjugate-invariance",
    "test-hom": "homomorphism",
    "test-char": "character-ray",
    "test-uniteq": "unitary-equivalence",
}

FAR_TRACE_MARGIN = 0.7


@dataclass
class Instance:
    family: str
    param: float
    f: object
    g: object = None          # second argument of the unitary tester
    note: str = ""

    def save(self, directory, stem):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        save_function(self.f, directory / f"{stem}_f.fn")
        if self.g is not None:
            save_function(self.g, directory / f"{stem}_g.fn")

    @classmethod
    def load(cls, directory, stem, group, family="", param=0.0):
        directory = Path(directory)
        f = load_function(directory / f"{stem}_f.fn", group)
        gp = directory / f"{stem}_g.fn"
        g = load_function(gp, group) if gp.exists() else None
        return cls(family, param, f, g)


def check_compatible(tester: str, family: str):
    if family not in FAMILIES:
        raise IncompatibleFamily(f"unknown family {family!r}")
    if tester not in TESTER_PROPERTY:
        raise IncompatibleFamily(f"unknown tester {tester!r}")
    matrix = family in MATRIX_FAMILIES
    if matrix != (tester == "test-uniteq"):
        raise IncompatibleFamily(f"family {family!r} cannot be used with {tester}")


def _unimodular(rng, k):
    return np.exp(2j * np.pi * rng.random(k))


def _random_disk_matrices(rng, n, d):
    a = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    return a / np.max(np.linalg.norm(a, axis=(1, 2)))


def generate(family: str, G, param, rng, margin=FAR_TRACE_MARGIN) -> Instance:
    """Build one instance.

    Parameters by family: exact-character and homomorphism take an irrep
    index (among all irreps / among one-dimensional ones, modulo their
    number); perturbed-character the mixing weight of a random class
    function; random-function the probability of the value -1;
    noisy-homomorphism the fraction of sign flips; the unitary families the
    matrix dimension.  random-class-function ignores its parameter.
    ``margin`` is the trace-gap lower bound of far-unitary instances.
    """
    n = G.order
    if family in ("exact-character", "perturbed-character"):
        B = compute_irreps(G)
        if family == "exact-character":
            phi = B[int(param) % len(B)]
            return Instance(family, param, normalized_character(phi), note=phi.label)
        phi = B[int(rng.integers(len(B)))]
        u = _unimodular(rng, G.num_classes)
        u[G.class_of[0]] = 1.0
        f = ScalarFunction(G, (1 - param) * normalized_character(phi).values + param * u[G.class_of])
        return Instance(family, param, f, note=phi.label)
    if family == "random-class-function":
        u = _unimodular(rng, G.num_classes)
        u[G.class_of[0]] = 1.0
        return Instance(family, param, class_function(G, u))
    if family == "random-function":
        p = 0.5 if param is None else float(param)
        return Instance(family, param, ScalarFunction(G, np.where(rng.random(n) < p, -1.0, 1.0)))
    if family in ("homomorphism", "noisy-homomorphism"):
        ones = compute_irreps(G).one_dimensional()
        if family == "homomorphism":
            phi = ones[int(param) % len(ones)]
            return Instance(family, param, character(phi), note=phi.label)
        phi = ones[int(rng.integers(len(ones)))]
        flip = rng.random(n) < param
        return Instance(family, param, ScalarFunction(G, np.where(flip, -1, 1) * character(phi).values), note=phi.label)
    if family == "planted-unitary":
        d = int(param)
        g = MatrixFunction(G, _random_disk_matrices(rng, n, d))
        return Instance(family, param, plant_unitary_equivalent(g, sample_haar_unitary(d, rng)), g)
    if family == "far-unitary":
        # f and g share a traceless part up to conjugation but have opposite
        # scalar parts, so their traces differ by 2 c sqrt(d) everywhere
        d = int(param)
        c = float(margin)
        if not 0 < c <= 1:
            raise ValueError("margin must lie in (0, 1]")
        h = _random_disk_matrices(rng, n, d)
        h = h - np.trace(h, axis1=1, axis2=2)[:, None, None] / d * np.eye(d)
        h /= max(1.0, np.max(np.linalg.norm(h, axis=(1, 2))))
        r = np.sqrt(1 - c * c)
        phase = _unimodular(rng, n)[:, None, None]
        scal = c * phase / np.sqrt(d) * np.eye(d)
        U0 = sample_haar_unitary(d, rng)
        g = MatrixFunction(G, r * h + scal)
        f = MatrixFunction(G, U0 @ (r * h) @ U0.conj().T - scal)
        return Instance(family, param, f, g)
    raise IncompatibleFamily(f"unknown family {family!r}")


def certify(instance: Instance, tester: str, restarts=8, seed=0):
    """Oracle certificate for the property checked by ``tester``."""
    prop = TESTER_PROPERTY[tester]
    f = instance.f
    if prop == "conjugate-invariance":
        return distance_to_class_functions(f)
    if prop == "homomorphism":
        return distance_to_homomorphisms(f)
    if prop == "character-ray":
        return distance_to_character_rays(f)
    cert = unitary_equivalence_gap(f, instance.g, restarts=restarts, seed=seed)
    cert.lower_bound = trace_gap_bound(f, instance.g)
    return cert
