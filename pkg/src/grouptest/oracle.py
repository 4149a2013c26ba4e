"""Exact ground truth by enumeration: canonical class functions, distances to
each tested property, and exact evaluation of the identities the testers
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, GroupMismatch, GroupTooLarge
from .functions import MatrixFunction, ScalarFunction, tau_num
from .reps import (
    IrrepBasis,
    character,
    compute_irreps,
    distance,
    fourier_transform,
    inner_product,
    l2_norm,
    normalized_character,
    sample_haar_unitary,
)

QUADRATIC_CAP = 512
CUBIC_CAP = 120


def _cap(G, cap, what):
    if G.order > cap:
        raise GroupTooLarge(f"{what} enumerates |G| = {G.order} > {cap} elements")


# -- canonical class functions ------------------------------------------------------

def _plurality(values):
    """Most frequent value; ties go to the smallest (real, imag)."""
    uniq, counts = np.unique(values, return_counts=True)
    best = counts.max()
    cands = uniq[counts == best]
    order = np.lexsort((cands.imag, cands.real))
    return cands[order[0]], best / len(values)


def plurality_class_function(f: ScalarFunction) -> ScalarFunction:
    out = np.empty(f.group.order, dtype=complex)
    for members in f.group.classes:
        out[members] = _plurality(f.values[members])[0]
    return ScalarFunction(f.group, out)


def mean_class_function(f: ScalarFunction) -> ScalarFunction:
    """Per-class mean: the nearest class function in L2."""
    out = np.empty(f.group.order, dtype=complex)
    for members in f.group.classes:
        out[members] = f.values[members].mean()
    return ScalarFunction(f.group, out)


def corrected_class_function(f: ScalarFunction) -> ScalarFunction:
    """Plurality value on classes where it holds a strict majority, class mean elsewhere."""
    out = np.empty(f.group.order, dtype=complex)
    for members in f.group.classes:
        v = f.values[members]
        z, p = _plurality(v)
        out[members] = z if p > 0.5 else v.mean()
    return ScalarFunction(f.group, out)


# -- certificates ---------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return np.stack([v.real, v.imag], axis=-1).tolist()
        return v.tolist()
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class FarnessCertificate:
    """Distance of ``f`` to a property, with the minimiser that attains it.

    ``artifact`` is the nearest member found (a function); ``distance`` is
    ``dist(f, artifact)``.  For ``method == "heuristic"`` the distance is only
    an upper bound and ``lower_bound`` is the rigorous bound.
    """

    property: str
    distance: float
    method: str
    optimizer: dict
    artifact: object
    function: object
    lower_bound: float | None = None
    extra: dict = field(default_factory=dict)

    def revalidate(self, tol=None) -> bool:
        tol = tau_num(self.function.group.order) if tol is None else tol
        return abs(distance(self.function, self.artifact) - self.distance) <= tol

    def to_dict(self) -> dict:
        out = {
            "property": self.property,
            "distance": float(self.distance),
            "method": self.method,
            "optimizer": _jsonable(self.optimizer),
        }
        if self.lower_bound is not None:
            out["lower_bound"] = float(self.lower_bound)
        if self.extra:
            out["extra"] = _jsonable(self.extra)
        return out


def distance_to_class_functions(f: ScalarFunction) -> FarnessCertificate:
    g = mean_class_function(f)
    return FarnessCertificate(
        "conjugate-invariance", distance(f, g), "closed-form",
        {"class_values": np.array([g.values[c[0]] for c in f.group.classes])}, g, f,
    )


def distance_to_homomorphisms(f: ScalarFunction, B: IrrepBasis | None = None) -> FarnessCertificate:
    """Nearest of the zero function and the one-dimensional characters."""
    B = compute_irreps(f.group) if B is None else B
    if B.group != f.group:
        raise GroupMismatch("function and irrep basis live on different groups")
    cands = [("zero", ScalarFunction(f.group, np.zeros(f.group.order)))]
    cands += [(phi.label, character(phi)) for phi in B.one_dimensional()]
    dists = [distance(f, h) for _, h in cands]
    i = int(np.argmin(dists))
    return FarnessCertificate(
        "homomorphism", dists[i], "exhaustive", {"nearest": cands[i][0]}, cands[i][1], f,
        extra={"candidates": {lab: d for (lab, _), d in zip(cands, dists)}},
    )


def distance_to_character_rays(f: ScalarFunction, B: IrrepBasis | None = None) -> FarnessCertificate:
    """Distance to {c chi_phi}: unit-disk constrained value plus the unconstrained lower bound.

    For each irrep the unconstrained optimum is c = <f, chi_phi>.  If c chi_phi
    leaves the unit disk (|c| > 1/d_phi) the constrained optimum on the ray
    is its radial projection c / (|c| d_phi), since the objective is a convex
    function of c and the feasible set is a disk.
    """
    B = compute_irreps(f.group) if B is None else B
    if B.group != f.group:
        raise GroupMismatch("function and irrep basis live on different groups")
    best = None
    lower = np.inf
    per = {}
    for phi in B:
        chi = character(phi)
        c = inner_product(f, chi)
        unconstrained = distance(f, chi * c)
        lower = min(lower, unconstrained)
        radius = 1.0 / phi.dim
        cc = c if abs(c) <= radius else c / abs(c) * radius
        d = distance(f, chi * cc)
        per[phi.label] = {"c": cc, "distance": d, "unconstrained": unconstrained}
        if best is None or d < best[0]:
            best = (d, phi.label, cc, chi * cc)
    d, label, cc, g = best
    return FarnessCertificate(
        "character-ray", d, "closed-form", {"irrep": label, "c": cc}, g, f,
        lower_bound=float(lower), extra={"per_irrep": per},
    )


# -- identities -------------------------------------------------------------------

def exact_conjugation_rejection_probability(f: ScalarFunction, method="classes") -> float:
    """Pr over uniform x, y of f(x) != f(y x y^-1), exactly.

    ``classes`` uses that y x y^-1 is uniform on the class of x; ``naive``
    enumerates all pairs.
    """
    G = f.group
    _cap(G, QUADRATIC_CAP, "exact rejection probability")
    v = f.values
    if method == "naive":
        return float(np.mean(v[:, None] != v[G.conj.T]))
    total = 0.0
    for members in G.classes:
        _, counts = np.unique(v[members], return_counts=True)
        p = counts / len(members)
        total += len(members) / G.order * (1.0 - np.sum(p * p))
    return float(total)


def cubic_expectation(f: ScalarFunction, B: IrrepBasis | None = None, time_domain=True):
    """``E_{x,y} f(x) f(y) conj(f(xy))`` by direct summation and from Fourier coefficients.

    Returns ``(time, fourier, diagonal)``; ``time`` is None when skipped and
    ``diagonal`` is the class-function form sum_phi d_phi sum_i F_ii |F_ii|^2,
    which equals the others only for class functions.
    """
    G = f.group
    B = compute_irreps(G) if B is None else B
    v = f.values
    t = None
    if time_domain:
        _cap(G, QUADRATIC_CAP, "time-domain cubic expectation")
        t = complex(np.mean(v[:, None] * v[None, :] * np.conj(v[G.mul])))
    F = fourier_transform(f, B)
    four = 0j
    diag = 0j
    for phi in B:
        A = F[phi.label]
        four += phi.dim * np.sum((A @ A) * np.conj(A))
        dA = np.diagonal(A)
        diag += phi.dim * np.sum(dA * np.abs(dA) ** 2)
    return t, complex(four), complex(diag)


def conjugation_average(f: ScalarFunction) -> np.ndarray:
    """``A[y, x] = E_z f(y z x z^-1)``, averaged over the class of x."""
    G = f.group
    out = np.empty((G.order, G.order), dtype=complex)
    for members in G.classes:
        col = f.values[G.mul[:, members]].mean(axis=1)
        out[:, members] = col[:, None]
    return out


def weyl_defect(f: ScalarFunction, method="classes") -> float:
    """``E_{x,y} |f(x) f(y) - f(1) E_z f(y z x z^-1)|^2`` exactly.

    ``brute`` sums over all (x, y, z) and is limited to small groups.
    """
    G = f.group
    v = f.values
    if method == "brute":
        _cap(G, CUBIC_CAP, "brute-force Weyl defect")
        n = G.order
        A = np.empty((n, n), dtype=complex)
        for y in range(n):
            A[y] = v[G.mul[y][G.conj]].mean(axis=0)   # G.conj[z, x] = z x z^-1
    else:
        _cap(G, QUADRATIC_CAP, "Weyl defect")
        A = conjugation_average(f)
    lhs = v[None, :] * v[:, None]                       # [y, x]
    return float(np.mean(np.abs(lhs - v[0] * A) ** 2))


def weyl_lower_bound(f: ScalarFunction, B: IrrepBasis | None = None) -> float:
    """``||f||^2 min_phi ||f - f(1) chi~_phi||^2``."""
    B = compute_irreps(f.group) if B is None else B
    f1 = f.values[0]
    m = min(l2_norm(f - normalized_character(phi) * f1) ** 2 for phi in B)
    return l2_norm(f) ** 2 * m


# -- unitary equivalence ------------------------------------------------------------

def plant_unitary_equivalent(g: MatrixFunction, U0) -> MatrixFunction:
    return g.conjugated(U0)


def trace_gap_bound(f: MatrixFunction, g: MatrixFunction) -> float:
    """Lower bound on dist(f, U g U*) valid for every unitary U (traces are conjugation invariant)."""
    tf = np.trace(f.values, axis1=1, axis2=2)
    tg = np.trace(g.values, axis1=1, axis2=2)
    return float(max(0.0, np.sqrt(np.mean(np.abs(tf - tg) ** 2) / (4 * f.dim))))


def _objective(fv, gv, U):
    D = U @ gv @ U.conj().T - fv
    return float(np.mean(np.sum(np.abs(D) ** 2, axis=(1, 2))))


def _descend(fv, gv, U, iters=500, tol=1e-14):
    """Riemannian gradient descent with Armijo backtracking on U(d)."""
    val = _objective(fv, gv, U)
    step = 1.0
    for _ in range(iters):
        # derivative of E||U g U* - f||^2 along U -> U exp(tX), X skew-Hermitian
        R = gv - U.conj().T @ fv @ U               # residual in g's frame
        Rh = R.conj().transpose(0, 2, 1)
        K = np.mean(gv @ Rh - Rh @ gv, axis=0)
        grad = K - K.conj().T
        gn = np.linalg.norm(grad)
        if gn < 1e-12:
            break
        while step > 1e-12:
            w, V = np.linalg.eigh(1j * grad * step)
            Un = U @ ((V * np.exp(-1j * w)) @ V.conj().T)
            nv = _objective(fv, gv, Un)
            if nv <= val - 1e-4 * step * gn**2:
                break
            step /= 2
        else:
            break
        if val - nv < tol:
            U, val = Un, nv
            break
        U, val = Un, nv
        step = min(step * 2, 1.0)
    return U, val


def unitary_equivalence_gap(f: MatrixFunction, g: MatrixFunction, restarts=8, seed=0) -> FarnessCertificate:
    """Heuristic search for the U minimising dist(f, U g U*).

    Descends from the identity and ``restarts`` Haar-random starts.  The
    distance reported is attained by the returned U (an upper bound on the
    true gap); ``lower_bound`` is the trace bound, which is rigorous.
    """
    if f.group != g.group:
        raise GroupMismatch("f and g live on different groups")
    if f.dim != g.dim:
        raise DimMismatch(f"f has dimension {f.dim} but g has dimension {g.dim}")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    rng = np.random.default_rng(seed)
    d = g.dim
    starts = [np.eye(d, dtype=complex)] + list(sample_haar_unitary(d, rng, size=restarts))
    best = None
    for U0 in starts:
        U, val = _descend(f.values, g.values, U0)
        if best is None or val < best[1]:
            best = (U, val)
    U, val = best
    art = g.conjugated(U)
    return FarnessCertificate(
        "unitary-equivalence", distance(f, art), "heuristic", {"U": U}, art, f,
        lower_bound=trace_gap_bound(f, g),
    )
