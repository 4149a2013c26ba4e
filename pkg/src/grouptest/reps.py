"""Unitary irreducible representations, characters and the Fourier transform.

Irreps are found numerically: a random Hermitian element of the commutant of
the left regular representation is diagonalised; each of its eigenspaces is
one copy of an irreducible subrepresentation.  Copies are sorted into
isotypic classes by their characters and one copy per class is kept.  Every
basis is checked against the representation invariants before it is
returned, and a fresh random element is tried if a check fails.
"""

from __future__ import annotations

import functools
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import GroupMismatch, NumericalFailure, ShapeMismatch
from .functions import MatrixFunction, ScalarFunction, tau_num, tau_rep
from .groups import FiniteGroup

DEFAULT_RETRIES = 5
_SNAP = 1e-9


def _snap(z):
    """Round real/imaginary parts that are within 1e-9 of an integer."""
    re, im = np.real(z).copy(), np.imag(z).copy()
    for part in (re, im):
        r = np.round(part)
        close = np.abs(part - r) <= _SNAP
        part[close] = r[close]
    return re + 1j * im


@dataclass(frozen=True, eq=False)
class UnitaryIrrep:
    label: str
    group: FiniteGroup
    mats: np.ndarray              # (n, d, d)
    class_characters: np.ndarray  # character value per conjugacy class

    @property
    def dim(self) -> int:
        return int(self.mats.shape[1])

    def __call__(self, x):
        return self.mats[x]

    def entry(self, i, j) -> ScalarFunction:
        """The matrix-coefficient function ``x -> phi(x)[i, j]``."""
        return ScalarFunction(self.group, self.mats[:, i, j])

    def __repr__(self):
        return f"<UnitaryIrrep {self.label} dim={self.dim}>"


class IrrepBasis:
    """A complete set of pairwise inequivalent unitary irreps of a group."""

    def __init__(self, group: FiniteGroup, irreps):
        self.group = group
        self.irreps = tuple(irreps)
        self._by_label = {phi.label: phi for phi in self.irreps}

    def __iter__(self):
        return iter(self.irreps)

    def __len__(self):
        return len(self.irreps)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self._by_label[key]
        return self.irreps[key]

    @property
    def labels(self):
        return [phi.label for phi in self.irreps]

    @property
    def dims(self):
        return [phi.dim for phi in self.irreps]

    def character_table(self) -> np.ndarray:
        """Rows are irreps, columns conjugacy classes (``group.classes`` order)."""
        return np.array([phi.class_characters for phi in self.irreps])

    def one_dimensional(self):
        return [phi for phi in self.irreps if phi.dim == 1]

    def __repr__(self):
        return f"<IrrepBasis of {self.group!r}: dims {self.dims}>"


def _class_order(G):
    """Class indices ordered by (size, smallest element)."""
    return sorted(range(G.num_classes), key=lambda c: (len(G.classes[c]), int(G.classes[c][0])))


def _restrict_regular(G, V):
    """``V* R(g) V`` for every g, where R is the left regular representation."""
    n, k = V.shape
    # (R(g) V)[a] = V[g^-1 a]
    idx = G.mul[G.inv]
    out = np.empty((n, k, k), dtype=complex)
    Vh = V.conj().T
    step = max(1, 2**22 // max(1, n * k))
    for s in range(0, n, step):
        out[s:s + step] = Vh @ V[idx[s:s + step]]
    return out


def _polar(mats):
    u, _, vh = np.linalg.svd(mats)
    return u @ vh


def _class_average(G, values):
    out = np.empty(G.num_classes, dtype=complex)
    for c, members in enumerate(G.classes):
        out[c] = values[members].mean()
    return out


def _attempt(G, rng):
    n = G.order
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (a + a.conj().T) / 2
    # average of R(x) H R(x)* over x has entries c[a^-1 b] with c[k] = E_u H[u, uk]
    c = H[np.arange(n)[:, None], G.mul].mean(axis=0)
    M = c[G.mul[G.inv[:, None], np.arange(n)[None, :]]]
    w, V = np.linalg.eigh(M)
    scale = max(1.0, float(np.max(np.abs(w))))
    cuts = np.flatnonzero(np.diff(w) > 1e-7 * scale) + 1
    clusters = np.split(np.arange(n), cuts)

    found = {}
    for idx in clusters:
        k = len(idx)
        if k * k > n:
            return None
        mats = _restrict_regular(G, V[:, idx])
        chi = _class_average(G, np.trace(mats, axis1=1, axis2=2))
        norm2 = float(np.sum(G.class_sizes * np.abs(chi) ** 2) / n)
        if abs(norm2 - 1) > 1e-6:
            return None       # eigenvalue collision: not irreducible
        key = tuple(np.round(np.concatenate([chi.real, chi.imag]), 6) + 0.0)
        entry = found.setdefault(key, [0, mats, chi])
        entry[0] += 1

    if len(found) != G.num_classes:
        return None
    if sum(mats.shape[1] ** 2 for _, mats, _ in found.values()) != n:
        return None
    if any(count != mats.shape[1] for count, mats, _ in found.values()):
        return None

    order = _class_order(G)
    items = []
    for _, mats, chi in found.values():
        mats = _polar(mats)
        chi = _snap(_class_average(G, np.trace(mats, axis1=1, axis2=2)))
        if mats.shape[1] == 1:
            mats = chi[G.class_of].reshape(n, 1, 1)
        sort_vals = tuple((round(float(chi[c].real), 9) + 0.0, round(float(chi[c].imag), 9) + 0.0) for c in order)
        items.append(((mats.shape[1], sort_vals), mats, chi))
    items.sort(key=lambda t: t[0])

    irreps = []
    counts = {}
    for (d, _), mats, chi in items:
        k = counts.get(d, 0)
        counts[d] = k + 1
        mats.flags.writeable = False
        chi.flags.writeable = False
        irreps.append(UnitaryIrrep(f"d{d}.{k}", G, mats, chi))
    basis = IrrepBasis(G, irreps)
    if not all(r <= tau_rep(phi.dim) for phi in basis for r in irrep_residuals(phi).values()):
        return None
    if schur_residual(basis) > tau_rep(max(basis.dims)):
        return None
    return basis


@functools.lru_cache(maxsize=64)
def compute_irreps(G: FiniteGroup, seed: int = 0, retries: int = DEFAULT_RETRIES) -> IrrepBasis:
    """Complete set of unitary irreps of ``G``; deterministic for a given seed.

    Irreps are labelled ``d<dim>.<k>`` and sorted by dimension, then by their
    character values on classes ordered by (class size, smallest element).
    """
    for attempt in range(retries):
        basis = _attempt(G, np.random.default_rng([seed, attempt]))
        if basis is not None:
            return basis
    raise NumericalFailure(f"irrep decomposition of {G!r} failed verification after {retries} attempts")


def irrep_residuals(phi: UnitaryIrrep) -> dict:
    """Worst-case residuals of the identity, homomorphism, unitarity and irreducibility checks."""
    G, m = phi.group, phi.mats
    n, d = m.shape[0], phi.dim
    eye = np.eye(d)
    hom = 0.0
    step = max(1, 2**20 // max(1, n * d * d))
    for s in range(0, n, step):
        prod = m[s:s + step, None] @ m[None, :]
        hom = max(hom, float(np.max(np.linalg.norm(m[G.mul[s:s + step]] - prod, axis=(2, 3)))))
    unit = float(np.max(np.linalg.norm(m @ m.conj().transpose(0, 2, 1) - eye, axis=(1, 2))))
    chi = np.trace(m, axis1=1, axis2=2)
    return {
        "identity": float(np.linalg.norm(m[0] - eye)),
        "homomorphism": hom,
        "unitarity": unit,
        "irreducibility": abs(float(np.mean(np.abs(chi) ** 2)) - 1.0),
    }


def schur_residual(B: IrrepBasis) -> float:
    """Max deviation of the Gram matrix of all ``sqrt(d) phi_ij`` from the identity."""
    n = B.group.order
    cols = [np.sqrt(phi.dim) * phi.mats.reshape(n, -1) for phi in B]
    X = np.concatenate(cols, axis=1)
    gram = X.T @ X.conj() / n
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


# -- characters --------------------------------------------------------------

def character(phi: UnitaryIrrep) -> ScalarFunction:
    return ScalarFunction(phi.group, phi.class_characters[phi.group.class_of])


def normalized_character(phi: UnitaryIrrep) -> ScalarFunction:
    """``chi / d``, which takes values in the unit disk and is 1 at the identity."""
    return ScalarFunction(phi.group, (phi.class_characters / phi.dim)[phi.group.class_of])


# -- Fourier transform ------------------------------------------------------------

class FourierCoefficients(Mapping):
    """Irrep label -> coefficient matrix."""

    def __init__(self, basis: IrrepBasis, coeffs: dict):
        self.basis = basis
        self._coeffs = dict(coeffs)

    def __getitem__(self, key):
        if isinstance(key, UnitaryIrrep):
            key = key.label
        return self._coeffs[key]

    def __iter__(self):
        return iter(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __repr__(self):
        return f"<FourierCoefficients over {len(self)} irreps>"


def _check_group(f, B):
    if f.group != B.group:
        raise GroupMismatch("function and irrep basis live on different groups")


def fourier_transform(f: ScalarFunction, B: IrrepBasis) -> FourierCoefficients:
    """``fhat(phi) = E_x f(x) conj(phi(x))`` (entrywise conjugate) for every irrep."""
    _check_group(f, B)
    n = B.group.order
    return FourierCoefficients(
        B, {phi.label: np.einsum("x,xij->ij", f.values, phi.mats.conj()) / n for phi in B}
    )


def inverse_fourier(F: Mapping, B: IrrepBasis) -> ScalarFunction:
    """``x -> sum_phi d_phi sum_ij F(phi)_ij phi_ij(x)``."""
    if set(F.keys()) != set(B.labels):
        raise ShapeMismatch("coefficient labels do not match the irrep basis")
    vals = np.zeros(B.group.order, dtype=complex)
    for phi in B:
        c = np.asarray(F[phi.label])
        if c.shape != (phi.dim, phi.dim):
            raise ShapeMismatch(f"coefficient for {phi.label} has shape {c.shape}, expected {(phi.dim, phi.dim)}")
        vals += phi.dim * np.einsum("ij,xij->x", c, phi.mats)
    return ScalarFunction(B.group, vals)


def plancherel_sum(F: Mapping, Fg: Mapping, B: IrrepBasis) -> complex:
    """``sum_phi d_phi sum_ij F_ij conj(G_ij)``."""
    return complex(sum(phi.dim * np.sum(F[phi.label] * np.conj(Fg[phi.label])) for phi in B))


# -- inner products and distances ----------------------------------------------

def _pair(f, g):
    if f.group != g.group:
        raise GroupMismatch("functions live on different groups")
    if type(f) is not type(g):
        raise ShapeMismatch("cannot compare scalar and matrix functions")
    if isinstance(f, MatrixFunction) and f.dim != g.dim:
        raise ShapeMismatch(f"matrix dimensions differ: {f.dim} vs {g.dim}")


def inner_product(f, g) -> complex:
    """``E_x f(x) conj(g(x))``; entrywise (Frobenius) for matrix functions."""
    _pair(f, g)
    prod = f.values * np.conj(g.values)
    if prod.ndim > 1:
        prod = prod.reshape(prod.shape[0], -1).sum(axis=1)
    return complex(prod.mean())


def l2_norm(f) -> float:
    v = np.abs(f.values) ** 2
    if v.ndim > 1:
        v = v.reshape(v.shape[0], -1).sum(axis=1)
    return float(np.sqrt(v.mean()))


def distance(f, g) -> float:
    """Half the L2 distance; for matrix functions half the root-mean Frobenius distance."""
    _pair(f, g)
    cls = type(f)
    return 0.5 * l2_norm(cls(f.group, f.values - g.values))


# -- Haar-random unitaries -------------------------------------------------------

def sample_haar_unitary(d: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary (or a stack of ``size`` of them).

    QR of a complex Ginibre matrix, with the phases of R's diagonal moved
    into Q; without that correction the result is not Haar distributed.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    shape = (d, d) if size is None else (size, d, d)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    ph = diag / np.abs(diag)
    return q * ph[..., None, :]


def nearby_unitary(U, dist: float, rng: np.random.Generator) -> np.ndarray:
    """A unitary ``V`` with ``||U - V||_F = dist`` in a random direction."""
    U = np.asarray(U)
    d = U.shape[0]
    if dist == 0:
        return U.copy()
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    K = (a + a.conj().T) / 2
    theta, W = np.linalg.eigh(K)
    top = np.max(np.abs(theta))

    def gap(t):
        return np.sum(4 * np.sin(t * theta / 2) ** 2) - dist**2

    t_max = np.pi / top
    if gap(t_max) < 0:
        raise ValueError(f"distance {dist} too large for this direction")
    t = brentq(gap, 0.0, t_max, xtol=1e-15, rtol=1e-15)
    return U @ (W * np.exp(1j * t * theta)) @ W.conj().T


# -- serialisation ----------------------------------------------------------------

def _complex_pairs(a):
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def irreps_to_json(B: IrrepBasis) -> dict:
    return {
        "group_order": B.group.order,
        "classes": [c.tolist() for c in B.group.classes],
        "irreps": [
            {
                "label": phi.label,
                "dim": phi.dim,
                "character": _complex_pairs(phi.class_characters),
                "matrices": _complex_pairs(phi.mats),
            }
            for phi in B
        ],
    }


def fourier_to_json(F: FourierCoefficients) -> dict:
    return {label: _complex_pairs(F[label]) for label in F}


def check_tolerance(B: IrrepBasis) -> float:
    return tau_num(B.group.order)
