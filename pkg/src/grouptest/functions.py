"""Tabulated functions on a finite group and their text file format.

``.fn`` files::

    scalar n
    re im              (n lines, group index order)

    matrix n d
    re im re im ...    (n*d lines of 2d floats: the d rows of each element's
                        matrix, element blocks in group index order)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, GroupMismatch, ShapeMismatch
from .groups import FiniteGroup


def tau_num(order):
    """Tolerance for transform identities on a group of the given order."""
    return 1e-8 * np.sqrt(order)


def tau_rep(dim):
    """Tolerance for representation invariants of an irrep of dimension ``dim``."""
    return 1e-8 * np.sqrt(dim)


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.shape[0] != self.group.order:
            raise ShapeMismatch(f"function has {v.shape[0]} values, group order is {self.group.order}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def bounded(self) -> bool:
        """Whether every value lies in the closed unit disk."""
        return bool(np.max(np.abs(self.values), initial=0.0) <= 1 + tau_num(self.group.order))

    def __call__(self, x):
        return self.values[x]

    def __len__(self):
        return self.group.order

    def __add__(self, other):
        _same_group(self, other)
        return ScalarFunction(self.group, self.values + other.values)

    def __sub__(self, other):
        _same_group(self, other)
        return ScalarFunction(self.group, self.values - other.values)

    def __mul__(self, c):
        return ScalarFunction(self.group, self.values * c)

    __rmul__ = __mul__

    def is_class_function(self, tol=0.0) -> bool:
        for c in self.group.classes:
            v = self.values[c]
            if np.max(np.abs(v - v[0])) > tol:
                return False
        return True


@dataclass(frozen=True, eq=False)
class MatrixFunction:
    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ShapeMismatch(f"matrix function values must have shape (n, d, d), got {v.shape}")
        if v.shape[0] != self.group.order:
            raise ShapeMismatch(f"function has {v.shape[0]} values, group order is {self.group.order}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def bounded(self) -> bool:
        """Whether every value has Frobenius norm at most one."""
        return bool(np.max(np.linalg.norm(self.values, axis=(1, 2)), initial=0.0) <= 1 + tau_num(self.group.order))

    def __call__(self, x):
        return self.values[x]

    def __len__(self):
        return self.group.order

    def conjugated(self, U):
        """The function ``x -> U f(x) U*``."""
        U = np.asarray(U)
        return MatrixFunction(self.group, U @ self.values @ U.conj().T)


def _same_group(f, g):
    if f.group != g.group:
        raise GroupMismatch("functions live on different groups")


def constant(G, c=1.0):
    return ScalarFunction(G, np.full(G.order, c, dtype=complex))


def zero(G):
    return constant(G, 0.0)


def class_function(G, class_values):
    """Class function from one value per conjugacy class (in ``G.classes`` order)."""
    class_values = np.asarray(class_values, dtype=complex)
    if class_values.shape != (G.num_classes,):
        raise ShapeMismatch(f"need {G.num_classes} class values, got {class_values.shape}")
    return ScalarFunction(G, class_values[G.class_of])


# -- .fn text format ---------------------------------------------------------

def _pair(v):
    return f"{float(v.real)!r} {float(v.imag)!r}"


def format_function(f) -> str:
    out = []
    if isinstance(f, ScalarFunction):
        out.append(f"scalar {f.group.order}")
        out += [_pair(v) for v in f.values]
    else:
        n, d = f.group.order, f.dim
        out.append(f"matrix {n} {d}")
        for m in f.values:
            for row in m:
                out.append(" ".join(_pair(v) for v in row))
    return "\n".join(out) + "\n"


def save_function(f, path):
    Path(path).write_text(format_function(f))


def _floats(parts, lineno, path):
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise FormatError("expected floating-point numbers", lineno, path) from None


def parse_function(text: str, group: FiniteGroup, path=None):
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError("empty function file", 1, path)
    header = lines[0].split()
    kind = header[0] if header else ""
    if kind == "scalar" and len(header) == 2:
        try:
            n = int(header[1])
        except ValueError:
            raise FormatError("bad header, expected 'scalar n'", 1, path) from None
        d = None
    elif kind == "matrix" and len(header) == 3:
        try:
            n, d = int(header[1]), int(header[2])
        except ValueError:
            raise FormatError("bad header, expected 'matrix n d'", 1, path) from None
        if d < 1:
            raise FormatError("matrix dimension must be positive", 1, path)
    else:
        raise FormatError("header must be 'scalar n' or 'matrix n d'", 1, path)
    if n != group.order:
        raise FormatError(f"function is defined on {n} elements but the group has order {group.order}", 1, path)
    body = lines[1:]
    if d is None:
        if len(body) != n:
            raise FormatError(f"expected {n} value lines, found {len(body)}", len(lines), path)
        vals = np.empty(n, dtype=complex)
        for i, line in enumerate(body):
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"expected 're im', found {len(parts)} fields", i + 2, path)
            re_, im_ = _floats(parts, i + 2, path)
            vals[i] = complex(re_, im_)
        return ScalarFunction(group, vals)
    if len(body) != n * d:
        raise FormatError(f"expected {n * d} matrix rows, found {len(body)}", len(lines), path)
    vals = np.empty((n * d, d), dtype=complex)
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != 2 * d:
            raise FormatError(f"expected {2 * d} floats, found {len(parts)}", i + 2, path)
        nums = np.array(_floats(parts, i + 2, path))
        vals[i] = nums[0::2] + 1j * nums[1::2]
    return MatrixFunction(group, vals.reshape(n, d, d))


def load_function(path, group: FiniteGroup):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read function file: {exc.strerror}", path=path) from None
    return parse_function(text, group, path=p)
