"""Finite groups given by Cayley tables.

Elements are the integers ``0..n-1`` and the identity is always ``0``.  The
multiplication table ``mul[x, y]`` holds the index of ``x*y``.  Conjugacy
classes are computed once, on construction.

Canonical element orderings of the built-in families (frozen, so that
function files are portable):

* ``cyclic(n)``: ``k`` is the residue ``k mod n``.
* ``boolean_cube(n)``: ``k`` is the bit vector of ``k`` (binary counting
  order, bit ``i`` is coordinate ``i``), group law XOR.
* ``dihedral(n)``: order ``2n``; ``k < n`` is the rotation ``r^k`` and
  ``n + k`` is the reflection ``s r^k``, with ``s r s = r^-1``.
* ``symmetric(n)``: permutations of ``0..n-1`` in lexicographic order of
  their one-line notation; ``(p*q)(i) = p(q(i))``.
* ``quaternion``: ``1, -1, i, -i, j, -j, k, -k``.
* ``direct_product(G, H)``: ``(g, h)`` has index ``g * |H| + h``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, NotAGroup, OrderCapExceeded

DEFAULT_ORDER_CAP = 2048
EXHAUSTIVE_ASSOCIATIVITY_LIMIT = 512


def _frozen(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    mul: np.ndarray
    inv: np.ndarray
    class_of: np.ndarray
    classes: tuple
    name: str = ""
    # conj[z, x] = z x z^-1
    conj: np.ndarray = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return int(self.mul.shape[0])

    @property
    def identity(self) -> int:
        return 0

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.classes])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def conjugate(self, z, x):
        """``z x z^-1`` (vectorised over array arguments)."""
        return self.conj[z, x]

    def __len__(self):
        return self.order

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return np.array_equal(self.mul, other.mul) and np.array_equal(
            self.class_of, other.class_of
        )

    def __hash__(self):
        return hash((self.order, self.mul.tobytes()))

    def __repr__(self):
        label = self.name or "group"
        return f"<FiniteGroup {label} order={self.order} classes={self.num_classes}>"


def _find_violation(table, n, rng):
    """Return a violated law as a message, or None for a group."""
    ar = np.arange(n)
    ident = [e for e in range(n) if np.array_equal(table[e], ar) and np.array_equal(table[:, e], ar)]
    if not ident:
        return "no two-sided identity element", None
    e = ident[0]
    for x in range(n):
        left = np.flatnonzero(table[x] == e)
        if not any(table[y, x] == e for y in left):
            return f"element {x} has no inverse", None
    if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT:
        for x in range(n):
            lhs = table[table[x]]          # (x*y)*z over all y, z
            rhs = table[x][table]          # x*(y*z)
            bad = np.argwhere(lhs != rhs)
            if len(bad):
                y, z = bad[0]
                return f"associativity fails for ({x}, {int(y)}, {int(z)})", None
    else:
        trials = 10 * n * n
        chunk = 1 << 20
        done = 0
        while done < trials:
            m = min(chunk, trials - done)
            x, y, z = rng.integers(n, size=(3, m))
            lhs = table[table[x, y], z]
            rhs = table[x, table[y, z]]
            bad = np.flatnonzero(lhs != rhs)
            if len(bad):
                i = bad[0]
                return f"associativity fails for ({x[i]}, {y[i]}, {z[i]})", None
            done += m
    return None, e


def _conjugacy(mul, inv):
    n = mul.shape[0]
    # conj[z, x] = (z x) z^-1
    conj = mul[mul, inv[:, None]]
    class_of = np.full(n, -1, dtype=np.int64)
    classes = []
    for x in range(n):
        if class_of[x] >= 0:
            continue
        orbit = np.unique(conj[:, x])
        class_of[orbit] = len(classes)
        classes.append(_frozen(orbit))
    return conj, class_of, tuple(classes)


def from_cayley_table(table, name="", *, validate=True, seed=0) -> FiniteGroup:
    """Validate a Cayley table and build a group with identity at index 0.

    Associativity is checked on all triples up to order 512 and on
    ``10 n^2`` random triples above that.
    """
    try:
        table = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise NotAGroup(f"table is not an integer matrix: {exc}") from None
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise NotAGroup(f"table must be a non-empty square matrix, got shape {table.shape}")
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise NotAGroup(f"table entries must lie in [0, {n})")
    if validate:
        msg, e = _find_violation(table, n, np.random.default_rng(seed))
        if msg:
            raise NotAGroup(msg)
    else:
        e = int(np.flatnonzero((table == np.arange(n)).all(axis=1))[0])
    if e != 0:
        # swap labels 0 <-> e
        perm = np.arange(n)
        perm[0], perm[e] = e, 0          # perm is its own inverse
        table = perm[table[np.ix_(perm, perm)]]
    inv = np.argmax(table == 0, axis=1)
    conj, class_of, classes = _conjugacy(table, inv)
    return FiniteGroup(
        mul=_frozen(table),
        inv=_frozen(inv),
        class_of=_frozen(class_of),
        classes=classes,
        name=name,
        conj=_frozen(conj),
    )


# -- built-in families -------------------------------------------------------

def _check_cap(order, cap):
    if order > cap:
        raise OrderCapExceeded(f"group order {order} exceeds cap {cap}")


def cyclic(n, cap=DEFAULT_ORDER_CAP):
    if n < 1:
        raise ValueError("cyclic(n) needs n >= 1")
    _check_cap(n, cap)
    a = np.arange(n)
    return from_cayley_table((a[:, None] + a[None, :]) % n, f"cyclic:{n}", validate=False)


def boolean_cube(n, cap=DEFAULT_ORDER_CAP):
    if n < 0:
        raise ValueError("boolean_cube(n) needs n >= 0")
    _check_cap(2**n, cap)
    a = np.arange(2**n)
    return from_cayley_table(a[:, None] ^ a[None, :], f"boolean_cube:{n}", validate=False)


def dihedral(n, cap=DEFAULT_ORDER_CAP):
    """Symmetries of the regular n-gon, order 2n."""
    if n < 1:
        raise ValueError("dihedral(n) needs n >= 1")
    _check_cap(2 * n, cap)
    # element (f, k) = s^f r^k ; (f1,k1)(f2,k2) = (f1^f2, (-1)^f2 k1 + k2)
    f = np.repeat([0, 1], n)
    k = np.tile(np.arange(n), 2)
    f1, f2 = f[:, None], f[None, :]
    k1, k2 = k[:, None], k[None, :]
    ff = f1 ^ f2
    kk = (np.where(f2 == 1, -k1, k1) + k2) % n
    return from_cayley_table(ff * n + kk, f"dihedral:{n}", validate=False)


def symmetric(n, cap=DEFAULT_ORDER_CAP):
    if n < 0:
        raise ValueError("symmetric(n) needs n >= 0")
    order = 1
    for i in range(2, n + 1):
        order *= i
    _check_cap(order, cap)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(order, n)
    # lexicographic order of one-line notation == numeric order of base-n codes
    weights = max(n, 1) ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = perms @ weights
    # (p*q)(i) = p(q(i))
    comp = perms[np.arange(order)[:, None, None], perms[None, :, :]]
    table = np.searchsorted(codes, comp @ weights)
    return from_cayley_table(table, f"symmetric:{n}", validate=False)


def symmetric_permutations(n):
    """One-line notation of the elements of ``symmetric(n)`` in index order."""
    return [tuple(p) for p in itertools.permutations(range(n))]


def quaternion(cap=DEFAULT_ORDER_CAP):
    _check_cap(8, cap)
    # element = sign * unit, units 1,i,j,k -> 0..3, index = 2*unit + (sign<0)
    unit_mul = [
        [(1, 0), (1, 1), (1, 2), (1, 3)],
        [(1, 1), (-1, 0), (1, 3), (-1, 2)],
        [(1, 2), (-1, 3), (-1, 0), (1, 1)],
        [(1, 3), (1, 2), (-1, 1), (-1, 0)],
    ]
    table = np.empty((8, 8), dtype=np.int64)
    for a in range(8):
        ua, sa = divmod(a, 2)
        for b in range(8):
            ub, sb = divmod(b, 2)
            s, u = unit_mul[ua][ub]
            neg = (s < 0) ^ bool(sa) ^ bool(sb)
            table[a, b] = 2 * u + int(neg)
    return from_cayley_table(table, "quaternion", validate=False)


def direct_product(G: FiniteGroup, H: FiniteGroup, cap=DEFAULT_ORDER_CAP):
    m, k = G.order, H.order
    _check_cap(m * k, cap)
    g = np.repeat(np.arange(m), k)
    h = np.tile(np.arange(k), m)
    table = G.mul[g[:, None], g[None, :]] * k + H.mul[h[:, None], h[None, :]]
    name = f"product:({G.name}),({H.name})"
    return from_cayley_table(table, name, validate=False)


_FAMILIES = {
    "cyclic": (cyclic, 1),
    "boolean_cube": (boolean_cube, 1),
    "dihedral": (dihedral, 1),
    "symmetric": (symmetric, 1),
    "quaternion": (quaternion, 0),
}


def builtin(family: str, *params, cap=DEFAULT_ORDER_CAP) -> FiniteGroup:
    """Construct a built-in group, e.g. ``builtin("symmetric", 3)``.

    ``builtin("direct_product", G, H)`` takes two groups (or spec strings).
    """
    if family in ("direct_product", "product"):
        if len(params) != 2:
            raise ValueError("direct_product takes two groups")
        G, H = (p if isinstance(p, FiniteGroup) else parse_group_spec(p, cap=cap) for p in params)
        return direct_product(G, H, cap=cap)
    if family not in _FAMILIES:
        raise ValueError(f"unknown group family {family!r}")
    ctor, arity = _FAMILIES[family]
    if len(params) != arity:
        raise ValueError(f"{family} takes {arity} parameter(s), got {len(params)}")
    return ctor(*(int(p) for p in params), cap=cap)


def _split_top_level(s):
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return s[:i], s[i + 1:]
    raise ValueError(f"product needs two comma-separated factors: {s!r}")


def _strip_parens(s):
    s = s.strip()
    while s.startswith("(") and s.endswith(")"):
        s = s[1:-1].strip()
    return s


def parse_group_spec(spec: str, cap=DEFAULT_ORDER_CAP) -> FiniteGroup:
    """Parse ``builtin:<family>[:<n>]``, ``builtin:product:<spec>,<spec>`` or a .grp path.

    The ``builtin:`` prefix is optional inside a product; factors may be
    parenthesised to nest products.
    """
    s = _strip_parens(spec)
    body = s[len("builtin:"):] if s.startswith("builtin:") else s
    head, _, rest = body.partition(":")
    if head == "product":
        left, right = _split_top_level(rest)
        return direct_product(
            parse_group_spec(_strip_parens(left), cap), parse_group_spec(_strip_parens(right), cap), cap=cap
        )
    if head in _FAMILIES:
        params = [p for p in rest.split(":") if p] if rest else []
        if not all(re.fullmatch(r"\d+", p) for p in params):
            raise ValueError(f"bad group parameters in {spec!r}")
        return builtin(head, *params, cap=cap)
    if s.startswith("builtin:"):
        raise ValueError(f"unknown builtin group {spec!r}")
    return load_group(s)


# -- .grp text format ----------------------------------------------------------

def format_group(G: FiniteGroup) -> str:
    lines = [str(G.order)]
    lines += [" ".join(str(int(v)) for v in row) for row in G.mul]
    return "\n".join(lines) + "\n"


def save_group(G: FiniteGroup, path):
    Path(path).write_text(format_group(G))


def parse_group(text: str, path=None) -> FiniteGroup:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("expected group order on the first line", line=1, path=path)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise FormatError(f"group order must be an integer, got {lines[0].strip()!r}", 1, path) from None
    if n < 1:
        raise FormatError("group order must be positive", 1, path)
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise FormatError(f"expected {n} table rows, found {len(body)}", min(len(lines), n + 1), path)
    table = np.empty((n, n), dtype=np.int64)
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != n:
            raise FormatError(f"expected {n} entries, found {len(parts)}", i + 2, path)
        try:
            row = [int(p) for p in parts]
        except ValueError:
            raise FormatError("table entries must be integers", i + 2, path) from None
        if min(row) < 0 or max(row) >= n:
            raise FormatError(f"table entries must lie in [0, {n})", i + 2, path)
        table[i] = row
    return from_cayley_table(table, name=str(path) if path else "")


def load_group(path) -> FiniteGroup:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read group file: {exc.strerror}", path=path) from None
    return parse_group(text, path=p)


# -- sampling and fibers -----------------------------------------------------

def uniform_element(G: FiniteGroup, rng: np.random.Generator, size=None):
    return rng.integers(G.order, size=size)


def conjugation_fiber_size(G: FiniteGroup, x: int, y: int) -> int:
    """``|{z : z x z^-1 = y}|`` by exhaustive scan."""
    return int(np.count_nonzero(G.conj[:, x] == y))
