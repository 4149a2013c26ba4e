"""Query-counting access to tabulated functions.

Testers never read a function table directly.  They go through a
``QueryOracle`` (plain point queries) or a ``CorrectedAccess`` (queries to
the self-corrected class function built from random conjugates).

For speed, testers evaluate a batch of rounds at once with ``evaluate`` and
then ``commit`` only the rounds the sequential algorithm would actually have
run; only committed rounds are charged.  A round's queries are charged in
full, since every query of a round is made before its check.

Point queries come in two shapes per round:

* singles, an ``(R, m)`` array of points each queried once, and
* counted groups ``(points, counts, transform)``: ``counts[r, j]`` queries at
  ``points[r, j]``, of which only the row sums of ``transform(value)`` are
  needed (sample means of estimators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .functions import MatrixFunction, ScalarFunction


@dataclass(frozen=True)
class Witness:
    """A concrete counterexample.

    kinds:
      ``conjugation``    (x, y):  f(x) != f(y x y^-1)
      ``conjugate-pair`` (x, y1, y2):  f(y1 x y1^-1) != f(y2 x y2^-1)
      ``homomorphism``   (x, y):  f(x) f(y) != f(xy)
      ``hom-conjugates`` (x, y, x', y', w'):  x' ~ x, y' ~ y, w' ~ xy and
                         f(x') f(y') != f(w')
    """

    kind: str
    elements: tuple
    values: tuple = ()

    def revalidate(self, f, tol=0.0) -> bool:
        """Recompute the violated equation directly from the function table."""
        G, v = f.group, f.values
        e = [int(a) for a in self.elements]
        if self.kind == "conjugation":
            x, y = e
            return abs(v[x] - v[G.conjugate(y, x)]) > tol
        if self.kind == "conjugate-pair":
            x, y1, y2 = e
            return abs(v[G.conjugate(y1, x)] - v[G.conjugate(y2, x)]) > tol
        if self.kind == "homomorphism":
            x, y = e
            return abs(v[x] * v[y] - v[G.mul[x, y]]) > tol
        if self.kind == "hom-conjugates":
            x, y, xc, yc, wc = e
            c = G.class_of
            if c[x] != c[xc] or c[y] != c[yc] or c[G.mul[x, y]] != c[wc]:
                return False
            return abs(v[xc] * v[yc] - v[wc]) > tol
        raise ValueError(f"unknown witness kind {self.kind!r}")

    def to_dict(self):
        return {
            "kind": self.kind,
            "elements": [int(a) for a in self.elements],
            "values": [[float(np.real(z)), float(np.imag(z))] for z in self.values],
        }


class WitnessFound(Exception):
    def __init__(self, witness: Witness):
        super().__init__(f"{witness.kind} witness {witness.elements}")
        self.witness = witness


@dataclass
class Block:
    """Results of a speculative batch of rounds."""

    singles: np.ndarray          # (R, m) values
    sums: list                   # one (R,) array per counted group
    cost: np.ndarray             # (R,) queries per round at this access level
    witness_row: int | None = None
    witness: Witness | None = None


def _counted_cost(counted, R):
    cost = np.zeros(R, dtype=np.int64)
    for _, counts, _ in counted:
        cost += counts.sum(axis=1)
    return cost


class QueryOracle:
    """Point-query access to a tabulated function with an exact query counter."""

    def __init__(self, f):
        if not isinstance(f, (ScalarFunction, MatrixFunction)):
            raise TypeError("QueryOracle wraps a ScalarFunction or MatrixFunction")
        self.function = f
        self.group = f.group
        self.count = 0

    def __call__(self, x):
        self.count += 1
        return self.function.values[x]

    def charge(self, k):
        self.count += int(k)

    def _peek(self, points):
        """Values without charging; callers must charge separately."""
        return self.function.values[points]

    def evaluate(self, singles, counted=()) -> Block:
        vals = self.function.values
        R = singles.shape[0]
        sums = [(counts * tf(vals[pts])).sum(axis=1) for pts, counts, tf in counted]
        cost = _counted_cost(counted, R) + singles.shape[1]
        return Block(vals[singles], sums, cost)

    def commit(self, block: Block, rows: int):
        self.count += int(block.cost[:rows].sum())


def as_oracle(f):
    if isinstance(f, (QueryOracle, CorrectedAccess)):
        return f
    return QueryOracle(f)


def corrector_sample_count(delta, const=8.0) -> int:
    """Conjugates drawn per corrected query."""
    return max(1, math.ceil(const * math.log(2 / delta) - 1e-9))


def _value_ids(values, tol):
    """Label equal values (within ``tol``) with small integers, in first-seen order."""
    reps = []
    ids = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        for j, r in enumerate(reps):
            if (v == r) if tol == 0 else abs(v - r) <= tol:
                ids[i] = j
                break
        else:
            ids[i] = len(reps)
            reps.append(v)
    return ids, np.array(reps, dtype=complex)


def corrected_query(f, x, delta, rng, const=8.0, tol=0.0):
    """Self-corrected value at ``x``: the common value of ``f`` at random conjugates of ``x``.

    Returns that value, or a ``conjugate-pair`` Witness if two conjugates
    disagree.
    """
    oracle = as_oracle(f)
    if isinstance(oracle, CorrectedAccess):
        raise TypeError("corrected_query needs plain access")
    G = oracle.group
    s = corrector_sample_count(delta, const)
    ys = rng.integers(0, G.order, size=s)
    vals = np.array([oracle(G.conj[y, x]) for y in ys])
    bad = np.flatnonzero(np.abs(vals - vals[0]) > tol)
    if bad.size:
        i = bad[0]
        return Witness("conjugate-pair", (int(x), int(ys[0]), int(ys[i])), (vals[0], vals[i]))
    return vals[0]


class CorrectedAccess:
    """Access to the self-corrected function f' built on a plain oracle.

    Each query of f' at ``p`` costs ``s`` queries of f at uniform conjugates
    ``y p y^-1``.  Conjugates of ``p`` are uniform on its class, so ``k``
    independent corrected queries at ``p`` are simulated from a single
    multinomial draw over the class followed by the exact probability that
    the draws split into ``k`` runs that are each constant.
    """

    def __init__(self, oracle: QueryOracle, delta: float, rng, const=8.0, tol=0.0):
        self.oracle = oracle
        self.group = oracle.group
        self.delta = delta
        self.s = corrector_sample_count(delta, const)
        self.rng = rng
        self.tol = tol
        self.count = 0          # corrected queries made
        f = oracle.function.values
        self._vid = np.zeros(self.group.order, dtype=np.int64)
        self._reps = []
        self._constant = np.ones(self.group.num_classes, dtype=bool)
        for c, members in enumerate(self.group.classes):
            ids, reps = _value_ids(f[members], tol)
            self._vid[members] = ids
            self._reps.append(reps)
            self._constant[c] = len(reps) == 1

    def __call__(self, x):
        out = self._single(x)
        self.count += 1
        if isinstance(out, Witness):
            raise WitnessFound(out)
        return out

    def _single(self, x):
        G = self.group
        ys = self.rng.integers(0, G.order, size=self.s)
        vals = self.oracle._peek(G.conj[ys, x])
        self.oracle.charge(self.s)
        bad = np.flatnonzero(np.abs(vals - vals[0]) > self.tol)
        if bad.size:
            i = bad[0]
            return Witness("conjugate-pair", (int(x), int(ys[0]), int(ys[i])), (vals[0], vals[i]))
        return vals[0]

    def source_elements(self, points, values):
        """For each point, a conjugate at which f takes the given corrected value."""
        G, f = self.group, self.oracle.function.values
        out = []
        for p, v in zip(points, values):
            members = G.classes[G.class_of[p]]
            hit = np.flatnonzero(np.abs(f[members] - v) <= self.tol)
            out.append(int(members[hit[0]]) if hit.size else int(p))
        return out

    def _witness_at(self, p, draws, vids_present):
        G = self.group
        members = G.classes[G.class_of[p]]
        ids = self._vid[members]
        u = [members[np.flatnonzero((ids == v) & (draws > 0))[0]] for v in vids_present[:2]]
        ys = [int(np.flatnonzero(G.conj[:, p] == m)[0]) for m in u]
        f = self.oracle.function.values
        return Witness("conjugate-pair", (int(p), ys[0], ys[1]), (f[u[0]], f[u[1]]))

    def evaluate(self, singles, counted=()) -> Block:
        G, s, rng = self.group, self.s, self.rng
        f = self.oracle.function.values
        R, m = singles.shape
        # flatten all cells: (row, point, multiplicity, slot); slot < m is a single
        rows = [np.repeat(np.arange(R), m)]
        pts = [singles.reshape(-1)]
        ks = [np.ones(R * m, dtype=np.int64)]
        slots = [np.tile(np.arange(m), R)]
        for g, (p, counts, _) in enumerate(counted):
            r, j = np.nonzero(counts)
            rows.append(r)
            pts.append(p[r, j])
            ks.append(counts[r, j])
            slots.append(np.full(r.size, m + g))
        rows, pts, ks, slots = (np.concatenate(a) for a in (rows, pts, ks, slots))
        order = np.arange(rows.size)

        # runs per value id; default: every run returns f(p)
        cls = G.class_of[pts]
        runs = {}       # cell index -> (vids, run counts) for non-constant classes
        bad_cells = []
        bad_info = {}
        for c in np.flatnonzero(~self._constant):
            idx = np.flatnonzero(cls == c)
            if idx.size == 0:
                continue
            members = G.classes[c]
            onehot = np.eye(len(self._reps[c]), dtype=np.int64)[self._vid[members]]
            kk = ks[idx]
            draws = rng.multinomial(kk * s, np.full(len(members), 1.0 / len(members)))
            cv = draws @ onehot
            av, rem = np.divmod(cv, s)
            divisible = (rem == 0).all(axis=1)
            logp = gammaln(kk + 1) - gammaln(av + 1).sum(axis=1) + gammaln(cv + 1).sum(axis=1) - gammaln(kk * s + 1)
            u = rng.random(idx.size)
            pure = divisible & (u < np.exp(np.minimum(logp, 0.0)))
            for t, cell in enumerate(idx):
                if pure[t]:
                    runs[cell] = av[t]
                else:
                    bad_cells.append(cell)
                    bad_info[cell] = (draws[t], np.flatnonzero(cv[t] > 0))

        witness_row, witness = None, None
        if bad_cells:
            first = min(bad_cells, key=lambda cidx: (rows[cidx], order[cidx]))
            witness_row = int(rows[first])
            draws, present = bad_info[first]
            witness = self._witness_at(int(pts[first]), draws, present)

        vals = np.empty(rows.size, dtype=complex)
        vals[:] = f[pts]
        for cell, av in runs.items():
            # for a single query the run's value; counted cells use av below
            vals[cell] = self._reps[cls[cell]][np.flatnonzero(av)[0]]

        single_vals = vals[: R * m].reshape(R, m)
        sums = []
        for g, (_, _, tf) in enumerate(counted):
            sel = np.flatnonzero(slots == m + g)
            contrib = ks[sel] * tf(f[pts[sel]])
            for cell, av in runs.items():
                if slots[cell] == m + g:
                    contrib[np.searchsorted(sel, cell)] = np.sum(av * tf(self._reps[cls[cell]]))
            tot = np.zeros(R, dtype=complex if np.iscomplexobj(contrib) else float)
            np.add.at(tot, rows[sel], contrib)
            sums.append(tot)
        cost = _counted_cost(counted, R) + m
        return Block(single_vals, sums, cost, witness_row, witness)

    def commit(self, block: Block, rows: int):
        n = int(block.cost[:rows].sum())
        self.count += n
        self.oracle.charge(self.s * n)
