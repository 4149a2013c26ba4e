"""Randomized testers for conjugate invariance, homomorphism, proportionality to
an irreducible character, and unitary equivalence.

All constants live in ``TesterConfig``.  Round counts and sample sizes are
deterministic functions of (epsilon, constants), exposed below so query
counts can be checked against closed forms.

Rounds are simulated in vectorized batches (see ``access``); only the rounds
a sequential run would perform are charged and logged.  Sample means over
uniform group elements are drawn as multinomial counts over the group,
which has the same distribution as drawing the samples one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .access import Block, CorrectedAccess, QueryOracle, Witness, as_oracle, corrector_sample_count
from .errors import DimMismatch, GroupMismatch
from .functions import MatrixFunction, ScalarFunction
from .reps import sample_haar_unitary

_CHUNK_BUDGET = 2**21     # max elements touched per speculative batch
_FIRST_CHUNK = 64


def _ceil(x: float) -> int:
    """Ceiling that ignores floating-point noise just above an integer."""
    return int(math.ceil(x - 1e-9 * max(1.0, abs(x))))


@dataclass(frozen=True)
class TesterConfig:
    """Accuracy parameter, seed and all tester constants.

    round_factor      rounds of the conjugation and homomorphism testers: ceil(c / eps^2)
    hoeffding_const   mean estimator sample count: ceil(c / acc^2 * ln(4 / delta))
    corrector_const   conjugates per corrected query: ceil(c * ln(2 / delta))
    char_round_const  rounds of the character tester: ceil(c / eps^4)
    net_base, net_exp Haar draws of the unitary tester: ceil((b d^1.5 / eps)^(e d^2))
    tol               tolerance for value equality (0 means exact)
    log_limit         rounds kept in the report log (None keeps all)
    """

    epsilon: float
    seed: int = 0
    tol: float = 0.0
    round_factor: float = 2.0
    hoeffding_const: float = 8.0
    corrector_const: float = 8.0
    char_round_const: float = 100.0
    net_base: float = 1.25
    net_exp: float = 1.0
    log_limit: int | None = 100_000

    __test__ = False
    FLOORS = {
        "round_factor": math.log(3),
        "hoeffding_const": 4.0,
        "corrector_const": 2.0,
        "char_round_const": 1.0,
    }

    def __post_init__(self):
        if not (0 < self.epsilon <= 1):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        for name, lo in self.FLOORS.items():
            if getattr(self, name) < lo:
                raise ValueError(f"{name} must be at least {lo:.4g}")
        if self.net_base <= 0 or self.net_exp <= 0:
            raise ValueError("net_base and net_exp must be positive")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")

    def with_epsilon(self, eps):
        return replace(self, epsilon=eps)


# -- closed-form counts ---------------------------------------------------------------

def hoeffding_sample_count(accuracy, delta, const=8.0) -> int:
    """Samples for a mean of unit-disk values to be within ``accuracy`` w.p. 1 - delta."""
    return _ceil(const / accuracy**2 * math.log(4 / delta))


def _mean_by_value(values, counts, total):
    """Weighted mean that returns c exactly when every sample equals c."""
    uniq, inv = np.unique(values, return_inverse=True)
    w = np.bincount(inv.reshape(-1), weights=counts.reshape(-1), minlength=uniq.size)
    return complex(np.sum(uniq * (w / total)))


def estimate_mean(sampler, accuracy, delta, rng=None, const=8.0):
    """Empirical mean of ``hoeffding_sample_count(accuracy, delta)`` independent samples.

    ``sampler`` is either a ``QueryOracle`` over a scalar function (samples are
    its values at uniform points, each one charged as a query) or a callable
    ``sampler(rng, k)`` returning k samples.  Samples must lie in the unit disk;
    the result is then within ``accuracy`` of the true mean with probability
    at least 1 - delta.
    """
    rng = np.random.default_rng() if rng is None else rng
    total = hoeffding_sample_count(accuracy, delta, const)
    if isinstance(sampler, QueryOracle):
        n = sampler.group.order
        counts = rng.multinomial(total, np.full(n, 1.0 / n))
        hit = np.flatnonzero(counts)
        sampler.charge(total)
        return _mean_by_value(sampler._peek(hit), counts[hit], total)
    chunks, drawn = [], 0
    while drawn < total:
        k = min(2**20, total - drawn)
        v = np.asarray(sampler(rng, k)).reshape(-1)
        if v.size != k:
            raise ValueError(f"sampler returned {v.size} values, expected {k}")
        chunks.append(np.unique(v, return_counts=True))
        drawn += k
    vals = np.concatenate([u for u, _ in chunks])
    cnts = np.concatenate([c for _, c in chunks]).astype(float)
    return _mean_by_value(vals, cnts, total)


def conjinv_rounds(eps, cfg: TesterConfig) -> int:
    return _ceil(cfg.round_factor / eps**2)


hom_rounds = conjinv_rounds


def char_gate_samples(eps, cfg: TesterConfig) -> int:
    return hoeffding_sample_count(eps**2 / 100, 1 / 100, cfg.hoeffding_const)


def char_rounds(eps, cfg: TesterConfig) -> int:
    return _ceil(cfg.char_round_const / eps**4)


def char_estimator_samples(eps, cfg: TesterConfig) -> int:
    return hoeffding_sample_count(eps**2 / 10, 1 / (100 * char_rounds(eps, cfg)), cfg.hoeffding_const)


def uniteq_iterations(eps, dim, cfg: TesterConfig) -> int:
    return _ceil((cfg.net_base * dim**1.5 / eps) ** (cfg.net_exp * dim * dim))


def uniteq_samples(eps, dim, cfg: TesterConfig) -> int:
    return hoeffding_sample_count(eps**2 / 100, 1 / (6 * uniteq_iterations(eps, dim, cfg)), cfg.hoeffding_const)


def hom_query_bound(eps, cfg: TesterConfig) -> int:
    return 3 * hom_rounds(eps, cfg)


def char_query_bound(eps, cfg: TesterConfig) -> int:
    return char_gate_samples(eps, cfg) + char_rounds(eps, cfg) * (3 + char_estimator_samples(eps, cfg))


def reduction_corrector_samples(eps, query_bound, cfg: TesterConfig) -> int:
    return corrector_sample_count(1 / (6 * query_bound(eps / 2, cfg)), cfg.corrector_const)


def expected_queries(tester, eps, cfg: TesterConfig, *, dim=1, rounds=None,
                     stage1_rounds=None, stage1_rejected=False, gate_accept=False) -> int:
    """Query count of a run, from the constants and the number of rounds it ran.

    ``rounds`` defaults to the full round budget (the accepting path for the
    one-sided testers).  For the wrapped testers ``stage1_rounds`` and
    ``rounds`` refer to the conjugation stage and the inner stage.
    """
    if tester == "conjugate-invariance":
        return 2 * (conjinv_rounds(eps, cfg) if rounds is None else rounds)
    if tester == "homomorphism-core":
        return 3 * (hom_rounds(eps, cfg) if rounds is None else rounds)
    if tester == "character-core":
        n0 = char_gate_samples(eps, cfg)
        if gate_accept:
            return n0
        r = char_rounds(eps, cfg) if rounds is None else rounds
        return n0 + r * (3 + char_estimator_samples(eps, cfg))
    if tester == "unitary-equivalence":
        r = uniteq_iterations(eps, dim, cfg) if rounds is None else rounds
        return r * uniteq_samples(eps, dim, cfg)
    if tester in ("homomorphism", "character"):
        s1 = conjinv_rounds(eps / 6, cfg)
        r1 = s1 if stage1_rounds is None else stage1_rounds
        if stage1_rejected:
            return 2 * r1
        core, bound = (("homomorphism-core", hom_query_bound) if tester == "homomorphism"
                       else ("character-core", char_query_bound))
        inner = expected_queries(core, eps / 2, cfg, rounds=rounds, gate_accept=gate_accept)
        return 2 * r1 + reduction_corrector_samples(eps, bound, cfg) * inner
    raise ValueError(f"unknown tester {tester!r}")


# -- reports ---------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    return v


class RoundLog:
    """Per-round records stored column-wise; keeps at most ``limit`` rounds."""

    def __init__(self, limit=None):
        self.limit = limit
        self._parts: dict[str, list] = {}
        self.logged = 0

    def extend(self, cols: dict, rows: int):
        room = rows if self.limit is None else max(0, min(rows, self.limit - self.logged))
        if room == 0:
            return
        for k, v in cols.items():
            self._parts.setdefault(k, []).append(np.asarray(v)[:room])
        self.logged += room

    @property
    def columns(self) -> dict:
        return {k: np.concatenate(v) for k, v in self._parts.items()}

    def __len__(self):
        return self.logged

    def to_records(self) -> list:
        cols = self.columns
        keys = list(cols)
        return [{k: _jsonable(cols[k][i]) for k in keys} for i in range(self.logged)]


@dataclass
class TesterReport:
    __test__ = False

    tester: str
    epsilon: float
    seed: int
    verdict: str
    queries: int
    rounds_run: int
    rounds: object = None            # RoundLog, or a list of stage summaries
    witness: Witness | None = None
    details: dict = field(default_factory=dict)
    stages: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def round_records(self) -> list:
        if isinstance(self.rounds, RoundLog):
            return self.rounds.to_records()
        return list(self.rounds or [])

    def to_dict(self) -> dict:
        out = {
            "tester": self.tester,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "verdict": self.verdict,
            "queries": int(self.queries),
            "rounds_run": int(self.rounds_run),
            "rounds": _jsonable(self.round_records()),
            "details": _jsonable(self.details),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.stages:
            out["stages"] = [st.to_dict() for st in self.stages]
        return out


# -- round driver ---------------------------------------------------------------

def _base_oracle(access) -> QueryOracle:
    return access.oracle if isinstance(access, CorrectedAccess) else access


def _drive(access, s, chunk, width, log):
    """Run up to ``s`` rounds in growing batches.

    ``chunk(R)`` returns ``(block, stop, columns)`` for R fresh rounds; the
    run ends at the first row where ``stop`` holds or the access layer found
    a witness.  Returns ``(rounds_run, outcome)`` with outcome None when all
    rounds ran, ``("witness", Witness)`` or ``("stop", row_columns)``.
    """
    cap = max(1, _CHUNK_BUDGET // max(1, width))
    size = min(_FIRST_CHUNK, cap)
    done = 0
    while done < s:
        R = min(size, s - done)
        block, stop, cols = chunk(R)
        hits = np.flatnonzero(stop)
        first = int(hits[0]) if hits.size else R
        wrow = R if block.witness_row is None else block.witness_row
        end = min(first, wrow)
        rows = R if end == R else end + 1
        access.commit(block, rows)
        log.extend(cols, rows)
        done += rows
        if end < R:
            if wrow <= first:
                return done, ("witness", block.witness)
            return done, ("stop", {k: np.asarray(v)[end] for k, v in cols.items()})
        size = min(size * 2, cap)
    return done, None


def _rng(cfg, rng):
    return np.random.default_rng(cfg.seed) if rng is None else rng


def _scalar_access(f):
    acc = as_oracle(f)
    if isinstance(_base_oracle(acc).function, MatrixFunction):
        raise TypeError("this tester needs a scalar function")
    return acc


# -- conjugate invariance ------------------------------------------------------------------

def test_conjugate_invariance(f, cfg: TesterConfig, rng=None) -> TesterReport:
    """Reject iff some sampled pair has f(x) != f(y x y^-1); ceil(c/eps^2) rounds."""
    rng = _rng(cfg, rng)
    acc = _scalar_access(f)
    G, n = acc.group, acc.group.order
    base = _base_oracle(acc)
    start = base.count
    s = conjinv_rounds(cfg.epsilon, cfg)
    log = RoundLog(cfg.log_limit)

    def chunk(R):
        x = rng.integers(0, n, size=R)
        y = rng.integers(0, n, size=R)
        w = G.conj[y, x]
        blk = acc.evaluate(np.stack([x, w], axis=1))
        fx, fw = blk.singles[:, 0], blk.singles[:, 1]
        rej = np.abs(fx - fw) > cfg.tol
        return blk, rej, {"x": x, "y": y, "f_x": fx, "f_yxy": fw, "rejected": rej}

    run, outcome = _drive(acc, s, chunk, 2, log)
    witness = None
    if outcome is not None:
        kind, payload = outcome
        if kind == "witness":
            witness = payload
        else:
            witness = Witness("conjugation", (int(payload["x"]), int(payload["y"])),
                              (payload["f_x"], payload["f_yxy"]))
    return TesterReport(
        "conjugate-invariance", cfg.epsilon, cfg.seed,
        "accept" if outcome is None else "reject",
        base.count - start, run, log, witness, {"s": s},
    )


# -- reduction to class functions -------------------------------------------------------

def with_class_function_reduction(inner, query_bound, f, cfg: TesterConfig, rng=None, name=None) -> TesterReport:
    """Turn a tester for class-function inputs into a tester for arbitrary inputs.

    Stage one runs the conjugation tester at eps/6.  Stage two runs ``inner``
    at eps/2 on the self-corrected function, with per-query confidence
    1 / (6 q(eps/2)); a witness found while correcting rejects at once.
    """
    rng = _rng(cfg, rng)
    oracle = as_oracle(f)
    if isinstance(oracle, CorrectedAccess):
        raise TypeError("the reduction needs plain access")
    start = oracle.count
    eps = cfg.epsilon
    name = name or getattr(inner, "__name__", "wrapped")
    st1 = test_conjugate_invariance(oracle, cfg.with_epsilon(eps / 6), rng)
    stages = [st1]
    delta = 1 / (6 * query_bound(eps / 2, cfg))
    details = {"delta": delta, "corrector_samples": corrector_sample_count(delta, cfg.corrector_const)}
    if not st1.accepted:
        verdict, witness = "reject", st1.witness
    else:
        acc = CorrectedAccess(oracle, delta, rng, cfg.corrector_const, cfg.tol)
        st2 = inner(acc, cfg.with_epsilon(eps / 2), rng)
        stages.append(st2)
        verdict, witness = st2.verdict, st2.witness
    summary = [
        {"stage": st.tester, "epsilon": st.epsilon, "verdict": st.verdict,
         "queries": st.queries, "rounds_run": st.rounds_run}
        for st in stages
    ]
    return TesterReport(
        name, eps, cfg.seed, verdict, oracle.count - start,
        sum(st.rounds_run for st in stages), summary, witness, details, stages,
    )


# -- homomorphism ------------------------------------------------------------------------

def homomorphism_core(f, cfg: TesterConfig, rng=None) -> TesterReport:
    """Reject iff some sampled pair has f(x) f(y) != f(xy); meant for class-function inputs."""
    rng = _rng(cfg, rng)
    acc = _scalar_access(f)
    G, n = acc.group, acc.group.order
    base = _base_oracle(acc)
    start, fstart = base.count, acc.count
    s = hom_rounds(cfg.epsilon, cfg)
    log = RoundLog(cfg.log_limit)

    def chunk(R):
        x = rng.integers(0, n, size=R)
        y = rng.integers(0, n, size=R)
        xy = G.mul[x, y]
        blk = acc.evaluate(np.stack([x, y, xy], axis=1))
        fx, fy, fxy = blk.singles.T
        rej = np.abs(fx * fy - fxy) > cfg.tol
        return blk, rej, {"x": x, "y": y, "f_x": fx, "f_y": fy, "f_xy": fxy, "rejected": rej}

    run, outcome = _drive(acc, s, chunk, 3, log)
    witness = None
    if outcome is not None:
        kind, payload = outcome
        if kind == "witness":
            witness = payload
        else:
            x, y = int(payload["x"]), int(payload["y"])
            vals = (payload["f_x"], payload["f_y"], payload["f_xy"])
            if isinstance(acc, CorrectedAccess):
                src = acc.source_elements(np.array([x, y, int(G.mul[x, y])]), np.array(vals))
                witness = Witness("hom-conjugates", (x, y, *src), vals)
            else:
                witness = Witness("homomorphism", (x, y), vals)
    details = {"s": s}
    if isinstance(acc, CorrectedAccess):
        details["corrected_queries"] = acc.count - fstart
    return TesterReport(
        "homomorphism-core", cfg.epsilon, cfg.seed,
        "accept" if outcome is None else "reject",
        base.count - start, run, log, witness, details,
    )


def test_homomorphism(f, cfg: TesterConfig, rng=None) -> TesterReport:
    return with_class_function_reduction(homomorphism_core, hom_query_bound, f, cfg, rng, "homomorphism")


# -- proportionality to an irreducible character -------------------------------------------

def _abs2(v):
    return np.abs(v) ** 2


def _ident(v):
    return v


def character_core(f, cfg: TesterConfig, rng=None) -> TesterReport:
    """Character-proportionality test for class-function inputs.

    Accepts at once if the estimated squared norm is below eps^2/2; otherwise
    each round compares f(x) f(y) with f(1) times an estimate of
    E_z f(y z x z^-1) and rejects when the squared gap exceeds eps^4/100.
    """
    rng = _rng(cfg, rng)
    acc = _scalar_access(f)
    G, n = acc.group, acc.group.order
    base = _base_oracle(acc)
    start, fstart = base.count, acc.count
    eps = cfg.epsilon
    n0 = char_gate_samples(eps, cfg)
    s = char_rounds(eps, cfg)
    ne = char_estimator_samples(eps, cfg)
    threshold = eps**4 / 100
    uniform = np.full(n, 1.0 / n)
    details = {"gate_samples": n0, "s": s, "estimator_samples": ne,
               "gate_threshold": eps**2 / 2, "threshold": threshold}
    log = RoundLog(cfg.log_limit)
    width = max(len(c) for c in G.classes)
    padded = np.zeros((G.num_classes, width), dtype=np.int64)
    for c, members in enumerate(G.classes):
        padded[c, :len(members)] = members

    def finish(verdict, run, witness=None):
        if isinstance(acc, CorrectedAccess):
            details["corrected_queries"] = acc.count - fstart
        return TesterReport("character-core", eps, cfg.seed, verdict,
                            base.count - start, run, log, witness, details)

    counts = rng.multinomial(n0, uniform)[None, :]
    gate = acc.evaluate(np.zeros((1, 0), dtype=np.int64), [(np.arange(n)[None, :], counts, _abs2)])
    acc.commit(gate, 1)
    if gate.witness is not None:
        details["gate_estimate"] = None
        return finish("reject", 0, gate.witness)
    norm_est = float(gate.sums[0][0]) / n0
    details["gate_estimate"] = norm_est
    if norm_est < eps**2 / 2:
        details["gate_accept"] = True
        return finish("accept", 0)
    details["gate_accept"] = False

    def chunk(R):
        x = rng.integers(0, n, size=R)
        y = rng.integers(0, n, size=R)
        # z x z^-1 is uniform on the class of x, so the estimator's queries
        # are multinomial over y * (class of x)
        cx = G.class_of[x]
        cnt = np.zeros((R, width), dtype=np.int64)
        for c in np.unique(cx):
            rows = np.flatnonzero(cx == c)
            k = len(G.classes[c])
            cnt[rows, :k] = rng.multinomial(ne, np.full(k, 1.0 / k), size=rows.size)
        pts = G.mul[y[:, None], padded[cx]]
        singles = np.stack([x, y, np.zeros(R, dtype=np.int64)], axis=1)
        blk = acc.evaluate(singles, [(pts, cnt, _ident)])
        fx, fy, f1 = blk.singles.T
        est = blk.sums[0] / ne
        stat = np.abs(fx * fy - f1 * est) ** 2
        rej = stat > threshold
        return blk, rej, {"x": x, "y": y, "f_x": fx, "f_y": fy, "f_1": f1,
                          "estimate": est, "statistic": stat, "rejected": rej}

    run, outcome = _drive(acc, s, chunk, width + 3, log)
    if outcome is None:
        return finish("accept", run)
    kind, payload = outcome
    return finish("reject", run, payload if kind == "witness" else None)


def test_character_proportional(f, cfg: TesterConfig, rng=None) -> TesterReport:
    return with_class_function_reduction(character_core, char_query_bound, f, cfg, rng, "character")


# -- unitary equivalence -------------------------------------------------------------------

def as_matrix_function(f):
    if isinstance(f, ScalarFunction):
        return MatrixFunction(f.group, f.values.reshape(-1, 1, 1))
    return f


def test_unitary_equivalence(f, g, cfg: TesterConfig, rng=None) -> TesterReport:
    """Search Haar-random U for one with dist(f, U g U*)^2 estimated below eps^2/10."""
    rng = _rng(cfg, rng)
    if isinstance(f, QueryOracle):
        oracle = f
        if not isinstance(oracle.function, MatrixFunction):
            raise TypeError("wrap matrix functions only; scalar inputs may be passed directly")
    else:
        oracle = QueryOracle(as_matrix_function(f))
    g = as_matrix_function(g)
    F = oracle.function
    if F.group != g.group:
        raise GroupMismatch("f and g live on different groups")
    if F.dim != g.dim:
        raise DimMismatch(f"f has dimension {F.dim} but g has dimension {g.dim}")
    G, n, d = g.group, g.group.order, g.dim
    eps = cfg.epsilon
    start = oracle.count
    s = uniteq_iterations(eps, d, cfg)
    na = uniteq_samples(eps, d, cfg)
    gate = eps**2 / 10
    uniform = np.full(n, 1.0 / n)
    fv = oracle._peek(np.arange(n))
    gv = g.values
    log = RoundLog(cfg.log_limit)

    def chunk(R):
        U = sample_haar_unitary(d, rng, size=R)
        ugu = U[:, None] @ gv[None] @ U.conj().transpose(0, 2, 1)[:, None]
        h = 0.25 * np.sum(np.abs(fv[None] - ugu) ** 2, axis=(2, 3))
        cnt = rng.multinomial(na, uniform, size=R)
        est = (cnt * h).sum(axis=1) / na
        ok = est < gate
        blk = Block(np.zeros((R, 0)), [], np.full(R, na, dtype=np.int64))
        return blk, ok, {"estimate": est, "accepted": ok}

    run, outcome = _drive(oracle, s, chunk, n * d * d, log)
    return TesterReport(
        "unitary-equivalence", eps, cfg.seed,
        "accept" if outcome is not None else "reject",
        oracle.count - start, run, log, None,
        {"s": s, "samples_per_iteration": na, "threshold": gate, "dim": d},
    )


TESTERS = {
    "conjugate-invariance": test_conjugate_invariance,
    "homomorphism": test_homomorphism,
    "homomorphism-core": homomorphism_core,
    "character": test_character_proportional,
    "character-core": character_core,
}
