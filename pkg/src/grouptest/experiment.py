"""Acceptance-rate sweeps over an epsilon grid and instance-family parameters."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .groups import parse_group_spec
from .instances import Instance, certify, check_compatible, generate
from .testers import (
    TesterConfig,
    test_character_proportional,
    test_conjugate_invariance,
    test_homomorphism,
    test_unitary_equivalence,
)

CSV_HEADER = ["epsilon", "family_param", "trials", "accept_rate", "mean_queries",
              "max_queries", "certified_distance", "wall_ms"]

SEED_MASK = (1 << 64) - 1


def derive_seed(base: int, cell, trial: int) -> int:
    """``base XOR h`` where h is a 64-bit BLAKE2b hash of the cell coordinates and trial index."""
    key = ":".join(str(int(c)) for c in (*cell, trial)).encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (int(base) & SEED_MASK) ^ h


def parse_grid(text: str):
    """``start:stop:count`` (inclusive, evenly spaced) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            vals = [float(parts[0])]
        elif len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            vals = np.linspace(start, stop, count).tolist()
        else:
            raise ValueError
    except ValueError:
        raise ValueError(f"bad epsilon grid {text!r}; expected start:stop:count") from None
    if not all(0 < v <= 1 for v in vals):
        raise ValueError("epsilon values must lie in (0, 1]")
    return [round(v, 12) for v in vals]


@dataclass
class ExperimentSpec:
    tester: str
    group: str
    family: str
    epsilons: list
    params: list = field(default_factory=lambda: [0.0])
    trials: int = 100
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    instance_dir: str | None = None
    timing: bool = True
    jobs: int = 1
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.epsilons or not all(0 < e <= 1 for e in self.epsilons):
            raise ValueError("epsilon values must lie in (0, 1]")
        if self.fmt not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        check_compatible(self.tester, self.family)


def _run_trial(tester, inst, cfg):
    if tester == "test-conjinv":
        r = test_conjugate_invariance(inst.f, cfg)
    elif tester == "test-hom":
        r = test_homomorphism(inst.f, cfg)
    elif tester == "test-char":
        r = test_character_proportional(inst.f, cfg)
    else:
        r = test_unitary_equivalence(inst.f, inst.g, cfg)
    return r.accepted, int(r.queries)


def _trial_job(args):
    tester, inst, cfg = args
    return _run_trial(tester, inst, cfg)


def run_experiment(spec: ExperimentSpec):
    """Run every (epsilon, parameter) cell; returns the list of result rows."""
    G = parse_group_spec(spec.group)
    inst_dir = spec.instance_dir
    if inst_dir is None and spec.out:
        inst_dir = str(Path(spec.out).with_suffix("")) + "_instances"
    pool = ProcessPoolExecutor(spec.jobs) if spec.jobs > 1 else None
    rows = []
    try:
        for i, eps in enumerate(spec.epsilons):
            for j, param in enumerate(spec.params):
                cell = (i, j)
                t0 = time.perf_counter()
                inst = generate(spec.family, G, param, np.random.default_rng(derive_seed(spec.seed, cell, -1)))
                cert = certify(inst, spec.tester)
                stem = None
                if inst_dir is not None:
                    stem = f"cell{i}_{j}"
                    inst.save(inst_dir, stem)
                cfgs = [TesterConfig(eps, seed=derive_seed(spec.seed, cell, t), log_limit=0, **spec.overrides)
                        for t in range(spec.trials)]
                if pool is None:
                    results = [_run_trial(spec.tester, inst, c) for c in cfgs]
                else:
                    results = list(pool.map(_trial_job, [(spec.tester, inst, c) for c in cfgs]))
                wall = (time.perf_counter() - t0) * 1000 if spec.timing else 0.0
                acc = [a for a, _ in results]
                qs = [q for _, q in results]
                certified = cert.lower_bound if cert.method == "heuristic" else cert.distance
                rows.append({
                    "epsilon": float(eps),
                    "family_param": float(param),
                    "trials": spec.trials,
                    "accept_rate": sum(acc) / spec.trials,
                    "mean_queries": float(np.mean(qs)),
                    "max_queries": int(max(qs)),
                    "certified_distance": float(certified),
                    "wall_ms": round(float(wall), 3),
                    "certificate": cert.to_dict(),
                    "instance": None if stem is None else str(Path(inst_dir) / stem),
                })
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in CSV_HEADER])
    return buf.getvalue()


def rows_to_json(spec: ExperimentSpec, rows, version) -> str:
    doc = {
        "tool_version": version,
        "tester": spec.tester,
        "group": spec.group,
        "family": spec.family,
        "seed": spec.seed,
        "trials": spec.trials,
        "rows": rows,
    }
    return json.dumps(doc, indent=2) + "\n"


def reload_instance(row, group, family=""):
    """Load the instance logged for a result row."""
    p = Path(row["instance"])
    return Instance.load(p.parent, p.name, group, family, row["family_param"])
