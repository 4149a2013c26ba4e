"""Command-line entry point.

Exit status: 0 accept / success, 1 reject, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import GroupTestError
from .experiment import ExperimentSpec, parse_grid, rows_to_csv, rows_to_json, run_experiment
from .functions import MatrixFunction, ScalarFunction, load_function
from .groups import parse_group_spec
from .oracle import (
    cubic_expectation,
    distance_to_character_rays,
    distance_to_class_functions,
    distance_to_homomorphisms,
    exact_conjugation_rejection_probability,
    unitary_equivalence_gap,
    weyl_defect,
)
from .reps import compute_irreps, distance, fourier_to_json, fourier_transform, irreps_to_json
from .testers import (
    TesterConfig,
    as_matrix_function,
    character_core,
    homomorphism_core,
    test_character_proportional,
    test_conjugate_invariance,
    test_homomorphism,
    test_unitary_equivalence,
)

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(doc, out):
    text = json.dumps(doc, indent=2) + "\n" if not isinstance(doc, str) else doc
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _scalar(f, what="--function"):
    if not isinstance(f, ScalarFunction):
        raise UsageError(f"{what} must be a scalar function")
    return f


def _config(args):
    kw = {"epsilon": args.epsilon, "seed": args.seed, "tol": args.tol}
    if args.log_limit is not None:
        kw["log_limit"] = args.log_limit if args.log_limit >= 0 else None
    for name in ("round_factor", "hoeffding_const", "corrector_const", "char_round_const", "net_base", "net_exp"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return TesterConfig(**kw)


def _report_doc(tester, report, certificate=None):
    d = report.to_dict()
    doc = {
        "tool_version": __version__,
        "tester": tester,
        "epsilon": report.epsilon,
        "seed": report.seed,
        "verdict": report.verdict,
        "queries": d["queries"],
        "rounds": d["rounds"],
    }
    if "witness" in d:
        doc["witness"] = d["witness"]
    if certificate is not None:
        doc["certificate"] = certificate.to_dict()
    return doc


def cmd_irreps(args, G):
    B = compute_irreps(G, seed=args.engine_seed)
    _emit(irreps_to_json(B), args.out)
    return EXIT_ACCEPT


def cmd_fourier(args, G):
    f = _scalar(load_function(args.function, G))
    B = compute_irreps(G, seed=args.engine_seed)
    doc = {"labels": B.labels, "dims": B.dims, "coefficients": fourier_to_json(fourier_transform(f, B))}
    _emit(doc, args.out)
    return EXIT_ACCEPT


def cmd_dist(args, G):
    f = load_function(args.function, G)
    g = load_function(args.function2, G)
    _emit({"distance": distance(f, g)}, args.out)
    return EXIT_ACCEPT


_SCALAR_TESTERS = {
    "test-conjinv": (test_conjugate_invariance, None, distance_to_class_functions),
    "test-hom": (test_homomorphism, homomorphism_core, distance_to_homomorphisms),
    "test-char": (test_character_proportional, character_core, distance_to_character_rays),
}


def cmd_scalar_test(args, G):
    f = _scalar(load_function(args.function, G))
    wrapped, core, oracle = _SCALAR_TESTERS[args.command]
    cfg = _config(args)
    tester = wrapped
    if getattr(args, "core", False):
        tester = core
    report = tester(f, cfg)
    cert = oracle(f) if args.certify else None
    _emit(_report_doc(args.command, report, cert), args.out)
    return EXIT_ACCEPT if report.accepted else EXIT_REJECT


def cmd_uniteq(args, G):
    f = load_function(args.function, G)
    g = load_function(args.function2, G)
    if isinstance(f, ScalarFunction) != isinstance(g, ScalarFunction) or (
        isinstance(f, MatrixFunction) and f.dim != g.dim
    ):
        raise UsageError("--function and --function2 must have the same matrix dimension")
    report = test_unitary_equivalence(f, g, _config(args))
    cert = None
    if args.certify:
        cert = unitary_equivalence_gap(as_matrix_function(f), as_matrix_function(g), seed=args.seed)
    _emit(_report_doc(args.command, report, cert), args.out)
    return EXIT_ACCEPT if report.accepted else EXIT_REJECT


def cmd_oracle(args, G):
    f = load_function(args.function, G)
    prop = args.property
    if prop == "unitary-equivalence":
        if args.function2 is None:
            raise UsageError("--function2 is required for unitary-equivalence")
        g = load_function(args.function2, G)
        _emit(unitary_equivalence_gap(as_matrix_function(f), as_matrix_function(g), seed=args.seed).to_dict(), args.out)
        return EXIT_ACCEPT
    f = _scalar(f)
    if prop == "conjugate-invariance":
        doc = distance_to_class_functions(f).to_dict()
        doc["rejection_probability"] = exact_conjugation_rejection_probability(f)
    elif prop == "homomorphism":
        doc = distance_to_homomorphisms(f).to_dict()
    elif prop == "character-ray":
        doc = distance_to_character_rays(f).to_dict()
        doc["weyl_defect"] = weyl_defect(f)
    else:
        t, four, diag = cubic_expectation(f, time_domain=G.order <= 512)
        doc = {"property": "cubic-expectation",
               "time_domain": None if t is None else [t.real, t.imag],
               "fourier": [four.real, four.imag], "diagonal": [diag.real, diag.imag]}
    _emit(doc, args.out)
    return EXIT_ACCEPT


def cmd_experiment(args, G):
    overrides = {k: getattr(args, k) for k in ("round_factor", "hoeffding_const", "corrector_const",
                                               "char_round_const", "net_base", "net_exp")
                 if getattr(args, k, None) is not None}
    try:
        params = [float(p) for p in args.params.split(",")] if args.params else [0.0]
    except ValueError:
        raise UsageError(f"bad --params {args.params!r}") from None
    spec = ExperimentSpec(
        tester=args.tester, group=args.group, family=args.family,
        epsilons=parse_grid(args.epsilon_grid), params=params, trials=args.trials,
        seed=args.seed, out=args.out, fmt=args.format, instance_dir=args.instance_dir,
        timing=not args.no_timing, jobs=args.jobs, overrides=overrides,
    )
    rows = run_experiment(spec)
    text = rows_to_csv(rows) if spec.fmt == "csv" else rows_to_json(spec, rows, __version__)
    _emit(text, args.out)
    return EXIT_ACCEPT


def _add_constants(p):
    g = p.add_argument_group("tester constants")
    for name in ("round_factor", "hoeffding_const", "corrector_const", "char_round_const", "net_base", "net_exp"):
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=float, default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="grouptest", description="Property testing on finite groups")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, function=True, function2=False):
        p.add_argument("--group", required=True, help="builtin:<family>:<n> or a .grp file")
        if function:
            p.add_argument("--function", required=True, help=".fn file")
        if function2:
            p.add_argument("--function2", required=True, help=".fn file")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--engine-seed", type=int, default=0, help="seed of the irrep decomposition")

    p = sub.add_parser("irreps", help="dump unitary irreps as JSON")
    common(p, function=False)
    p = sub.add_parser("fourier", help="Fourier coefficients of a scalar function")
    common(p)
    p = sub.add_parser("dist", help="distance between two functions")
    common(p, function2=True)

    for name, help_ in (("test-conjinv", "conjugate-invariance tester"),
                        ("test-hom", "homomorphism tester"),
                        ("test-char", "character-proportionality tester"),
                        ("test-uniteq", "unitary-equivalence tester")):
        p = sub.add_parser(name, help=help_)
        common(p, function2=(name == "test-uniteq"))
        p.add_argument("--epsilon", type=float, required=True)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--tol", type=float, default=0.0, help="value-equality tolerance")
        p.add_argument("--log-limit", type=int, default=None, help="rounds to log (-1 for all)")
        p.add_argument("--certify", action="store_true", help="attach the oracle certificate")
        if name in ("test-hom", "test-char"):
            p.add_argument("--core", action="store_true", help="skip the class-function reduction")
        _add_constants(p)

    p = sub.add_parser("oracle", help="exact distances and identities")
    common(p)
    p.add_argument("--function2", default=None)
    p.add_argument("--property", required=True,
                   choices=["conjugate-invariance", "homomorphism", "character-ray", "unitary-equivalence", "cubic"])
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("experiment", help="acceptance-rate sweep")
    p.add_argument("--tester", required=True, choices=["test-conjinv", "test-hom", "test-char", "test-uniteq"])
    p.add_argument("--group", required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--epsilon-grid", required=True, help="start:stop:count")
    p.add_argument("--params", default=None, help="comma-separated family parameters")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--instance-dir", default=None)
    p.add_argument("--no-timing", action="store_true", help="report wall_ms as 0 for byte-identical output")
    p.add_argument("--jobs", type=int, default=1)
    _add_constants(p)
    return ap


COMMANDS = {
    "irreps": cmd_irreps,
    "fourier": cmd_fourier,
    "dist": cmd_dist,
    "test-conjinv": cmd_scalar_test,
    "test-hom": cmd_scalar_test,
    "test-char": cmd_scalar_test,
    "test-uniteq": cmd_uniteq,
    "oracle": cmd_oracle,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_ACCEPT
    try:
        G = parse_group_spec(args.group)
        return COMMANDS[args.command](args, G)
    except (GroupTestError, UsageError, ValueError, TypeError) as exc:
        print(f"grouptest: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
