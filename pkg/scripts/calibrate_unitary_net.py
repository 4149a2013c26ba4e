"""Calibrate the Haar-draw budget of the unitary-equivalence tester.

Runs the tester on planted instances with a generous budget, records how many
draws it needed before accepting, and reports the acceptance probability each
candidate (net_base, net_exp) pair would give.

    python scripts/calibrate_unitary_net.py --dims 1 2 --epsilon 0.3 --trials 50
"""

import argparse

import numpy as np

from grouptest import testers as T
from grouptest.groups import parse_group_spec
from grouptest.instances import generate
from grouptest.testers import TesterConfig, uniteq_iterations

CANDIDATES = [(1.0, 1.0), (1.25, 1.0), (1.5, 1.0), (2.0, 1.0), (1.25, 1.5), (40.0, 2.0)]


def draws_to_accept(dim, eps, trials, group, seed, budget_base):
    rng = np.random.default_rng(seed)
    out = []
    for t in range(trials):
        inst = generate("planted-unitary", group, dim, rng)
        cfg = TesterConfig(eps, seed=seed + t, net_base=budget_base, log_limit=0)
        r = T.test_unitary_equivalence(inst.f, inst.g, cfg)
        out.append(r.rounds_run if r.accepted else np.inf)
    return np.array(out, dtype=float)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--epsilon", type=float, default=0.3)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--group", default="builtin:symmetric:3")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget-base", type=float, default=2.0, help="net_base of the exploratory runs")
    args = ap.parse_args()
    G = parse_group_spec(args.group)
    for d in args.dims:
        hits = draws_to_accept(d, args.epsilon, args.trials, G, args.seed, args.budget_base)
        finite = hits[np.isfinite(hits)]
        print(f"d={d} eps={args.epsilon}: accepted {finite.size}/{hits.size} within "
              f"{uniteq_iterations(args.epsilon, d, TesterConfig(args.epsilon, net_base=args.budget_base))} draws")
        if finite.size:
            q = np.quantile(finite, [0.5, 0.9, 1.0])
            print(f"  draws to accept: median {q[0]:.0f}, 90% {q[1]:.0f}, max {q[2]:.0f}")
        for base, exp in CANDIDATES:
            s = uniteq_iterations(args.epsilon, d, TesterConfig(args.epsilon, net_base=base, net_exp=exp))
            print(f"  net_base={base:<5} net_exp={exp:<4} s={s:>14,d}  accept rate {np.mean(hits <= s):.2f}")


if __name__ == "__main__":
    main()
