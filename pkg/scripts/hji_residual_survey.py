"""HJI residuals of the value function at random interior states.

Prints one summary row per scenario and optionally writes every sampled
state's residual to CSV.

    python3 scripts/hji_residual_survey.py                      # all bundled scenarios
    python3 scripts/hji_residual_survey.py my.json --count 500 --csv residuals.csv
"""
import argparse
import csv
import time

import numpy as np

from ovalgame.scenario import bundled_scenarios, load_scenario
from ovalgame.viscosity import PdeOptions, check_pde_at, sample_interior_states


def survey(name, sc, count, seed, opts, writer=None):
    step = opts.step(sc.state)
    states = sample_interior_states(sc.state, count, seed, min_margin=3.0 * step)
    t0 = time.perf_counter()
    verdicts, residuals = [], []
    for k, s in enumerate(states):
        rep = check_pde_at(s, sc.cost, opts)
        verdicts.append(rep.verdict)
        if rep.verdict != "skip":
            residuals.append(abs(rep.hamiltonian_residual))
        if writer is not None:
            writer.writerow([name, k, rep.verdict, f"{rep.hamiltonian_residual:.17g}",
                             f"{rep.differentiability_score:.17g}"])
    res = np.array(residuals)
    checked = len(res)
    return {
        "scenario": name,
        "states": len(states),
        "skip": verdicts.count("skip") / len(states),
        "pass": verdicts.count("pass") / max(checked, 1),
        "median": float(np.median(res)) if checked else float("nan"),
        "max": float(np.max(res)) if checked else float("nan"),
        "seconds": time.perf_counter() - t0,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenarios", nargs="*", help="scenario files (default: bundled)")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pde-tol", type=float, default=1e-2)
    ap.add_argument("--csv", default=None, help="per-state output path")
    args = ap.parse_args()

    scs = {p: load_scenario(p) for p in args.scenarios} if args.scenarios else bundled_scenarios()
    opts = PdeOptions(pde_tol=args.pde_tol)
    fh = open(args.csv, "w", newline="") if args.csv else None
    writer = csv.writer(fh) if fh else None
    if writer:
        writer.writerow(["scenario", "state", "verdict", "residual", "score"])
    print(f"{'scenario':<24}{'states':>7}{'skip':>7}{'pass':>8}{'median':>11}{'max':>11}{'sec':>7}")
    try:
        for name, sc in scs.items():
            r = survey(name, sc, args.count, args.seed, opts, writer)
            print(f"{r['scenario']:<24}{r['states']:>7}{100 * r['skip']:>6.1f}%{100 * r['pass']:>7.1f}%"
                  f"{r['median']:>11.2e}{r['max']:>11.2e}{r['seconds']:>7.1f}")
    finally:
        if fh:
            fh.close()


if __name__ == "__main__":
    main()
