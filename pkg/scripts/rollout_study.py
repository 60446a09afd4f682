"""Simulated payoffs against the computed value on random games.

For each game the evader first heads for an optimum (payoff should match
the value), then plays random unit-speed headings (payoff should never fall
below it).  All runs use the pursuit strategy for every pursuer.

    python3 scripts/rollout_study.py --games 20 --runs 20
    python3 scripts/rollout_study.py --dim 3 --delay-steps 5
"""
import argparse
import time

import numpy as np

from ovalgame.dynamics import OptimalEvader, RandomEvader, default_dt, rollout_tol, simulate
from ovalgame.generators import COST_FAMILIES, random_cost, random_state
from ovalgame.value import solve_value


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--games", type=int, default=20)
    ap.add_argument("--runs", type=int, default=20, help="random evaders per game")
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--delay-steps", type=int, default=0, help="pursuers see the evader control this late")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'game':>4} {'family':<13}{'m':>2}{'value':>10}{'optimal':>10}{'min rand':>10}{'tol':>9}  ok")
    bad = 0
    t0 = time.perf_counter()
    for k in range(args.games):
        family = COST_FAMILIES[k % len(COST_FAMILIES)]
        state = random_state(rng, args.dim, int(rng.integers(1, 4)))
        g = random_cost(rng, args.dim, family)
        res = solve_value(state, g)
        dt = default_dt(state)
        tol = rollout_tol(res.value, g.lipschitz_bound, dt)
        opt = simulate(state, evader_policy=OptimalEvader(res, 0, dt), dt=dt, delay_steps=args.delay_steps)
        payoffs = [
            simulate(state, evader_policy=RandomEvader(args.dim, 0.1 * state.bounding_radius(), seed=1000 * k + j),
                     dt=dt, delay_steps=args.delay_steps).payoff(g)
            for j in range(args.runs)
        ]
        low = min(payoffs) if payoffs else float("nan")
        ok = abs(opt.payoff(g) - res.value) <= tol and (not payoffs or low >= res.value - tol)
        bad += not ok
        print(f"{k:>4} {family:<13}{state.m:>2}{res.value:>10.4f}{opt.payoff(g):>10.4f}{low:>10.4f}{tol:>9.1e}  "
              f"{'yes' if ok else 'NO'}")
    print(f"\n{args.games - bad}/{args.games} games consistent, {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
