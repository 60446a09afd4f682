"""Command-line entry point: ``ovalgame value|simulate|sweep|verify|oracle-compare SCENARIO``.

Exit codes: 0 success, 1 a check failed, 2 invalid scenario, 3 terminal
state, 4 command needs a target-defense scenario, 5 unsupported dimension.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from .defense import sweep_winning_set
from .dynamics import OptimalEvader, RandomEvader, default_dt, default_t_max, flee_evader, simulate
from .errors import InvalidConfig, ModeMismatch, ScenarioError, TerminalState, UnsupportedDimension
from .scenario import Scenario, load_scenario
from .value import SolverOptions, opt_tol, oracle_mesh, oracle_value, solve_value
from .verify import angle_battery, gradient_battery, pde_battery, rollout_battery, shrinkage_battery
from .viscosity import hamiltonian, sample_interior_states

EXIT_OK, EXIT_CHECK, EXIT_INVALID, EXIT_TERMINAL, EXIT_MODE, EXIT_DIMENSION = 0, 1, 2, 3, 4, 5


def fmt(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else format(float(x), ".17g")


def _clean(obj):
    """Make ``obj`` strict-JSON serialisable (arrays to lists, non-finite floats to null)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _solver(sc: Scenario, seed: int) -> SolverOptions:
    return SolverOptions(angular_resolution=sc.options.angular_resolution, seed=seed)


def _header(sc: Scenario, command: str, seed: int) -> dict:
    return {"command": command, "scenario": sc.name, "seed": seed, "dimension": sc.state.n, "pursuers": sc.state.m}


def cmd_value(sc: Scenario, args) -> int:
    res = solve_value(sc.state, sc.cost, _solver(sc, args.seed))
    doc = _header(sc, "value", args.seed)
    doc.update(res.to_dict())
    doc["opt_tol"] = opt_tol(res.value)
    doc["hamiltonians"] = [hamiltonian(p, sc.state.alphas) for p in res.gradient_samples]
    with _sink(args.out) as fh:
        fh.write(dumps(doc))
    return EXIT_OK


def _evader_policy(sc: Scenario, args, dt: float):
    if args.evader_policy == "optimal":
        res = solve_value(sc.state, sc.cost, _solver(sc, args.seed))
        return OptimalEvader(res, args.optimum_index, dt), res.value
    if args.evader_policy == "random":
        hold = sc.options.random_hold or 0.1 * sc.state.bounding_radius()
        return RandomEvader(sc.state.n, hold, seed=args.seed), None
    return flee_evader, None


def cmd_simulate(sc: Scenario, args) -> int:
    s = sc.state
    s.require_interior()
    dt = args.dt if args.dt is not None else sc.options.dt or default_dt(s)
    t_max = args.t_max if args.t_max is not None else sc.options.t_max
    t_max = default_t_max(s) if t_max is None else t_max
    policy, value = _evader_policy(sc, args, dt)
    traj = simulate(s, evader_policy=policy, dt=dt, t_max=t_max, delay_steps=args.delay_steps)
    m, n = s.m, s.n
    cols = ["t"]
    cols += [f"p{i}_x{j}" for i in range(m) for j in range(n)]
    cols += [f"e_x{j}" for j in range(n)]
    cols += [f"up{i}_{j}" for i in range(m) for j in range(n)]
    cols += [f"ue_{j}" for j in range(n)]
    cols += [f"gap{i}" for i in range(m)]
    gaps = traj.gaps()
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for k in range(len(traj)):
        row = [traj.times[k], *traj.pursuers[k].ravel(), *traj.evader[k], *traj.u_P[k].ravel(), *traj.u_E[k], *gaps[k]]
        buf.write(",".join(fmt(v) for v in row) + "\n")
    meta = {
        "scenario": sc.name,
        "evader_policy": args.evader_policy,
        "seed": args.seed,
        "dt": dt,
        "t_max": t_max,
        "delay_steps": args.delay_steps,
        "captured": traj.capture is not None,
        "capture_time": traj.capture.time if traj.capture else None,
        "capture_index": traj.capture.index if traj.capture else None,
        "payoff": traj.payoff(sc.cost),
        "value": value,
    }
    for k, v in meta.items():
        if isinstance(v, float):
            v = fmt(v)
        buf.write(f"# {k}={'none' if v is None else v}\n")
    with _sink(args.out) as fh:
        fh.write(buf.getvalue())
    return EXIT_OK


def _grid_axes(sc: Scenario, args):
    n = sc.state.n
    counts = args.grid if args.grid is not None else sc.options.grid
    if counts is None:
        counts = [11] * n
    if len(counts) != n or any(int(c) < 1 for c in counts):
        raise ScenarioError("--grid", f"expected {n} positive counts")
    bounds = sc.options.sweep_bounds
    if bounds is None:
        r = 2.0 * sc.state.bounding_radius() if not sc.state.is_terminal() else 1.0
        bounds = [[c - r, c + r] for c in sc.state.evader]
    if len(bounds) != n:
        raise ScenarioError("options.sweep_bounds", f"expected {n} intervals")
    return [np.linspace(lo, hi, int(c)) for (lo, hi), c in zip(bounds, counts)]


def cmd_sweep(sc: Scenario, args) -> int:
    if not sc.defense_mode:
        raise ModeMismatch(f"sweep needs a target shape, scenario cost is {sc.cost.kind!r}")
    axes = _grid_axes(sc, args)
    res = sweep_winning_set(sc.state, sc.cost, axes, _solver(sc, args.seed))
    names = ["x", "y", "z"][: sc.state.n] if sc.state.n <= 3 else [f"x{j}" for j in range(sc.state.n)]
    buf = io.StringIO()
    buf.write(f"# scenario={sc.name}\n# grid={'x'.join(str(len(a)) for a in axes)}\n# order=row-major, first axis slowest\n")
    buf.write(",".join(names + ["value", "win"]) + "\n")
    for x, v, w in zip(res.points, res.values, res.win):
        flag = "na" if w is None else str(int(w))
        buf.write(",".join([*(fmt(c) for c in x), fmt(v), flag]) + "\n")
    with _sink(args.out) as fh:
        fh.write(buf.getvalue())
    return EXIT_OK


def cmd_verify(sc: Scenario, args) -> int:
    s = sc.state
    s.require_interior()
    o = sc.options
    states = [s] + sample_interior_states(s, max(o.verify_states // 10, 1), args.seed, min_margin=1e-3 * s.scale())
    checks = [
        angle_battery(s, o.angle_pairs, args.seed),
        shrinkage_battery(s, o.verify_rollouts, args.seed, hold=o.random_hold, dt=args.dt or o.dt),
        *gradient_battery(states, sc.cost, _solver(sc, args.seed)),
        pde_battery(s, sc.cost, o.verify_states, args.seed),
        rollout_battery(s, sc.cost, o.verify_rollouts, args.seed, dt=args.dt or o.dt),
    ]
    doc = _header(sc, "verify", args.seed)
    doc["checks"] = {c.name: c.to_dict() for c in checks}
    doc["failed_checks"] = [c.name for c in checks if not c.ok]
    with _sink(args.out) as fh:
        fh.write(dumps(doc))
    return EXIT_OK if not doc["failed_checks"] else EXIT_CHECK


def cmd_oracle_compare(sc: Scenario, args) -> int:
    s = sc.state
    if s.n not in (2, 3):
        raise UnsupportedDimension(f"the oracle supports n in {{2, 3}}, got {s.n}")
    s.require_interior()
    resolution = args.resolution or sc.options.oracle_resolution
    seeds = max(sc.options.oracle_seeds, 1)
    rows = []
    states = [s] + sample_interior_states(s, seeds - 1, args.seed, min_margin=1e-3 * s.scale())
    for k, st in enumerate(states):
        v = solve_value(st, sc.cost, _solver(sc, args.seed)).value
        ov, _ = oracle_value(st, sc.cost, resolution)
        mesh = oracle_mesh(st, resolution)
        bound = opt_tol(v) + sc.cost.lipschitz_bound * mesh
        # the oracle samples feasible points, so it can only exceed the true minimum
        gap = ov - v
        ok = -opt_tol(v) <= gap <= bound
        rows.append({"case": k, "value": v, "oracle": ov, "discrepancy": abs(gap), "bound": bound, "ok": ok})
    disc = np.array([r["discrepancy"] for r in rows])
    doc = _header(sc, "oracle-compare", args.seed)
    doc.update({
        "resolution": resolution,
        "cases": rows,
        "max_discrepancy": float(disc.max()),
        "mean_discrepancy": float(disc.mean()),
        "all_within_bound": all(r["ok"] for r in rows),
    })
    with _sink(args.out) as fh:
        fh.write(dumps(doc))
    print(f"max discrepancy {disc.max():.3e}, mean {disc.mean():.3e}", file=sys.stderr)
    return EXIT_OK if doc["all_within_bound"] else EXIT_CHECK


COMMANDS = {
    "value": cmd_value,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "oracle-compare": cmd_oracle_compare,
}


def _grid(text: str) -> list[int]:
    try:
        return [int(c) for c in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ovalgame", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None, dest="t_max")
    p.add_argument("--grid", type=_grid, default=None, help="cells per axis, e.g. 21,21")
    p.add_argument("--resolution", type=int, default=None, help="oracle angular resolution")
    p.add_argument("--evader-policy", choices=["optimal", "random", "flee"], default="optimal")
    p.add_argument("--optimum-index", type=int, default=0)
    p.add_argument("--delay-steps", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
        if args.dt is not None and not args.dt > 0:
            raise ScenarioError("--dt", "must be positive")
        if args.t_max is not None and args.t_max < 0:
            raise ScenarioError("--t-max", "must be nonnegative")
        if args.delay_steps < 0:
            raise ScenarioError("--delay-steps", "must be nonnegative")
        return COMMANDS[args.command](sc, args)
    except (ScenarioError, InvalidConfig) as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TerminalState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TERMINAL
    except ModeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODE
    except UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except IndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
