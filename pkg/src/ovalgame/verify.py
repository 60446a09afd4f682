"""Named check batteries run by ``ovalgame verify`` and the acceptance tests.

Every battery returns a :class:`CheckSummary` with pass/skip/fail counts and
an overall status.  Thresholds live here so the CLI, the scripts and the
tests agree on them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import TerminalCost
from .dynamics import (
    OptimalEvader,
    RandomEvader,
    default_dt,
    epsilon_advance_check,
    monitor_shrinkage,
    nesting_tol,
    rollout_tol,
    simulate,
)
from .geometry import angle_gaps, oval_boundary, sphere_directions
from .state import GameState
from .value import SolverOptions, solve_value
from .viscosity import (
    PdeOptions,
    check_pde_at,
    sample_interior_states,
    subsolution_residuals,
    supersolution_residuals,
)

ANGLE_FLOOR = -1e-9
PDE_PASS_FRACTION = 0.95
PDE_HARD_TOL = 5e-2
ANGLE_STRICT_FRACTION = 0.999


@dataclass
class CheckSummary:
    name: str
    passed: int = 0
    skipped: int = 0
    failed: int = 0
    ok: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "skip": self.skipped,
            "fail": self.failed,
            "status": "ok" if self.ok else "fail",
            **self.details,
        }


def random_boundary_pairs(state: GameState, index: int, count: int, rng) -> tuple[np.ndarray, np.ndarray]:
    cfg = state.configs()[index]
    E1 = sphere_directions(state.n, count, rng)
    E2 = sphere_directions(state.n, count, rng)
    return oval_boundary(cfg, E1), oval_boundary(cfg, E2)


def angle_battery(state: GameState, pairs: int = 1000, seed: int = 0) -> CheckSummary:
    """Cosine-gap inequality on random pairs of points of each pursuer's oval.

    A pair fails when its gap falls below ``-1e-9``; gaps that are not
    strictly positive at distinct points are counted as skipped (flagged for
    review) and must stay below 0.1% of the pairs.
    """
    rng = np.random.default_rng(seed)
    out = CheckSummary("angle_inequality")
    worst = np.inf
    for i, cfg in enumerate(state.configs()):
        X1, X2 = random_boundary_pairs(state, i, pairs, rng)
        gaps = angle_gaps(X1, X2, cfg)
        distinct = np.linalg.norm(X1 - X2, axis=1) > 1e-9 * (1.0 + cfg.separation)
        gaps = gaps[distinct]
        worst = min(worst, float(np.min(gaps, initial=np.inf)))
        out.failed += int(np.sum(gaps < ANGLE_FLOOR))
        out.skipped += int(np.sum((gaps >= ANGLE_FLOOR) & (gaps <= 0.0)))
        out.passed += int(np.sum(gaps > 0.0))
    total = out.passed + out.skipped + out.failed
    out.ok = out.failed == 0 and out.passed >= ANGLE_STRICT_FRACTION * total
    out.details = {"min_gap": worst}
    return out


def shrinkage_battery(state: GameState, rollouts: int = 5, seed: int = 0, hold: float | None = None,
                      dt: float | None = None, advances: int = 20) -> CheckSummary:
    """Closing rate and region nesting under the pursuit strategy, plus epsilon-advance checks."""
    rng = np.random.default_rng(seed)
    dt = default_dt(state) if dt is None else dt
    hold = 0.1 * state.bounding_radius() if hold is None else hold
    ntol = nesting_tol(state.scale())
    out = CheckSummary("shrinkage")
    worst_rate, worst_nest = -np.inf, -np.inf
    for r in range(rollouts):
        traj = simulate(state, evader_policy=RandomEvader(state.n, hold, seed=int(rng.integers(2**31))), dt=dt)
        for i in range(state.m):
            rep = monitor_shrinkage(traj, i)
            worst_rate = max(worst_rate, rep.max_closing_rate - rep.rate_bound)
            worst_nest = max(worst_nest, rep.max_nesting_violation)
            if rep.ok(5.0 * dt, ntol):
                out.passed += 1
            else:
                out.failed += 1
    for i, cfg in enumerate(state.configs()):
        X, _ = random_boundary_pairs(state, i, advances, rng)
        for x in X:
            eps = 0.3 * float(np.linalg.norm(x - cfg.x_E))
            rep = epsilon_advance_check(cfg, x, eps, nest_tol=ntol)
            worst_nest = max(worst_nest, rep.nesting_violation)
            if rep.ok:
                out.passed += 1
            else:
                out.failed += 1
    out.ok = out.failed == 0
    out.details = {"max_rate_excess": worst_rate, "max_nesting_violation": worst_nest, "dt": dt}
    return out


def gradient_battery(states: list[GameState], cost: TerminalCost, opts: SolverOptions | None = None) -> tuple[CheckSummary, CheckSummary]:
    """Subsolution inequality and supersolution equality on the KKT covectors at each state."""
    sub = CheckSummary("subsolution")
    sup = CheckSummary("supersolution")
    worst_sub, worst_sup = -np.inf, -np.inf
    for s in states:
        res = solve_value(s, cost, opts)
        if res.kkt_failures:
            sub.skipped += 1
            sup.skipped += 1
            continue
        r_sub = subsolution_residuals(res.gradient_samples, s.alphas)
        r_sup = supersolution_residuals(res, s.alphas)
        worst_sub = max(worst_sub, float(np.max(r_sub, initial=-np.inf)))
        worst_sup = max(worst_sup, float(np.max(r_sup, initial=-np.inf)))
        if np.all(r_sub <= 0.0):
            sub.passed += 1
        else:
            sub.failed += 1
        if np.all(r_sup <= 0.0):
            sup.passed += 1
        else:
            sup.failed += 1
    sub.ok, sup.ok = sub.failed == 0, sup.failed == 0
    sub.details = {"max_excess": worst_sub}
    sup.details = {"max_excess": worst_sup}
    return sub, sup


def pde_battery(template: GameState, cost: TerminalCost, count: int = 200, seed: int = 0,
                opts: PdeOptions | None = None) -> CheckSummary:
    """HJI residuals at seeded random interior states.

    Passes when at least 95% of the non-skipped states meet ``pde_tol`` and
    none exceeds ``5e-2``.
    """
    opts = opts or PdeOptions()
    min_margin = 3.0 * opts.step(template)
    states = sample_interior_states(template, count, seed, min_margin=min_margin)
    out = CheckSummary("hji_residual")
    residuals = []
    for s in states:
        if s.capture_margin() <= 3.0 * opts.step(s):
            out.skipped += 1
            continue
        rep = check_pde_at(s, cost, opts)
        if rep.verdict == "skip":
            out.skipped += 1
            continue
        residuals.append(abs(rep.hamiltonian_residual))
        if rep.verdict == "pass":
            out.passed += 1
        else:
            out.failed += 1
    residuals = np.array(residuals)
    checked = out.passed + out.failed
    frac = out.passed / checked if checked else 1.0
    out.ok = frac >= PDE_PASS_FRACTION and bool(np.all(residuals <= PDE_HARD_TOL))
    out.details = {
        "pass_fraction": frac,
        "skip_fraction": out.skipped / max(len(states), 1),
        "max_residual": float(np.max(residuals, initial=0.0)),
    }
    return out


def rollout_battery(state: GameState, cost: TerminalCost, random_runs: int = 5, seed: int = 0,
                    dt: float | None = None, opts: SolverOptions | None = None) -> CheckSummary:
    """Optimal-vs-optimal payoff equals the value; random evaders never do better."""
    dt = default_dt(state) if dt is None else dt
    res = solve_value(state, cost, opts)
    tol = rollout_tol(res.value, cost.lipschitz_bound, dt)
    out = CheckSummary("rollout")
    payoffs = []
    for k in range(len(res.optima)):
        traj = simulate(state, evader_policy=OptimalEvader(res, k, dt), dt=dt)
        p = traj.payoff(cost)
        payoffs.append(p)
        if traj.capture is not None and abs(p - res.value) <= tol:
            out.passed += 1
        else:
            out.failed += 1
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(random_runs):
        ev = RandomEvader(state.n, 0.1 * state.bounding_radius(), seed=int(rng.integers(2**31)))
        traj = simulate(state, evader_policy=ev, dt=dt)
        p = traj.payoff(cost)
        worst = min(worst, p - res.value)
        if traj.capture is not None and p >= res.value - tol:
            out.passed += 1
        else:
            out.failed += 1
    out.ok = out.failed == 0
    out.details = {"value": res.value, "tolerance": tol, "optimal_payoffs": payoffs, "min_random_excess": worst}
    return out
