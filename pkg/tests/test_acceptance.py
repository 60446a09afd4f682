"""Acceptance gate: one test per criterion, each at its pinned tolerance and time budget.

Every test records a single PASS/FAIL line, shown under "acceptance
criteria" at the end of the pytest run, before asserting.
"""
import time
from functools import lru_cache

import numpy as np

from ovalgame.costs import SignedDistanceCost, WeightedMinDistance
from ovalgame.defense import sweep_winning_set, winning_indicator
from ovalgame.dynamics import (
    OptimalEvader,
    RandomEvader,
    default_dt,
    monitor_shrinkage,
    rollout_tol,
    simulate,
)
from ovalgame.generators import COST_FAMILIES, random_cost, random_direction, random_state
from ovalgame.geometry import OvalConfig, PursuerParams, margin, rho, smooth_margins
from ovalgame.scenario import bundled_scenarios
from ovalgame.shapes import Disk
from ovalgame.state import GameState
from ovalgame.value import opt_tol, oracle_mesh, oracle_value, solve_value
from ovalgame.verify import pde_battery
from ovalgame.viscosity import PdeOptions

# pinned tolerances and budgets
RHO_TOL = 1e-10
ANGLE_FLOOR = -1e-9
ANGLE_STRICT_FRACTION = 0.999
NESTING_TOL = 1e-6
SUPER_RTOL = 1e-8
SUB_RTOL = 1e-9
PDE_TOL = 1e-2
PDE_HARD_TOL = 5e-2
PDE_PASS_FRACTION = 0.95
VALUE_TOUCH_TOL = 1e-4
SYMMETRY_TOL = 1e-6


def gate(report, number, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    report(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail} ({elapsed:.2f} s / {budget:g} s)")
    assert ok, f"criterion {number} failed: {detail}, {elapsed:.2f} s"


def random_config(rng, n, l_min=0.0):
    alpha = 4.0 - rng.uniform(0.0, 3.0)  # (1, 4]
    l = rng.uniform(l_min, 1.0)
    x_E = rng.uniform(-2, 2, n)
    return OvalConfig(x_E + rng.uniform(l + 0.05, l + 3.0) * random_direction(rng, n), x_E, PursuerParams(alpha, l))


def hamiltonian_direct(p_P, p_E, alphas):
    return -sum(a * np.sqrt(np.dot(q, q)) for a, q in zip(alphas, p_P)) + np.sqrt(np.dot(p_E, p_E))


def test_c01_oval_correctness(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst, negative = 0.0, 0
    for k in range(1000):
        n = 2 + k % 2
        cfg = random_config(rng, n)
        e = random_direction(rng, n)
        r = rho(cfg, e)
        negative += r < 0
        worst = max(worst, abs(float(margin(cfg.x_E + r * e, cfg))))
    elapsed = time.perf_counter() - t0
    gate(report, 1, "oval exit distance", worst <= RHO_TOL and not negative,
         f"max |margin| = {worst:.2e} over 1000 pairs", elapsed, 1.0)


def test_c02_smooth_constraint_equivalence(report):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    mismatches, total, boundary_bad = 0, 0, 0
    for k in range(100):
        n = 2 + k % 2
        cfg = random_config(rng, n, l_min=1e-3)  # the quartic form needs a positive radius
        E = rng.standard_normal((1000, n))
        E /= np.linalg.norm(E, axis=1, keepdims=True)
        r = np.array([rho(cfg, e) for e in E[:500]])
        X = np.concatenate([
            # around the boundary, where classifications are delicate
            cfg.x_E + (rng.uniform(0.9, 1.1, 500) * r)[:, None] * E[:500],
            # a box covering the whole region and beyond
            cfg.x_E + rng.uniform(-2, 2, (500, n)) * (cfg.separation + cfg.l),
        ])
        d = margin(X, cfg)
        d_hat, d_bar = smooth_margins(X, cfg)
        mismatches += int(np.sum((d <= 0) != ((d_hat <= 0) & (d_bar <= 0))))
        total += len(X)
        # on the boundary itself: d_hat vanishes (to rounding) while d_bar stays negative
        B = cfg.x_E + r[:, None] * E[:500]
        bh, bb = smooth_margins(B, cfg)
        scale = (cfg.separation + cfg.alpha * np.max(r) + cfg.l) ** 4
        boundary_bad += int(np.sum((np.abs(bh) > 1e-10 * scale) | (bb > 0)))
    elapsed = time.perf_counter() - t0
    gate(report, 2, "smooth constraint equivalence", mismatches == 0 and total == 10**5 and boundary_bad == 0,
         f"{mismatches} mismatches of {total} points, {boundary_bad} boundary defects", elapsed, 5.0)


def test_c03_angle_inequality(report):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    lines, ok = [], True
    for n in (2, 3):
        gaps = []
        for _ in range(100):
            cfg = random_config(rng, n)
            pts = []
            for _ in range(2):
                E = rng.standard_normal((100, n))
                E /= np.linalg.norm(E, axis=1, keepdims=True)
                pts.append(cfg.x_E + np.array([rho(cfg, e) for e in E])[:, None] * E)
            X1, X2 = pts
            chord2 = np.sum((X1 - X2) ** 2, axis=1)
            keep = chord2 > 0

            def cos_at(c):
                a2 = np.sum((X1 - c) ** 2, axis=1)
                b2 = np.sum((X2 - c) ** 2, axis=1)
                return (a2 + b2 - chord2) / (2 * np.sqrt(a2 * b2))

            gaps.append((cos_at(cfg.x_P) - cos_at(cfg.x_E))[keep])
        gaps = np.concatenate(gaps)
        strict = float(np.mean(gaps > 0))
        ok &= gaps.size == 10**4 and gaps.min() >= ANGLE_FLOOR and strict >= ANGLE_STRICT_FRACTION
        lines.append(f"n={n}: min gap {gaps.min():.2e}, strictly positive {100 * strict:.2f}%")
    elapsed = time.perf_counter() - t0
    gate(report, 3, "angle inequality", ok, "; ".join(lines), elapsed, 10.0)


def test_c04_region_shrinkage(report):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst_rate, worst_nest, escaped = -np.inf, -np.inf, 0.0
    for k in range(20):
        n = 2 + k % 2
        s0 = random_state(rng, n, int(rng.integers(1, 4)))
        dt = default_dt(s0)
        traj = simulate(s0, evader_policy=RandomEvader(n, 0.1 * s0.bounding_radius(), seed=k), dt=dt)
        for i in range(s0.m):
            # closing rate straight from the sampled positions
            sep = np.linalg.norm(traj.pursuers[:, i] - traj.evader, axis=1)
            rate = np.max(np.diff(sep) / np.diff(traj.times))
            worst_rate = max(worst_rate, rate - (1 - s0.alphas[i]) - 5 * dt)
            worst_nest = max(worst_nest, monitor_shrinkage(traj, i).max_nesting_violation)
            escaped = max(escaped, float(np.max(margin(traj.evader, s0.configs()[i]))))
    elapsed = time.perf_counter() - t0
    ok = worst_rate < 0 and worst_nest <= NESTING_TOL and escaped <= NESTING_TOL
    gate(report, 4, "region shrinkage under pursuit",
         ok, f"rate margin {-worst_rate:.2e} below bound, nesting {worst_nest:.2e}, evader excursion {escaped:.2e}",
         elapsed, 60.0)


@lru_cache(maxsize=None)
def oracle_games():
    """50 planar games: every cost family, one to three pursuers."""
    rng = np.random.default_rng(5)
    games = []
    for k in range(50):
        family = COST_FAMILIES[k % len(COST_FAMILIES)]
        state = random_state(rng, 2, 1 + k % 3)
        games.append((state, random_cost(rng, 2, family), family))
    return games


@lru_cache(maxsize=None)
def solved_games():
    return [(state, g, solve_value(state, g)) for state, g, _ in oracle_games()]


def test_c05_value_matches_oracle(report):
    t0 = time.perf_counter()
    worst, failures = -np.inf, []
    for k, ((state, g, family), (_, _, res)) in enumerate(zip(oracle_games(), solved_games())):
        v, _ = oracle_value(state, g, 256)
        bound = opt_tol(res.value) + g.lipschitz_bound * oracle_mesh(state, 256)
        gap = abs(res.value - v)
        worst = max(worst, gap / bound)
        if gap > bound:
            failures.append(f"#{k} {family}")
    elapsed = time.perf_counter() - t0
    gate(report, 5, "value vs brute-force oracle", not failures,
         f"50 games, worst gap {worst:.3f} of its bound, failures {failures or 'none'}", elapsed, 120.0)


def test_c06_supersolution_equality(report):
    t0 = time.perf_counter()
    worst, count, missing = -np.inf, 0, 0
    for state, _, res in solved_games():
        missing += len(res.kkt_failures)
        for p in res.gradient_samples:
            h = hamiltonian_direct(p.p_P, p.p_E, state.alphas)
            worst = max(worst, abs(h) / (1 + p.norm()))
            count += 1
    elapsed = time.perf_counter() - t0
    gate(report, 6, "supersolution equality", worst <= SUPER_RTOL and missing == 0 and count >= 50,
         f"{count} covectors, max |H|/(1+|p|) = {worst:.2e}, {missing} optima without multipliers",
         elapsed, 10.0)


def test_c07_subsolution_inequality(report):
    t0 = time.perf_counter()
    ts = np.linspace(0, 1, 11)

    def worst_excess(state, samples):
        w = -np.inf
        for i, a in enumerate(samples):
            for b in samples[i:]:
                for t in ts:
                    pP, pE = (1 - t) * a.p_P + t * b.p_P, (1 - t) * a.p_E + t * b.p_E
                    norm = np.sqrt(np.sum(pP**2) + np.sum(pE**2))
                    w = max(w, hamiltonian_direct(pP, pE, state.alphas) / (1 + norm))
        return w

    worst = max(worst_excess(state, res.gradient_samples) for state, _, res in solved_games())
    # two mirror-image optima: their mixtures must fall strictly below zero
    sym = GameState.build([[1, 0], [-1, 0]], [0, 0], [2, 2], [0.1, 0.1])
    res = solve_value(sym, WeightedMinDistance([[0, 10], [0, -10]]))
    a, b = res.gradient_samples
    mid_P, mid_E = 0.5 * (a.p_P + b.p_P), 0.5 * (a.p_E + b.p_E)
    h_mid = hamiltonian_direct(mid_P, mid_E, sym.alphas)
    worst = max(worst, worst_excess(sym, res.gradient_samples))
    elapsed = time.perf_counter() - t0
    ok = worst <= SUB_RTOL and len(res.optima) == 2 and h_mid < 0
    gate(report, 7, "subsolution inequality", ok,
         f"max H/(1+|p|) = {worst:.2e}; symmetric two-optimum midpoint H = {h_mid:.3f}", elapsed, 30.0)


def test_c08_hji_residual(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, sc in bundled_scenarios().items():
        rep = pde_battery(sc.state, sc.cost, 200, seed=0, opts=PdeOptions(pde_tol=PDE_TOL))
        d = rep.details
        good = d["pass_fraction"] >= PDE_PASS_FRACTION and d["max_residual"] <= PDE_HARD_TOL
        ok &= good and rep.passed > 0
        parts.append(f"{name} pass {100 * d['pass_fraction']:.0f}% max {d['max_residual']:.1e} "
                     f"skip {100 * d['skip_fraction']:.0f}%")
    elapsed = time.perf_counter() - t0
    gate(report, 8, "HJI residual at differentiable states", ok, "; ".join(parts), elapsed, 300.0)


def test_c09_rollout_equivalence(report):
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    worst_opt, worst_rand, uncaptured = -np.inf, -np.inf, 0
    for k in range(20):
        family = COST_FAMILIES[k % len(COST_FAMILIES)]
        state = random_state(rng, 2, 1 + k % 3)
        g = random_cost(rng, 2, family)
        res = solve_value(state, g)
        dt = default_dt(state)
        tol = rollout_tol(res.value, g.lipschitz_bound, dt)
        traj = simulate(state, evader_policy=OptimalEvader(res, 0, dt), dt=dt)
        uncaptured += traj.capture is None
        worst_opt = max(worst_opt, abs(traj.payoff(g) - res.value) / tol)
        for j in range(20):
            ev = RandomEvader(2, 0.1 * state.bounding_radius(), seed=1000 * k + j)
            traj = simulate(state, evader_policy=ev, dt=dt)
            uncaptured += traj.capture is None
            worst_rand = max(worst_rand, (res.value - traj.payoff(g)) / tol)
    elapsed = time.perf_counter() - t0
    ok = worst_opt <= 1 and worst_rand <= 1 and uncaptured == 0
    gate(report, 9, "rollout equivalence", ok,
         f"optimal |payoff-V| at {worst_opt:.2f} of tol, random shortfall at {worst_rand:.2f} of tol, "
         f"{uncaptured} uncaptured of 420", elapsed, 300.0)


def test_c10_target_defense(report):
    t0 = time.perf_counter()
    colinear = GameState.build([[1, 0]], [0, 0], [2], [0])
    win, v = winning_indicator(colinear, Disk([-10, 0], 9))
    touch_ok = win and abs(v) <= VALUE_TOUCH_TOL
    # erosion: shrinking the disk never turns a win into a loss
    rng = np.random.default_rng(10)
    flips = 0
    for _ in range(10):
        state = random_state(rng, 2, int(rng.integers(1, 4)))
        centre = rng.uniform(1.0, 3.0) * random_direction(rng, 2)
        wins = [winning_indicator(state, Disk(centre, r))[0] for r in np.linspace(2.5, 0.25, 10)]
        flips += sum(a and not b for a, b in zip(wins, wins[1:]))
    # mirror symmetry of the two-disk sweep
    sc = bundled_scenarios()["two_disk_defense"]
    axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(sc.options.sweep_bounds, sc.options.grid)]
    assert np.allclose(axes[0], -axes[0][::-1])
    V = sweep_winning_set(sc.state, sc.cost, axes).value_grid()
    finite = ~np.isnan(V)
    asym = float(np.max(np.abs(V - V[::-1])[finite & finite[::-1]]))
    sym_ok = np.array_equal(finite, finite[::-1]) and asym <= SYMMETRY_TOL
    assert isinstance(sc.cost, SignedDistanceCost)
    elapsed = time.perf_counter() - t0
    gate(report, 10, "target defense", touch_ok and flips == 0 and sym_ok,
         f"touching disk V = {v:.1e} win={win}; {flips} erosion flips over 10 states x 10 radii; "
         f"sweep asymmetry {asym:.1e}", elapsed, 60.0)
