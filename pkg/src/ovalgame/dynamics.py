"""Simple-motion dynamics, the dominance-region pursuit strategy and rollouts.

Pursuer ``i`` moves with speed at most ``a_i`` and the evader with speed at
most 1.  Pursuers play the strategy that aims each of them at the point where
the evader's current heading leaves that pursuer's dominance region, which
makes every region shrink monotonically.  With a unit-speed evader one Euler
step of length ``dt`` is exactly an advance of ``dt`` along that boundary
point, so nesting also holds for the discrete scheme.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .costs import TerminalCost
from .errors import InvalidConfig, NotOnBoundary
from .geometry import OvalConfig, boundary_directions, circle_directions, margin, oval_boundary, rho, rho_many
from .state import GameState
from .value import ValueResult, fibonacci_sphere

CONTROL_TOL = 1e-9
ZERO_CONTROL = 1e-15
EVENT_RTOL = 1e-9

EvaderPolicy = Callable[[float, GameState], np.ndarray]
PursuerPolicy = Callable[[float, GameState, np.ndarray], np.ndarray]


def control(u) -> np.ndarray:
    """Validate a control vector: norms up to ``1 + 1e-9`` are clamped to the unit ball."""
    u = np.asarray(u, dtype=float)
    r = float(np.linalg.norm(u))
    if not np.isfinite(r) or r > 1.0 + CONTROL_TOL:
        raise InvalidConfig(f"control norm {r:.12g} exceeds 1")
    return u / r if r > 1.0 else u.copy()


def pursuit_control(cfg: OvalConfig, u_E) -> np.ndarray:
    """Unit heading toward ``x_E + rho(e) e`` with ``e = u_E / |u_E|`` (toward ``x_E`` if ``u_E = 0``)."""
    cfg.require_valid()
    u_E = control(u_E)
    speed = np.linalg.norm(u_E)
    if speed <= ZERO_CONTROL:
        target = cfg.x_E
    else:
        e = u_E / speed
        target = cfg.x_E + rho(cfg, e) * e
    d = target - cfg.x_P
    return d / np.linalg.norm(d)


def pursuit_policy(t: float, state: GameState, u_E: np.ndarray) -> np.ndarray:
    """:func:`pursuit_control` for every pursuer at once."""
    state.require_interior()
    speed = np.linalg.norm(u_E)
    if speed <= ZERO_CONTROL:
        targets = np.broadcast_to(state.evader, state.pursuers.shape)
    else:
        e = u_E / speed
        r = rho_many(state.pursuers, state.evader, state.alphas, state.radii, e[None, :])[:, 0]
        targets = state.evader + r[:, None] * e
    d = targets - state.pursuers
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def evader_optimal_control(state: GameState, result: ValueResult, selection: int = 0,
                           arrival_tol: float = 1e-3) -> np.ndarray:
    """Unit heading toward the selected optimum, or zero once within ``arrival_tol`` of it."""
    state.require_interior()
    if not 0 <= selection < len(result.optima):
        raise IndexError(f"optimum index {selection} out of range (have {len(result.optima)})")
    d = result.optima[selection] - state.evader
    r = np.linalg.norm(d)
    if r <= arrival_tol:
        return np.zeros(state.n)
    return d / r


class OptimalEvader:
    """Heads for a fixed optimum of the initial state.

    Under the pursuit strategy the chosen optimum stays on the boundary of the
    shrinking region, so it never needs recomputing.
    """

    def __init__(self, result: ValueResult, selection: int = 0, arrival_tol: float = 1e-3):
        self.result = result
        self.selection = selection
        self.arrival_tol = arrival_tol

    def __call__(self, t: float, state: GameState) -> np.ndarray:
        return evader_optimal_control(state, self.result, self.selection, self.arrival_tol)


class RandomEvader:
    """Unit-speed heading redrawn uniformly every ``hold`` time units."""

    def __init__(self, n: int, hold: float, seed: int = 0):
        self.n = n
        self.hold = hold
        self.rng = np.random.default_rng(seed)
        self._next_switch = -np.inf
        self._u = np.zeros(n)

    def __call__(self, t: float, state: GameState) -> np.ndarray:
        if t >= self._next_switch:
            g = self.rng.standard_normal(self.n)
            self._u = g / np.linalg.norm(g)
            self._next_switch = t + self.hold
        return self._u


def flee_evader(t: float, state: GameState) -> np.ndarray:
    """Unit heading directly away from the nearest pursuer."""
    k = int(np.argmin(state.gaps()))
    d = state.evader - state.pursuers[k]
    return d / np.linalg.norm(d)


def stationary_evader(t: float, state: GameState) -> np.ndarray:
    return np.zeros(state.n)


@dataclass
class Capture:
    time: float
    index: int
    state: GameState


@dataclass
class Trajectory:
    times: np.ndarray
    pursuers: np.ndarray  # (k, m, n)
    evader: np.ndarray  # (k, n)
    u_P: np.ndarray  # (k, m, n), control held from times[j] on
    u_E: np.ndarray  # (k, n)
    params: tuple
    capture: Capture | None

    def __len__(self) -> int:
        return len(self.times)

    def state(self, j: int) -> GameState:
        return GameState(self.pursuers[j], self.evader[j], self.params)

    def gaps(self) -> np.ndarray:
        """Per-sample ``|x_Pi - x_E| - l_i``, shape ``(k, m)``."""
        radii = np.array([p.l for p in self.params])
        return np.linalg.norm(self.pursuers - self.evader[:, None, :], axis=-1) - radii

    def payoff(self, cost: TerminalCost) -> float:
        return float(cost(self.evader[-1]))


def default_dt(state: GameState) -> float:
    return 1e-3 * state.bounding_radius()


def default_t_max(state: GameState) -> float:
    """Twice the capture-time bound.

    Every separation closes faster than ``a_i - 1``, so capture happens by
    time ``M``; ``2 M / (min a - 1)`` alone undershoots that once ``a > 3``.
    """
    M = state.bounding_radius()
    return 2.0 * M * max(1.0, 1.0 / (float(np.min(state.alphas)) - 1.0))


def _step_capture(s0: GameState, s1: GameState) -> tuple[float, int] | None:
    """First fraction of the step at which some pursuer reaches capture range.

    Within a step every relative position moves linearly, so the crossing
    of ``|r(tau)| = l`` solves a quadratic.  A closest approach within the
    event tolerance of ``l`` also counts, which is what makes point capture
    (``l = 0``) detectable at all.
    """
    r0 = s0.pursuers - s0.evader
    a = (s1.pursuers - s1.evader) - r0
    radii = s0.radii
    best = None
    for i in range(s0.m):
        aa = float(a[i] @ a[i])
        ra = float(r0[i] @ a[i])
        c = float(r0[i] @ r0[i]) - radii[i] ** 2
        tol = EVENT_RTOL * (1.0 + np.linalg.norm(r0[i]))
        if aa == 0.0:
            continue
        t_min = min(max(-ra / aa, 0.0), 1.0)
        if np.linalg.norm(r0[i] + t_min * a[i]) > radii[i] + tol:
            continue
        disc = ra * ra - aa * c
        if disc > 0.0:
            q = -ra - np.sqrt(disc)  # smaller root of aa t^2 + 2 ra t + c
            tau = min(max(q / aa, 0.0), t_min)
        else:
            tau = t_min
        if best is None or tau < best[0]:
            best = (tau, i)
    return best


def simulate(state: GameState, pursuer_policy: PursuerPolicy = pursuit_policy,
             evader_policy: EvaderPolicy = stationary_evader, dt: float | None = None,
             t_max: float | None = None, delay_steps: int = 0) -> Trajectory:
    """Forward-Euler rollout until capture or ``t_max``.

    Pursuer policies receive the evader's control from ``delay_steps`` steps
    earlier (zero before the start); with no delay they see the current one.
    A capture inside a step is located exactly along the (linear) step and
    appended as the final sample.
    """
    state.require_interior()
    dt = default_dt(state) if dt is None else float(dt)
    t_max = default_t_max(state) if t_max is None else float(t_max)
    if not dt > 0:
        raise InvalidConfig(f"dt must be positive, got {dt!r}")
    alphas = state.alphas[:, None]
    times, P, E, UP, UE = [0.0], [state.pursuers], [state.evader], [], []
    history: list[np.ndarray] = []
    capture = None
    s, t, k = state, 0.0, 0
    while t < t_max - 1e-12 * max(1.0, t_max):
        h = min(dt, t_max - t)
        u_E = control(evader_policy(t, s))
        history.append(u_E)
        seen = history[-1 - delay_steps] if len(history) > delay_steps else np.zeros(s.n)
        u_P = np.array([control(u) for u in pursuer_policy(t, s, seen)])
        nxt = GameState(s.pursuers + h * alphas * u_P, s.evader + h * u_E, s.params)
        UP.append(u_P)
        UE.append(u_E)
        k += 1
        event = _step_capture(s, nxt)
        if event is None and nxt.is_terminal():
            event = (1.0, int(np.argmin(nxt.gaps())))
        if event is not None:
            tau, idx = event
            t_f = t + tau * h
            hit = GameState((1 - tau) * s.pursuers + tau * nxt.pursuers, (1 - tau) * s.evader + tau * nxt.evader,
                            s.params)
            capture = Capture(t_f, idx, hit)
            if tau > 0.0:
                times.append(t_f)
                P.append(hit.pursuers)
                E.append(hit.evader)
            else:
                UP.pop()
                UE.pop()
            break
        t = times[0] + k * dt if h == dt else t_max
        s = nxt
        times.append(t)
        P.append(s.pursuers)
        E.append(s.evader)
    # the final sample repeats the last control (or holds zero for an empty rollout)
    UP.append(UP[-1] if UP else np.zeros_like(state.pursuers))
    UE.append(UE[-1] if UE else np.zeros(state.n))
    return Trajectory(np.array(times), np.array(P), np.array(E), np.array(UP), np.array(UE), state.params, capture)


def rollout_tol(value: float, lipschitz: float, dt: float) -> float:
    return 1e-2 * (1.0 + abs(value)) + 2.0 * lipschitz * dt


def nesting_tol(scale: float) -> float:
    return 1e-6 * (1.0 + scale)


def _directions(n: int, k: int) -> np.ndarray:
    if n == 2:
        return circle_directions(k)
    if n == 3:
        return fibonacci_sphere(k)
    return boundary_directions(n, k)


@dataclass
class ShrinkageReport:
    max_closing_rate: float
    rate_bound: float
    max_nesting_violation: float
    steps: int

    def ok(self, rate_tol: float, nest_tol: float) -> bool:
        return self.max_closing_rate < self.rate_bound + rate_tol and self.max_nesting_violation <= nest_tol


def _nesting_violation(old: OvalConfig, new: OvalConfig, E: np.ndarray) -> float:
    X = oval_boundary(new, E)
    return float(np.max(margin(X, old)))


def monitor_shrinkage(traj: Trajectory, index: int, directions: int = 360) -> ShrinkageReport:
    """Closing rate of pursuer ``index`` and nesting of its dominance region along ``traj``.

    Nesting is checked between consecutive samples and between the last and
    first sample, on ``directions`` boundary points of the later region.
    """
    prm = traj.params[index]
    bound = 1.0 - prm.alpha
    k = len(traj)
    if k < 2:
        return ShrinkageReport(-np.inf, bound, 0.0, 0)
    sep = np.linalg.norm(traj.pursuers[:, index] - traj.evader, axis=1)
    rates = np.diff(sep) / np.diff(traj.times)
    E = _directions(traj.evader.shape[1], directions)
    cfgs = [OvalConfig(traj.pursuers[j, index], traj.evader[j], prm) for j in range(k)]
    worst = -np.inf
    pairs = [(j, j + 1) for j in range(k - 1)] + [(0, k - 1)]
    for a, b in pairs:
        if cfgs[b].separation <= prm.l:
            continue
        worst = max(worst, _nesting_violation(cfgs[a], cfgs[b], E))
    return ShrinkageReport(float(np.max(rates)), bound, float(worst), k - 1)


@dataclass
class AdvanceReport:
    boundary_residual: float
    nesting_violation: float
    ok: bool

    def __bool__(self) -> bool:
        return self.ok


def epsilon_advance(cfg: OvalConfig, x_hat, eps: float) -> OvalConfig:
    """Both players advance toward ``x_hat``: the pursuer by ``a eps``, the evader by ``eps``."""
    x_hat = np.asarray(x_hat, dtype=float)
    dp = x_hat - cfg.x_P
    de = x_hat - cfg.x_E
    x_E = cfg.x_E + eps * de / np.linalg.norm(de) if eps > 0 else cfg.x_E
    return OvalConfig(cfg.x_P + cfg.alpha * eps * dp / np.linalg.norm(dp), x_E, cfg.params)


def epsilon_advance_check(cfg: OvalConfig, x_hat, eps: float, directions: int = 360,
                          nest_tol: float | None = None) -> AdvanceReport:
    """After an ``eps`` advance toward a boundary point it stays on the boundary and the region nests."""
    cfg.require_valid()
    x_hat = np.asarray(x_hat, dtype=float)
    d = float(margin(x_hat, cfg))
    if abs(d) > cfg.boundary_tol:
        raise NotOnBoundary(f"point {x_hat} has margin {d:.3e}")
    reach = float(np.linalg.norm(x_hat - cfg.x_E))
    if not 0.0 <= eps < reach:
        raise InvalidConfig(f"eps must lie in [0, {reach:.6g}), got {eps!r}")
    new = epsilon_advance(cfg, x_hat, eps)
    residual = abs(float(margin(x_hat, new)))
    if nest_tol is None:
        nest_tol = nesting_tol(float(np.max(np.abs(np.concatenate([cfg.x_P, cfg.x_E, x_hat])))))
    violation = _nesting_violation(cfg, new, _directions(cfg.x_E.shape[0], directions))
    ok = residual <= new.boundary_tol + cfg.boundary_tol and violation <= nest_tol
    return AdvanceReport(residual, violation, ok)
