"""Numerical checks that the geometric value behaves as a viscosity solution.

The Hamiltonian of the game is ``H(p) = -sum_i a_i |p_Pi| + |p_E|``.  At
points where ``V`` is differentiable its finite-difference gradient should
zero ``H``; at every point the generalised-gradient samples built from KKT
multipliers should satisfy ``H <= 0`` (also on convex combinations), with
equality for covectors coming from a single optimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .costs import TerminalCost
from .errors import TerminalState
from .state import GameState
from .value import CovectorP, SolverOptions, ValueResult, opt_tol, value_of

SUB_RTOL = 1e-9
SUPER_RTOL = 1e-8
SEGMENT_POINTS = 11


@dataclass
class PdeOptions:
    step_rtol: float = 1e-4
    pde_tol: float = 1e-2
    kink_factor: float = 50.0
    solver: SolverOptions = field(default_factory=lambda: SolverOptions(multipliers=False))

    def step(self, state: GameState) -> float:
        return self.step_rtol * (1.0 + float(np.max(np.abs(state.flat()))))


def hamiltonian(p: CovectorP, alphas) -> float:
    alphas = np.asarray(alphas, dtype=float)
    return float(-np.sum(alphas * np.linalg.norm(p.p_P, axis=1)) + np.linalg.norm(p.p_E))


def fd_gradient(value_fn: Callable[[GameState], float], state: GameState, step: float):
    """Central-difference gradient of ``value_fn`` over all ``(m+1) n`` coordinates.

    Returns ``(covector, score)`` where ``score`` is the largest disagreement
    between forward and backward difference quotients.  Raises
    :class:`TerminalState` if a probe could reach the terminal set.
    """
    if state.capture_margin() <= 2.0 * step:
        raise TerminalState(
            f"capture margin {state.capture_margin():.3e} is within 2*step={2 * step:.3e} of the terminal set"
        )
    y = state.flat()
    v0 = value_fn(state)
    grad = np.empty_like(y)
    score = 0.0
    for j in range(y.size):
        z = y.copy()
        z[j] += step
        vp = value_fn(state.from_flat(z))
        z[j] -= 2.0 * step
        vm = value_fn(state.from_flat(z))
        grad[j] = (vp - vm) / (2.0 * step)
        score = max(score, abs((vp - v0) - (v0 - vm)) / step)
    return CovectorP.from_flat(grad, state.m, state.n), score


@dataclass
class PdeCheckReport:
    state: GameState
    fd_gradient: CovectorP
    hamiltonian_residual: float
    differentiability_score: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "state": self.state.flat().tolist(),
            "fd_gradient": self.fd_gradient.to_dict(),
            "hamiltonian_residual": self.hamiltonian_residual,
            "differentiability_score": self.differentiability_score,
            "verdict": self.verdict,
        }


def check_pde_at(state: GameState, cost: TerminalCost, opts: PdeOptions | None = None) -> PdeCheckReport:
    """HJI residual at ``state`` from a finite-difference gradient of ``V``.

    The verdict is ``skip`` when the one-sided differences disagree by more
    than the kink threshold, else ``pass`` or ``fail`` against ``pde_tol``.
    """
    opts = opts or PdeOptions()
    state.require_interior()
    h = opts.step(state)
    p, score = fd_gradient(lambda s: value_of(s, cost, opts.solver), state, h)
    res = hamiltonian(p, state.alphas)
    if score > opts.kink_factor * h:
        verdict = "skip"
    else:
        verdict = "pass" if abs(res) <= opts.pde_tol else "fail"
    return PdeCheckReport(state, p, res, score, verdict)


def sample_interior_states(template: GameState, count: int, seed: int = 0, min_margin: float = 0.0,
                           spread: float | None = None) -> list[GameState]:
    """Seeded random states near ``template`` whose capture margin exceeds ``min_margin``.

    Every agent is displaced uniformly within a cube of half-width ``spread``
    (default: a quarter of the largest pursuer-evader separation).
    """
    rng = np.random.default_rng(seed)
    if spread is None:
        spread = 0.25 * float(np.max(np.linalg.norm(template.pursuers - template.evader, axis=1)))
    out: list[GameState] = []
    y0 = template.flat()
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 1000 * max(count, 1):
            raise RuntimeError("could not draw enough interior states; reduce spread")
        s = template.from_flat(y0 + rng.uniform(-spread, spread, size=y0.shape))
        if s.capture_margin() > min_margin:
            out.append(s)
    return out


def subsolution_residuals(samples: list[CovectorP], alphas) -> np.ndarray:
    """``H(p) - tol(p)`` over the samples and their pairwise segment grids."""
    out = []
    ts = np.linspace(0.0, 1.0, SEGMENT_POINTS)
    for a in samples:
        out.append(hamiltonian(a, alphas) - SUB_RTOL * (1.0 + a.norm()))
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            for t in ts[1:-1]:
                c = samples[i].combine(samples[j], t)
                out.append(hamiltonian(c, alphas) - SUB_RTOL * (1.0 + c.norm()))
    return np.array(out)


def check_subsolution_samples(result: ValueResult, alphas) -> bool:
    return bool(np.all(subsolution_residuals(result.gradient_samples, alphas) <= 0.0))


def supersolution_residuals(result: ValueResult, alphas) -> np.ndarray:
    """``|H(p)| - tol(p)`` for every covector built from one optimum."""
    return np.array(
        [abs(hamiltonian(p, alphas)) - SUPER_RTOL * (1.0 + p.norm()) for p in result.gradient_samples]
    )


def check_supersolution_equality(result: ValueResult, alphas) -> bool:
    return bool(np.all(supersolution_residuals(result, alphas) <= 0.0))


def boundary_condition_gap(state: GameState, cost: TerminalCost, opts: SolverOptions | None = None) -> float:
    """``|V(y) - g(x_E)| - (L M(y) + opt_tol)``; nonpositive when the boundary limit holds."""
    v = value_of(state, cost, opts)
    bound = cost.lipschitz_bound * state.bounding_radius() + opt_tol(v, opts)
    return abs(v - float(cost(state.evader))) - bound


def segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance from ``p`` to the segment ``[a, b]``."""
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0.0 else float(np.clip((p - a) @ d / dd, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * d)))
