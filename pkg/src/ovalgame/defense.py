"""Target defense: pursuers win iff the evader's reachable region misses the target interior.

With ``g`` the signed distance of the target, the value ``V(y)`` is the
smallest signed distance the evader can secure, so the pursuers' winning
set is ``{V >= 0}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .costs import SignedDistanceCost, TerminalCost
from .errors import ModeMismatch
from .shapes import TargetShape
from .state import GameState
from .value import SolverOptions, opt_tol, value_of


def _as_cost(target) -> SignedDistanceCost:
    if isinstance(target, SignedDistanceCost):
        return target
    if isinstance(target, TargetShape):
        return SignedDistanceCost(target)
    if isinstance(target, TerminalCost):
        raise ModeMismatch(f"target defense needs a shape, got cost kind {target.kind!r}")
    raise ModeMismatch(f"target defense needs a shape, got {type(target).__name__}")


def winning_indicator(state: GameState, target, opts: SolverOptions | None = None,
                      tol: float | None = None) -> tuple[bool, float]:
    """``(V >= -tol, V)`` with ``g`` the target's signed distance.

    ``tol`` defaults to the solver's optimality tolerance, so a value that
    is zero up to solver accuracy counts as a pursuer win.
    """
    cost = _as_cost(target)
    v = value_of(state, cost, opts)
    if tol is None:
        tol = opt_tol(v, opts)
    return bool(v >= -tol), v


@dataclass
class SweepResult:
    axes: list[np.ndarray]
    points: np.ndarray  # (k, n), first axis varying slowest
    values: np.ndarray  # NaN on terminal cells
    win: list  # True / False, or None on terminal cells

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    def value_grid(self) -> np.ndarray:
        return self.values.reshape(self.shape)

    def terminal_fraction(self) -> float:
        return float(np.mean(np.isnan(self.values)))


def grid_points(axes: Sequence[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sweep_winning_set(template: GameState, target, axes: Sequence, opts: SolverOptions | None = None) -> SweepResult:
    """Winning indicator at every evader position of the grid spanned by ``axes``.

    Pursuers stay at their template positions.  Cells in the terminal set
    report a NaN value and ``None`` for the indicator.
    """
    cost = _as_cost(target)
    axes = [np.asarray(a, dtype=float) for a in axes]
    pts = grid_points(axes)
    values = np.full(len(pts), np.nan)
    win: list = [None] * len(pts)
    for k, x in enumerate(pts):
        s = template.with_positions(evader=x)
        if s.is_terminal():
            continue
        win[k], values[k] = winning_indicator(s, cost, opts)
    return SweepResult(axes, pts, values, win)
