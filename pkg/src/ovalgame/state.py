"""Joint game state ``y = (x_P1, ..., x_Pm, x_E)``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, TerminalState
from .geometry import BOUNDARY_RTOL, OvalConfig, PursuerParams, rho_many


@dataclass(frozen=True, eq=False)
class GameState:
    pursuers: np.ndarray
    evader: np.ndarray
    params: tuple[PursuerParams, ...]

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.pursuers, dtype=float))
        E = np.asarray(self.evader, dtype=float)
        params = tuple(self.params)
        if E.ndim != 1 or P.shape[1] != E.shape[0]:
            raise InvalidConfig(f"pursuer positions {P.shape} do not match evader position {E.shape}")
        if len(params) != P.shape[0]:
            raise InvalidConfig(f"{P.shape[0]} pursuer positions but {len(params)} parameter sets")
        if E.shape[0] < 2:
            raise InvalidConfig("dimension must be at least 2")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(E))):
            raise InvalidConfig("positions must be finite")
        object.__setattr__(self, "pursuers", P)
        object.__setattr__(self, "evader", E)
        object.__setattr__(self, "params", params)

    @classmethod
    def build(cls, pursuers, evader, alphas, radii) -> "GameState":
        params = tuple(PursuerParams(a, l) for a, l in zip(alphas, radii, strict=True))
        return cls(pursuers, evader, params)

    @property
    def m(self) -> int:
        return self.pursuers.shape[0]

    @property
    def n(self) -> int:
        return self.evader.shape[0]

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.params])

    @property
    def radii(self) -> np.ndarray:
        return np.array([p.l for p in self.params])

    def configs(self) -> list[OvalConfig]:
        return [OvalConfig(xp, self.evader, p) for xp, p in zip(self.pursuers, self.params)]

    def gaps(self) -> np.ndarray:
        """Per-pursuer ``|x_Pi - x_E| - l_i``."""
        return np.linalg.norm(self.pursuers - self.evader, axis=1) - self.radii

    def capture_margin(self) -> float:
        return float(np.min(self.gaps()))

    @property
    def classification(self) -> str:
        return "interior" if self.capture_margin() > 0.0 else "terminal"

    def is_terminal(self) -> bool:
        return self.classification == "terminal"

    def require_interior(self) -> None:
        if self.is_terminal():
            raise TerminalState(f"state is terminal (capture margin {self.capture_margin():.6g})")

    def bounding_radius(self) -> float:
        self.require_interior()
        return float(np.min(self.gaps() / (self.alphas - 1.0)))

    def scale(self) -> float:
        return float(np.max(np.abs(self.flat())))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.pursuers.ravel(), self.evader])

    def from_flat(self, y) -> "GameState":
        y = np.asarray(y, dtype=float)
        m, n = self.m, self.n
        return GameState(y[: m * n].reshape(m, n), y[m * n :], self.params)

    def with_positions(self, pursuers=None, evader=None) -> "GameState":
        return GameState(
            self.pursuers if pursuers is None else pursuers,
            self.evader if evader is None else evader,
            self.params,
        )

    def moved(self, rotation, shift) -> "GameState":
        R = np.asarray(rotation, dtype=float)
        t = np.asarray(shift, dtype=float)
        return GameState(self.pursuers @ R.T + t, R @ self.evader + t, self.params)

    def add_pursuer(self, position, params: PursuerParams) -> "GameState":
        return GameState(np.vstack([self.pursuers, position]), self.evader, self.params + (params,))

    def star_rho(self, E) -> tuple[np.ndarray, np.ndarray]:
        """Exit distances of the intersected region along rows of ``E`` and the argmin pursuer."""
        R = rho_many(self.pursuers, self.evader, self.alphas, self.radii, E)
        idx = np.argmin(R, axis=0)
        return R[idx, np.arange(R.shape[1])], idx

    def star_boundary(self, E) -> np.ndarray:
        E = np.atleast_2d(E)
        r, _ = self.star_rho(E)
        return self.evader + r[:, None] * E

    def margins(self, x) -> np.ndarray:
        """Margins of every pursuer at ``x``; shape ``(m,)`` or ``(m, k)``."""
        x = np.asarray(x, dtype=float)
        out = []
        for xp, p in zip(self.pursuers, self.params):
            out.append(
                -np.linalg.norm(x - xp, axis=-1) + p.alpha * np.linalg.norm(x - self.evader, axis=-1) + p.l
            )
        return np.array(out)

    def boundary_tols(self) -> np.ndarray:
        return BOUNDARY_RTOL * (1.0 + np.linalg.norm(self.pursuers - self.evader, axis=1))

    def contains(self, x) -> bool:
        return bool(np.all(self.margins(x) <= self.boundary_tols()))
