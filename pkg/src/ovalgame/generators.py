"""Seeded random game instances for property tests and experiment scripts."""
from __future__ import annotations

import numpy as np

from .costs import Affine, PointDistance, SignedDistanceCost, TerminalCost, WeightedMinDistance
from .geometry import PursuerParams
from .shapes import Disk, Union
from .state import GameState

COST_FAMILIES = ("point", "min-distance", "affine", "disk", "two-disks")


def random_direction(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal(n)
    return g / np.linalg.norm(g)


def random_state(rng: np.random.Generator, n: int = 2, m: int = 1, alpha=(1.3, 4.0), radius=(0.0, 0.5),
                 distance=(0.8, 2.5)) -> GameState:
    """Evader at the origin, pursuers at random bearings and distances.

    Every pursuer starts at least ``0.2`` beyond its capture radius.
    """
    evader = np.zeros(n)
    pursuers, params = [], []
    for _ in range(m):
        a = rng.uniform(*alpha)
        l = rng.uniform(*radius)
        r = max(rng.uniform(*distance), l + 0.2)
        pursuers.append(r * random_direction(rng, n))
        params.append(PursuerParams(a, l))
    return GameState(np.array(pursuers), evader, tuple(params))


def random_cost(rng: np.random.Generator, n: int, family: str) -> TerminalCost:
    """A cost whose interesting features lie a few units from the origin."""
    if family == "point":
        return PointDistance(rng.uniform(2.0, 8.0) * random_direction(rng, n))
    if family == "min-distance":
        k = int(rng.integers(2, 4))
        anchors = np.array([rng.uniform(2.0, 8.0) * random_direction(rng, n) for _ in range(k)])
        return WeightedMinDistance(anchors, rng.uniform(0.5, 1.5, k), rng.uniform(-1.0, 1.0, k))
    if family == "affine":
        return Affine(rng.uniform(0.2, 2.0) * random_direction(rng, n), rng.uniform(-1.0, 1.0))
    if family == "disk":
        return SignedDistanceCost(Disk(rng.uniform(1.5, 5.0) * random_direction(rng, n), rng.uniform(0.3, 1.5)))
    if family == "two-disks":
        members = tuple(
            Disk(rng.uniform(1.5, 5.0) * random_direction(rng, n), rng.uniform(0.3, 1.5)) for _ in range(2)
        )
        return SignedDistanceCost(Union(members))
    raise ValueError(f"unknown cost family {family!r}")


def random_game(rng: np.random.Generator, n: int = 2, m: int | None = None, family: str | None = None):
    m = int(rng.integers(1, 4)) if m is None else m
    family = COST_FAMILIES[int(rng.integers(len(COST_FAMILIES)))] if family is None else family
    return random_state(rng, n, m), random_cost(rng, n, family)
