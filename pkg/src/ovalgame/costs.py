"""Built-in terminal costs ``g: R^n -> R``.

Every built-in cost is the pointwise minimum of convex *pieces*.  The value
solver relies on this: a convex piece minimised over the (convex) dominance
region attains its minimum either at the piece's own unconstrained minimiser
or on the region boundary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .shapes import KINK_TOL, TargetShape


class TerminalCost:
    kind: str = ""

    @property
    def lipschitz_bound(self) -> float:
        raise NotImplementedError

    def __call__(self, x):
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray | None:
        """Classical gradient at ``x``, or None where the cost has a kink."""
        raise NotImplementedError

    def pieces(self) -> list["TerminalCost"]:
        return [self]

    def unconstrained_argmin(self, hint=None) -> np.ndarray | None:
        """A global minimiser of this (convex) piece, or None if unbounded below."""
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False

    def moved(self, rotation, shift) -> "TerminalCost":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def cost_gradient_sample(g: TerminalCost, x) -> np.ndarray | None:
    return g.gradient(np.asarray(x, dtype=float))


def eval_cost(g: TerminalCost, x) -> float:
    return float(g(np.asarray(x, dtype=float)))


def clarke_samples(g: TerminalCost, x, probe: float = 1e-6) -> list[np.ndarray]:
    """Gradients at and around ``x`` approximating the limiting gradients there.

    The classical gradient is returned alone when it exists; otherwise the
    gradients at ``x +- probe * e_j`` are collected (duplicates removed).
    """
    x = np.asarray(x, dtype=float)
    grad = g.gradient(x)
    if grad is not None:
        return [grad]
    step = probe * (1.0 + np.max(np.abs(x)))
    found: list[np.ndarray] = []
    for j in range(x.shape[0]):
        for sign in (1.0, -1.0):
            z = x.copy()
            z[j] += sign * step
            q = g.gradient(z)
            if q is None:
                continue
            if not any(np.linalg.norm(q - f) <= 1e-9 * (1.0 + np.linalg.norm(f)) for f in found):
                found.append(q)
    return found


@dataclass(frozen=True, eq=False)
class PointDistance(TerminalCost):
    """``weight * |x - anchor| + offset``."""

    anchor: np.ndarray
    weight: float = 1.0
    offset: float = 0.0
    kind = "point-distance"

    def __post_init__(self):
        a = np.asarray(self.anchor, dtype=float)
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise InvalidConfig("anchor must be a finite vector")
        if not (np.isfinite(self.weight) and self.weight >= 0):
            raise InvalidConfig(f"weight must be >= 0, got {self.weight!r}")
        object.__setattr__(self, "anchor", a)
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def lipschitz_bound(self):
        return self.weight

    @property
    def is_constant(self):
        return self.weight == 0.0

    def __call__(self, x):
        return self.weight * np.linalg.norm(np.asarray(x, dtype=float) - self.anchor, axis=-1) + self.offset

    def gradient(self, x):
        v = np.asarray(x, dtype=float) - self.anchor
        r = np.linalg.norm(v)
        if r <= KINK_TOL * (1.0 + np.linalg.norm(self.anchor)):
            return None if self.weight > 0 else np.zeros_like(v)
        return self.weight * v / r

    def unconstrained_argmin(self, hint=None):
        return self.anchor.copy()

    def moved(self, rotation, shift):
        return PointDistance(np.asarray(rotation) @ self.anchor + shift, self.weight, self.offset)

    def to_dict(self):
        return {"kind": self.kind, "anchor": self.anchor.tolist(), "weight": self.weight, "offset": self.offset}


@dataclass(frozen=True, eq=False)
class WeightedMinDistance(TerminalCost):
    """``min_k (w_k |x - a_k| + b_k)``; nonconvex once two anchors differ."""

    anchors: np.ndarray
    weights: np.ndarray | None = None
    offsets: np.ndarray | None = None
    kind = "weighted-min-distance"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        k = A.shape[0]
        w = np.ones(k) if self.weights is None else np.asarray(self.weights, dtype=float)
        b = np.zeros(k) if self.offsets is None else np.asarray(self.offsets, dtype=float)
        if w.shape != (k,) or b.shape != (k,):
            raise InvalidConfig("weights and offsets must have one entry per anchor")
        if np.any(w < 0) or not (np.all(np.isfinite(A)) and np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise InvalidConfig("weights must be finite and nonnegative")
        object.__setattr__(self, "anchors", A)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "offsets", b)

    @property
    def lipschitz_bound(self):
        return float(np.max(self.weights))

    def _values(self, x):
        x = np.asarray(x, dtype=float)
        d = np.linalg.norm(x[..., None, :] - self.anchors, axis=-1)
        return self.weights * d + self.offsets

    def __call__(self, x):
        return np.min(self._values(x), axis=-1)

    def gradient(self, x):
        vals = self._values(x)
        k = int(np.argmin(vals))
        if np.sum(vals <= vals[k] + KINK_TOL * (1.0 + abs(vals[k]))) > 1:
            return None
        return self.pieces()[k].gradient(x)

    def pieces(self):
        return [PointDistance(a, w, b) for a, w, b in zip(self.anchors, self.weights, self.offsets)]

    def moved(self, rotation, shift):
        R = np.asarray(rotation, dtype=float)
        return WeightedMinDistance(self.anchors @ R.T + shift, self.weights, self.offsets)

    def to_dict(self):
        return {
            "kind": self.kind,
            "anchors": self.anchors.tolist(),
            "weights": self.weights.tolist(),
            "offsets": self.offsets.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Affine(TerminalCost):
    """``c . x + b``; constant when ``c = 0``."""

    coef: np.ndarray
    offset: float = 0.0
    kind = "fixed-affine"

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise InvalidConfig("affine coefficient must be a finite vector")
        object.__setattr__(self, "coef", c)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def lipschitz_bound(self):
        return float(np.linalg.norm(self.coef))

    @property
    def is_constant(self):
        return not np.any(self.coef)

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.coef + self.offset

    def gradient(self, x):
        return self.coef.copy()

    def unconstrained_argmin(self, hint=None):
        if self.is_constant:
            return None if hint is None else np.asarray(hint, dtype=float)
        return None

    def moved(self, rotation, shift):
        R = np.asarray(rotation, dtype=float)
        c = R @ self.coef
        return Affine(c, self.offset - c @ shift)

    def to_dict(self):
        return {"kind": self.kind, "coef": self.coef.tolist(), "offset": self.offset}


def constant(value: float, n: int) -> Affine:
    return Affine(np.zeros(n), value)


@dataclass(frozen=True, eq=False)
class SignedDistanceCost(TerminalCost):
    """Signed distance to a target shape (negative inside)."""

    shape: TargetShape
    kind = "signed-distance"

    @property
    def lipschitz_bound(self):
        return 1.0

    def __call__(self, x):
        return self.shape.signed_distance(x)

    def gradient(self, x):
        return self.shape.gradient(x)

    def pieces(self):
        return [SignedDistanceCost(p) for p in self.shape.convex_parts()]

    def unconstrained_argmin(self, hint=None):
        return self.shape.deepest_point()

    def moved(self, rotation, shift):
        return SignedDistanceCost(self.shape.moved(rotation, shift))

    def to_dict(self):
        return {"kind": self.kind, "shape": self.shape.to_dict()}


COST_KINDS = ("point-distance", "weighted-min-distance", "fixed-affine", "signed-distance")
