"""Target shapes and their signed distance functions.

Signed distance is negative inside the shape, zero on its boundary and
positive outside; every shape here is 1-Lipschitz.  Unions use the minimum
of member distances, which is exact outside and on the boundary but only a
lower bound on depth where members overlap.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from .errors import InvalidConfig

# relative tie tolerance for nondifferentiability detection
KINK_TOL = 1e-12


class TargetShape:
    kind: str = ""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def signed_distance(self, x):
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray | None:
        """Classical gradient of the signed distance, or None on its kink set."""
        raise NotImplementedError

    def convex_parts(self) -> list["TargetShape"]:
        return [self]

    def deepest_point(self) -> np.ndarray:
        """A minimiser of the signed distance (only meaningful for convex shapes)."""
        raise NotImplementedError

    def moved(self, rotation, shift) -> "TargetShape":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def contains(self, x) -> bool:
        return bool(self.signed_distance(x) <= 0.0)


def _vec(x, name="point"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise InvalidConfig(f"{name} must be a finite vector")
    return v


@dataclass(frozen=True, eq=False)
class Disk(TargetShape):
    center: np.ndarray
    radius: float
    kind = "disk"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if not self.radius > 0:
            raise InvalidConfig(f"disk radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def signed_distance(self, x):
        return np.linalg.norm(np.asarray(x, dtype=float) - self.center, axis=-1) - self.radius

    def gradient(self, x):
        v = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(v)
        if r <= KINK_TOL * (1.0 + self.radius):
            return None
        return v / r

    def deepest_point(self):
        return self.center.copy()

    def moved(self, rotation, shift):
        return Disk(np.asarray(rotation) @ self.center + shift, self.radius)

    def to_dict(self):
        return {"kind": "disk", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Box(TargetShape):
    lower: np.ndarray
    upper: np.ndarray
    kind = "box"

    def __post_init__(self):
        lo, hi = _vec(self.lower, "lower"), _vec(self.upper, "upper")
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise InvalidConfig("box needs upper > lower componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.shape[0]

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def half(self):
        return 0.5 * (self.upper - self.lower)

    def signed_distance(self, x):
        q = np.abs(np.asarray(x, dtype=float) - self.center) - self.half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    def gradient(self, x):
        v = np.asarray(x, dtype=float) - self.center
        q = np.abs(v) - self.half
        tol = KINK_TOL * (1.0 + np.max(self.half))
        if np.max(q) > tol:
            w = np.maximum(q, 0.0) * np.sign(v)
            return w / np.linalg.norm(w)
        order = np.argsort(q)
        j = order[-1]
        if len(q) > 1 and q[j] - q[order[-2]] <= tol:
            return None
        if abs(v[j]) <= tol:
            return None
        g = np.zeros_like(v)
        g[j] = np.sign(v[j])
        return g

    def deepest_point(self):
        return self.center

    def moved(self, rotation, shift):
        R = np.asarray(rotation, dtype=float)
        if np.allclose(R, np.eye(self.dim)):
            return Box(self.lower + shift, self.upper + shift)
        if self.dim != 2:
            raise InvalidConfig("rotated boxes are only representable in the plane")
        lo, hi = self.lower, self.upper
        corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        return Polygon(corners @ R.T + shift)

    def to_dict(self):
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True, eq=False)
class Polygon(TargetShape):
    """Convex polygon in the plane; vertices in either orientation."""

    vertices: np.ndarray
    kind = "polygon"

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3 or not np.all(np.isfinite(V)):
            raise InvalidConfig("polygon needs at least 3 finite planar vertices")
        edges = np.roll(V, -1, axis=0) - V
        turns = _cross(edges, np.roll(edges, -1, axis=0))
        if np.all(turns <= 0):
            V = V[::-1].copy()
            edges = np.roll(V, -1, axis=0) - V
            turns = _cross(edges, np.roll(edges, -1, axis=0))
        if not np.all(turns > 0):
            raise InvalidConfig("polygon must be strictly convex with distinct vertices")
        object.__setattr__(self, "vertices", V)

    @property
    def dim(self):
        return 2

    def _edge_geometry(self, x):
        """Closest points on every edge: returns (distances, closest) with shapes (..., k), (..., k, 2)."""
        A = self.vertices
        B = np.roll(A, -1, axis=0)
        D = B - A
        x = np.asarray(x, dtype=float)[..., None, :]
        t = np.clip(np.sum((x - A) * D, axis=-1) / np.sum(D * D, axis=-1), 0.0, 1.0)
        C = A + t[..., None] * D
        return np.linalg.norm(x - C, axis=-1), C

    def winding_number(self, x):
        A = self.vertices
        B = np.roll(A, -1, axis=0)
        x = np.asarray(x, dtype=float)[..., None, :]
        ya, yb = A[:, 1], B[:, 1]
        side = _cross(B - A, x - A)
        up = (ya <= x[..., 1]) & (yb > x[..., 1]) & (side > 0)
        down = (ya > x[..., 1]) & (yb <= x[..., 1]) & (side < 0)
        return np.sum(up, axis=-1) - np.sum(down, axis=-1)

    def signed_distance(self, x):
        dist, _ = self._edge_geometry(x)
        d = np.min(dist, axis=-1)
        return np.where(self.winding_number(x) != 0, -d, d)

    def gradient(self, x):
        x = _vec(x)
        dist, C = self._edge_geometry(x)
        scale = 1.0 + np.max(np.abs(self.vertices))
        tol = KINK_TOL * scale
        k = int(np.argmin(dist))
        near = np.flatnonzero(dist <= dist[k] + tol)
        if np.max(np.linalg.norm(C[near] - C[k], axis=-1)) > tol:
            return None
        if dist[k] <= tol:
            # on the boundary: outward normal unless at a vertex
            if len(near) > 1:
                return None
            e = np.roll(self.vertices, -1, axis=0)[k] - self.vertices[k]
            nrm = np.array([e[1], -e[0]])
            return nrm / np.linalg.norm(nrm)
        g = (x - C[k]) / dist[k]
        return -g if self.winding_number(x) != 0 else g

    @cached_property
    def _chebyshev_center(self):
        A = self.vertices
        E = np.roll(A, -1, axis=0) - A
        N = np.stack([E[:, 1], -E[:, 0]], axis=1)
        N /= np.linalg.norm(N, axis=1, keepdims=True)
        b = np.sum(N * A, axis=1)
        # min t  s.t.  N x - b <= t
        res = linprog(
            c=[0.0, 0.0, 1.0],
            A_ub=np.hstack([N, -np.ones((len(b), 1))]),
            b_ub=b,
            bounds=[(None, None)] * 3,
            method="highs",
        )
        if not res.success:
            raise InvalidConfig(f"could not locate polygon centre: {res.message}")
        return res.x[:2]

    def deepest_point(self):
        return self._chebyshev_center.copy()

    def moved(self, rotation, shift):
        return Polygon(self.vertices @ np.asarray(rotation, dtype=float).T + shift)

    def to_dict(self):
        return {"kind": "polygon", "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False)
class Union(TargetShape):
    members: tuple
    kind = "union"

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidConfig("union needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise InvalidConfig("union members must share a dimension")
        object.__setattr__(self, "members", members)

    @property
    def dim(self):
        return self.members[0].dim

    def signed_distance(self, x):
        return np.min([m.signed_distance(x) for m in self.members], axis=0)

    def gradient(self, x):
        vals = np.array([float(m.signed_distance(x)) for m in self.members])
        k = int(np.argmin(vals))
        ties = np.flatnonzero(vals <= vals[k] + KINK_TOL * (1.0 + abs(vals[k])))
        if len(ties) > 1:
            return None
        return self.members[k].gradient(x)

    def convex_parts(self):
        parts = []
        for m in self.members:
            parts.extend(m.convex_parts())
        return parts

    def deepest_point(self):
        raise InvalidConfig("a union has no single deepest point; use convex_parts()")

    def moved(self, rotation, shift):
        return Union(tuple(m.moved(rotation, shift) for m in self.members))

    def to_dict(self):
        return {"kind": "union", "members": [m.to_dict() for m in self.members]}


SHAPE_KINDS = ("disk", "box", "polygon", "union")


def signed_distance(shape: TargetShape, x):
    return shape.signed_distance(x)
