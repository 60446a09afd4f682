"""Cartesian-oval dominance regions.

For a pursuer at ``x_P`` with speed ratio ``alpha`` and capture radius ``l``
and an evader at ``x_E``, the margin

    d(x) = -|x - x_P| + alpha * |x - x_E| + l

is negative on the evader's open dominance region, zero on the oval that
bounds it and positive outside.  Every region is strictly convex and
star-shaped about ``x_E``; the ray from ``x_E`` along a unit vector ``e``
leaves it at distance ``rho(e)`` given in closed form.

All point arguments broadcast: ``x`` may be a single point of shape ``(n,)``
or a stack of shape ``(..., n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, NotOnBoundary

BOUNDARY_RTOL = 1e-8
UNIT_TOL = 1e-6


@dataclass(frozen=True)
class PursuerParams:
    alpha: float
    l: float = 0.0

    def __post_init__(self):
        alpha, l = float(self.alpha), float(self.l)
        if not np.isfinite(alpha) or alpha <= 1.0:
            raise InvalidConfig(f"speed ratio alpha must be > 1, got {self.alpha!r}")
        if not np.isfinite(l) or l < 0.0:
            raise InvalidConfig(f"capture radius must be >= 0, got {self.l!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "l", l)


@dataclass(frozen=True, eq=False)
class OvalConfig:
    """One pursuer/evader pair defining a dominance region."""

    x_P: np.ndarray
    x_E: np.ndarray
    params: PursuerParams

    def __post_init__(self):
        x_P = np.asarray(self.x_P, dtype=float)
        x_E = np.asarray(self.x_E, dtype=float)
        if x_P.ndim != 1 or x_P.shape != x_E.shape:
            raise InvalidConfig(f"positions must be matching 1-d vectors, got {x_P.shape} and {x_E.shape}")
        object.__setattr__(self, "x_P", x_P)
        object.__setattr__(self, "x_E", x_E)

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def l(self) -> float:
        return self.params.l

    @property
    def separation(self) -> float:
        return float(np.linalg.norm(self.x_P - self.x_E))

    @property
    def boundary_tol(self) -> float:
        return BOUNDARY_RTOL * (1.0 + self.separation)

    def require_valid(self) -> None:
        if not self.separation > self.l:
            raise InvalidConfig(
                f"pursuer-evader distance {self.separation:.6g} must exceed capture radius {self.l:.6g}"
            )


def unit(e, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``e`` as a unit vector, renormalising only tiny drift."""
    e = np.asarray(e, dtype=float)
    norm = np.linalg.norm(e, axis=-1, keepdims=True)
    if np.any(np.abs(norm - 1.0) > tol):
        raise InvalidConfig(f"direction must be a unit vector (|e| = {np.ravel(norm)[0]:.9g})")
    return e / norm


def margin(x, cfg: OvalConfig):
    x = np.asarray(x, dtype=float)
    return (
        -np.linalg.norm(x - cfg.x_P, axis=-1)
        + cfg.alpha * np.linalg.norm(x - cfg.x_E, axis=-1)
        + cfg.l
    )


def smooth_margins(x, cfg: OvalConfig):
    """Polynomial surrogates ``(d_hat, d_bar)`` of the margin.

    With ``A = |x-x_P|^2 - alpha^2 |x-x_E|^2 - l^2``::

        d_hat = -A^2 + 4 alpha^2 l^2 |x-x_E|^2
        d_bar = -A

    For ``l > 0`` the region ``{d <= 0}`` equals ``{d_hat <= 0, d_bar <= 0}``
    and its boundary is ``{d_hat = 0, d_bar <= 0}``.  At ``l = 0`` the quartic
    loses constraint qualification, so ``d_hat`` is replaced by
    ``-|x-x_P|^2 + alpha^2 |x-x_E|^2`` (which then coincides with ``d_bar``).
    """
    x = np.asarray(x, dtype=float)
    a2 = cfg.alpha**2
    rp2 = np.sum((x - cfg.x_P) ** 2, axis=-1)
    re2 = np.sum((x - cfg.x_E) ** 2, axis=-1)
    A = rp2 - a2 * re2 - cfg.l**2
    if cfg.l == 0.0:
        return -A, -A
    return -(A**2) + 4.0 * a2 * cfg.l**2 * re2, -A


def smooth_margin_gradients(x, cfg: OvalConfig):
    """Analytic partials of ``d_hat`` with respect to ``x``, ``x_P`` and ``x_E``."""
    x = np.asarray(x, dtype=float)
    a2 = cfg.alpha**2
    dp = x - cfg.x_P
    de = x - cfg.x_E
    if cfg.l == 0.0:
        return -2.0 * dp + 2.0 * a2 * de, 2.0 * dp, -2.0 * a2 * de
    A = (np.sum(dp**2, axis=-1) - a2 * np.sum(de**2, axis=-1) - cfg.l**2)[..., None]
    l2 = cfg.l**2
    grad_x = -2.0 * A * (2.0 * dp - 2.0 * a2 * de) + 8.0 * a2 * l2 * de
    grad_xP = 4.0 * A * dp
    grad_xE = -4.0 * a2 * (A + 2.0 * l2) * de
    return grad_x, grad_xP, grad_xE


def rho_many(x_P, x_E, alpha, l, E) -> np.ndarray:
    """Vectorised ray exit distances.

    ``x_P`` has shape ``(m, n)``, ``alpha`` and ``l`` shape ``(m,)``, ``E``
    shape ``(k, n)`` of unit rows.  Returns an ``(m, k)`` array.  Callers are
    responsible for validity (``|x_P - x_E| > l``).
    """
    x_P = np.atleast_2d(x_P)
    alpha = np.asarray(alpha, dtype=float)[:, None]
    l = np.asarray(l, dtype=float)[:, None]
    rel = x_P - x_E
    b = alpha * l + rel @ np.atleast_2d(E).T
    c = (alpha**2 - 1.0) * (np.sum(rel**2, axis=1)[:, None] - l**2)
    root = np.sqrt(b * b + c)
    # (-b + root) / (alpha^2 - 1) without cancellation when b > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = c / (b + root) / (alpha**2 - 1.0)
    direct = (root - b) / (alpha**2 - 1.0)
    return np.where(b > 0.0, stable, direct)


def rho(cfg: OvalConfig, e) -> float:
    cfg.require_valid()
    e = unit(e)
    out = rho_many(cfg.x_P[None, :], cfg.x_E, [cfg.alpha], [cfg.l], e[None, :])
    return float(out[0, 0])


def boundary_point(cfg: OvalConfig, e) -> np.ndarray:
    e = unit(e)
    return cfg.x_E + rho(cfg, e) * e


def region_contains(x, cfgs: Sequence[OvalConfig], tol: float | None = None) -> bool:
    """True iff ``x`` lies in every dominance region.

    Points within the boundary tolerance of an oval count as contained.
    """
    for cfg in cfgs:
        t = cfg.boundary_tol if tol is None else tol
        if margin(x, cfg) > t:
            return False
    return True


def star_rho(cfgs: Sequence[OvalConfig], e) -> tuple[float, int]:
    """Exit distance of the ray along ``e`` from the intersected region.

    Returns ``(rho_min, index)``; ties go to the smallest pursuer index.
    """
    e = unit(e)
    rhos = [rho(cfg, e) for cfg in cfgs]
    k = int(np.argmin(rhos))
    return float(rhos[k]), k


def bounding_radius(cfgs: Sequence[OvalConfig]) -> float:
    """Radius ``M`` of a ball about ``x_E`` containing the intersected region."""
    radii = []
    for cfg in cfgs:
        cfg.require_valid()
        radii.append((cfg.separation - cfg.l) / (cfg.alpha - 1.0))
    return float(min(radii))


def _cosines(x1, x2, centre):
    v1 = np.asarray(x1, dtype=float) - centre
    v2 = np.asarray(x2, dtype=float) - centre
    num = np.sum(v1 * v2, axis=-1)
    den = np.linalg.norm(v1, axis=-1) * np.linalg.norm(v2, axis=-1)
    return num / den


def angle_gaps(x1, x2, cfg: OvalConfig) -> np.ndarray:
    """Unchecked, vectorised form of :func:`angle_gap`."""
    return _cosines(x1, x2, cfg.x_P) - _cosines(x1, x2, cfg.x_E)


def angle_gap(x1, x2, cfg: OvalConfig) -> float:
    """Cosine of the angle subtended at the pursuer minus that at the evader.

    Both points must lie on the oval.  The result is nonnegative and vanishes
    only when the points coincide.
    """
    for x in (x1, x2):
        d = float(margin(x, cfg))
        if abs(d) > cfg.boundary_tol:
            raise NotOnBoundary(f"point {np.asarray(x)} has margin {d:.3e}")
    return float(angle_gaps(x1, x2, cfg))


def circle_directions(k: int, offset: float = 0.0) -> np.ndarray:
    theta = offset + 2.0 * np.pi * np.arange(k) / k
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def sphere_directions(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` directions uniform on the unit sphere in ``R^n`` (normalised Gaussians)."""
    g = rng.standard_normal((k, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def boundary_directions(n: int, k: int, seed: int = 0) -> np.ndarray:
    """Deterministic direction set: evenly spaced in the plane, seeded random otherwise."""
    if n == 2:
        return circle_directions(k)
    return sphere_directions(n, k, np.random.default_rng(seed))


def oval_boundary(cfg: OvalConfig, E) -> np.ndarray:
    """Boundary points ``x_E + rho(e) e`` for each row of ``E``."""
    cfg.require_valid()
    E = np.atleast_2d(E)
    r = rho_many(cfg.x_P[None, :], cfg.x_E, [cfg.alpha], [cfg.l], E)[0]
    return cfg.x_E + r[:, None] * E
