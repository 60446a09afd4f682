"""The geometric value ``V(y) = min { g(x) : x in D*(y) }`` and its KKT data.

``D*(y)``, the intersection of the evader's dominance regions, is convex and
star-shaped about ``x_E``.  Since every built-in cost is a minimum of convex
pieces, the minimum is attained either at some piece's unconstrained
minimiser lying inside ``D*`` or on the boundary ``x_E + rho*(e) e``.  The
boundary search is a dense angular scan followed by bracket zooming around
every competitive local minimum, so kinked minima (corners where two ovals
meet, ties between cost pieces) are located as precisely as smooth ones.

``oracle_value`` is the independent brute-force check: a plain grid over the
star-shaped chart ``(e, s) -> x_E + s rho*(e) e``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, nnls

from .costs import TerminalCost, clarke_samples
from .errors import NoMultiplierFound, UnsupportedDimension
from .geometry import circle_directions, smooth_margin_gradients, smooth_margins, sphere_directions
from .state import GameState


@dataclass
class SolverOptions:
    angular_resolution: int = 720
    sphere_samples: int = 3000
    zoom_points: int = 33
    zoom_tol: float = 1e-14
    sphere_zoom_tol: float = 1e-8  # coarser: spatial candidates are polished afterwards
    max_candidates: int = 12
    max_optima: int = 16
    cluster_radius: float = 1e-4
    opt_rtol: float = 1e-6
    kkt_rtol: float = 1e-5
    probe: float = 1e-6
    multipliers: bool = True
    seed: int = 0


def opt_tol(value: float, opts: SolverOptions | None = None) -> float:
    rtol = (opts or SolverOptions()).opt_rtol
    return rtol * (1.0 + abs(value))


@dataclass
class CovectorP:
    p_P: np.ndarray
    p_E: np.ndarray

    @classmethod
    def zeros(cls, m: int, n: int) -> "CovectorP":
        return cls(np.zeros((m, n)), np.zeros(n))

    @classmethod
    def from_flat(cls, p, m: int, n: int) -> "CovectorP":
        p = np.asarray(p, dtype=float)
        return cls(p[: m * n].reshape(m, n).copy(), p[m * n :].copy())

    def flat(self) -> np.ndarray:
        return np.concatenate([self.p_P.ravel(), self.p_E])

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))

    def combine(self, other: "CovectorP", t: float) -> "CovectorP":
        """Convex combination ``(1 - t) self + t other``."""
        return CovectorP((1 - t) * self.p_P + t * other.p_P, (1 - t) * self.p_E + t * other.p_E)

    def to_dict(self) -> dict:
        return {"p_P": self.p_P.tolist(), "p_E": self.p_E.tolist()}


@dataclass
class ValueResult:
    value: float
    optima: list[np.ndarray]
    active_sets: list[list[int]] = field(default_factory=list)
    multipliers: list[list[np.ndarray]] = field(default_factory=list)
    kkt_residuals: list[list[float]] = field(default_factory=list)
    clarke_sampled: list[bool] = field(default_factory=list)
    kkt_failures: list[int] = field(default_factory=list)
    gradient_samples: list[CovectorP] = field(default_factory=list)
    sample_optimum: list[int] = field(default_factory=list)
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "optima": [x.tolist() for x in self.optima],
            "active_sets": self.active_sets,
            "multipliers": [[lam.tolist() for lam in per] for per in self.multipliers],
            "kkt_residuals": self.kkt_residuals,
            "clarke_sampled": self.clarke_sampled,
            "kkt_failures": self.kkt_failures,
            "gradient_samples": [p.to_dict() for p in self.gradient_samples],
            "sample_optimum": self.sample_optimum,
            "truncated": self.truncated,
        }


# ---------------------------------------------------------------------------
# boundary search


def _zoom_arc(state: GameState, cost: TerminalCost, lo: float, hi: float, opts: SolverOptions):
    k = opts.zoom_points
    while True:
        t = np.linspace(lo, hi, k)
        E = np.stack([np.cos(t), np.sin(t)], axis=1)
        X = state.star_boundary(E)
        v = cost(X)
        b = int(np.argmin(v))
        if hi - lo < opts.zoom_tol:
            return float(v[b]), X[b]
        lo, hi = t[max(b - 1, 0)], t[min(b + 1, k - 1)]


def _boundary_minima_plane(state: GameState, cost: TerminalCost, opts: SolverOptions):
    N = opts.angular_resolution
    E = circle_directions(N)
    X = state.star_boundary(E)
    h = cost(X)
    chord = np.max(np.linalg.norm(np.roll(X, -1, axis=0) - X, axis=1))
    band = 2.0 * cost.lipschitz_bound * chord + 1e-12 * (1.0 + np.max(np.abs(h)))
    local = (h <= np.roll(h, 1)) & (h <= np.roll(h, -1)) & (h <= np.min(h) + band)
    idx = np.flatnonzero(local)
    idx = idx[np.argsort(h[idx], kind="stable")][: opts.max_candidates]
    step = 2.0 * np.pi / N
    out = []
    for j in idx:
        theta = step * j
        out.append(_zoom_arc(state, cost, theta - step, theta + step, opts))
    return out


def fibonacci_sphere(k: int) -> np.ndarray:
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (1.0 + 5**0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _tangent_basis(e: np.ndarray) -> np.ndarray:
    # columns 1..n-1 of a Householder-style complete basis
    q, _ = np.linalg.qr(np.column_stack([e, np.eye(e.shape[0])]))
    return q[:, 1 : e.shape[0]]


def _sphere_frames(E: np.ndarray) -> np.ndarray:
    """Orthonormal tangent pairs for each row of ``E`` (unit vectors in R^3); shape ``(k, 3, 2)``."""
    helper = np.eye(3)[np.argmin(np.abs(E), axis=1)]
    u1 = np.cross(E, helper)
    u1 /= np.linalg.norm(u1, axis=1, keepdims=True)
    u2 = np.cross(E, u1)
    return np.stack([u1, u2], axis=2)


def _zoom_sphere(state, cost, E0, width, opts):
    """Shrink a 9x9 tangent-plane grid around every seed direction simultaneously."""
    a = np.linspace(-1.0, 1.0, 9)
    A, B = np.meshgrid(a, a, indexing="ij")
    offsets = np.stack([A.ravel(), B.ravel()], axis=1)
    E0 = np.array(E0, dtype=float)
    rows = np.arange(len(E0))
    while True:
        U = _sphere_frames(E0)
        E = E0[:, None, :] + width * np.einsum("kj,sij->ski", offsets, U)
        E /= np.linalg.norm(E, axis=2, keepdims=True)
        X = state.star_boundary(E.reshape(-1, 3)).reshape(E.shape)
        v = cost(X)
        b = np.argmin(v, axis=1)
        E0 = E[rows, b]
        if width <= opts.sphere_zoom_tol:
            return [(float(v[r, b[r]]), X[r, b[r]]) for r in rows]
        width /= 3.0


def _polish_nd(state, cost, e0, width, opts):
    U = _tangent_basis(e0)

    def f(z):
        e = e0 + U @ z
        e = e / np.linalg.norm(e)
        return float(cost(state.star_boundary(e[None, :])[0]))

    k = U.shape[1]
    simplex = np.vstack([np.zeros(k), width * np.eye(k)])
    res = minimize(
        f,
        np.zeros(k),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-15, "initial_simplex": simplex, "maxiter": 20000},
    )
    e = e0 + U @ res.x
    e /= np.linalg.norm(e)
    return float(res.fun), state.star_boundary(e[None, :])[0]


def _boundary_minima_space(state: GameState, cost: TerminalCost, opts: SolverOptions):
    n = state.n
    if n == 3:
        E = fibonacci_sphere(opts.sphere_samples)
    else:
        E = sphere_directions(n, opts.sphere_samples * (n - 2), np.random.default_rng(opts.seed))
    X = state.star_boundary(E)
    h = cost(X)
    spacing = np.sqrt(4.0 * np.pi / len(E)) if n == 3 else 2.0 * len(E) ** (-1.0 / (n - 1))
    # neighbourhood radius (in direction space) used to suppress duplicate seeds
    reach = 2.0 * spacing
    band = 2.0 * cost.lipschitz_bound * reach * state.bounding_radius() + 1e-12 * (1.0 + np.max(np.abs(h)))
    order = np.argsort(h, kind="stable")
    seeds: list[int] = []
    for j in order:
        if h[j] > h[order[0]] + band or len(seeds) >= opts.max_candidates:
            break
        if all(np.dot(E[j], E[s]) < np.cos(reach) for s in seeds):
            seeds.append(j)
    if n == 3:
        found = _zoom_sphere(state, cost, E[seeds], reach, opts)
    else:
        found = [_polish_nd(state, cost, E[j], reach, opts) for j in seeds]
    # seeds that zoomed into the same basin only need one polish
    kept: list[tuple[float, np.ndarray]] = []
    merge = 1e-3 * state.bounding_radius()
    for v, x in sorted(found, key=lambda c: c[0]):
        if all(np.linalg.norm(x - y) > merge for _, y in kept):
            kept.append((v, x))
    return [_polish_piece(state, cost, v, x) for v, x in kept]


def _piece_jacobian(piece: TerminalCost):
    def jac(x):
        q = piece.gradient(x)
        if q is not None:
            return q
        h = 1e-8 * (1.0 + np.max(np.abs(x)))
        eye = np.eye(x.shape[0])
        return np.array([(piece(x + h * e) - piece(x - h * e)) / (2 * h) for e in eye])

    return jac


def _polish_piece(state: GameState, cost: TerminalCost, v0: float, x0: np.ndarray):
    """Refine a boundary candidate by a constrained solve on its active cost piece.

    The piece is convex and the region is convex, so a local solver started
    nearby converges to the piece's minimum over the region; this resolves
    minima on curves where two ovals meet, which chart zooming handles poorly.
    The refined point is kept only if it is feasible and no worse.
    """
    pieces = cost.pieces()
    piece = pieces[int(np.argmin([float(p(x0)) for p in pieces]))]
    P, xe, a = state.pursuers, state.evader, state.alphas

    def cons(x):
        return -state.margins(x)

    def cons_jac(x):
        dp = x - P
        de = x - xe
        return dp / np.linalg.norm(dp, axis=1)[:, None] - a[:, None] * de / np.linalg.norm(de)

    res = minimize(lambda x: float(piece(x)), x0, jac=_piece_jacobian(piece), method="SLSQP",
                   constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                   options={"ftol": 1e-15, "maxiter": 200})
    x = np.asarray(res.x, dtype=float)
    if np.all(np.isfinite(x)) and state.contains(x):
        v = float(cost(x))
        if v < v0:
            return v, x
    return v0, x0


# ---------------------------------------------------------------------------
# value


def _candidates(state: GameState, cost: TerminalCost, opts: SolverOptions):
    if state.n == 2:
        cands = _boundary_minima_plane(state, cost, opts)
    else:
        cands = _boundary_minima_space(state, cost, opts)
    for piece in cost.pieces():
        c = piece.unconstrained_argmin(hint=state.evader)
        if c is not None and c.shape == state.evader.shape and state.contains(c):
            cands.append((float(cost(c)), np.asarray(c, dtype=float)))
    return cands


def _cluster(cands, value, opts):
    tol = opt_tol(value, opts)
    reps: list[tuple[float, np.ndarray]] = []
    truncated = False
    for v, x in sorted(cands, key=lambda c: c[0]):
        if v > value + tol:
            break
        if all(np.linalg.norm(x - r) > opts.cluster_radius for _, r in reps):
            if len(reps) >= opts.max_optima:
                truncated = True
                break
            reps.append((v, x))
    reps.sort(key=lambda c: tuple(c[1]))
    return [x for _, x in reps], truncated


def value_of(state: GameState, cost: TerminalCost, opts: SolverOptions | None = None) -> float:
    """Value only; the fast path used for finite differencing."""
    opts = opts or SolverOptions()
    state.require_interior()
    if cost.is_constant:
        return float(cost(state.evader))
    return float(min(v for v, _ in _candidates(state, cost, opts)))


def solve_value(state: GameState, cost: TerminalCost, opts: SolverOptions | None = None) -> ValueResult:
    opts = opts or SolverOptions()
    state.require_interior()
    if cost.is_constant:
        result = ValueResult(float(cost(state.evader)), [state.evader.copy()])
    else:
        cands = _candidates(state, cost, opts)
        value = float(min(v for v, _ in cands))
        optima, truncated = _cluster(cands, value, opts)
        result = ValueResult(value, optima, truncated=truncated)
    result.active_sets = [active_set(x, state) for x in result.optima]
    if opts.multipliers:
        _attach_multipliers(result, state, cost, opts)
    return result


def active_set(x, state: GameState) -> list[int]:
    """Pursuers whose oval passes through ``x`` (within the boundary tolerance)."""
    d = state.margins(x)
    return [int(i) for i in np.flatnonzero(np.abs(d) <= state.boundary_tols())]


# ---------------------------------------------------------------------------
# KKT multipliers and generalised gradients


def kkt_tol(grad_scale: float, opts: SolverOptions | None = None) -> float:
    return (opts or SolverOptions()).kkt_rtol * (1.0 + grad_scale)


def _constraint_jacobian(x, state: GameState, active):
    cols = [smooth_margin_gradients(x, cfg)[0] for i, cfg in enumerate(state.configs()) if i in active]
    if not cols:
        return np.zeros((state.n, 0))
    return np.column_stack(cols)


def recover_multipliers(x, state: GameState, cost: TerminalCost, opts: SolverOptions | None = None,
                        active=None):
    """Nonnegative multipliers certifying ``0 in dg(x) + sum_i lam_i grad d_hat_i(x)``.

    Returns ``(lambdas, residuals, clarke)`` where ``lambdas`` holds one full
    length-``m`` vector per accepted certificate.  Each gradient sample of the
    cost is tried on its own first; if none works at a kink of ``g`` the
    convex hull of the samples is searched instead.  Raises
    :class:`NoMultiplierFound` when no certificate meets the KKT tolerance.
    """
    opts = opts or SolverOptions()
    x = np.asarray(x, dtype=float)
    if active is None:
        active = active_set(x, state)
    active = list(active)
    Q = clarke_samples(cost, x, opts.probe)
    clarke = cost.gradient(x) is None
    if not Q:
        raise NoMultiplierFound(f"no gradient samples of the cost near {x}")
    A = _constraint_jacobian(x, state, active)
    tol = kkt_tol(max(np.linalg.norm(q) for q in Q), opts)
    lambdas, residuals = [], []

    def full(lam_active):
        lam = np.zeros(state.m)
        lam[active] = lam_active
        return lam

    for q in Q:
        if A.shape[1]:
            lam, res = nnls(A, -q)
        else:
            lam, res = np.zeros(0), float(np.linalg.norm(q))
        if res <= tol:
            lambdas.append(full(lam))
            residuals.append(float(res))
    if not lambdas and len(Q) > 1:
        Qm = np.column_stack(Q)
        w = 1e3 * (1.0 + np.max(np.abs(Qm)))
        M = np.vstack([np.hstack([Qm, A]), np.concatenate([w * np.ones(len(Q)), np.zeros(A.shape[1])])])
        rhs = np.concatenate([np.zeros(state.n), [w]])
        z, _ = nnls(M, rhs)
        t, lam = z[: len(Q)], z[len(Q) :]
        res = float(np.linalg.norm(Qm @ t + A @ lam))
        if res <= tol and abs(t.sum() - 1.0) <= 1e-8:
            lambdas.append(full(lam))
            residuals.append(res)
    if not lambdas:
        raise NoMultiplierFound(f"stationarity residual exceeds {tol:.3e} at optimum {x}")
    return lambdas, residuals, clarke


def covector(x, lam, state: GameState) -> CovectorP:
    """Generalised-gradient element built from one optimum and its multipliers.

    For ``l_i > 0`` the pursuer block is ``8 a_i l_i lam_i |x - x_E| (x - x_Pi)``
    and pursuer ``i`` contributes ``-8 a_i^2 l_i lam_i |x - x_Pi| (x - x_E)`` to
    the evader block.  For ``l_i = 0`` the quadratic constraint gives
    ``2 lam_i (x - x_Pi)`` and ``-2 a_i^2 lam_i (x - x_E)``.
    """
    x = np.asarray(x, dtype=float)
    p_P = np.zeros_like(state.pursuers)
    p_E = np.zeros(state.n)
    de = x - state.evader
    re = np.linalg.norm(de)
    for i, (xp, prm) in enumerate(zip(state.pursuers, state.params)):
        if lam[i] == 0.0:
            continue
        dp = x - xp
        a, l = prm.alpha, prm.l
        if l > 0.0:
            p_P[i] = 8.0 * a * l * lam[i] * re * dp
            p_E -= 8.0 * a * a * l * lam[i] * np.linalg.norm(dp) * de
        else:
            p_P[i] = 2.0 * lam[i] * dp
            p_E -= 2.0 * a * a * lam[i] * de
    return CovectorP(p_P, p_E)


def _attach_multipliers(result: ValueResult, state, cost, opts):
    result.multipliers, result.kkt_residuals, result.clarke_sampled = [], [], []
    result.kkt_failures, result.gradient_samples, result.sample_optimum = [], [], []
    for k, (x, act) in enumerate(zip(result.optima, result.active_sets)):
        try:
            lams, res, clarke = recover_multipliers(x, state, cost, opts, active=act)
        except NoMultiplierFound:
            result.multipliers.append([])
            result.kkt_residuals.append([])
            result.clarke_sampled.append(cost.gradient(x) is None)
            result.kkt_failures.append(k)
            continue
        result.multipliers.append(lams)
        result.kkt_residuals.append(res)
        result.clarke_sampled.append(clarke)
        for lam in lams:
            result.gradient_samples.append(covector(x, lam, state))
            result.sample_optimum.append(k)


def gradient_set(state: GameState, result: ValueResult) -> list[CovectorP]:
    """Covectors of the outer estimate of the Clarke gradient of ``V`` at ``state``.

    One covector per (optimum, multiplier vector) pair held in ``result``.
    """
    if result.kkt_failures:
        raise NoMultiplierFound(f"optima {result.kkt_failures} have no KKT certificate")
    out = []
    for x, lams in zip(result.optima, result.multipliers):
        out.extend(covector(x, lam, state) for lam in lams)
    return out


def complementary_slackness(x, lam, state: GameState) -> np.ndarray:
    return np.array([lam[i] * smooth_margins(x, cfg)[0] for i, cfg in enumerate(state.configs())])


# ---------------------------------------------------------------------------
# brute-force oracle


def _oracle_axes(n: int, resolution: int):
    theta = 2.0 * np.pi * np.arange(resolution) / resolution
    s = np.linspace(0.0, 1.0, resolution // 2 + 1)
    if n == 2:
        E = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return E, s, (resolution,)
    phi = np.linspace(0.0, np.pi, resolution // 2 + 1)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    E = np.stack([np.sin(P) * np.cos(T), np.sin(P) * np.sin(T), np.cos(P)], axis=-1).reshape(-1, 3)
    return E, s, T.shape


def _require_oracle_dimension(n):
    if n not in (2, 3):
        raise UnsupportedDimension(f"the brute-force oracle supports n in {{2, 3}}, got n = {n}")


def oracle_value(state: GameState, cost: TerminalCost, resolution: int = 256):
    """Grid minimum of ``g`` over ``{x_E + s rho*(e) e}``; returns ``(value, point)``."""
    _require_oracle_dimension(state.n)
    state.require_interior()
    E, s, _ = _oracle_axes(state.n, resolution)
    r, _ = state.star_rho(E)
    best_v, best_x = np.inf, None
    for sk in s:
        X = state.evader + (sk * r)[:, None] * E
        v = cost(X)
        j = int(np.argmin(v))
        if v[j] < best_v:
            best_v, best_x = float(v[j]), X[j]
    return best_v, best_x


def oracle_mesh(state: GameState, resolution: int = 256) -> float:
    """Covering radius bound of the oracle grid's image in ``D*``.

    Sum of the largest grid steps along each chart coordinate plus twice the
    largest bulge of the boundary beyond the grid's outer polygon.
    """
    _require_oracle_dimension(state.n)
    E, s, shape = _oracle_axes(state.n, resolution)
    r, _ = state.star_rho(E)
    outer = (r[:, None] * E).reshape(*shape, state.n)
    radial = float(np.max(r)) * (s[1] - s[0])
    steps = [radial]
    bulges = []
    for axis in range(len(shape)):
        wrap = axis == 0
        nxt = np.roll(outer, -1, axis=axis) if wrap else np.delete(outer, 0, axis=axis)
        cur = outer if wrap else np.delete(outer, -1, axis=axis)
        steps.append(float(np.max(np.linalg.norm(nxt - cur, axis=-1))))
        mid = 0.5 * (nxt + cur)
        norm = np.linalg.norm(mid, axis=-1)
        ok = norm > 1e-14
        dirs = mid[ok] / norm[ok][:, None]
        r_mid, _ = state.star_rho(dirs)
        bulges.append(float(np.max(np.maximum(r_mid - norm[ok], 0.0), initial=0.0)))
    return float(sum(steps) + 2.0 * max(bulges))
