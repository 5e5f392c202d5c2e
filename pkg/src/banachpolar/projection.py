"""
Metric projections in smooth finite-dimensional norms.

The cone projection works in coefficient space: for ``K = cone{g_1..g_m}`` it
minimizes ``phi(lam) = 0.5 * ||x - G^T lam||^2`` over ``lam >= 0``. The
gradient is ``-G J(x - G^T lam)``. The solver is projected gradient with
Barzilai-Borwein steps and Armijo backtracking, interleaved with a projected
Newton polish on the current support. Newton is exact in one step whenever
``x`` lies in the span of the support, since ``0.5 ||.||^2`` is 2-homogeneous.

Halfspace and ray projections are closed-form or one-dimensional.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .geometry import FiniteCone
from .spaces import DualVec, LpSpace, PrimalVec, Space, require_valid

__all__ = [
    "SolverOptions",
    "ProjectionResult",
    "ProjectionError",
    "project_cone",
    "project_cone_batch",
    "project_halfspace",
    "project_ray",
    "euclidean_qp_oracle",
]

_ARMIJO = 1e-4
_SNAP = 1e-14
_POLISH_EVERY = 25


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iters: int = 50_000
    seed: int = 0
    polish: bool = True


@dataclass
class ProjectionResult:
    """Outcome of a cone projection.

    ``kkt_residual`` is the projected-gradient residual of the problem after
    rescaling ``x`` and every generator to unit norm, so it is dimensionless.
    """

    point: PrimalVec
    coefficients: np.ndarray
    distance: float
    iterations: int
    kkt_residual: float
    converged: bool = True
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "coefficients": self.coefficients.tolist(),
            "distance": float(self.distance),
            "iterations": int(self.iterations),
            "kkt_residual": float(self.kkt_residual),
            "converged": bool(self.converged),
            "diagnostics": list(self.diagnostics),
        }


class ProjectionError(RuntimeError):
    """Solver stopped before reaching tolerance; ``result`` holds the best iterate."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def _conditioning_notes(space: Space) -> list[str]:
    if isinstance(space, LpSpace) and (space.p < 1.2 or space.p > 8):
        return [f"p={space.p:g} is near the edge of (1, inf); gradients are poorly conditioned"]
    return []


class _Problem:
    """Batched ``0.5 ||x_k - lam_k G||^2`` with unit-norm rows in ``X`` and ``G``."""

    def __init__(self, space, G, X):
        self.space, self.G, self.X = space, G, X

    def value_grad(self, lam, rows):
        R = self.X[rows] - lam @ self.G
        f = 0.5 * self.space.norm(R) ** 2
        g = -(self.space.duality_map(R) @ self.G.T)
        return f, g


def _pg_residual(lam, g):
    return np.linalg.norm(lam - np.maximum(lam - g, 0.0), axis=1)


def _pg_steps(prob, lam, f, g, alpha, rows, n_steps, tol):
    """Projected BB gradient on ``rows``; returns the number of steps taken."""
    active = rows.copy()
    taken = 0
    for _ in range(n_steps):
        if active.size == 0:
            break
        taken += 1
        l0, g0, f0 = lam[active], g[active], f[active]
        a = alpha[active].copy()
        new_l, new_f, new_g = l0.copy(), f0.copy(), g0.copy()
        pending = np.arange(active.size)
        for _ in range(60):
            trial = np.maximum(l0[pending] - a[pending, None] * g0[pending], 0.0)
            ft, gt = prob.value_grad(trial, active[pending])
            decrease = np.sum(g0[pending] * (trial - l0[pending]), axis=1)
            ok = ft <= f0[pending] + _ARMIJO * decrease + 1e-15 * np.abs(f0[pending])
            acc = pending[ok]
            new_l[acc], new_f[acc], new_g[acc] = trial[ok], ft[ok], gt[ok]
            pending = pending[~ok]
            if pending.size == 0:
                break
            a[pending] *= 0.5
        s, y = new_l - l0, new_g - g0
        sy, ss = np.sum(s * y, axis=1), np.sum(s * s, axis=1)
        bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), 1e3 * a)
        alpha[active] = np.clip(bb, 1e-12, 1e12)
        lam[active], f[active], g[active] = new_l, new_f, new_g
        res = _pg_residual(new_l, new_g)
        # rows whose backtracking failed outright have stalled at roundoff
        keep = (res > tol) & ~np.isin(np.arange(active.size), pending)
        active = active[keep]
    return taken


def _newton_polish(prob, lam, f, g, rows, max_steps=30):
    """Projected Newton on the support ``lam > 0``; keeps an update only if it helps."""
    space, G = prob.space, prob.G
    m = G.shape[0]
    l = lam[rows].copy()
    fl, gl = f[rows].copy(), g[rows].copy()
    steps = 0
    live = np.arange(rows.size)
    for _ in range(max_steps):
        if live.size == 0:
            break
        steps += 1
        free = l[live] > 0
        R = prob.X[rows[live]] - l[live] @ G
        H = np.asarray(space.duality_derivative(R))
        M = np.einsum("ia,kab,jb->kij", G, H, G)
        mask = free[:, :, None] & free[:, None, :]
        eye = np.broadcast_to(np.eye(m), M.shape)
        M = np.where(mask, M, eye)
        rhs = np.where(free, -gl[live], 0.0)
        d = np.einsum("kij,kj->ki", np.linalg.pinv(M, hermitian=True), rhs)
        t = np.ones(live.size)
        improved = np.zeros(live.size, dtype=bool)
        pending = np.arange(live.size)
        for _ in range(30):
            trial = np.maximum(l[live[pending]] + t[pending, None] * d[pending], 0.0)
            ft, gt = prob.value_grad(trial, rows[live[pending]])
            f_cur = fl[live[pending]]
            r_cur = _pg_residual(l[live[pending]], gl[live[pending]])
            flat = ft <= f_cur + 1e-15 * np.abs(f_cur)
            real_drop = ft < f_cur - 1e-15 * np.abs(f_cur)
            ok = real_drop | (flat & (_pg_residual(trial, gt) < r_cur))
            idx = live[pending[ok]]
            l[idx], fl[idx], gl[idx] = trial[ok], ft[ok], gt[ok]
            improved[pending[ok]] = True
            pending = pending[~ok]
            if pending.size == 0:
                break
            t[pending] *= 0.5
        live = live[improved]
    old_res = _pg_residual(lam[rows], g[rows])
    new_res = _pg_residual(l, gl)
    accept = (new_res <= old_res) & (fl <= f[rows] + 1e-15 * np.abs(f[rows]))
    acc_rows = rows[accept]
    lam[acc_rows], f[acc_rows], g[acc_rows] = l[accept], fl[accept], gl[accept]
    return steps


def _solve_batch(space, cone, X, opts):
    G_raw = cone.generators
    gnorm = np.asarray(space.norm(G_raw))
    G = G_raw / gnorm[:, None]
    xnorm = np.asarray(space.norm(X))
    nonzero = xnorm > 0
    Xn = np.zeros_like(X)
    Xn[nonzero] = X[nonzero] / xnorm[nonzero, None]

    prob = _Problem(space, G, Xn)
    N, m = X.shape[0], G.shape[0]
    lam = np.zeros((N, m))
    every = np.arange(N)
    f, g = prob.value_grad(lam, every)
    alpha = np.ones(N)
    res = _pg_residual(lam, g)
    iters = np.zeros(N, dtype=int)
    stalls = np.zeros(N, dtype=int)
    active = every[(res > opts.tol) & nonzero]
    while active.size and iters[active].max() < opts.max_iters:
        budget = min(_POLISH_EVERY, opts.max_iters - int(iters[active].max()))
        before = f[active].copy()
        taken = _pg_steps(prob, lam, f, g, alpha, active, budget, opts.tol)
        iters[active] += taken
        if opts.polish:
            iters[active] += _newton_polish(prob, lam, f, g, active)
        res[active] = _pg_residual(lam[active], g[active])
        stuck = f[active] >= before - 1e-15 * np.abs(before)
        stalls[active] = np.where(stuck, stalls[active] + 1, 0)
        active = active[(res[active] > opts.tol) & (stalls[active] < 3)]

    coeffs = xnorm[:, None] * lam / gnorm[None, :]
    points = coeffs @ G_raw
    dist = np.asarray(space.norm(X - points))
    # x in K up to roundoff: report the exact feasible point
    snap = dist <= _SNAP * np.maximum(xnorm, np.finfo(float).tiny)
    points[snap] = X[snap]
    dist[snap] = 0.0
    return points, coeffs, dist, iters, res


def project_cone_batch(space: Space, cone: FiniteCone, X, opts: SolverOptions | None = None):
    """Project each row of ``X`` onto ``cone``; returns a list of :class:`ProjectionResult`.

    Rows that fail to converge are returned with ``converged=False`` rather
    than raising.
    """
    opts = opts or SolverOptions()
    require_valid(space)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != space.dim or cone.dim != space.dim:
        raise ValueError(f"dimension mismatch: space {space.dim}, cone {cone.dim}, x {X.shape[1]}")
    points, coeffs, dist, iters, res = _solve_batch(space, cone, X, opts)
    notes = _conditioning_notes(space)
    out = []
    for k in range(X.shape[0]):
        ok = bool(res[k] <= opts.tol)
        diag = list(notes)
        if not ok:
            diag.append(f"no convergence after {iters[k]} iterations")
        out.append(ProjectionResult(PrimalVec(points[k]), coeffs[k], float(dist[k]), int(iters[k]), float(res[k]), ok, diag))
    return out


def project_cone(space: Space, cone: FiniteCone, x, opts: SolverOptions | None = None) -> ProjectionResult:
    """Metric projection of ``x`` onto a finitely generated cone.

    Raises
    ------
    ProjectionError
        If the projected-gradient residual is still above ``opts.tol`` after
        ``opts.max_iters`` iterations. The best iterate is attached.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("project_cone takes a single vector; use project_cone_batch")
    result = project_cone_batch(space, cone, x[None, :], opts)[0]
    if not result.converged:
        raise ProjectionError(
            f"projection did not converge (residual {result.kkt_residual:.3e})", result
        )
    return result


def project_halfspace(space: Space, a: DualVec, x: PrimalVec) -> PrimalVec:
    """Projection onto ``{y : <a, y> <= 0}``.

    Outside points move along ``J* a``: ``y = x - (<a,x> / ||a||_*^2) J* a``.
    Then ``<a, y> = 0`` and ``J(x - y)`` is a positive multiple of ``a``,
    which is the optimality condition.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    na = float(space.dual_norm(a))
    if na == 0:
        raise ValueError("halfspace normal must be nonzero")
    ax = float(np.dot(a, x))
    if ax <= 0:
        return PrimalVec(x.copy())
    return PrimalVec(x - (ax / na**2) * space.inverse_duality_map(a))


def project_ray(space: Space, u: PrimalVec, x: PrimalVec, tol: float = 1e-10) -> tuple[float, PrimalVec]:
    """Nearest point to ``x`` on ``{t u : t >= 0}``.

    Bisection on ``psi'(t) = -<J(x - t u), u>``, the derivative of
    ``0.5 ||x - t u||^2``, which is increasing in ``t``.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if not np.any(u):
        raise ValueError("ray direction must be nonzero")

    def slope(t):
        return -float(np.dot(space.duality_map(x - t * u), u))

    scale = max(1.0, float(space.norm(x)) * float(space.norm(u)))
    if slope(0.0) >= 0:
        return 0.0, PrimalVec(np.zeros_like(x))
    lo, hi = 0.0, max(1.0, float(space.norm(x) / space.norm(u)))
    while slope(hi) < 0:
        lo, hi = hi, 2.0 * hi
    # bisect to float resolution; tol only matters for the final check
    best_t, best_s = hi, abs(slope(hi))
    for _ in range(200):
        t = 0.5 * (lo + hi)
        if not lo < t < hi:
            break
        s = slope(t)
        if abs(s) < best_s:
            best_t, best_s = t, abs(s)
        if s == 0:
            break
        if s < 0:
            lo = t
        else:
            hi = t
    if best_s > tol * scale:
        raise ArithmeticError(f"ray projection stalled with |slope| = {best_s:.3e}")
    return best_t, PrimalVec(best_t * u)


def euclidean_qp_oracle(cone: FiniteCone, x, max_dim: int = 6, max_generators: int = 8) -> PrimalVec:
    """Exact Euclidean projection onto ``cone`` by enumerating supports.

    For every subset of generators solve the unconstrained least-squares fit
    and keep the closest fit whose coefficients are nonnegative.
    """
    x = np.asarray(x, dtype=float)
    G = cone.generators
    if cone.dim > max_dim or cone.size > max_generators:
        raise ValueError(f"oracle limited to dim <= {max_dim} and <= {max_generators} generators")
    if x.shape != (cone.dim,):
        raise ValueError("dimension mismatch")
    best, best_d = np.zeros_like(x), float(np.linalg.norm(x))
    for k in range(1, cone.size + 1):
        for subset in itertools.combinations(range(cone.size), k):
            A = G[list(subset)].T
            coef, *_ = np.linalg.lstsq(A, x, rcond=None)
            if np.any(coef < -1e-12):
                continue
            pt = A @ np.maximum(coef, 0.0)
            d = float(np.linalg.norm(x - pt))
            if d < best_d:
                best, best_d = pt, d
    return PrimalVec(best)
