"""
Polar cones in smooth norms.

The polar of a closed convex cone ``K`` is the set of points whose metric
projection onto ``K`` is the origin. Equivalently it is the set of ``x`` with
``<Jx, z> <= 0`` for every ``z`` in ``K``. Unlike the Hilbert case it need not
be convex. This module tests polar membership, builds the polar rays of
hypercones and wedges, certifies (non)convexity of wedge polars, and checks
whether ``J*`` sends two-dimensional subspaces to two-dimensional subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    FiniteCone,
    Hypercone,
    MeridianArc,
    dependence_det3,
    rank_residual,
    sample_arc,
    wedge_generators,
)
from .projection import ProjectionError, SolverOptions, project_cone_batch
from .spaces import LpSpace, PrimalVec, Space, random_sphere, require_valid

__all__ = [
    "MEMBERSHIP_TOL",
    "CERTIFY_TOL",
    "CRITERION_TOL",
    "DEFAULT_ARC_SAMPLES",
    "MembershipVerdict",
    "ConvexityReport",
    "CriterionReport",
    "Counterexample",
    "ConsistencyReport",
    "polar_membership",
    "hypercone_polar_ray",
    "wedge_polar_rays",
    "wedge_cone",
    "certify_wedge_polar_convexity",
    "subspace_criterion_check",
    "lp_counterexample",
    "counterexample_arc",
    "projection_polar_consistency",
]

MEMBERSHIP_TOL = 1e-9
CERTIFY_TOL = 1e-6
CRITERION_TOL = 1e-8
DEFAULT_ARC_SAMPLES = 65


@dataclass(frozen=True)
class MembershipVerdict:
    """``margin`` is ``max_g <Jx, g> / (||x|| ||g||)``; negative means strictly inside."""

    inside: bool
    margin: float


@dataclass
class ConvexityReport:
    convex: bool
    worst_violation: float
    planarity_residual: float
    pairs_tested: int
    rays_sampled: int
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "convex": self.convex,
            "worst_violation": self.worst_violation,
            "planarity_residual": self.planarity_residual,
            "pairs_tested": self.pairs_tested,
            "rays_sampled": self.rays_sampled,
            "witness": self.witness,
        }


@dataclass
class CriterionReport:
    trials: int
    max_residual: float
    tol: float
    failures: list[dict]
    residuals: np.ndarray = field(repr=False)

    @property
    def verdict(self) -> str:
        return "holds" if self.max_residual <= self.tol else "fails"

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def fraction_above(self, level: float) -> float:
        return float(np.mean(self.residuals > level))

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "trials": self.trials,
            "tol": self.tol,
            "max_residual": self.max_residual,
            "failure_count": len(self.failures),
            "failures": self.failures,
        }


@dataclass
class Counterexample:
    p: float
    q: float
    det_value: float
    vectors: np.ndarray
    images: np.ndarray
    directions: np.ndarray
    image_rank_residual: float

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "det": self.det_value,
            "vectors": self.vectors.tolist(),
            "images": self.images.tolist(),
            "directions": self.directions.tolist(),
            "image_rank_residual": self.image_rank_residual,
        }


@dataclass
class ConsistencyReport:
    samples: int
    margins: np.ndarray
    projection_norms: np.ndarray

    @property
    def max_margin(self) -> float:
        return float(np.max(self.margins))

    @property
    def max_projection_norm(self) -> float:
        return float(np.max(self.projection_norms))

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_margin": self.max_margin,
            "max_projection_norm": self.max_projection_norm,
            "margins": self.margins.tolist(),
            "projection_norms": self.projection_norms.tolist(),
        }


def polar_membership(space: Space, cone: FiniteCone, x, tol: float = MEMBERSHIP_TOL) -> MembershipVerdict:
    """Test ``<Jx, g> <= 0`` on the generators; linearity covers the rest of the cone."""
    x = np.asarray(x, dtype=float)
    nx = float(space.norm(x))
    if nx == 0:
        return MembershipVerdict(True, 0.0)
    G = cone.generators
    margin = float(np.max((G @ space.duality_map(x)) / (nx * space.norm(G))))
    return MembershipVerdict(margin <= tol, margin)


def hypercone_polar_ray(space: Space, h: Hypercone) -> PrimalVec:
    """Unit direction ``J* a / ||J* a||`` spanning the polar of ``{x : <a,x> <= 0}``."""
    u = space.inverse_duality_map(h.normal)
    return PrimalVec(u / space.norm(u))


def wedge_polar_rays(space: Space, arc: MeridianArc, m: int = DEFAULT_ARC_SAMPLES) -> np.ndarray:
    """Unit rays ``J* c_i`` for ``m`` samples ``c_i`` of the arc, shape ``(m, n)``."""
    c = sample_arc(space, arc, m)
    rays = space.inverse_duality_map(c)
    return rays / space.norm(rays)[:, None]


def wedge_cone(space: Space, arc: MeridianArc, m: int = DEFAULT_ARC_SAMPLES) -> FiniteCone:
    """Finite generator form of the wedge ``{x : <c_i, x> <= 0 for all samples c_i}``.

    Every sample is a nonnegative combination of the endpoints, so the
    sampled intersection equals ``{<a,x> <= 0, <b,x> <= 0}``; only the
    endpoints contribute facets.
    """
    c = sample_arc(space, arc, m)
    return FiniteCone(wedge_generators(c[0], c[-1]))


def certify_wedge_polar_convexity(
    space: Space,
    arc: MeridianArc,
    m: int = DEFAULT_ARC_SAMPLES,
    tol: float = CERTIFY_TOL,
    opts: SolverOptions | None = None,
) -> ConvexityReport:
    """Decide whether the polar of the wedge over ``arc`` is convex.

    Two checks are reported. Planarity is the rank-2 residual of the sampled
    polar rays. The midpoint test takes every pair of sampled rays and
    measures ``||P_W(mid)|| / ||mid||``, the relative size of the projection
    of their midpoint onto the wedge. This is zero exactly when the midpoint
    lies in the polar. The wedge is declared convex iff the worst midpoint
    value is at most ``tol``.

    Raises
    ------
    ProjectionError
        If a midpoint projection does not converge.
    """
    require_valid(space)
    rays = wedge_polar_rays(space, arc, m)
    planarity = rank_residual(rays, 2)
    W = wedge_cone(space, arc, m)
    i, j = np.triu_indices(m, 1)
    mids = 0.5 * (rays[i] + rays[j])
    results = project_cone_batch(space, W, mids, opts)
    bad = [r for r in results if not r.converged]
    if bad:
        raise ProjectionError(f"{len(bad)} midpoint projections did not converge", bad[0])
    proj = np.array([r.point for r in results])
    violation = space.norm(proj) / space.norm(mids)
    k = int(np.argmax(violation))
    worst = float(violation[k])
    convex = worst <= tol
    witness = None
    if not convex:
        t = np.linspace(0.0, 1.0, m)
        witness = {
            "index_u": int(i[k]),
            "index_v": int(j[k]),
            "t_u": float(t[i[k]]),
            "t_v": float(t[j[k]]),
            "u": rays[i[k]].tolist(),
            "v": rays[j[k]].tolist(),
            "midpoint": mids[k].tolist(),
            "midpoint_projection": proj[k].tolist(),
            "margin": worst,
        }
    return ConvexityReport(convex, worst, planarity, int(i.size), m, witness)


def subspace_criterion_check(
    space: Space, trials: int = 500, tol: float = CRITERION_TOL, seed: int = 0
) -> CriterionReport:
    """Randomized test that ``J*`` maps 2-planes of the dual onto 2-planes.

    Each trial draws dual-unit ``a, b`` and a dual-unit ``c`` in their span,
    then measures ``rank_residual({J*a, J*b, J*c}, 2)``.
    """
    require_valid(space)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    ab = random_sphere(space, rng, 2 * trials, dual=True).reshape(trials, 2, space.dim)
    coef = rng.standard_normal((trials, 2))
    # alpha, beta both <= 0 would only flip c to the opposite ray
    coef = np.where(np.all(coef <= 0, axis=1, keepdims=True), -coef, coef)
    c = coef[:, :1] * ab[:, 0] + coef[:, 1:] * ab[:, 1]
    c = c / space.dual_norm(c)[:, None]
    triples = np.stack([ab[:, 0], ab[:, 1], c], axis=1)
    images = space.inverse_duality_map(triples)
    residuals = np.array([rank_residual(images[k], 2) for k in range(trials)])
    failures = [
        {
            "trial": int(k),
            "a": triples[k, 0].tolist(),
            "b": triples[k, 1].tolist(),
            "c": triples[k, 2].tolist(),
            "residual": float(residuals[k]),
        }
        for k in np.flatnonzero(residuals > tol)
    ]
    return CriterionReport(trials, float(residuals.max()), tol, failures, residuals)


def lp_counterexample(p: float) -> Counterexample:
    """The dependent dual triple ``(0,1,1), (1,0,1), (1,1,2)`` and its ``J*`` images in ``l_p^3``.

    The images point along ``(0,1,1), (1,0,1), (1,1,2^(q-1))``, whose
    determinant ``2 - 2^(q-1)`` vanishes only at ``p = 2``.
    """
    if not (np.isfinite(p) and p > 1):
        raise ValueError("p must satisfy 1<p<∞")
    space = LpSpace(3, float(p))
    q = space.q
    vectors = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 2.0]])
    images = space.inverse_duality_map(vectors)
    directions = np.sign(vectors) * np.abs(vectors) ** (q - 1.0)
    det = dependence_det3(*directions)
    return Counterexample(float(p), q, det, vectors, images, directions, rank_residual(images, 2))


def counterexample_arc(space: Space) -> MeridianArc:
    """Arc from ``(0,1,1)`` to ``(1,0,1)``; it passes through the direction ``(1,1,2)``."""
    if space.dim != 3:
        raise ValueError("the counterexample arc lives in dimension 3")
    return MeridianArc.from_endpoints(space, [0.0, 1.0, 1.0], [1.0, 0.0, 1.0])


def projection_polar_consistency(
    space: Space,
    cone: FiniteCone,
    samples: int = 100,
    seed: int = 0,
    opts: SolverOptions | None = None,
) -> ConsistencyReport:
    """Record whether ``r = x - P_K x`` behaves like a polar point.

    For each random ``x`` this reports the polar-membership margin of ``r``
    and ``||P_K r|| / ||r||``. In a Hilbert space both are zero (Moreau);
    elsewhere the values are only recorded.
    """
    require_valid(space)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, space.dim))
    first = project_cone_batch(space, cone, X, opts)
    if not all(r.converged for r in first):
        raise ProjectionError("projection did not converge", next(r for r in first if not r.converged))
    R = X - np.array([r.point for r in first])
    margins = np.array([polar_membership(space, cone, r).margin for r in R])
    second = project_cone_batch(space, cone, R, opts)
    if not all(r.converged for r in second):
        raise ProjectionError("projection did not converge", next(r for r in second if not r.converged))
    nr = np.asarray(space.norm(R))
    pn = np.asarray(space.norm(np.array([r.point for r in second])))
    ratio = np.where(nr > 0, pn / np.where(nr > 0, nr, 1.0), 0.0)
    return ConsistencyReport(samples, margins, ratio)
