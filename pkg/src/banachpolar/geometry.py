"""Cones, hypercones, dual meridian arcs, and small linear-algebra predicates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .spaces import DualVec, PrimalVec, Space

__all__ = [
    "GENERATOR_MIN_NORM",
    "ARC_INDEPENDENCE_TOL",
    "RANK_TOL",
    "FiniteCone",
    "Hypercone",
    "MeridianArc",
    "ArcError",
    "ConeMembership",
    "sample_arc",
    "rank_residual",
    "dependence_det3",
    "euclidean_cone_membership",
    "wedge_generators",
]

GENERATOR_MIN_NORM = 1e-12
ARC_INDEPENDENCE_TOL = 1e-10
RANK_TOL = 1e-8


class ArcError(ValueError):
    """Arc endpoints are not dual-unit or are linearly dependent."""


@dataclass(frozen=True, eq=False)
class FiniteCone:
    """Closed convex cone ``{sum_i lam_i g_i : lam >= 0}``.

    ``generators`` has shape ``(m, n)``, one generator per row. Duplicate or
    parallel generators are kept as given.
    """

    generators: np.ndarray

    def __post_init__(self):
        G = np.array(self.generators, dtype=float)
        if G.ndim == 1:
            G = G[None, :]
        if G.ndim != 2 or G.shape[0] < 1:
            raise ValueError("a cone needs at least one generator")
        if not np.all(np.isfinite(G)):
            raise ValueError("generators must be finite")
        if np.any(np.linalg.norm(G, axis=1) <= GENERATOR_MIN_NORM):
            raise ValueError("generators must be nonzero")
        G.setflags(write=False)
        object.__setattr__(self, "generators", G)

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @property
    def size(self) -> int:
        return self.generators.shape[0]

    def combine(self, coefficients) -> PrimalVec:
        return PrimalVec(np.asarray(coefficients, dtype=float) @ self.generators)

    def to_list(self) -> list:
        return self.generators.tolist()


@dataclass(frozen=True, eq=False)
class Hypercone:
    """Closed halfspace ``{x : <a, x> <= 0}`` with a dual-unit normal ``a``."""

    normal: DualVec

    @classmethod
    def from_normal(cls, space: Space, a) -> "Hypercone":
        a = np.asarray(a, dtype=float)
        na = float(space.dual_norm(a))
        if na <= 0:
            raise ValueError("hypercone normal must be nonzero")
        return cls(DualVec(a / na))

    def contains(self, x, tol: float = 0.0) -> bool:
        return float(np.dot(self.normal, x)) <= tol


@dataclass(frozen=True, eq=False)
class MeridianArc:
    """Arc of the dual unit sphere from ``a`` to ``b`` inside ``span{a, b}``.

    The arc is the set of normalized ``lam*a + mu*b`` with ``lam, mu >= 0``.
    Build it with :meth:`from_endpoints`, which normalizes and checks the
    endpoints against the space.
    """

    endpoint_a: DualVec
    endpoint_b: DualVec

    @classmethod
    def from_endpoints(cls, space: Space, a, b) -> "MeridianArc":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        na, nb = float(space.dual_norm(a)), float(space.dual_norm(b))
        if na <= 0 or nb <= 0:
            raise ArcError("arc endpoints must be nonzero")
        arc = cls(DualVec(a / na), DualVec(b / nb))
        arc.check(space)
        return arc

    def check(self, space: Space) -> None:
        a, b = self.endpoint_a, self.endpoint_b
        for name, v in (("a", a), ("b", b)):
            if abs(float(space.dual_norm(v)) - 1.0) > 1e-10:
                raise ArcError(f"endpoint {name} is not on the dual unit sphere")
        if rank_residual([a, b], 1) <= ARC_INDEPENDENCE_TOL:
            raise ArcError("arc endpoints are linearly dependent (b is ±a)")


def sample_arc(space: Space, arc: MeridianArc, m: int) -> np.ndarray:
    """``m`` dual-unit points ``c(t_i)`` along the arc, ``t_i = i/(m-1)``.

    ``c(t) = ((1-t)a + tb) / ||(1-t)a + tb||_*``; the first and last rows are
    exactly ``a`` and ``b``.
    """
    if m < 2:
        raise ValueError("need at least two arc samples")
    arc.check(space)
    t = np.linspace(0.0, 1.0, m)[:, None]
    c = (1.0 - t) * arc.endpoint_a + t * arc.endpoint_b
    c = c / space.dual_norm(c)[:, None]
    c[0], c[-1] = arc.endpoint_a, arc.endpoint_b
    return c


def rank_residual(vectors, target_rank: int) -> float:
    """``sigma_{r+1} / sigma_1`` of the row-stacked, unit-normalized vectors.

    Small values mean the vectors lie close to an ``r``-dimensional subspace.
    Zero rows are left as zero. Returns 0 when the matrix has no
    ``(r+1)``-th singular value.
    """
    V = np.array(vectors, dtype=float)
    if V.ndim != 2:
        raise ValueError("expected a list of vectors")
    if V.shape[0] <= target_rank:
        raise ValueError(f"need more than {target_rank} vectors, got {V.shape[0]}")
    lengths = np.linalg.norm(V, axis=1)
    nz = lengths > 0
    V[nz] /= lengths[nz, None]
    sv = np.linalg.svd(V, compute_uv=False)
    if sv.size <= target_rank or sv[0] == 0:
        return 0.0
    return float(sv[target_rank] / sv[0])


def dependence_det3(u, v, w) -> float:
    """Determinant of the 3x3 matrix with rows ``u, v, w``."""
    M = np.array([u, v, w], dtype=float)
    if M.shape != (3, 3):
        raise ValueError("dependence_det3 needs three 3-vectors")
    # explicit cofactor expansion keeps the integer cases exact
    return float(
        M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
        - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
        + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
    )


@dataclass(frozen=True)
class ConeMembership:
    inside: bool
    residual: float
    coefficients: np.ndarray


def euclidean_cone_membership(cone: FiniteCone, x, tol: float = 1e-9) -> ConeMembership:
    """Decide ``x in cone`` by nonnegative least squares ``min ||G lam - x||_2``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (cone.dim,):
        raise ValueError(f"dimension mismatch: cone in R^{cone.dim}, x has shape {x.shape}")
    lam, res = nnls(cone.generators.T, x)
    inside = res <= tol * max(1.0, float(np.linalg.norm(x)))
    return ConeMembership(bool(inside), float(res), lam)


def wedge_generators(a, b) -> np.ndarray:
    """Generators of ``{x : <a,x> <= 0, <b,x> <= 0}`` for independent ``a, b``.

    Two edge directions (each tight on one constraint, strict on the other)
    plus ``±`` an orthonormal basis of the common kernel.
    """
    C = np.array([a, b], dtype=float)
    pinv = np.linalg.pinv(C)
    edge_a = pinv @ np.array([0.0, -1.0])
    edge_b = pinv @ np.array([-1.0, 0.0])
    _, _, vt = np.linalg.svd(C)
    kernel = vt[2:]
    return np.vstack([edge_a, edge_b, kernel, -kernel])
