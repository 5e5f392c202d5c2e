"""
Finite-dimensional smooth Banach norms and their normalized duality maps.

Two families are supported:

* ``LpSpace(dim, p)``: R^n with ``||x||_p``, ``1 < p < inf``. The dual is
  R^n with ``||a||_q``, ``q = p / (p - 1)``.
* ``QuadraticSpace(A)``: R^n with ``||x|| = <Ax, x>^(1/2)`` for a symmetric
  positive definite ``A``. The dual norm is ``<A^-1 a, a>^(1/2)``.

Dual vectors are stored in the same coordinates as primal vectors, so the
pairing ``<a, x>`` is a plain dot product. All maps accept a single vector of
shape ``(n,)`` or a batch of shape ``(k, n)`` and act along the last axis.

The normalized duality map ``J`` satisfies ``<Jx, x> = ||x||^2`` and
``||Jx||_* = ||x||``; its inverse ``J*`` maps the dual back to the primal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NewType, Union

import numpy as np
from scipy import linalg

__all__ = [
    "PrimalVec",
    "DualVec",
    "LpSpace",
    "QuadraticSpace",
    "Space",
    "InvalidSpaceError",
    "validate_space",
    "require_valid",
    "norm",
    "dual_norm",
    "pairing",
    "duality_map",
    "inverse_duality_map",
    "random_spd",
    "random_sphere",
]

# Static role tags only; at runtime both are plain float arrays.
PrimalVec = NewType("PrimalVec", np.ndarray)
DualVec = NewType("DualVec", np.ndarray)

SYMMETRY_RTOL = 1e-12


class InvalidSpaceError(ValueError):
    """Raised when an operation receives a space that fails validation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _power_duality_derivative(x, r):
    """Jacobian of ``_power_duality`` (Hessian of ``||x||_r^2 / 2``), shape ``(..., n, n)``.

    Degree-0 homogeneous. For ``r < 2`` the diagonal blows up at zero
    coordinates; those are floored at ``1e-12 * max|x_i|``.
    """
    s = np.max(np.abs(x), axis=-1, keepdims=True)
    safe = np.where(s > 0, s, 1.0)
    y = np.abs(x / safe)
    y = np.maximum(y, 1e-12)
    sgn = np.where(x < 0, -1.0, 1.0)
    ny = np.sum(y**r, axis=-1, keepdims=True) ** (1.0 / r)
    w = sgn * y ** (r - 1.0)
    outer = (2.0 - r) * ny[..., None] ** (2.0 - 2.0 * r) * w[..., :, None] * w[..., None, :]
    diag = (r - 1.0) * ny ** (2.0 - r) * y ** (r - 2.0)
    return outer + diag[..., :, None] * np.eye(x.shape[-1])


def _as_vectors(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise ValueError(f"dimension mismatch: expected last axis of length {dim}, got shape {x.shape}")
    return x


def _signed_power(x, e):
    # sign(x)|x|^e; e > 0 here, so zero coordinates map to zero without special-casing
    return np.sign(x) * np.abs(x) ** e


def _power_norm(x, r):
    """``||x||_r`` along the last axis, rescaled by max|x_i| to avoid overflow."""
    s = np.max(np.abs(x), axis=-1, keepdims=True)
    safe = np.where(s > 0, s, 1.0)
    y = np.abs(x / safe)
    return (s * np.sum(y**r, axis=-1, keepdims=True) ** (1.0 / r))[..., 0]


def _power_duality(x, r):
    """``||x||_r^(2-r) * sign(x)|x|^(r-1)``, degree-1 homogeneous, zero at 0."""
    if r == 2.0:
        return x.copy()
    s = np.max(np.abs(x), axis=-1, keepdims=True)
    safe = np.where(s > 0, s, 1.0)
    y = x / safe
    ny = np.sum(np.abs(y) ** r, axis=-1, keepdims=True) ** (1.0 / r)
    ny = np.where(s > 0, ny, 1.0)
    return s * ny ** (2.0 - r) * _signed_power(y, r - 1.0)


@dataclass(frozen=True)
class LpSpace:
    """R^n with the ``p``-norm."""

    dim: int
    p: float

    @property
    def q(self) -> float:
        """Conjugate exponent, ``1/p + 1/q = 1``."""
        if self.p <= 1:
            return float("inf")
        return self.p / (self.p - 1.0)

    @property
    def kind(self) -> str:
        return "lp"

    def norm(self, x):
        return _power_norm(_as_vectors(x, self.dim), self.p)

    def dual_norm(self, a):
        return _power_norm(_as_vectors(a, self.dim), self.q)

    def duality_map(self, x):
        return _power_duality(_as_vectors(x, self.dim), self.p)

    def inverse_duality_map(self, a):
        return _power_duality(_as_vectors(a, self.dim), self.q)

    def duality_derivative(self, x):
        return _power_duality_derivative(_as_vectors(x, self.dim), self.p)

    def to_dict(self) -> dict:
        return {"kind": "lp", "dim": int(self.dim), "p": float(self.p)}

    def __str__(self):
        return f"Lp(dim={self.dim}, p={self.p:g})"


@dataclass(frozen=True, eq=False)
class QuadraticSpace:
    """R^n with ``||x|| = sqrt(x^T A x)`` for symmetric positive definite ``A``.

    The Cholesky factor of ``A`` is computed once here and reused by the
    dual norm and by ``J* a = A^-1 a``. If ``A`` is not positive definite the
    factor is left as ``None`` and :func:`validate_space` reports it.
    """

    matrix: np.ndarray
    _chol: tuple | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        chol = None
        if A.ndim == 2 and A.shape[0] == A.shape[1] and np.all(np.isfinite(A)):
            try:
                chol = linalg.cho_factor(A, lower=True, check_finite=False)
            except linalg.LinAlgError:
                chol = None
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0]) if self.matrix.ndim >= 1 else 0

    @property
    def kind(self) -> str:
        return "quadratic"

    def _solve(self, a):
        if self._chol is None:
            raise InvalidSpaceError(["matrix not positive definite"])
        flat = a.reshape(-1, self.dim).T
        return linalg.cho_solve(self._chol, flat, check_finite=False).T.reshape(a.shape)

    def norm(self, x):
        x = _as_vectors(x, self.dim)
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, self.matrix, x), 0.0))

    def dual_norm(self, a):
        a = _as_vectors(a, self.dim)
        return np.sqrt(np.maximum(np.sum(a * self._solve(a), axis=-1), 0.0))

    def duality_map(self, x):
        return _as_vectors(x, self.dim) @ self.matrix

    def inverse_duality_map(self, a):
        return self._solve(_as_vectors(a, self.dim))

    def duality_derivative(self, x):
        x = _as_vectors(x, self.dim)
        return np.broadcast_to(self.matrix, x.shape + (self.dim,))

    def to_dict(self) -> dict:
        return {"kind": "quadratic", "dim": self.dim, "matrix": self.matrix.tolist()}

    def __str__(self):
        return f"Quadratic(dim={self.dim})"


Space = Union[LpSpace, QuadraticSpace]


def validate_space(space: Space) -> list[str]:
    """Return the list of violated invariants; an empty list means the space is usable."""
    errors = []
    if isinstance(space, LpSpace):
        if int(space.dim) != space.dim or space.dim < 2:
            errors.append("dimension must be an integer >= 2")
        if not (np.isfinite(space.p) and 1.0 < space.p):
            errors.append("p must satisfy 1<p<∞")
    elif isinstance(space, QuadraticSpace):
        A = space.matrix
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            return ["matrix must be square"]
        if A.shape[0] < 2:
            errors.append("dimension must be an integer >= 2")
        if not np.all(np.isfinite(A)):
            return errors + ["matrix has non-finite entries"]
        scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
        if np.max(np.abs(A - A.T)) > SYMMETRY_RTOL * scale:
            errors.append("matrix not symmetric")
        elif A.size and np.linalg.eigvalsh(A)[0] <= 0:
            errors.append("matrix not positive definite")
        elif space._chol is None:
            errors.append("matrix not positive definite")
    else:
        errors.append(f"unknown space type {type(space).__name__}")
    return errors


def require_valid(space: Space) -> None:
    errors = validate_space(space)
    if errors:
        raise InvalidSpaceError(errors)


def norm(space: Space, x: PrimalVec):
    return space.norm(x)


def dual_norm(space: Space, a: DualVec):
    return space.dual_norm(a)


def pairing(a: DualVec, x: PrimalVec):
    """Duality pairing ``<a, x>``; a dot product along the last axis."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.shape[-1:] != x.shape[-1:]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {x.shape}")
    return np.sum(a * x, axis=-1)


def duality_map(space: Space, x: PrimalVec) -> DualVec:
    """Normalized duality map ``J``.

    For ``Lp`` this is ``||x||_p^(2-p) * sign(x_i)|x_i|^(p-1)``; for the
    quadratic norm it is ``A x``.
    """
    return DualVec(space.duality_map(x))


def inverse_duality_map(space: Space, a: DualVec) -> PrimalVec:
    """Inverse duality map ``J* = J^-1`` (``q``-analogue of ``J``, or ``A^-1 a``)."""
    return PrimalVec(space.inverse_duality_map(a))


def random_spd(dim: int, rng: np.random.Generator, cond: float = 10.0) -> np.ndarray:
    """Random symmetric positive definite matrix with eigenvalues in ``[1, cond]``."""
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eig = np.exp(rng.uniform(0.0, np.log(cond), size=dim))
    eig[0], eig[-1] = 1.0, cond
    A = (Q * eig) @ Q.T
    return 0.5 * (A + A.T)


def random_sphere(space: Space, rng: np.random.Generator, size: int | None = None, dual: bool = False):
    """Normalized Gaussian samples on the unit sphere of the space (or its dual)."""
    shape = (space.dim,) if size is None else (size, space.dim)
    g = rng.standard_normal(shape)
    nrm = space.dual_norm(g) if dual else space.norm(g)
    return g / np.asarray(nrm)[..., None]
