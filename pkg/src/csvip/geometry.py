"""Closed convex sets in R^n and their metric projections.

Every set family evaluates its nearest-point map either in closed form or
through a single linear-algebra solve.  The one exception is
``Intersection``, whose projection runs Dykstra's correction scheme on the
member projections until the iterate is feasible and has stopped moving.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    InconsistentSystemError,
    InvalidSetError,
)

__all__ = [
    "ConvexSet",
    "Halfspace",
    "Hyperplane",
    "Box",
    "Ball",
    "AffineSubspace",
    "Simplex",
    "WholeSpace",
    "Intersection",
    "as_vector",
    "project",
    "contains",
    "distance",
    "project_intersection",
]

# Relative residual above which a stacked system Ax = b is declared unsolvable.
_CONSISTENCY_RTOL = 1e-9


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array, optionally of length ``dim``."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise DimensionMismatchError("vectors must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise InvalidSetError("vector entries must be finite")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"expected a vector of length {dim}, got {v.size}")
    return v


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


class ConvexSet:
    """A nonempty closed convex subset of R^n with an exact projection."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        """Nearest point of the set to ``x`` in the Euclidean norm."""
        return self._project(as_vector(x, self.dim))

    def _project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self._project(x)))

    def contains(self, x, tol: float = 0.0) -> bool:
        """Whether ``x`` lies within ``tol`` of the set."""
        return self.distance(x) <= tol


@dataclass(frozen=True)
class Halfspace(ConvexSet):
    """``{x : <normal, x> <= offset}`` with a nonzero normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if not n.any():
            raise InvalidSetError("halfspace normal must be nonzero")
        if not np.isfinite(self.offset):
            raise InvalidSetError("halfspace offset must be finite")
        object.__setattr__(self, "normal", _frozen(n))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.size

    def _project(self, x: np.ndarray) -> np.ndarray:
        excess = float(self.normal @ x) - self.offset
        if excess <= 0.0:
            return x.copy()
        return x - (excess / float(self.normal @ self.normal)) * self.normal


@dataclass(frozen=True)
class Hyperplane(ConvexSet):
    """``{x : <normal, x> = offset}`` with a nonzero normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = as_vector(self.normal)
        if not n.any():
            raise InvalidSetError("hyperplane normal must be nonzero")
        if not np.isfinite(self.offset):
            raise InvalidSetError("hyperplane offset must be finite")
        object.__setattr__(self, "normal", _frozen(n))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.size

    def _project(self, x: np.ndarray) -> np.ndarray:
        excess = float(self.normal @ x) - self.offset
        return x - (excess / float(self.normal @ self.normal)) * self.normal


@dataclass(frozen=True)
class Box(ConvexSet):
    """Axis-aligned box ``{x : lower <= x <= upper}`` componentwise."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper, lo.size)
        if np.any(lo > hi):
            raise InvalidSetError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def dim(self) -> int:
        return self.lower.size

    def _project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class Ball(ConvexSet):
    """Euclidean ball of positive radius around ``center``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_vector(self.center)
        r = float(self.radius)
        if not (np.isfinite(r) and r > 0.0):
            raise InvalidSetError("ball radius must be positive and finite")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def _project(self, x: np.ndarray) -> np.ndarray:
        d = x - self.center
        gap = float(np.linalg.norm(d))
        if gap <= self.radius:
            return x.copy()
        return self.center + (self.radius / gap) * d


@dataclass(frozen=True)
class AffineSubspace(ConvexSet):
    """Solution set ``{x : matrix @ x = rhs}`` of a consistent linear system.

    The pseudoinverse of ``matrix`` is factored once at construction, so each
    projection costs two matrix-vector products.  Rank-deficient systems are
    fine; inconsistent ones are rejected because the set would be empty.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    _pinv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise InvalidSetError("affine subspace needs a nonempty 2-D matrix")
        if not np.all(np.isfinite(a)):
            raise InvalidSetError("affine subspace matrix must be finite")
        b = as_vector(self.rhs, a.shape[0])
        pinv = np.linalg.pinv(a)
        best = a @ (pinv @ b) - b
        if float(np.linalg.norm(best)) > _CONSISTENCY_RTOL * (1.0 + float(np.linalg.norm(b))):
            raise InconsistentSystemError("linear system has no solution; the set is empty")
        object.__setattr__(self, "matrix", _frozen(a))
        object.__setattr__(self, "rhs", _frozen(b))
        object.__setattr__(self, "_pinv", _frozen(pinv))

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def _project(self, x: np.ndarray) -> np.ndarray:
        # Minimum-norm correction back onto {Ax = b}.
        return x - self._pinv @ (self.matrix @ x - self.rhs)


@dataclass(frozen=True)
class Simplex(ConvexSet):
    """Standard simplex ``{x >= 0, sum(x) = 1}`` in R^dim."""

    ndim: int

    def __post_init__(self):
        if isinstance(self.ndim, bool) or not isinstance(self.ndim, int) or self.ndim < 1:
            raise InvalidSetError("simplex dimension must be a positive integer")

    @property
    def dim(self) -> int:
        return self.ndim

    def _project(self, x: np.ndarray) -> np.ndarray:
        # Sort-and-threshold rule: shift by the largest multiplier that keeps
        # the positive part summing to one.
        u = np.sort(x)[::-1]
        shifted = np.cumsum(u) - 1.0
        rho = int(np.nonzero(u * np.arange(1, x.size + 1) > shifted)[0][-1])
        theta = shifted[rho] / (rho + 1.0)
        return np.maximum(x - theta, 0.0)


@dataclass(frozen=True)
class WholeSpace(ConvexSet):
    """All of R^dim; projection is the identity."""

    ndim: int

    def __post_init__(self):
        if isinstance(self.ndim, bool) or not isinstance(self.ndim, int) or self.ndim < 1:
            raise InvalidSetError("dimension must be a positive integer")

    @property
    def dim(self) -> int:
        return self.ndim

    def _project(self, x: np.ndarray) -> np.ndarray:
        return x.copy()


@dataclass(frozen=True)
class Intersection(ConvexSet):
    """Intersection of finitely many convex sets of the same dimension.

    Projection is iterative (Dykstra's scheme), so it is exact only up to
    ``tol``; all other operations inherit that accuracy.
    """

    members: tuple
    tol: float = 1e-10
    max_iter: int = 100_000

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidSetError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise DimensionMismatchError(f"intersection members disagree on dimension: {sorted(dims)}")
        if not (self.tol > 0.0):
            raise InvalidSetError("intersection tolerance must be positive")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def _project(self, x: np.ndarray) -> np.ndarray:
        return project_intersection(self.members, x, tol=self.tol, max_iter=self.max_iter)


def project(s: ConvexSet, x) -> np.ndarray:
    """Nearest point of ``s`` to ``x``."""
    return s.project(x)


def contains(s: ConvexSet, x, tol: float = 0.0) -> bool:
    """Membership test with slack ``tol`` on the distance to ``s``."""
    return s.contains(x, tol=tol)


def distance(s: ConvexSet, x) -> float:
    """Euclidean distance from ``x`` to ``s``."""
    return s.distance(x)


def project_intersection(
    members: Iterable[ConvexSet] | Sequence[ConvexSet],
    x,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Project ``x`` onto the intersection of ``members`` with Dykstra's scheme.

    Each sweep projects onto every member in turn, carrying a correction term
    per member so the limit is the nearest point of the intersection rather
    than an arbitrary one.  Stops once the corrections change by at most
    ``tol`` over a full sweep (the iterate itself can stall for a sweep while
    corrections still move, so iterate displacement alone is unsound) and the
    iterate is within ``tol`` of every member.

    Raises ``ConvergenceError`` after ``max_iter`` sweeps without meeting the
    tolerance, which is the symptom of an empty intersection.
    """
    members = tuple(members)
    if not members:
        raise InvalidSetError("intersection needs at least one member")
    dims = {m.dim for m in members}
    if len(dims) != 1:
        raise DimensionMismatchError(f"intersection members disagree on dimension: {sorted(dims)}")
    y = as_vector(x, members[0].dim)
    if len(members) == 1:
        return members[0].project(y)

    corrections = [np.zeros_like(y) for _ in members]
    for _ in range(max_iter):
        drift = 0.0
        for i, member in enumerate(members):
            shifted = y + corrections[i]
            y = member.project(shifted)
            updated = shifted - y
            delta = updated - corrections[i]
            drift += float(delta @ delta)
            corrections[i] = updated
        if drift <= tol * tol:
            if max(member.distance(y) for member in members) <= tol:
                return y
    raise ConvergenceError(
        f"intersection projection did not stabilize in {max_iter} sweeps; "
        "the intersection may be empty"
    )
