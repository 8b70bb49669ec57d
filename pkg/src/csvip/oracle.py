"""Independent reference solvers used to corroborate the main schemes.

Each oracle attacks a single instance with a different algorithm family than
the iterative schemes: a double-projection (extragradient) method, a direct
linear-algebra solve for subspace intersections, and exhaustive grid search
in small dimensions.  Agreement between a scheme and an oracle is therefore
evidence, not circular confirmation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InconsistentSystemError, OracleError, StepSizeError
from .geometry import AffineSubspace, Box, ConvexSet, as_vector
from .operators import IsmOperator, StepOperator, StepSize, vip_residual

__all__ = [
    "OracleResult",
    "extragradient_solve",
    "subspace_intersection_projection",
    "grid_search_vip",
]

_CONSISTENCY_RTOL = 1e-8


@dataclass(frozen=True)
class OracleResult:
    """A reference point with the residual certifying it and the method used."""

    point: np.ndarray
    certified_residual: float
    method: str


def _residual_operator(region: ConvexSet, op: IsmOperator, lam: float) -> StepOperator:
    return StepOperator(set=region, op=op, step=StepSize(lam=lam, alpha_bound=op.alpha))


def extragradient_solve(
    instance: tuple[ConvexSet, IsmOperator],
    lam: float | None = None,
    x0=None,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
) -> OracleResult:
    """Solve one variational inequality by the double-projection method.

    Each iteration takes a trial projected step, re-evaluates the operator at
    the trial point, and projects again, a different update family than the
    single-projection schemes.  Requires ``lam < alpha`` (i.e. below the
    reciprocal Lipschitz constant); ``lam=None`` picks ``0.9 * alpha`` or
    1.0 when the constant is infinite.
    """
    region, op = instance
    if lam is None:
        lam = 0.9 * op.alpha if math.isfinite(op.alpha) else 1.0
    lam = float(lam)
    if not (0.0 < lam) or (math.isfinite(op.alpha) and lam >= op.alpha):
        raise StepSizeError(f"extragradient needs 0 < lam < {op.alpha}, got {lam}")
    check = _residual_operator(region, op, lam)
    x = np.zeros(region.dim) if x0 is None else np.array(as_vector(x0, region.dim))
    for _ in range(max_iter):
        r = vip_residual(check, x)
        if r <= tol:
            return OracleResult(point=x, certified_residual=r, method="extragradient")
        trial = region.project(x - lam * op.apply(x))
        x = region.project(x - lam * op.apply(trial))
    raise ConvergenceError(
        f"extragradient did not reach tolerance {tol} in {max_iter} iterations"
    )


def subspace_intersection_projection(a: AffineSubspace, b: AffineSubspace, x) -> OracleResult:
    """Exact projection onto the intersection of two affine subspaces.

    Stacks both linear systems and projects through one minimum-norm solve;
    no iteration is involved.  Raises ``InconsistentSystemError`` when the
    stacked system is unsolvable (empty intersection).
    """
    if a.dim != b.dim:
        raise OracleError(f"subspace dimensions differ: {a.dim} vs {b.dim}")
    x = as_vector(x, a.dim)
    stacked = np.vstack([a.matrix, b.matrix])
    rhs = np.concatenate([a.rhs, b.rhs])
    pinv = np.linalg.pinv(stacked)
    feas = stacked @ (pinv @ rhs) - rhs
    if float(np.linalg.norm(feas)) > _CONSISTENCY_RTOL * (1.0 + float(np.linalg.norm(rhs))):
        raise InconsistentSystemError("stacked system is unsolvable; the subspaces do not meet")
    point = x - pinv @ (stacked @ x - rhs)
    defect = max(
        float(np.linalg.norm(a.matrix @ point - a.rhs)),
        float(np.linalg.norm(b.matrix @ point - b.rhs)),
    )
    return OracleResult(point=point, certified_residual=defect, method="analytic_subspace")


def grid_search_vip(
    instance: tuple[ConvexSet, IsmOperator],
    bounds: Box,
    resolution: float,
    lam: float | None = None,
    membership_tol: float = 1e-9,
) -> OracleResult:
    """Exhaustively minimize the fixed-point residual over a grid.

    Enumerates an axis-aligned grid of spacing at most ``resolution`` over
    ``bounds``, keeps the grid points inside the instance's set, and returns
    the one with the smallest residual (first in lexicographic order on
    ties).  Cost grows as ``(extent / resolution) ** dim``, so the ambient
    dimension is capped at 3.
    """
    region, op = instance
    if region.dim > 3:
        raise OracleError(f"grid search supports dimension <= 3, got {region.dim}")
    if bounds.dim != region.dim:
        raise OracleError(f"bounds dimension {bounds.dim} != instance dimension {region.dim}")
    if not (resolution > 0.0):
        raise OracleError("grid resolution must be positive")
    if lam is None:
        lam = op.alpha if math.isfinite(op.alpha) else 1.0
    check = _residual_operator(region, op, float(lam))

    axes = []
    for lo, hi in zip(bounds.lower, bounds.upper):
        # Smallest axis count whose spacing does not exceed the resolution.
        count = int(math.ceil((hi - lo) / resolution - 1e-9)) + 1
        axes.append(np.linspace(lo, hi, count) if count > 1 else np.array([lo]))

    best_point = None
    best_residual = math.inf
    point = np.empty(region.dim)
    for idx in np.ndindex(*(len(ax) for ax in axes)):
        for j, ax in enumerate(axes):
            point[j] = ax[idx[j]]
        if region.distance(point) > membership_tol:
            continue
        r = vip_residual(check, point)
        if r < best_residual:
            best_residual = r
            best_point = point.copy()
    if best_point is None:
        raise OracleError("no grid point lies inside the set; widen the bounds or refine the grid")
    return OracleResult(point=best_point, certified_residual=best_residual, method="grid")
