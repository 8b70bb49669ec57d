"""Inverse-strongly-monotone operators and projected forward steps.

An operator ``h`` is alpha-inverse-strongly-monotone (alpha-ism) when

    <h(x) - h(y), x - y>  >=  alpha * ||h(x) - h(y)||**2

for all x, y.  Such an operator is Lipschitz with constant 1/alpha, and the
projected forward step ``x -> P(x - lam * h(x))`` is an averaged (hence
nonexpansive) map whenever ``0 < lam < 2 * alpha``.  That open interval is the
admissibility condition every solver in this package enforces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NotIsmError, StepSizeError
from .geometry import ConvexSet, as_vector

__all__ = [
    "IsmOperator",
    "ZeroOperator",
    "ConstantOperator",
    "AffineOperator",
    "largest_ism_constant",
    "estimate_ism_constant",
    "StepSize",
    "validate_step",
    "forward_step",
    "StepOperator",
    "step_operator_apply",
    "vip_residual",
    "PairCheck",
    "OperatorClassReport",
    "check_operator_class",
]

# Certified constants below this fraction of the 1/||M|| scale are treated as
# zero: the operator is monotone but not ism for any useful modulus.
_ALPHA_FLOOR_REL = 1e-8
# Relative precision of the bisection for the largest certified constant.
_BISECT_RTOL = 1e-10
# Slack allowed on the smallest eigenvalue when declaring a matrix PSD.
_PSD_RTOL = 1e-12


class IsmOperator:
    """Single-valued operator on R^dim with a certified ism constant."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def alpha(self) -> float:
        """Certified ism constant; ``math.inf`` when any constant works."""
        raise NotImplementedError

    def apply(self, x) -> np.ndarray:
        return self._apply(as_vector(x, self.dim))

    def _apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)


@dataclass(frozen=True)
class ZeroOperator(IsmOperator):
    """h(x) = 0.  Both sides of the ism inequality vanish, so alpha = inf."""

    ndim: int

    def __post_init__(self):
        if isinstance(self.ndim, bool) or not isinstance(self.ndim, int) or self.ndim < 1:
            raise DimensionMismatchError("operator dimension must be a positive integer")

    @property
    def dim(self) -> int:
        return self.ndim

    @property
    def alpha(self) -> float:
        return math.inf

    def _apply(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x)


@dataclass(frozen=True)
class ConstantOperator(IsmOperator):
    """h(x) = value.  Differences vanish, so alpha = inf."""

    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", _freeze(as_vector(self.value)))

    @property
    def dim(self) -> int:
        return self.value.size

    @property
    def alpha(self) -> float:
        return math.inf

    def _apply(self, x: np.ndarray) -> np.ndarray:
        return self.value.copy()


@dataclass(frozen=True)
class AffineOperator(IsmOperator):
    """h(x) = matrix @ x + shift with the ism constant certified at construction.

    ``alpha_claim`` lets callers declare a constant obtained elsewhere; it is
    accepted only when it does not exceed the certified value (with a small
    comparison slack), and the smaller of the two is kept.
    """

    matrix: np.ndarray
    shift: np.ndarray | None = None
    alpha_claim: float | None = None
    _alpha: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionMismatchError("affine operator matrix must be square and nonempty")
        if not np.all(np.isfinite(m)):
            raise NotIsmError("affine operator matrix must be finite")
        shift = np.zeros(m.shape[0]) if self.shift is None else as_vector(self.shift, m.shape[0])
        certified = largest_ism_constant(m)
        alpha = certified
        if self.alpha_claim is not None:
            claim = float(self.alpha_claim)
            if not (claim > 0.0):
                raise NotIsmError("declared ism constant must be positive")
            if claim > certified + 1e-9:
                raise NotIsmError(
                    f"declared ism constant {claim} exceeds the certified value {certified}"
                )
            alpha = min(claim, certified)
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "shift", _freeze(shift))
        object.__setattr__(self, "_alpha", alpha)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def alpha(self) -> float:
        return self._alpha

    def _apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.shift


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def largest_ism_constant(matrix) -> float:
    """Largest beta with ``(M + M^T)/2 - beta * M^T M`` positive semidefinite.

    For h(x) = Mx + c the ism inequality reads
    ``<M d, d> >= beta * ||M d||**2`` for all d, which is exactly that matrix
    inequality.  The value is bracketed by bisection to relative precision
    1e-10; the zero matrix returns ``math.inf`` since any constant certifies.

    Raises ``NotIsmError`` when the symmetric part is indefinite or the
    largest admissible beta is numerically zero (e.g. skew-dominated M).
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError("ism certification needs a square matrix")
    if not np.all(np.isfinite(m)):
        raise NotIsmError("ism certification needs a finite matrix")
    if not m.any():
        return math.inf

    sym = 0.5 * (m + m.T)
    gram = m.T @ m
    spectral = float(np.linalg.norm(m, 2))
    scale = max(1.0, float(np.abs(sym).max()))
    if float(np.linalg.eigvalsh(sym)[0]) < -_PSD_RTOL * scale:
        raise NotIsmError("symmetric part is not positive semidefinite")

    def min_eig(beta: float) -> float:
        return float(np.linalg.eigvalsh(sym - beta * gram)[0])

    def psd(beta: float) -> bool:
        slack = _PSD_RTOL * max(scale, beta * float(np.abs(gram).max()))
        return min_eig(beta) >= -slack

    # beta* never exceeds 1/||M||_2: test with the top singular direction.
    hi = 1.0 / spectral
    if psd(hi):
        return hi
    lo = 0.0
    while hi - lo > _BISECT_RTOL * (1.0 / spectral):
        mid = 0.5 * (lo + hi)
        if psd(mid):
            lo = mid
        else:
            hi = mid
    if lo <= _ALPHA_FLOOR_REL / spectral:
        raise NotIsmError("matrix admits no positive ism constant")
    return lo


def estimate_ism_constant(op: IsmOperator) -> float:
    """Certified ism constant for ``op``; ``math.inf`` for zero/constant maps."""
    if isinstance(op, AffineOperator):
        return largest_ism_constant(op.matrix)
    if isinstance(op, (ZeroOperator, ConstantOperator)):
        return math.inf
    raise NotIsmError(f"no certification rule for operator type {type(op).__name__}")


@dataclass(frozen=True)
class StepSize:
    """A validated step length together with the bound it was checked against."""

    lam: float
    alpha_bound: float


def validate_step(lam: float | None, alphas: Sequence[float]) -> StepSize:
    """Check ``0 < lam < 2 * min(alphas)`` and return the validated step.

    ``lam=None`` selects the midpoint of the admissible interval, i.e. the
    smallest certified constant itself.  That default is unavailable when all
    operators carry the infinite sentinel, in which case the caller must pick
    a concrete value.
    """
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise StepSizeError("at least one ism constant is required")
    for a in alphas:
        if not (a > 0.0):
            raise StepSizeError(f"ism constants must be positive, got {a}")
    bound = min(alphas)
    if lam is None:
        if math.isinf(bound):
            raise StepSizeError(
                "all operators accept any step; supply an explicit step length"
            )
        lam = bound
    lam = float(lam)
    if not (0.0 < lam < 2.0 * bound):
        raise StepSizeError(f"step length {lam} outside the open interval (0, {2.0 * bound})")
    return StepSize(lam=lam, alpha_bound=bound)


def forward_step(op: IsmOperator, step: StepSize, x) -> np.ndarray:
    """Explicit step ``x - lam * h(x)``."""
    x = as_vector(x, op.dim)
    return x - step.lam * op.apply(x)


@dataclass(frozen=True)
class StepOperator:
    """Projected forward step ``T(x) = P_set(x - lam * op(x))``.

    Solutions of the variational inequality over ``set`` are exactly the
    fixed points of ``T``, for any admissible step length.
    """

    set: ConvexSet
    op: IsmOperator
    step: StepSize

    def __post_init__(self):
        if self.set.dim != self.op.dim:
            raise DimensionMismatchError(
                f"set dimension {self.set.dim} != operator dimension {self.op.dim}"
            )
        if not (0.0 < self.step.lam < 2.0 * self.op.alpha):
            raise StepSizeError(
                f"step length {self.step.lam} inadmissible for ism constant {self.op.alpha}"
            )

    @property
    def dim(self) -> int:
        return self.set.dim

    def apply(self, x) -> np.ndarray:
        return self.set.project(forward_step(self.op, self.step, x))

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)


def step_operator_apply(t: StepOperator, x) -> np.ndarray:
    """One application of the projected forward step."""
    return t.apply(x)


def vip_residual(t: StepOperator, x) -> float:
    """Fixed-point residual ``||x - T(x)||``; zero exactly at solutions."""
    x = as_vector(x, t.dim)
    return float(np.linalg.norm(x - t.apply(x)))


@dataclass(frozen=True)
class PairCheck:
    """Diagnostics for one sample pair (x, y)."""

    nonexpansive_margin: float
    complement_ism_ratio: float | None


@dataclass(frozen=True)
class OperatorClassReport:
    """Sampled evidence that a map is nonexpansive and averaged.

    ``nonexpansive_margin`` is ``||x - y|| - ||T(x) - T(y)||`` per pair; it
    should never be materially negative.  ``complement_ism_ratio`` is
    ``<g(x) - g(y), x - y> / ||g(x) - g(y)||**2`` for the complement
    ``g = I - T``; ratios above 1/2 are the sampled signature of an averaged
    map.  The ratio is omitted when the denominator is below ``1e-12``.
    """

    pairs: tuple[PairCheck, ...]

    @property
    def min_margin(self) -> float:
        return min(p.nonexpansive_margin for p in self.pairs)

    @property
    def min_ratio(self) -> float | None:
        ratios = [p.complement_ism_ratio for p in self.pairs if p.complement_ism_ratio is not None]
        return min(ratios) if ratios else None


def check_operator_class(t: StepOperator, pairs: Sequence[tuple]) -> OperatorClassReport:
    """Evaluate nonexpansiveness and complement-ism evidence on sample pairs."""
    if not pairs:
        raise ValueError("at least one sample pair is required")
    checks = []
    for x, y in pairs:
        x = as_vector(x, t.dim)
        y = as_vector(y, t.dim)
        tx = t.apply(x)
        ty = t.apply(y)
        margin = float(np.linalg.norm(x - y) - np.linalg.norm(tx - ty))
        gx = x - tx
        gy = y - ty
        dg = gx - gy
        denom = float(dg @ dg)
        ratio = float(dg @ (x - y)) / denom if denom > 1e-12 else None
        checks.append(PairCheck(nonexpansive_margin=margin, complement_ism_ratio=ratio))
    return OperatorClassReport(pairs=tuple(checks))
