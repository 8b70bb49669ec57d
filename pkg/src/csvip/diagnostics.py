"""Run diagnostics: monotone-distance checks, growth detection, residuals.

Iterations built from averaged maps shrink the distance to every common
solution monotonically, so a violation of that monotonicity at a known
solution indicates a bug or an inadmissible step.  Conversely, when no common
solution exists the iterates drift to infinity; the growth monitor turns that
symptom into a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import as_vector
from .operators import StepSize, vip_residual
from .problem import CsvipProblem, IterationTrace

__all__ = [
    "FejerReport",
    "fejer_check",
    "DivergenceStatus",
    "divergence_monitor",
    "norm_growth_verdict",
    "residual_series",
    "DEFAULT_WINDOW",
    "DEFAULT_THRESHOLD",
]

DEFAULT_WINDOW = 50
DEFAULT_THRESHOLD = 1e3

# Trailing norms within this relative band count as settled ("bounded").
_BOUNDED_BAND_REL = 1e-6


@dataclass(frozen=True)
class FejerReport:
    """Distance-monotonicity audit of a trace against a reference point.

    ``violations`` lists ``(k, increase)`` for every step where the distance
    to the reference grew by more than the tolerance; ``max_increase`` is the
    largest raw step-to-step change (nonpositive on a clean trace).
    """

    reference: np.ndarray
    distances: tuple[float, ...]
    violations: tuple[tuple[int, float], ...]
    max_increase: float

    @property
    def clean(self) -> bool:
        return not self.violations


def fejer_check(trace: IterationTrace, reference, tol: float = 1e-12) -> FejerReport:
    """Audit ``||x^{k+1} - z|| <= ||x^k - z|| + tol`` along a trace.

    ``reference`` should be a known common solution; the guarantee only holds
    at such points.
    """
    if not trace.iterates:
        raise ValueError("cannot audit an empty trace")
    z = as_vector(reference, trace.iterates[0].size)
    dists = [float(np.linalg.norm(x - z)) for x in trace.iterates]
    violations = []
    max_increase = 0.0 if len(dists) < 2 else -np.inf
    for k in range(len(dists) - 1):
        increase = dists[k + 1] - dists[k]
        max_increase = max(max_increase, increase)
        if increase > tol:
            violations.append((k, increase))
    return FejerReport(
        reference=z,
        distances=tuple(dists),
        violations=tuple(violations),
        max_increase=float(max_increase),
    )


@dataclass(frozen=True)
class DivergenceStatus:
    """Growth verdict over a trace: ``growing``, ``bounded``, or ``inconclusive``."""

    verdict: str
    norms: tuple[float, ...]


def norm_growth_verdict(norms: Sequence[float], window: int, threshold: float) -> str:
    """Classify a series of iterate norms.

    ``growing``: the last ``window`` steps all increased strictly and the
    final norm exceeds ``threshold * (1 + norms[0])``.  ``bounded``: the
    trailing window sits inside a narrow band, the signature of a settled
    run.  Anything else, including series shorter than ``window + 1``, is
    ``inconclusive``.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    if len(norms) < window + 1:
        return "inconclusive"
    tail = list(norms[-(window + 1):])
    if all(b > a for a, b in zip(tail, tail[1:])) and norms[-1] > threshold * (1.0 + norms[0]):
        return "growing"
    spread = max(tail) - min(tail)
    if spread <= _BOUNDED_BAND_REL * (1.0 + max(tail)):
        return "bounded"
    return "inconclusive"


def divergence_monitor(
    trace: IterationTrace,
    window: int = DEFAULT_WINDOW,
    threshold: float = DEFAULT_THRESHOLD,
) -> DivergenceStatus:
    """Detect the unbounded drift that signals an unsolvable problem."""
    if not trace.iterates:
        raise ValueError("cannot monitor an empty trace")
    norms = tuple(float(np.linalg.norm(x)) for x in trace.iterates)
    return DivergenceStatus(verdict=norm_growth_verdict(norms, window, threshold), norms=norms)


def residual_series(problem: CsvipProblem, trace: IterationTrace, step: StepSize) -> list[list[float]]:
    """Per-instance fixed-point residuals at every iterate of a trace.

    Row ``k`` holds ``||x^k - T_i(x^k)||`` for each instance ``i``; the last
    row reproduces the residuals stored in the trace.
    """
    if not trace.iterates:
        raise ValueError("cannot evaluate residuals on an empty trace")
    ops = problem.step_operators(step)
    return [[vip_residual(t, x) for t in ops] for x in trace.iterates]
