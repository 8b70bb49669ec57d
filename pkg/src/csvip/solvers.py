"""Iteration schemes for common-solution variational-inequality problems.

All schemes share one skeleton: build the projected forward step of every
instance at a common admissible step length, then drive a fixed-point
iteration whose update is scheme-specific (alternate, compose, average, or
follow an index schedule).  Termination, tracing, and divergence detection
are identical across schemes so their traces are directly comparable.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .diagnostics import DEFAULT_THRESHOLD, DEFAULT_WINDOW, norm_growth_verdict
from .errors import InvalidProblemError
from .geometry import as_vector
from .operators import StepSize, validate_step, vip_residual
from .problem import (
    CsvipProblem,
    IterationTrace,
    RunResult,
    RunStatus,
    Schedule,
    StopRule,
)

__all__ = [
    "default_step",
    "solve_alternating",
    "solve_sequential",
    "solve_parallel",
    "solve_unrestricted",
]


def default_step(problem: CsvipProblem, lam: float | None = None) -> StepSize:
    """Validated step for a problem; with ``lam=None`` picks the midpoint
    of the admissible interval (the smallest certified ism constant)."""
    return validate_step(lam, problem.alphas)


def _drive(
    problem: CsvipProblem,
    step: StepSize | None,
    x0,
    stop: StopRule | None,
    make_advance: Callable,
    record_intermediate: bool,
) -> RunResult:
    """Shared iteration loop.

    ``make_advance(ops)`` returns ``advance(x) -> (x_next, intermediates)``.
    Stop conditions are checked in priority order: convergence, stall,
    divergence, iteration budget.
    """
    stop = stop if stop is not None else StopRule()
    step = validate_step(step.lam if step is not None else None, problem.alphas)
    ops = problem.step_operators(step)
    x = np.zeros(problem.dim) if x0 is None else np.array(as_vector(x0, problem.dim))
    advance = make_advance(ops)

    trace = IterationTrace(intermediate=[] if record_intermediate else None)

    def record(point: np.ndarray) -> float:
        row = [vip_residual(t, point) for t in ops]
        trace.iterates.append(point)
        trace.instance_residuals.append(row)
        worst = max(row)
        trace.residuals.append(worst)
        return worst

    norms = [float(np.linalg.norm(x))]
    status = RunStatus.MAX_ITERS
    if record(x) <= stop.residual_tol:
        status = RunStatus.CONVERGED
    else:
        for _ in range(stop.max_iters):
            x_next, mids = advance(x)
            if record_intermediate:
                trace.intermediate.extend(mids)
            worst = record(x_next)
            moved = float(np.linalg.norm(x_next - x))
            norms.append(float(np.linalg.norm(x_next)))
            x = x_next
            if worst <= stop.residual_tol:
                status = RunStatus.CONVERGED
                break
            if stop.stall_tol > 0.0 and moved < stop.stall_tol:
                status = RunStatus.STALLED
                break
            if norm_growth_verdict(norms, DEFAULT_WINDOW, DEFAULT_THRESHOLD) == "growing":
                status = RunStatus.DIVERGING
                break
    return RunResult(status=status, solution=x, trace=trace, step=step)


def solve_alternating(
    problem: CsvipProblem,
    step: StepSize | None = None,
    x0=None,
    stop: StopRule | None = None,
) -> RunResult:
    """Two-instance scheme alternating both projected forward steps.

    Each iteration applies instance 1 to reach the recorded half-step point,
    then instance 0 to produce the next iterate.  With zero operators this
    reduces to alternating projections between the two sets.

    Parameters
    ----------
    problem : two-instance problem.
    step : validated step; ``None`` picks the default for the problem.
    x0 : starting point; ``None`` means the origin.
    stop : termination thresholds; ``None`` means defaults.
    """
    if problem.n_instances != 2:
        raise InvalidProblemError(
            f"alternating scheme needs exactly 2 instances, got {problem.n_instances}"
        )

    def make_advance(ops):
        first, second = ops[1], ops[0]

        def advance(x):
            y = first.apply(x)
            return second.apply(y), [y]

        return advance

    return _drive(problem, step, x0, stop, make_advance, record_intermediate=True)


def solve_sequential(
    problem: CsvipProblem,
    step: StepSize | None = None,
    x0=None,
    stop: StopRule | None = None,
) -> RunResult:
    """Cyclic composition scheme: one iteration sweeps all instances.

    The sweep applies the step operators in descending index order, so
    instance 0 acts last.  With two instances the iterates coincide exactly
    with the alternating scheme's.
    """

    def make_advance(ops):
        ordered = tuple(reversed(ops))

        def advance(x):
            y = x
            for t in ordered:
                y = t.apply(y)
            return y, []

        return advance

    return _drive(problem, step, x0, stop, make_advance, record_intermediate=False)


def solve_parallel(
    problem: CsvipProblem,
    step: StepSize | None = None,
    x0=None,
    stop: StopRule | None = None,
) -> RunResult:
    """Simultaneous scheme: convex combination of all projected steps.

    Uses the problem's weights (uniform when unspecified); the combination is
    accumulated in ascending instance order so reruns are bit-identical.
    """
    weights = problem.effective_weights()

    def make_advance(ops):
        def advance(x):
            acc = weights[0] * ops[0].apply(x)
            for i in range(1, len(ops)):
                acc = acc + weights[i] * ops[i].apply(x)
            return acc, []

        return advance

    return _drive(problem, step, x0, stop, make_advance, record_intermediate=False)


def solve_unrestricted(
    problem: CsvipProblem,
    schedule: Schedule,
    step: StepSize | None = None,
    x0=None,
    stop: StopRule | None = None,
) -> RunResult:
    """One-instance-per-iteration scheme following an index schedule.

    The schedule may visit instances in any order (cyclic, seeded random, or
    an explicit pattern); convergence is still judged on the residuals of all
    instances, so lingering on one instance cannot fake success.
    """
    stream = schedule.stream(problem.n_instances)

    def make_advance(ops):
        def advance(x):
            return ops[next(stream)].apply(x), []

        return advance

    return _drive(problem, step, x0, stop, make_advance, record_intermediate=False)
