"""Problem instances, index schedules, stop rules, and run records."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidProblemError, ScheduleError
from .geometry import ConvexSet
from .operators import IsmOperator, StepOperator, StepSize

__all__ = [
    "CsvipProblem",
    "Schedule",
    "Cyclic",
    "RandomSchedule",
    "ExplicitSchedule",
    "StopRule",
    "RunStatus",
    "IterationTrace",
    "RunResult",
]


@dataclass(frozen=True)
class CsvipProblem:
    """A finite family of (set, operator) pairs sharing one ambient dimension.

    A common solution is a point solving the variational inequality of every
    pair simultaneously.  ``weights`` are only consumed by the parallel
    solver; ``None`` means uniform.
    """

    instances: tuple[tuple[ConvexSet, IsmOperator], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        instances = tuple((s, h) for s, h in self.instances)
        if not instances:
            raise InvalidProblemError("a problem needs at least one instance")
        dim = instances[0][0].dim
        for i, (s, h) in enumerate(instances):
            if s.dim != dim or h.dim != dim:
                raise DimensionMismatchError(
                    f"instance {i} has dimensions (set={s.dim}, op={h.dim}), expected {dim}"
                )
        object.__setattr__(self, "instances", instances)
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != len(instances):
                raise InvalidProblemError(
                    f"{len(w)} weights for {len(instances)} instances"
                )
            if any(v < 0.0 for v in w):
                raise InvalidProblemError("weights must be nonnegative")
            if abs(sum(w) - 1.0) > 1e-12:
                raise InvalidProblemError("weights must sum to one")
            object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.instances[0][0].dim

    @property
    def n_instances(self) -> int:
        return len(self.instances)

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(h.alpha for _, h in self.instances)

    def step_operators(self, step: StepSize) -> tuple[StepOperator, ...]:
        """Projected forward steps of every instance at a shared step length."""
        return tuple(StepOperator(set=s, op=h, step=step) for s, h in self.instances)

    def effective_weights(self) -> tuple[float, ...]:
        if self.weights is not None:
            return self.weights
        return (1.0 / self.n_instances,) * self.n_instances


class Schedule:
    """Order in which instances are visited by the one-at-a-time solver."""

    def stream(self, n_instances: int) -> Iterator[int]:
        raise NotImplementedError


@dataclass(frozen=True)
class Cyclic(Schedule):
    """Indices 0, 1, ..., N-1 repeated forever."""

    def stream(self, n_instances: int) -> Iterator[int]:
        _check_count(n_instances)
        k = 0
        while True:
            yield k % n_instances
            k += 1


@dataclass(frozen=True)
class RandomSchedule(Schedule):
    """Independent uniform indices from a seeded generator; reproducible."""

    seed: int

    def stream(self, n_instances: int) -> Iterator[int]:
        _check_count(n_instances)
        rng = np.random.default_rng(self.seed)
        while True:
            yield int(rng.integers(n_instances))


@dataclass(frozen=True)
class ExplicitSchedule(Schedule):
    """A fixed finite index pattern, repeated cyclically."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise ScheduleError("explicit schedule needs at least one index")
        if any(i < 0 for i in idx):
            raise ScheduleError("schedule indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    def stream(self, n_instances: int) -> Iterator[int]:
        _check_count(n_instances)
        bad = [i for i in self.indices if i >= n_instances]
        if bad:
            raise ScheduleError(f"schedule indices {bad} out of range for {n_instances} instances")
        k = 0
        while True:
            yield self.indices[k % len(self.indices)]
            k += 1


def _check_count(n_instances: int) -> None:
    if n_instances < 1:
        raise ScheduleError("schedules need at least one instance")


@dataclass(frozen=True)
class StopRule:
    """Termination thresholds shared by all solvers.

    ``residual_tol`` bounds the worst per-instance fixed-point residual;
    ``stall_tol`` (0 disables) declares a stall when an iteration moves the
    iterate less than this while the residual is still above tolerance.
    """

    residual_tol: float = 1e-8
    max_iters: int = 100_000
    stall_tol: float = 0.0

    def __post_init__(self):
        if not (self.residual_tol > 0.0):
            raise InvalidProblemError("residual_tol must be positive")
        if self.max_iters < 1:
            raise InvalidProblemError("max_iters must be at least 1")
        if self.stall_tol < 0.0:
            raise InvalidProblemError("stall_tol must be nonnegative")


class RunStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DIVERGING = "diverging"
    STALLED = "stalled"


@dataclass
class IterationTrace:
    """Per-iteration history of a run.

    ``iterates[k]`` is x^k (including x^0), ``residuals[k]`` the worst
    per-instance residual there, and ``instance_residuals[k]`` the full row.
    ``intermediate`` holds the half-step points recorded by the alternating
    solver, one per completed iteration; other solvers leave it ``None``.
    """

    iterates: list[np.ndarray] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    instance_residuals: list[list[float]] = field(default_factory=list)
    intermediate: list[np.ndarray] | None = None

    @property
    def n_iterations(self) -> int:
        return len(self.iterates) - 1


@dataclass
class RunResult:
    """Terminal state of a solver run."""

    status: RunStatus
    solution: np.ndarray
    trace: IterationTrace
    step: StepSize

    @property
    def final_residual(self) -> float:
        return self.trace.residuals[-1]

    @property
    def final_instance_residuals(self) -> list[float]:
        return list(self.trace.instance_residuals[-1])
