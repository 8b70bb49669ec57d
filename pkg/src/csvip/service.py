"""HTTP facade over the solver package.

Endpoints accept the same JSON problem documents as the files consumed by
the command line and delegate to the library; no numerics live here.
Schema violations surface as 422 responses carrying the parser's machine
code, so API clients get the same diagnostics as file users.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .errors import ConvergenceError, CsvipError, ProblemFormatError
from .operators import vip_residual
from .oracle import extragradient_solve
from .problem import Cyclic, ExplicitSchedule, RandomSchedule, RunStatus
from .problemio import parse_problem_document, result_to_document
from .solvers import (
    default_step,
    solve_alternating,
    solve_parallel,
    solve_sequential,
    solve_unrestricted,
)

__all__ = ["app"]

app = FastAPI(
    title="csvip solver service",
    description="Common solutions to variational inequalities over convex sets",
    version=__version__,
)


class StepInfo(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    alpha_bound: float | None


class TraceDocument(BaseModel):
    iterates: list[list[float]]
    residuals: list[float]
    instance_residuals: list[list[float]]
    intermediate: list[list[float]] | None


class SolveRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    problem: dict
    algorithm: Literal["alternating", "sequential", "parallel", "unrestricted"] = "sequential"
    schedule: Literal["cyclic", "random", "explicit"] = "cyclic"
    seed: int | None = None
    indices: list[int] | None = None
    lam: float | None = Field(default=None, alias="lambda")
    x0: list[float] | None = None
    include_trace: bool = False


class SolveResponse(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    version: str
    status: str
    solution: list[float]
    iterations: int
    final_residuals: list[float]
    step: StepInfo
    trace: TraceDocument | None = None


class VerifyRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    problem: dict
    point: list[float]
    lam: float | None = Field(default=None, alias="lambda")


class VerifyResponse(BaseModel):
    point: list[float]
    residuals: list[float]
    max_residual: float
    tolerance: float
    ok: bool


class CompareRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    problem: dict
    expect_unique: bool = False
    lam: float | None = Field(default=None, alias="lambda")
    x0: list[float] | None = None


class CompareResponse(BaseModel):
    points: dict[str, list[float]]
    failed: dict[str, str]
    pairwise_distances: list[tuple[str, str, float]]
    max_pairwise_distance: float | None
    tolerance: float
    agreement: bool | None


def _bad_request(exc: CsvipError) -> HTTPException:
    if isinstance(exc, ProblemFormatError):
        return HTTPException(status_code=422, detail={"code": exc.code, "message": str(exc)})
    return HTTPException(status_code=400, detail={"code": type(exc).__name__, "message": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/solve", response_model=SolveResponse, response_model_exclude_none=True)
def solve(request: SolveRequest) -> JSONResponse:
    try:
        parsed = parse_problem_document(request.problem)
        problem = parsed.problem
        lam = request.lam if request.lam is not None else parsed.lam
        x0 = request.x0 if request.x0 is not None else parsed.x0
        stop = parsed.stop_rule()
        step = default_step(problem, lam)
        if request.algorithm == "alternating":
            result = solve_alternating(problem, step=step, x0=x0, stop=stop)
        elif request.algorithm == "sequential":
            result = solve_sequential(problem, step=step, x0=x0, stop=stop)
        elif request.algorithm == "parallel":
            result = solve_parallel(problem, step=step, x0=x0, stop=stop)
        else:
            if request.schedule == "cyclic":
                schedule = Cyclic()
            elif request.schedule == "random":
                if request.seed is None:
                    raise HTTPException(
                        status_code=422,
                        detail={"code": "missing-seed", "message": "random schedule requires a seed"},
                    )
                schedule = RandomSchedule(seed=request.seed)
            else:
                if not request.indices:
                    raise HTTPException(
                        status_code=422,
                        detail={"code": "missing-indices", "message": "explicit schedule requires indices"},
                    )
                schedule = ExplicitSchedule(indices=tuple(request.indices))
            result = solve_unrestricted(problem, schedule, step=step, x0=x0, stop=stop)
    except CsvipError as exc:
        raise _bad_request(exc)
    # Respond with the interchange document itself so a saved body is a
    # valid result file; the model above only describes the schema.
    return JSONResponse(content=result_to_document(result, include_trace=request.include_trace))


@app.post("/verify", response_model=VerifyResponse)
def verify(request: VerifyRequest) -> VerifyResponse:
    try:
        parsed = parse_problem_document(request.problem)
        problem = parsed.problem
        lam = request.lam if request.lam is not None else parsed.lam
        stop = parsed.stop_rule()
        step = default_step(problem, lam)
        residuals = [vip_residual(t, request.point) for t in problem.step_operators(step)]
    except CsvipError as exc:
        raise _bad_request(exc)
    return VerifyResponse(
        point=[float(v) for v in request.point],
        residuals=residuals,
        max_residual=max(residuals),
        tolerance=stop.residual_tol,
        ok=max(residuals) <= stop.residual_tol,
    )


@app.post("/compare", response_model=CompareResponse)
def compare(request: CompareRequest) -> CompareResponse:
    try:
        parsed = parse_problem_document(request.problem)
        problem = parsed.problem
        lam = request.lam if request.lam is not None else parsed.lam
        stop = parsed.stop_rule()
        step = default_step(problem, lam)
        x0 = request.x0

        points: dict = {}
        failed: dict = {}
        schemes = []
        if problem.n_instances == 2:
            schemes.append(("alternating", solve_alternating))
        schemes.append(("sequential", solve_sequential))
        schemes.append(("parallel", solve_parallel))
        for name, scheme in schemes:
            result = scheme(problem, step=step, x0=x0, stop=stop)
            if result.status is RunStatus.CONVERGED:
                points[name] = result.solution
            else:
                failed[name] = result.status.value
        result = solve_unrestricted(problem, Cyclic(), step=step, x0=x0, stop=stop)
        if result.status is RunStatus.CONVERGED:
            points["unrestricted"] = result.solution
        else:
            failed["unrestricted"] = result.status.value
        for i, instance in enumerate(problem.instances):
            name = f"extragradient[{i}]"
            try:
                res = extragradient_solve(
                    instance, x0=x0, tol=stop.residual_tol, max_iter=stop.max_iters
                )
                points[name] = res.point
            except (ConvergenceError, CsvipError) as exc:
                failed[name] = str(exc)
    except CsvipError as exc:
        raise _bad_request(exc)

    names = list(points)
    pairwise = [
        (a, b, float(np.linalg.norm(points[a] - points[b])))
        for i, a in enumerate(names)
        for b in names[i + 1:]
    ]
    max_pairwise = max((row[2] for row in pairwise), default=None)
    tolerance = 10.0 * stop.residual_tol
    if failed:
        agreement = False
    elif len(names) >= 2:
        agreement = max_pairwise <= tolerance
    else:
        agreement = None
    return CompareResponse(
        points={name: [float(v) for v in p] for name, p in points.items()},
        failed=failed,
        pairwise_distances=pairwise,
        max_pairwise_distance=max_pairwise,
        tolerance=tolerance,
        agreement=agreement,
    )
