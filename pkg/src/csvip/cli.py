"""Command-line client for the solver package.

Subcommands map onto the package operations: ``solve`` runs one scheme on a
problem document, ``verify`` scores a candidate point, ``trace`` audits a
saved result, ``compare`` cross-checks all schemes against the reference
oracle, and ``serve`` starts the HTTP facade.  Data goes to stdout, progress
and errors to stderr.

Exit codes: 0 solved/clean, 1 usage or input errors, 2 stopped without
convergence (budget or stall) or a failed check, 3 divergence detected.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .diagnostics import DEFAULT_THRESHOLD, DEFAULT_WINDOW, divergence_monitor, fejer_check
from .errors import ConvergenceError, CsvipError, ProblemFormatError
from .operators import vip_residual
from .oracle import extragradient_solve
from .problem import Cyclic, ExplicitSchedule, RandomSchedule, RunStatus
from .problemio import emit_result, parse_problem, parse_result
from .solvers import (
    default_step,
    solve_alternating,
    solve_parallel,
    solve_sequential,
    solve_unrestricted,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_DIVERGING = 3

_STATUS_EXIT = {
    RunStatus.CONVERGED: EXIT_OK,
    RunStatus.MAX_ITERS: EXIT_NOT_CONVERGED,
    RunStatus.STALLED: EXIT_NOT_CONVERGED,
    RunStatus.DIVERGING: EXIT_DIVERGING,
}

MAX_ITERS_ENV = "CSVIP_MAX_ITERS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route that through our
    # usage exit code instead.
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csvip", description="Solvers for common-solution variational inequalities")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one scheme on a problem document")
    solve.add_argument("problem", help="path to a problem JSON document")
    solve.add_argument(
        "--algorithm",
        choices=["alternating", "sequential", "parallel", "unrestricted"],
        default="sequential",
    )
    solve.add_argument("--schedule", choices=["cyclic", "random", "explicit"], default="cyclic")
    solve.add_argument("--seed", type=int, help="seed for the random schedule")
    solve.add_argument("--indices", help="comma-separated pattern for the explicit schedule")
    solve.add_argument("--lambda", dest="lam", type=float, help="step length override")
    solve.add_argument("--x0", help="comma-separated starting point override")
    solve.add_argument("--out", help="write the result document here instead of stdout")
    solve.add_argument("--format", choices=["json", "csv-trace"], default="json")
    solve.add_argument("--quiet", action="store_true")
    solve.set_defaults(func=_cmd_solve)

    verify = sub.add_parser("verify", help="score a candidate point against a problem")
    verify.add_argument("problem")
    verify.add_argument("--point", required=True, help="comma-separated candidate point")
    verify.add_argument("--lambda", dest="lam", type=float, help="step length override")
    verify.add_argument("--quiet", action="store_true")
    verify.set_defaults(func=_cmd_verify)

    trace = sub.add_parser("trace", help="audit a saved result document")
    trace.add_argument("result", help="path to a result JSON document")
    ref = trace.add_mutually_exclusive_group(required=True)
    ref.add_argument("--reference", help="comma-separated known common solution")
    ref.add_argument("--problem", help="derive the reference from this problem via the oracle")
    trace.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    trace.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    trace.add_argument("--quiet", action="store_true")
    trace.set_defaults(func=_cmd_trace)

    compare = sub.add_parser("compare", help="cross-check all schemes and the oracle")
    compare.add_argument("problem")
    compare.add_argument("--expect-unique", action="store_true", help="fail unless all terminal points agree")
    compare.add_argument("--lambda", dest="lam", type=float, help="step length override")
    compare.add_argument("--x0", help="comma-separated starting point override")
    compare.add_argument("--quiet", action="store_true")
    compare.set_defaults(func=_cmd_compare)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    return parser


def _log(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message, file=sys.stderr)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _csv_vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",")])
    except ValueError:
        raise _UsageError(f"{what} must be a comma-separated list of numbers")


def _load(args):
    parsed = parse_problem(_read(args.problem))
    lam = args.lam if getattr(args, "lam", None) is not None else parsed.lam
    x0 = parsed.x0
    if getattr(args, "x0", None):
        x0 = _csv_vector(args.x0, "--x0")
    return parsed, lam, x0


def _resolve_stop(parsed):
    env = os.environ.get(MAX_ITERS_ENV)
    default = None
    if env is not None:
        try:
            default = int(env)
        except ValueError:
            raise _UsageError(f"{MAX_ITERS_ENV} must be an integer, got {env!r}")
        if default < 1:
            raise _UsageError(f"{MAX_ITERS_ENV} must be at least 1")
    return parsed.stop_rule(max_iters_default=default)


def _schedule_from_args(args):
    if args.schedule == "cyclic":
        return Cyclic()
    if args.schedule == "random":
        if args.seed is None:
            raise _UsageError("--schedule random requires --seed")
        return RandomSchedule(seed=args.seed)
    if args.indices is None:
        raise _UsageError("--schedule explicit requires --indices")
    try:
        pattern = tuple(int(tok) for tok in args.indices.split(","))
    except ValueError:
        raise _UsageError("--indices must be a comma-separated list of integers")
    return ExplicitSchedule(indices=pattern)


def _cmd_solve(args) -> int:
    parsed, lam, x0 = _load(args)
    problem = parsed.problem
    stop = _resolve_stop(parsed)
    if args.algorithm == "alternating" and problem.n_instances != 2:
        raise _UsageError(
            f"--algorithm alternating needs exactly 2 instances, got {problem.n_instances}"
        )
    schedule = _schedule_from_args(args) if args.algorithm == "unrestricted" else None
    step = default_step(problem, lam)

    if args.algorithm == "alternating":
        result = solve_alternating(problem, step=step, x0=x0, stop=stop)
    elif args.algorithm == "sequential":
        result = solve_sequential(problem, step=step, x0=x0, stop=stop)
    elif args.algorithm == "parallel":
        result = solve_parallel(problem, step=step, x0=x0, stop=stop)
    else:
        result = solve_unrestricted(problem, schedule, step=step, x0=x0, stop=stop)

    text = emit_result(result, format=args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    _log(
        args,
        f"status={result.status.value} iterations={result.trace.n_iterations} "
        f"residual={result.final_residual:.3e}",
    )
    return _STATUS_EXIT[result.status]


def _cmd_verify(args) -> int:
    parsed, lam, _ = _load(args)
    problem = parsed.problem
    stop = _resolve_stop(parsed)
    point = _csv_vector(args.point, "--point")
    step = default_step(problem, lam)
    residuals = [vip_residual(t, point) for t in problem.step_operators(step)]
    ok = max(residuals) <= stop.residual_tol
    print(
        json.dumps(
            {
                "point": [float(v) for v in point],
                "residuals": residuals,
                "max_residual": max(residuals),
                "tolerance": stop.residual_tol,
                "ok": ok,
            },
            indent=2,
        )
    )
    _log(args, f"max_residual={max(residuals):.3e} tolerance={stop.residual_tol:.3e}")
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def _oracle_reference(parsed, stop) -> np.ndarray:
    points = []
    for instance in parsed.problem.instances:
        res = extragradient_solve(instance, tol=min(stop.residual_tol, 1e-10))
        points.append(res.point)
    worst = max(
        float(np.linalg.norm(p - q)) for p in points for q in points
    )
    if worst > 1e-6:
        raise _UsageError(
            "oracle solutions of the instances disagree; pass --reference explicitly"
        )
    return points[0]


def _cmd_trace(args) -> int:
    result = parse_result(_read(args.result))
    if args.reference is not None:
        reference = _csv_vector(args.reference, "--reference")
    else:
        parsed = parse_problem(_read(args.problem))
        reference = _oracle_reference(parsed, _resolve_stop(parsed))
    audit = fejer_check(result.trace, reference)
    growth = divergence_monitor(result.trace, window=args.window, threshold=args.threshold)
    print(
        json.dumps(
            {
                "reference": [float(v) for v in audit.reference],
                "fejer": {
                    "violations": [[k, inc] for k, inc in audit.violations],
                    "max_increase": audit.max_increase,
                },
                "divergence": {"verdict": growth.verdict},
            },
            indent=2,
        )
    )
    _log(args, f"violations={len(audit.violations)} verdict={growth.verdict}")
    if growth.verdict == "growing":
        return EXIT_DIVERGING
    return EXIT_OK if audit.clean else EXIT_NOT_CONVERGED


def _cmd_compare(args) -> int:
    parsed, lam, x0 = _load(args)
    problem = parsed.problem
    stop = _resolve_stop(parsed)
    step = default_step(problem, lam)

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

    names = list(points)
    pairwise = [
        [a, b, float(np.linalg.norm(points[a] - points[b]))]
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
    print(
        json.dumps(
            {
                "points": {name: [float(v) for v in p] for name, p in points.items()},
                "failed": failed,
                "pairwise_distances": pairwise,
                "max_pairwise_distance": max_pairwise,
                "tolerance": tolerance,
                "agreement": agreement,
            },
            indent=2,
        )
    )
    _log(args, f"rows={len(names)} failed={len(failed)} max_pairwise={max_pairwise}")
    if failed:
        return EXIT_DIVERGING
    if args.expect_unique and not agreement:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProblemFormatError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CsvipError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
