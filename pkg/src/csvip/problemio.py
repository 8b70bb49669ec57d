"""JSON interchange for problems and run results (format ``csvip/1``).

Parsing is strict: unknown fields, wrong version strings, and malformed
values are rejected with a ``ProblemFormatError`` carrying a stable machine
code, so callers can tell rejection causes apart without string matching.
Result documents round-trip losslessly because floats are serialized with
their shortest exact decimal representation.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InconsistentSystemError,
    InvalidSetError,
    NotIsmError,
    ProblemFormatError,
    StepSizeError,
)
from .geometry import (
    AffineSubspace,
    Ball,
    Box,
    ConvexSet,
    Halfspace,
    Hyperplane,
    Intersection,
    Simplex,
    WholeSpace,
)
from .operators import (
    AffineOperator,
    ConstantOperator,
    IsmOperator,
    StepSize,
    ZeroOperator,
    validate_step,
)
from .problem import CsvipProblem, IterationTrace, RunResult, RunStatus, StopRule

__all__ = [
    "FORMAT_VERSION",
    "ParsedProblem",
    "parse_problem",
    "parse_problem_document",
    "result_to_document",
    "emit_result",
    "parse_result",
]

FORMAT_VERSION = "csvip/1"

_TOP_FIELDS = {"version", "dim", "instances", "weights", "lambda", "x0", "stop"}
_TOP_REQUIRED = {"version", "dim", "instances"}
_INSTANCE_FIELDS = {"set", "operator", "alpha"}
_STOP_FIELDS = {"residual_tol", "max_iters", "stall_tol"}

_SET_FIELDS = {
    "halfspace": {"normal", "offset"},
    "hyperplane": {"normal", "offset"},
    "box": {"lower", "upper"},
    "ball": {"center", "radius"},
    "affine_subspace": {"matrix", "rhs"},
    "simplex": set(),
    "whole_space": set(),
    "intersection": {"members"},
}
_OPERATOR_FIELDS = {
    "zero": set(),
    "constant": {"value"},
    "affine": {"matrix", "shift"},
}


@dataclass
class ParsedProblem:
    """A problem plus the run options carried by its document.

    ``stop_fields`` holds only the stop settings the document set explicitly,
    so callers can layer their own defaults under them.
    """

    problem: CsvipProblem
    lam: float | None
    x0: np.ndarray | None
    stop_fields: dict

    def stop_rule(self, max_iters_default: int | None = None) -> StopRule:
        """Stop rule with document values layered over the defaults."""
        base = StopRule() if max_iters_default is None else StopRule(max_iters=max_iters_default)
        return dataclasses.replace(base, **self.stop_fields)


def _fail(code: str, message: str):
    raise ProblemFormatError(code, message)


def _require_object(node, code: str, where: str) -> dict:
    if not isinstance(node, dict):
        _fail(code, f"{where} must be a JSON object")
    return node


def _check_fields(node: dict, allowed: set, required: set, where: str) -> None:
    unknown = sorted(k for k in node if k not in allowed)
    if unknown:
        _fail("unknown-field", f"{where} has unknown fields {unknown}")
    missing = sorted(k for k in required if k not in node)
    if missing:
        _fail("missing-field", f"{where} is missing required fields {missing}")


def _number(v, code: str, where: str, finite: bool = True) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(code, f"{where} must be a number")
    v = float(v)
    if finite and not math.isfinite(v):
        _fail(code, f"{where} must be finite")
    return v


def _integer(v, code: str, where: str) -> int:
    if isinstance(v, bool):
        _fail(code, f"{where} must be an integer")
    if isinstance(v, float) and v.is_integer():
        v = int(v)
    if not isinstance(v, int):
        _fail(code, f"{where} must be an integer")
    return v


def _vector(v, code: str, where: str, dim: int | None = None) -> list[float]:
    if not isinstance(v, list) or not v:
        _fail(code, f"{where} must be a nonempty array of numbers")
    out = [_number(e, code, f"{where}[{i}]") for i, e in enumerate(v)]
    if dim is not None and len(out) != dim:
        _fail("dim-mismatch", f"{where} has length {len(out)}, expected {dim}")
    return out


def _matrix_rows(v, code: str, where: str, cols: int | None = None) -> list[list[float]]:
    if not isinstance(v, list) or not v:
        _fail(code, f"{where} must be a nonempty array of rows")
    rows = []
    for i, row in enumerate(v):
        rows.append(_vector(row, code, f"{where}[{i}]"))
        if len(rows[i]) != len(rows[0]):
            _fail(code, f"{where} rows have inconsistent lengths")
    if cols is not None and len(rows[0]) != cols:
        _fail("dim-mismatch", f"{where} has {len(rows[0])} columns, expected {cols}")
    return rows


def _parse_set(node, dim: int, where: str) -> ConvexSet:
    node = _require_object(node, "bad-set", where)
    kind = node.get("type")
    if kind is None:
        _fail("missing-field", f"{where} is missing required fields ['type']")
    if kind not in _SET_FIELDS:
        _fail("unknown-set", f"{where} has unknown set type {kind!r}")
    _check_fields(node, _SET_FIELDS[kind] | {"type"}, _SET_FIELDS[kind] | {"type"}, where)
    try:
        if kind == "halfspace" or kind == "hyperplane":
            normal = _vector(node["normal"], "bad-set", f"{where}.normal", dim)
            if not any(normal):
                _fail("bad-normal", f"{where}.normal must be nonzero")
            offset = _number(node["offset"], "bad-set", f"{where}.offset")
            cls = Halfspace if kind == "halfspace" else Hyperplane
            return cls(normal=np.array(normal), offset=offset)
        if kind == "box":
            lower = _vector(node["lower"], "bad-box", f"{where}.lower", dim)
            upper = _vector(node["upper"], "bad-box", f"{where}.upper", dim)
            if any(lo > hi for lo, hi in zip(lower, upper)):
                _fail("bad-box", f"{where} needs lower <= upper componentwise")
            return Box(lower=np.array(lower), upper=np.array(upper))
        if kind == "ball":
            center = _vector(node["center"], "bad-set", f"{where}.center", dim)
            radius = _number(node["radius"], "bad-radius", f"{where}.radius")
            if radius <= 0.0:
                _fail("bad-radius", f"{where}.radius must be positive")
            return Ball(center=np.array(center), radius=radius)
        if kind == "affine_subspace":
            rows = _matrix_rows(node["matrix"], "bad-set", f"{where}.matrix", cols=dim)
            rhs = _vector(node["rhs"], "bad-set", f"{where}.rhs")
            if len(rhs) != len(rows):
                _fail("dim-mismatch", f"{where}.rhs has length {len(rhs)}, expected {len(rows)}")
            try:
                return AffineSubspace(matrix=np.array(rows), rhs=np.array(rhs))
            except InconsistentSystemError as exc:
                _fail("inconsistent-affine", f"{where}: {exc}")
        if kind == "simplex":
            return Simplex(dim)
        if kind == "whole_space":
            return WholeSpace(dim)
        members = node["members"]
        if not isinstance(members, list) or not members:
            _fail("bad-set", f"{where}.members must be a nonempty array")
        parsed = tuple(_parse_set(m, dim, f"{where}.members[{i}]") for i, m in enumerate(members))
        return Intersection(members=parsed)
    except InvalidSetError as exc:
        _fail("bad-set", f"{where}: {exc}")


def _parse_operator(node, dim: int, alpha_claim: float | None, where: str) -> IsmOperator:
    node = _require_object(node, "bad-operator", where)
    kind = node.get("type")
    if kind is None:
        _fail("missing-field", f"{where} is missing required fields ['type']")
    if kind not in _OPERATOR_FIELDS:
        _fail("unknown-operator", f"{where} has unknown operator type {kind!r}")
    allowed = _OPERATOR_FIELDS[kind] | {"type"}
    if kind == "zero":
        _check_fields(node, allowed, {"type"}, where)
        return ZeroOperator(dim)
    if kind == "constant":
        _check_fields(node, allowed, {"type", "value"}, where)
        value = _vector(node["value"], "bad-operator", f"{where}.value", dim)
        return ConstantOperator(value=np.array(value))
    _check_fields(node, allowed, {"type", "matrix"}, where)
    rows = _matrix_rows(node["matrix"], "bad-operator", f"{where}.matrix", cols=dim)
    if len(rows) != dim:
        _fail("dim-mismatch", f"{where}.matrix has {len(rows)} rows, expected {dim}")
    shift = None
    if "shift" in node:
        shift = np.array(_vector(node["shift"], "bad-operator", f"{where}.shift", dim))
    try:
        op = AffineOperator(matrix=np.array(rows), shift=shift)
    except NotIsmError as exc:
        _fail("not-ism", f"{where}: {exc}")
    if alpha_claim is not None:
        if alpha_claim > op.alpha + 1e-9:
            _fail(
                "bad-alpha",
                f"{where}: declared alpha {alpha_claim} exceeds certified value {op.alpha}",
            )
        if alpha_claim < op.alpha:
            op = AffineOperator(matrix=np.array(rows), shift=shift, alpha_claim=alpha_claim)
    return op


def parse_problem(text: str) -> ParsedProblem:
    """Parse a problem document from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail("bad-json", f"document is not valid JSON: {exc}")
    return parse_problem_document(doc)


def parse_problem_document(doc) -> ParsedProblem:
    """Validate and build a problem from an already-decoded document."""
    doc = _require_object(doc, "bad-json", "document")
    _check_fields(doc, _TOP_FIELDS, _TOP_REQUIRED, "document")
    if doc["version"] != FORMAT_VERSION:
        _fail("bad-version", f"unsupported version {doc['version']!r}, expected {FORMAT_VERSION!r}")
    dim = _integer(doc["dim"], "bad-dim", "dim")
    if dim < 1:
        _fail("bad-dim", "dim must be a positive integer")

    raw_instances = doc["instances"]
    if not isinstance(raw_instances, list) or not raw_instances:
        _fail("empty-instances", "instances must be a nonempty array")
    instances = []
    for i, raw in enumerate(raw_instances):
        where = f"instances[{i}]"
        raw = _require_object(raw, "bad-instance", where)
        _check_fields(raw, _INSTANCE_FIELDS, {"set", "operator"}, where)
        alpha_claim = None
        if "alpha" in raw:
            alpha_claim = _number(raw["alpha"], "bad-alpha", f"{where}.alpha")
            if alpha_claim <= 0.0:
                _fail("bad-alpha", f"{where}.alpha must be positive")
        region = _parse_set(raw["set"], dim, f"{where}.set")
        op = _parse_operator(raw["operator"], dim, alpha_claim, f"{where}.operator")
        instances.append((region, op))

    weights = None
    if "weights" in doc:
        w = _vector(doc["weights"], "bad-weights", "weights")
        if len(w) != len(instances):
            _fail("bad-weights", f"{len(w)} weights for {len(instances)} instances")
        if any(v < 0.0 for v in w):
            _fail("bad-weights", "weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            _fail("bad-weights", f"weights sum to {sum(w)}, expected 1")
        weights = tuple(w)

    problem = CsvipProblem(instances=tuple(instances), weights=weights)

    lam = None
    if "lambda" in doc:
        lam = _number(doc["lambda"], "bad-lambda", "lambda")
        try:
            validate_step(lam, problem.alphas)
        except StepSizeError as exc:
            _fail("bad-lambda", str(exc))

    x0 = None
    if "x0" in doc:
        x0 = np.array(_vector(doc["x0"], "bad-x0", "x0", dim))

    stop_fields = {}
    if "stop" in doc:
        stop = _require_object(doc["stop"], "bad-stop", "stop")
        _check_fields(stop, _STOP_FIELDS, set(), "stop")
        if "residual_tol" in stop:
            v = _number(stop["residual_tol"], "bad-stop", "stop.residual_tol")
            if v <= 0.0:
                _fail("bad-stop", "stop.residual_tol must be positive")
            stop_fields["residual_tol"] = v
        if "max_iters" in stop:
            v = _integer(stop["max_iters"], "bad-stop", "stop.max_iters")
            if v < 1:
                _fail("bad-stop", "stop.max_iters must be at least 1")
            stop_fields["max_iters"] = v
        if "stall_tol" in stop:
            v = _number(stop["stall_tol"], "bad-stop", "stop.stall_tol")
            if v < 0.0:
                _fail("bad-stop", "stop.stall_tol must be nonnegative")
            stop_fields["stall_tol"] = v

    return ParsedProblem(problem=problem, lam=lam, x0=x0, stop_fields=stop_fields)


def _floats(values) -> list[float]:
    return [float(v) for v in values]


def result_to_document(result: RunResult, include_trace: bool = True) -> dict:
    """Plain-JSON form of a run result; ``alpha_bound`` maps inf to null."""
    bound = result.step.alpha_bound
    doc = {
        "version": FORMAT_VERSION,
        "status": result.status.value,
        "solution": _floats(result.solution),
        "iterations": result.trace.n_iterations,
        "final_residuals": _floats(result.final_instance_residuals),
        "step": {
            "lambda": float(result.step.lam),
            "alpha_bound": None if math.isinf(bound) else float(bound),
        },
    }
    if include_trace:
        trace = result.trace
        doc["trace"] = {
            "iterates": [_floats(x) for x in trace.iterates],
            "residuals": _floats(trace.residuals),
            "instance_residuals": [_floats(r) for r in trace.instance_residuals],
            "intermediate": None
            if trace.intermediate is None
            else [_floats(y) for y in trace.intermediate],
        }
    return doc


def emit_result(result: RunResult, format: str = "json", include_trace: bool = True) -> str:
    """Serialize a run result as a JSON document or a CSV iteration trace.

    The CSV layout is one row per iterate: column ``k``, then the iterate
    coordinates ``x_0..x_{n-1}``, then the per-instance residuals
    ``r_0..r_{N-1}``.  Floats keep their shortest exact representation in
    both formats.
    """
    if format == "json":
        return json.dumps(result_to_document(result, include_trace=include_trace), indent=2)
    if format == "csv-trace":
        trace = result.trace
        n = result.solution.size
        n_inst = len(trace.instance_residuals[0])
        header = ["k"] + [f"x_{j}" for j in range(n)] + [f"r_{i}" for i in range(n_inst)]
        lines = [",".join(header)]
        for k, (x, row) in enumerate(zip(trace.iterates, trace.instance_residuals)):
            cells = [str(k)] + [repr(float(v)) for v in x] + [repr(float(r)) for r in row]
            lines.append(",".join(cells))
        return "\n".join(lines)
    raise ValueError(f"unknown result format {format!r}")


def parse_result(text: str) -> RunResult:
    """Rebuild a run result from its JSON document form."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail("bad-json", f"document is not valid JSON: {exc}")
    doc = _require_object(doc, "bad-json", "document")
    allowed = {"version", "status", "solution", "iterations", "final_residuals", "step", "trace"}
    required = {"version", "status", "solution", "iterations", "final_residuals", "step"}
    _check_fields(doc, allowed, required, "document")
    if doc["version"] != FORMAT_VERSION:
        _fail("bad-version", f"unsupported version {doc['version']!r}, expected {FORMAT_VERSION!r}")
    try:
        status = RunStatus(doc["status"])
    except ValueError:
        _fail("bad-status", f"unknown status {doc['status']!r}")
    solution = np.array(_vector(doc["solution"], "bad-result", "solution"))
    final_residuals = _vector(doc["final_residuals"], "bad-result", "final_residuals")
    step_node = _require_object(doc["step"], "bad-result", "step")
    _check_fields(step_node, {"lambda", "alpha_bound"}, {"lambda", "alpha_bound"}, "step")
    lam = _number(step_node["lambda"], "bad-result", "step.lambda")
    bound = (
        math.inf
        if step_node["alpha_bound"] is None
        else _number(step_node["alpha_bound"], "bad-result", "step.alpha_bound")
    )
    step = StepSize(lam=lam, alpha_bound=bound)

    if "trace" in doc:
        t = _require_object(doc["trace"], "bad-result", "trace")
        _check_fields(
            t,
            {"iterates", "residuals", "instance_residuals", "intermediate"},
            {"iterates", "residuals", "instance_residuals", "intermediate"},
            "trace",
        )
        iterates = [
            np.array(_vector(row, "bad-result", f"trace.iterates[{i}]", solution.size))
            for i, row in enumerate(t["iterates"])
        ]
        residuals = _vector(t["residuals"], "bad-result", "trace.residuals")
        inst = [
            _vector(row, "bad-result", f"trace.instance_residuals[{i}]")
            for i, row in enumerate(t["instance_residuals"])
        ]
        intermediate = None
        if t["intermediate"] is not None:
            intermediate = [
                np.array(_vector(row, "bad-result", f"trace.intermediate[{i}]", solution.size))
                for i, row in enumerate(t["intermediate"])
            ]
        trace = IterationTrace(
            iterates=iterates,
            residuals=residuals,
            instance_residuals=inst,
            intermediate=intermediate,
        )
    else:
        trace = IterationTrace(
            iterates=[solution.copy()],
            residuals=[max(final_residuals)],
            instance_residuals=[list(final_residuals)],
            intermediate=None,
        )
    return RunResult(status=status, solution=solution, trace=trace, step=step)
