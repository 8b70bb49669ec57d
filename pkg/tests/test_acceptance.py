"""End-to-end acceptance gate.

Each test covers one acceptance criterion at its stated tolerance and prints
a single PASS/FAIL line (run with ``pytest -s`` to see them on success).
The random batches are built around known common solutions so every check
has an exact or independently computed target.
"""

import json
import math

import numpy as np
import pytest

import csvip as cv
import csvip.cli as cli
from conftest import (
    adversarial_documents,
    canonical_document,
    canonical_problem,
    diverging_document,
    random_subspace,
    spd_operator,
    set_containing,
    two_set_problem,
)


def check(name: str, ok: bool, detail: str = "") -> None:
    tail = f"  [{detail}]" if detail else ""
    print(f"{'PASS' if ok else 'FAIL'}  {name}{tail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------- fixtures


@pytest.fixture(scope="module")
def two_set_batch():
    """50 random two-instance problems, each with a known common solution.

    Sets are drawn from boxes/balls/halfspaces around the solution; affine
    operators have positive definite symmetric part (half of them carry a
    skew component) and vanish at the solution.  Each problem is solved by
    the alternating, sequential, and parallel schemes from the same start.
    """
    rng = np.random.default_rng(1001)
    batch = []
    for trial in range(50):
        dim = int(rng.integers(1, 7))
        skew = 0.3 if trial % 2 else 0.0
        problem, z = two_set_problem(rng, dim, skew=skew)
        x0 = rng.uniform(-4.0, 4.0, size=dim)
        runs = {
            "alternating": cv.solve_alternating(problem, x0=x0),
            "sequential": cv.solve_sequential(problem, x0=x0),
            "parallel": cv.solve_parallel(problem, x0=x0),
        }
        batch.append((problem, z, x0, runs))
    return batch


# ---------------------------------------------------------------- criteria


def test_criterion_1_subspace_projection_reproduction():
    # 50 random pairs of subspaces of R^10 (dimensions 1..9), zero
    # operators, user step 1: the alternating limit must be the analytic
    # projection of the start onto the intersection.
    rng = np.random.default_rng(2024)
    zero = cv.ZeroOperator(10)
    worst = 0.0
    for trial in range(50):
        a = random_subspace(rng, 10, int(rng.integers(1, 10)))
        b = random_subspace(rng, 10, int(rng.integers(1, 10)))
        problem = cv.CsvipProblem(instances=((a, zero), (b, zero)))
        x0 = rng.normal(scale=3.0, size=10)
        result = cv.solve_alternating(
            problem, step=cv.validate_step(1.0, problem.alphas), x0=x0,
            stop=cv.StopRule(residual_tol=1e-10),
        )
        oracle = cv.subspace_intersection_projection(a, b, x0)
        if result.status is not cv.RunStatus.CONVERGED:
            check("criterion 1: subspace projection reproduction", False,
                  f"trial {trial} ended {result.status.value}")
        worst = max(worst, float(np.linalg.norm(result.solution - oracle.point)))
    check("criterion 1: subspace projection reproduction", worst <= 1e-6,
          f"worst |solver - analytic| = {worst:.3e}")


def test_criterion_2_every_scheme_converges_on_the_batch(two_set_batch):
    worst = 0.0
    failures = []
    for index, (problem, _, _, runs) in enumerate(two_set_batch):
        for name, result in runs.items():
            if result.status is not cv.RunStatus.CONVERGED:
                failures.append(f"{name}[{index}] -> {result.status.value}")
                continue
            if result.trace.n_iterations > 100_000:
                failures.append(f"{name}[{index}] took {result.trace.n_iterations}")
            worst = max(worst, max(result.final_instance_residuals))
    check("criterion 2: convergence of all schemes on 50 random problems",
          not failures and worst <= 1e-8,
          failures[0] if failures else f"worst per-instance residual = {worst:.3e}")


def test_criterion_3_distance_monotonicity_on_the_batch(two_set_batch):
    total_violations = 0
    worst = -math.inf
    for problem, z, _, runs in two_set_batch:
        for result in runs.values():
            report = cv.fejer_check(result.trace, z, tol=1e-12)
            total_violations += len(report.violations)
            worst = max(worst, report.max_increase)
    check("criterion 3: no distance increase toward the known solution",
          total_violations == 0,
          f"violations = {total_violations}, max step change = {worst:.3e}")


def test_criterion_4_cross_scheme_and_oracle_agreement():
    rng = np.random.default_rng(3001)
    worst_pairwise = 0.0
    worst_grid = 0.0
    for trial in range(20):
        dim = trial % 3 + 1
        problem, z = two_set_problem(
            rng, dim, kinds=("box", "ball", "halfspace"), eig_range=(1.0, 1.3)
        )
        x0 = rng.uniform(-3.0, 3.0, size=dim)
        stop = cv.StopRule(residual_tol=1e-10)
        points = [
            cv.solve_alternating(problem, x0=x0, stop=stop).solution,
            cv.solve_sequential(problem, x0=x0, stop=stop).solution,
            cv.solve_parallel(problem, x0=x0, stop=stop).solution,
            cv.solve_unrestricted(problem, cv.Cyclic(), x0=x0, stop=stop).solution,
        ]
        for instance in problem.instances:
            points.append(cv.extragradient_solve(instance, tol=1e-10).point)
        for i, p in enumerate(points):
            for q in points[i + 1:]:
                worst_pairwise = max(worst_pairwise, float(np.linalg.norm(p - q)))
        if dim <= 2:
            resolution = 0.01
            window = cv.Box(lower=z - 0.15, upper=z + 0.15)
            for instance in problem.instances:
                found = cv.grid_search_vip(instance, bounds=window, resolution=resolution)
                worst_grid = max(worst_grid, float(np.linalg.norm(found.point - z)))
    check("criterion 4: solvers and independent oracles agree",
          worst_pairwise <= 1e-6 and worst_grid <= 0.01,
          f"worst pairwise = {worst_pairwise:.3e}, worst grid gap = {worst_grid:.3e}")


def test_criterion_5_operator_theory_margins():
    rng = np.random.default_rng(4001)
    n_pairs = 10_000

    # firm nonexpansiveness of every projection family
    inter = cv.Intersection(members=(
        cv.Box(lower=-np.ones(3), upper=np.ones(3)),
        cv.Halfspace(normal=np.array([1.0, 1.0, 1.0]), offset=1.0),
    ))
    families = [
        cv.Halfspace(normal=np.array([1.0, -2.0, 0.5]), offset=1.0),
        cv.Hyperplane(normal=np.array([0.0, 1.0, 1.0]), offset=2.0),
        cv.Box(lower=np.array([-1.0, 0.0, -2.0]), upper=np.array([1.0, 2.0, 0.0])),
        cv.Ball(center=np.array([0.5, -0.5, 0.0]), radius=1.5),
        cv.AffineSubspace(matrix=np.array([[1.0, 1.0, 1.0]]), rhs=np.array([3.0])),
        cv.Simplex(3),
        cv.WholeSpace(3),
        inter,
    ]
    firm_worst = math.inf
    for region in families:
        xs = rng.uniform(-4.0, 4.0, size=(n_pairs, 3))
        ys = rng.uniform(-4.0, 4.0, size=(n_pairs, 3))
        for x, y in zip(xs, ys):
            p, q = region.project(x), region.project(y)
            firm_worst = min(firm_worst, float((p - q) @ (x - y) - (p - q) @ (p - q)))

    # ism inequality at the certified constant
    ism_worst = math.inf
    for dim in (1, 2, 3, 4, 6):
        op = spd_operator(rng, dim, np.zeros(dim), skew=0.2 if dim % 2 else 0.0)
        dx = rng.uniform(-5.0, 5.0, size=(n_pairs, dim)) - rng.uniform(-5.0, 5.0, size=(n_pairs, dim))
        dh = dx @ np.asarray(op.matrix).T
        margins = np.einsum("ij,ij->i", dh, dx) - op.alpha * np.einsum("ij,ij->i", dh, dh)
        ism_worst = min(ism_worst, float(margins.min()))

    # step-operator nonexpansiveness and complement ratio across the window
    step_worst = math.inf
    ratio_worst = math.inf
    fixtures = []
    for kind in ("box", "ball", "halfspace"):
        z = rng.uniform(-1.0, 1.0, size=2)
        fixtures.append((set_containing(rng, z, kind), spd_operator(rng, 2, z)))
    fixtures.append((
        cv.Box(lower=np.array([0.0]), upper=np.array([2.0])),
        cv.AffineOperator(matrix=np.array([[1.0]]), shift=np.array([-2.0])),
    ))
    for region, op in fixtures:
        pairs = [
            (rng.uniform(-6.0, 6.0, size=region.dim), rng.uniform(-6.0, 6.0, size=region.dim))
            for _ in range(n_pairs)
        ]
        for factor in (0.1, 1.0, 1.9):
            t = cv.StepOperator(set=region, op=op, step=cv.StepSize(factor * op.alpha, op.alpha))
            report = cv.check_operator_class(t, pairs)
            step_worst = min(step_worst, report.min_margin)
            if report.min_ratio is not None:
                ratio_worst = min(ratio_worst, report.min_ratio)

    ok = (
        firm_worst >= -1e-10
        and ism_worst >= -1e-9
        and step_worst >= -1e-10
        and ratio_worst > 0.5 - 1e-8
    )
    check("criterion 5: sampled operator-theory margins", ok,
          f"firm = {firm_worst:.2e}, ism = {ism_worst:.2e}, "
          f"step = {step_worst:.2e}, ratio = {ratio_worst:.6f}")


def test_criterion_6_step_window_boundary():
    problem = canonical_problem()
    rejected = False
    try:
        cv.validate_step(2.0, problem.alphas)
    except cv.StepSizeError:
        rejected = True
    lam = 2.0 - 1e-6
    step = cv.validate_step(lam, problem.alphas)
    worst = 0.0
    statuses = []
    for solve in (cv.solve_alternating, cv.solve_sequential, cv.solve_parallel):
        result = solve(problem, step=step, x0=[10.0])
        statuses.append(result.status)
        worst = max(worst, max(result.final_instance_residuals))
    ok = (
        rejected
        and all(s is cv.RunStatus.CONVERGED for s in statuses)
        and worst <= 1e-8
    )
    check("criterion 6: step boundary rejected, near-boundary step converges",
          ok, f"2*alpha rejected = {rejected}, worst residual at {lam} = {worst:.3e}")


def test_criterion_7_divergence_symptom(tmp_path, capsys):
    ws = cv.WholeSpace(1)
    const = cv.ConstantOperator(value=np.array([1.0]))
    problem = cv.CsvipProblem(instances=((ws, const), (ws, const)))
    result = cv.solve_alternating(
        problem, step=cv.StepSize(0.5, math.inf), stop=cv.StopRule(max_iters=200)
    )
    verdict = cv.divergence_monitor(result.trace, window=50, threshold=50.0).verdict

    path = tmp_path / "diverging.json"
    path.write_text(json.dumps(diverging_document()))
    exit_code = cli.main(["solve", str(path), "--quiet"])
    capsys.readouterr()
    check("criterion 7: unbounded drift detected and reported",
          verdict == "growing" and exit_code == 3,
          f"verdict after 200 iterations = {verdict}, cli exit = {exit_code}")


def test_criterion_8_two_instance_schemes_are_identical(two_set_batch):
    problems = [(p, x0, runs) for p, _, x0, runs in two_set_batch]
    canon = canonical_problem()
    runs = {
        "alternating": cv.solve_alternating(canon, x0=[10.0]),
        "sequential": cv.solve_sequential(canon, x0=[10.0]),
    }
    problems.append((canon, [10.0], runs))
    mismatches = 0
    for _, _, run in problems:
        a, s = run["alternating"], run["sequential"]
        same = (
            a.status is s.status
            and len(a.trace.iterates) == len(s.trace.iterates)
            and all(np.array_equal(x, y) for x, y in zip(a.trace.iterates, s.trace.iterates))
            and a.trace.residuals == s.trace.residuals
        )
        mismatches += 0 if same else 1
    check("criterion 8: pairwise scheme traces identical for two instances",
          mismatches == 0, f"mismatching traces = {mismatches} of {len(problems)}")


def test_criterion_9_determinism_and_io(two_set_batch, tmp_path, capsys):
    # equal seeds give byte-identical CLI output
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(canonical_document()))
    argv = [
        "solve", str(path), "--algorithm", "unrestricted",
        "--schedule", "random", "--seed", "42", "--quiet",
    ]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert cli.main(argv) == 0
    seeds_ok = capsys.readouterr().out == first

    # result documents round-trip byte for byte on a spread of fixtures
    fixtures = [runs[name] for _, _, _, runs in two_set_batch[:5] for name in runs]
    parsed = cv.parse_problem(json.dumps(diverging_document()))
    fixtures.append(cv.solve_unrestricted(
        parsed.problem, cv.Cyclic(), step=cv.StepSize(parsed.lam, math.inf), x0=parsed.x0,
    ))
    roundtrip_ok = True
    for result in fixtures:
        text = cv.emit_result(result)
        rebuilt = cv.parse_result(text)
        roundtrip_ok = roundtrip_ok and cv.emit_result(rebuilt) == text
        roundtrip_ok = roundtrip_ok and rebuilt.status is result.status
        roundtrip_ok = roundtrip_ok and np.array_equal(rebuilt.solution, result.solution)

    # every malformed document is rejected with its own distinct code
    cases = adversarial_documents()
    codes = []
    for expected, doc in cases.items():
        try:
            cv.parse_problem(json.dumps(doc))
        except cv.ProblemFormatError as exc:
            codes.append(exc.code)
            if exc.code != expected:
                break
    rejection_ok = len(codes) == len(cases) and len(set(codes)) == len(cases)

    check("criterion 9: determinism, lossless round-trips, distinct rejections",
          seeds_ok and roundtrip_ok and rejection_ok,
          f"seeded bytes equal = {seeds_ok}, round-trips = {roundtrip_ok}, "
          f"distinct codes = {len(set(codes))}/{len(cases)}")
