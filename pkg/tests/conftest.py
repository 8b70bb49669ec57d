"""Shared builders for the test suite.

Random instances are always constructed around a known common solution z:
sets are built to contain z and affine operators use shift = -M z so that
h(z) = 0, which makes z a solution of every instance regardless of the set.
With strictly monotone M the solution is unique, giving exact targets for
cross-checks.
"""

import numpy as np

import csvip as cv


def canonical_problem():
    """Two overlapping intervals with the same affine operator x - 2.

    The unique common solution is 2.0; the certified ism constant of the
    operator is exactly 1.0.
    """
    op = cv.AffineOperator(matrix=np.array([[1.0]]), shift=np.array([-2.0]))
    first = cv.Box(lower=np.array([0.0]), upper=np.array([2.0]))
    second = cv.Box(lower=np.array([1.0]), upper=np.array([3.0]))
    return cv.CsvipProblem(instances=((first, op), (second, op)))


def canonical_document():
    """JSON form of :func:`canonical_problem` with x0 = 10."""
    return {
        "version": "csvip/1",
        "dim": 1,
        "instances": [
            {
                "set": {"type": "box", "lower": [0.0], "upper": [2.0]},
                "operator": {"type": "affine", "matrix": [[1.0]], "shift": [-2.0]},
            },
            {
                "set": {"type": "box", "lower": [1.0], "upper": [3.0]},
                "operator": {"type": "affine", "matrix": [[1.0]], "shift": [-2.0]},
            },
        ],
        "lambda": 1.0,
        "x0": [10.0],
    }


def diverging_document():
    """Unsolvable instance: constant operator on the whole space."""
    return {
        "version": "csvip/1",
        "dim": 1,
        "instances": [
            {
                "set": {"type": "whole_space"},
                "operator": {"type": "constant", "value": [1.0]},
            },
            {
                "set": {"type": "whole_space"},
                "operator": {"type": "constant", "value": [1.0]},
            },
        ],
        "lambda": 0.5,
        "x0": [0.0],
    }


def adversarial_documents():
    """One malformed problem document per parser rejection code."""
    cases = {}

    def case(code, mutate):
        doc = canonical_document()
        mutate(doc)
        cases[code] = doc

    case("bad-version", lambda d: d.update(version="csvip/2"))
    case("unknown-field", lambda d: d.update(extra=1))
    case("missing-field", lambda d: d.pop("dim"))
    case("bad-dim", lambda d: d.update(dim=0))
    case("dim-mismatch", lambda d: d.update(x0=[1.0, 2.0]))
    case("empty-instances", lambda d: d.update(instances=[]))
    case("bad-instance", lambda d: d["instances"].__setitem__(0, 5))
    case("unknown-set", lambda d: d["instances"][0]["set"].update(type="cone"))
    case("bad-normal", lambda d: d["instances"][0].update(
        set={"type": "halfspace", "normal": [0.0], "offset": 1.0}))
    case("bad-box", lambda d: d["instances"][0]["set"].update(lower=[3.0]))
    case("bad-radius", lambda d: d["instances"][0].update(
        set={"type": "ball", "center": [0.0], "radius": -1.0}))
    case("bad-set", lambda d: d["instances"][0].update(
        set={"type": "intersection", "members": []}))
    case("inconsistent-affine", lambda d: d["instances"][0].update(
        set={"type": "affine_subspace", "matrix": [[0.0]], "rhs": [1.0]}))
    case("unknown-operator", lambda d: d["instances"][0]["operator"].update(type="quadratic"))
    case("bad-operator", lambda d: d["instances"][0].update(
        operator={"type": "constant", "value": "x"}))
    case("not-ism", lambda d: d["instances"][0]["operator"].update(matrix=[[-1.0]]))
    case("bad-alpha", lambda d: d["instances"][0].update(alpha=2.0))
    case("bad-weights", lambda d: d.update(weights=[0.7, 0.7]))
    case("bad-lambda", lambda d: d.update(**{"lambda": 2.0}))
    case("bad-x0", lambda d: d.update(x0="origin"))
    case("bad-stop", lambda d: d.update(stop={"residual_tol": 0.0}))
    return cases


def random_orthogonal(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


def spd_operator(rng, dim, solution, eig_range=(0.5, 3.0), skew=0.0):
    """Affine operator vanishing at ``solution`` with controlled spectrum."""
    q = random_orthogonal(rng, dim)
    eigs = rng.uniform(*eig_range, size=dim)
    m = q @ np.diag(eigs) @ q.T
    if skew > 0.0:
        k = rng.normal(size=(dim, dim))
        m = m + skew * (k - k.T)
    return cv.AffineOperator(matrix=m, shift=-m @ np.asarray(solution, dtype=float))


def set_containing(rng, z, kind):
    """A random set of the requested family that contains the point ``z``."""
    z = np.asarray(z, dtype=float)
    dim = z.size
    if kind == "box":
        lo = z - rng.uniform(0.2, 2.0, size=dim)
        hi = z + rng.uniform(0.2, 2.0, size=dim)
        return cv.Box(lower=lo, upper=hi)
    if kind == "ball":
        radius = rng.uniform(0.5, 3.0)
        center = z + rng.uniform(0.0, 0.9) * radius * random_unit(rng, dim)
        return cv.Ball(center=center, radius=radius)
    if kind == "halfspace":
        normal = rng.normal(size=dim)
        margin = rng.uniform(0.1, 2.0)
        return cv.Halfspace(normal=normal, offset=float(normal @ z) + margin)
    raise ValueError(kind)


def random_unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def sample_in(region, rng, scale=5.0):
    """A point of the set, drawn family-appropriately."""
    if isinstance(region, cv.Box):
        return rng.uniform(region.lower, region.upper)
    if isinstance(region, cv.Ball):
        radius = region.radius * rng.uniform(0.0, 1.0) ** (1.0 / region.dim)
        return region.center + radius * random_unit(rng, region.dim)
    if isinstance(region, cv.Simplex):
        return rng.dirichlet(np.ones(region.dim))
    if isinstance(region, cv.WholeSpace):
        return rng.normal(scale=scale, size=region.dim)
    # generic fallback: project an ambient draw
    return region.project(rng.normal(scale=scale, size=region.dim))


def random_subspace(rng, dim, codim):
    """An affine subspace through the origin given by ``codim`` constraints."""
    q = random_orthogonal(rng, dim)
    a = q[:, :codim].T
    return cv.AffineSubspace(matrix=a, rhs=np.zeros(codim))


def two_set_problem(rng, dim, kinds=("box", "ball", "halfspace"), skew=0.0, eig_range=(0.5, 3.0)):
    """Random two-instance problem with known common solution z."""
    z = rng.uniform(-2.0, 2.0, size=dim)
    instances = []
    for _ in range(2):
        kind = kinds[int(rng.integers(len(kinds)))]
        region = set_containing(rng, z, kind)
        op = spd_operator(rng, dim, z, eig_range=eig_range, skew=skew)
        instances.append((region, op))
    return cv.CsvipProblem(instances=tuple(instances)), z
