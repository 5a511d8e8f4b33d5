"""
Convex hulls, shape tests and Minkowski gauges for bodies in R^m.

A body is a membership oracle plus two radii: the Euclidean ball of the inner
radius lies inside the body and the body lies inside the ball of the outer
radius. That is all the gauge needs, so l^p balls, polytopes and user bodies
are handled uniformly.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Final, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from errors import (
    DimensionMismatchError,
    InvalidInputError,
    NumericalError,
    OracleInconsistencyError,
)
from sequence_spaces import Exponent, ExponentLike, vector_lp_norm

logger = logging.getLogger(__name__)

MAX_BISECTION_STEPS: Final = 64
BRACKET_SLACK: Final = 1e-12
OUTER_PROBE_SLACK: Final = 1e-9

ENUMERATION_MAX_DIM: Final = 3
ENUMERATION_MAX_POINTS: Final = 12
CERTIFICATE_TOL: Final = 1e-9
WEIGHT_TOL: Final = 1e-12
SEPARATION_TOL: Final = 1e-10


@dataclass(frozen=True)
class BodyOracle:
    """A star body in R^m given by a membership predicate and bounding radii."""

    dimension: int
    contains: Callable[[np.ndarray], bool]
    outer_radius: float
    inner_radius: float
    convex: bool = False
    name: str = "body"

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise InvalidInputError(f"Body dimension must be at least 1, got {self.dimension}")
        if not self.outer_radius > 0:
            raise InvalidInputError(f"Outer radius must be positive, got {self.outer_radius}")
        if self.inner_radius < 0 or self.inner_radius > self.outer_radius:
            raise InvalidInputError(
                f"Inner radius {self.inner_radius} must lie in [0, {self.outer_radius}]"
            )

    def __call__(self, point) -> bool:
        return bool(self.contains(np.asarray(point, dtype=float)))


def lp_ball(p: ExponentLike, m: int, radius: float = 1.0) -> BodyOracle:
    """{x in R^m : ||x||_p <= radius}; convex exactly when p >= 1."""
    p = Exponent.parse(p)
    m = int(m)
    # comparison constants between ||.||_p and ||.||_2 in R^m
    gap = abs(p.reciprocal - 0.5)
    if p.p >= 2.0:
        inner, outer = 1.0, m ** gap
    else:
        inner, outer = m ** (-gap), 1.0
    return BodyOracle(
        dimension=m,
        contains=lambda x: vector_lp_norm(x, p) <= radius,
        outer_radius=outer * radius,
        inner_radius=inner * radius,
        convex=p.p >= 1.0,
        name=f"lp-ball {p} {m}",
    )


def cube(m: int) -> BodyOracle:
    body = lp_ball(math.inf, m)
    return BodyOracle(m, body.contains, body.outer_radius, body.inner_radius, True, f"cube {m}")


def simplex(m: int) -> BodyOracle:
    """{x : x_i >= -1 for all i, sum x_i <= 1}, a simplex with 0 in its interior."""
    m = int(m)
    return BodyOracle(
        dimension=m,
        contains=lambda x: bool(np.all(x >= -1.0)) and float(np.sum(x)) <= 1.0,
        outer_radius=math.sqrt(m * m + (m - 1)),
        inner_radius=1.0 / math.sqrt(m),
        convex=True,
        name=f"simplex {m}",
    )


def shifted_ball(center: Sequence[float], r: float) -> BodyOracle:
    c = np.asarray(center, dtype=float)
    offset = float(np.linalg.norm(c))
    if offset > r:
        raise InvalidInputError(f"Ball of radius {r} around {c.tolist()} does not contain 0")
    return BodyOracle(
        dimension=c.size,
        contains=lambda x: float(np.linalg.norm(x - c)) <= r,
        outer_radius=r + offset,
        inner_radius=r - offset,
        convex=True,
        name=f"shifted-ball {c.tolist()} {r:g}",
    )


def scaled_body(body: BodyOracle, factor: float) -> BodyOracle:
    if not factor > 0:
        raise InvalidInputError(f"Scale factor must be positive, got {factor}")
    return BodyOracle(
        dimension=body.dimension,
        contains=lambda x: body.contains(x / factor),
        outer_radius=body.outer_radius * factor,
        inner_radius=body.inner_radius * factor,
        convex=body.convex,
        name=f"{factor:g}*({body.name})",
    )


def parse_body(text: str) -> BodyOracle:
    """Build one of the named bodies: 'lp-ball p m', 'cube m', 'simplex m', 'shifted-ball c r'."""
    parts = text.split()
    if not parts:
        raise InvalidInputError("Empty body description")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "lp-ball" and len(args) == 2:
            return lp_ball(args[0], int(args[1]))
        if kind == "cube" and len(args) == 1:
            return cube(int(args[0]))
        if kind == "simplex" and len(args) == 1:
            return simplex(int(args[0]))
        if kind == "shifted-ball" and len(args) >= 2:
            raw = " ".join(args[:-1])
            center = json.loads(raw) if raw.startswith("[") else [float(c) for c in raw.split(",")]
            return shifted_ball(center, float(args[-1]))
    except (ValueError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"Cannot parse body {text!r}: {e}") from e
    raise InvalidInputError(
        f"Unknown body {text!r}; expected 'lp-ball p m', 'cube m', 'simplex m' or 'shifted-ball c r'"
    )


def _as_point(v, dimension: int) -> np.ndarray:
    point = np.asarray(v, dtype=float).ravel()
    if point.size != dimension:
        raise DimensionMismatchError(f"Point has dimension {point.size}, expected {dimension}")
    return point


def minkowski_gauge(body: BodyOracle, v, tol: float = 1e-12) -> float:
    """
    mu(v) = inf { t > 0 : v / t in body }, to absolute accuracy tol.

    Bisection on t over [|v|/outer_radius, |v|/inner_radius]. The returned
    value is the upper end of the final bracket, so v / t is a member for it.
    """
    if not tol > 0:
        raise InvalidInputError(f"Tolerance must be positive, got {tol}")
    v = _as_point(v, body.dimension)
    size = float(np.linalg.norm(v))
    if size == 0.0:
        return 0.0
    if body.inner_radius <= 0:
        raise InvalidInputError(f"{body.name} contains no ball around 0; its gauge is not finite")

    lo = size / body.outer_radius * (1.0 - OUTER_PROBE_SLACK)
    hi = size / body.inner_radius * (1.0 + BRACKET_SLACK)
    if not body(v / hi):
        raise OracleInconsistencyError(
            f"{body.name}: point of norm {size / hi:.6g} inside the inner radius is not a member"
        )
    if body(v / lo):
        raise OracleInconsistencyError(
            f"{body.name}: member found at norm {size / lo:.6g} beyond the outer radius"
        )

    steps = 0
    while hi - lo > tol and steps < MAX_BISECTION_STEPS:
        mid = 0.5 * (lo + hi)
        if body(v / mid):
            hi = mid
        else:
            lo = mid
        steps += 1
    logger.debug(f"Gauge of {body.name} after {steps} bisection steps: [{lo}, {hi}]")
    return hi


@dataclass
class HullCertificate:
    """Convex weights over at most m+1 of the generating points."""

    vertices: np.ndarray
    weights: np.ndarray
    indices: Tuple[int, ...]
    exact: bool = True

    def reconstruct(self) -> np.ndarray:
        return self.weights @ self.vertices

    def reconstruction_error(self, w) -> float:
        return float(np.max(np.abs(self.reconstruct() - np.asarray(w, dtype=float))))


@dataclass
class HullDecision:
    inside: bool
    certificate: Optional[HullCertificate] = None
    normal: Optional[np.ndarray] = None
    offset: Optional[float] = None


def _separating_hyperplane(points: np.ndarray, w: np.ndarray) -> Optional[Tuple[np.ndarray, float]]:
    """Maximize <a, w> - b over |a_i| <= 1 subject to <a, p> <= b for every point."""
    n, m = points.shape
    cost = np.concatenate([-w, [1.0]])
    a_ub = np.hstack([points, -np.ones((n, 1))])
    bounds = [(-1.0, 1.0)] * m + [(None, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(n), bounds=bounds, method="highs")
    if res.status != 0:
        raise NumericalError(f"Separation problem failed: {res.message}")
    scale = max(1.0, float(np.max(np.abs(points))), float(np.max(np.abs(w))))
    if -res.fun <= SEPARATION_TOL * scale:
        return None
    normal = res.x[:m]
    offset = float(np.max(points @ normal))
    if float(normal @ w) <= offset:
        return None
    return normal, offset


def _enumerate_certificate(points: np.ndarray, w: np.ndarray) -> Optional[HullCertificate]:
    n, m = points.shape
    scale = max(1.0, float(np.max(np.abs(points))))
    for size in range(1, min(m + 1, n) + 1):
        for combo in itertools.combinations(range(n), size):
            vertices = points[list(combo)]
            if size > 1 and np.linalg.matrix_rank(vertices[1:] - vertices[0]) < size - 1:
                continue
            system = np.vstack([vertices.T, np.ones(size)])
            target = np.concatenate([w, [1.0]])
            weights, *_ = np.linalg.lstsq(system, target, rcond=None)
            if np.max(np.abs(system @ weights - target)) > 1e-10 * scale:
                continue
            if np.min(weights) < -WEIGHT_TOL:
                continue
            weights = np.clip(weights, 0.0, None)
            weights = weights / weights.sum()
            certificate = HullCertificate(vertices, weights, combo, exact=True)
            if certificate.reconstruction_error(w) <= CERTIFICATE_TOL:
                return certificate
    return None


def _caratheodory_reduce(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Move along affine dependencies until at most m+1 weights are positive."""
    m = points.shape[1]
    weights = np.where(weights > WEIGHT_TOL, weights, 0.0)
    while np.count_nonzero(weights) > m + 1:
        support = np.flatnonzero(weights)
        system = np.vstack([points[support].T, np.ones(support.size)])
        direction = null_space(system)[:, 0]
        if np.max(direction) <= 0:
            direction = -direction
        positive = direction > 0
        ratios = weights[support][positive] / direction[positive]
        step = float(np.min(ratios))
        weights[support] -= step * direction
        weights[support[positive][np.argmin(ratios)]] = 0.0
        weights = np.where(weights > WEIGHT_TOL, weights, 0.0)
    return weights / weights.sum()


def _lp_certificate(points: np.ndarray, w: np.ndarray) -> HullCertificate:
    n, m = points.shape
    system = np.vstack([points.T, np.ones(n)])
    target = np.concatenate([w, [1.0]])
    res = linprog(np.zeros(n), A_eq=system, b_eq=target, bounds=[(0.0, None)] * n, method="highs")
    if res.status != 0:
        raise NumericalError(f"Point passed separation but the feasibility problem failed: {res.message}")
    weights = _caratheodory_reduce(points, res.x.copy())
    support = tuple(int(i) for i in np.flatnonzero(weights))
    return HullCertificate(points[list(support)], weights[list(support)], support, exact=False)


def hull_membership(points: Sequence[Sequence[float]], w) -> HullDecision:
    """
    Decide whether w lies in the convex hull of the points.

    Inside: a certificate with at most m+1 vertices. Outside: a hyperplane
    (normal, offset) with <normal, w> > offset >= <normal, p> for every point.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise InvalidInputError("Points must be a nonempty list of equal-length coordinate lists")
    w = _as_point(w, pts.shape[1])

    separation = _separating_hyperplane(pts, w)
    if separation is not None:
        normal, offset = separation
        logger.debug(f"Point {w.tolist()} separated with normal {normal.tolist()}")
        return HullDecision(inside=False, normal=normal, offset=offset)

    n, m = pts.shape
    certificate = None
    if m <= ENUMERATION_MAX_DIM and n <= ENUMERATION_MAX_POINTS:
        certificate = _enumerate_certificate(pts, w)
    if certificate is None:
        certificate = _lp_certificate(pts, w)
    return HullDecision(inside=True, certificate=certificate)


@dataclass
class ShapeVerdict:
    falsified: bool
    witness: Optional[np.ndarray] = None
    applicable: bool = True

    @property
    def label(self) -> str:
        if not self.applicable:
            return "not-applicable"
        return "falsified" if self.falsified else "not-falsified"


@dataclass
class ShapeReport:
    samples: int
    verdicts: Dict[str, ShapeVerdict] = field(default_factory=dict)


def _sample_members(body: BodyOracle, count: int, rng: np.random.Generator) -> List[np.ndarray]:
    members: List[np.ndarray] = []
    attempts = 0
    while len(members) < count and attempts < 50 * count:
        batch = rng.uniform(-body.outer_radius, body.outer_radius, size=(count, body.dimension))
        attempts += count
        members.extend(v for v in batch if body(v))
    return members[:count]


def shape_classify(body: BodyOracle, sample_count: int = 1000, seed: int = 0) -> ShapeReport:
    """
    Try to falsify symmetry (-A = A), starlikeness (tA in A for t in [0,1])
    and circularity (rotation invariance in the plane) by sampling members.
    A property is never asserted true, only reported as not falsified.
    """
    if sample_count < 1:
        raise InvalidInputError(f"sample_count must be at least 1, got {sample_count}")
    rng = np.random.default_rng(seed)
    members = _sample_members(body, sample_count, rng)

    witnesses: Dict[str, Optional[np.ndarray]] = {"symmetric": None, "starlike": None, "circular": None}
    planar = body.dimension == 2
    for v in members:
        if not body(-v):
            current = witnesses["symmetric"]
            if current is None or np.linalg.norm(v) > np.linalg.norm(current):
                witnesses["symmetric"] = v
        t = rng.uniform(0.0, 1.0)
        if witnesses["starlike"] is None and not body(t * v):
            witnesses["starlike"] = v
        if planar and witnesses["circular"] is None:
            theta = rng.uniform(0.0, 2.0 * math.pi)
            c, s = math.cos(theta), math.sin(theta)
            rotated = np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])
            if not body(rotated):
                witnesses["circular"] = v

    report = ShapeReport(samples=len(members))
    for name, witness in witnesses.items():
        applicable = planar or name != "circular"
        report.verdicts[name] = ShapeVerdict(witness is not None, witness, applicable)
    logger.info(
        f"Shape check of {body.name} on {len(members)} members: "
        + ", ".join(f"{k}={v.label}" for k, v in report.verdicts.items())
    )
    return report


@dataclass
class SeminormReport:
    trials: int
    tol: float
    convex_declared: bool
    homogeneity_violation: float = 0.0
    triangle_violation: float = 0.0
    triangle_witness: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def is_seminorm(self) -> bool:
        return self.homogeneity_violation <= 2 * self.tol and self.triangle_violation <= 2 * self.tol


def gauge_seminorm_check(body: BodyOracle, trials: int = 1000, tol: float = 1e-9, seed: int = 0) -> SeminormReport:
    """
    Sample pairs v, w normalized to gauge 1 and scalars alpha in [-2, 2];
    record the worst failure of homogeneity and of the triangle inequality.
    Coordinate pairs (e_i, e_j) are always among the trials.
    """
    rng = np.random.default_rng(seed)
    m = body.dimension
    gauge = lambda x: minkowski_gauge(body, x, tol)

    def normalized(x: np.ndarray) -> np.ndarray:
        size = gauge(x)
        return x / size if size > 0 else x

    basis = np.eye(m)
    pairs = [(basis[i], basis[j]) for i in range(m) for j in range(i + 1, m)][:trials]
    while len(pairs) < trials:
        pairs.append((rng.normal(size=m), rng.normal(size=m)))

    report = SeminormReport(trials=len(pairs), tol=tol, convex_declared=body.convex)
    for v, w in pairs:
        v, w = normalized(v), normalized(w)
        mu_v, mu_w = gauge(v), gauge(w)
        alpha = rng.uniform(-2.0, 2.0)
        report.homogeneity_violation = max(
            report.homogeneity_violation, abs(gauge(alpha * v) - abs(alpha) * mu_v)
        )
        excess = gauge(v + w) - mu_v - mu_w
        if excess > report.triangle_violation:
            report.triangle_violation = excess
            report.triangle_witness = (v, w)
    if body.convex and not report.is_seminorm:
        logger.warning(
            f"{body.name} is declared convex but its gauge failed the seminorm check "
            f"(homogeneity {report.homogeneity_violation:.3g}, triangle {report.triangle_violation:.3g})"
        )
    return report
