"""
Finite matrices as a Banach algebra.

Induced operator norms, Neumann-series inversion, the resolvent and the
Gelfand spectral-radius sequence, trapezoid discretization of integral
kernels with block-averaged finite-rank approximations, and the
invertible-plus-finite-rank kernel test. There is deliberately no
eigensolver here: spectra are probed and bounded, never computed.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Final, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    DimensionMismatchError,
    DivergenceError,
    GridError,
    InvalidInputError,
    NotInvertibleError,
    PerturbationTooLargeError,
    PreconditionError,
)
from sequence_spaces import Exponent, ExponentLike, Scalar, vector_lp_norm

logger = logging.getLogger(__name__)

EXACT: Final = "exact"
LOWER_BOUND: Final = "lower-bound"

IN_RESOLVENT: Final = "in-resolvent"
IN_SPECTRUM: Final = "in-spectrum"
INDETERMINATE: Final = "indeterminate"

POWER_TOL: Final = 1e-10
MAX_POWER_STEPS: Final = 10000
ASCENT_RESTARTS: Final = 20
ASCENT_STEPS: Final = 200

GELFAND_CHECK_POWER: Final = 64
MAX_NEUMANN_DOUBLINGS: Final = 64
LINEAR_NEUMANN_TERMS: Final = 16
ROUNDING_SLACK: Final = 64.0

SINGULAR_TOL: Final = 1e-10
INDETERMINATE_BAND: Final = 1e-8
ELIMINATION_TOL: Final = 1e-10


def as_operator(matrix) -> np.ndarray:
    """Validate a dense matrix and return it as a float or complex array."""
    a = np.asarray(matrix)
    if a.ndim != 2:
        raise InvalidInputError(f"Operator must be a 2-D matrix, got {a.ndim} dimensions")
    if a.shape[0] == 0 or a.shape[1] == 0:
        raise InvalidInputError("Operator has a zero dimension")
    a = a.astype(complex if np.iscomplexobj(a) else float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("Operator has non-finite entries")
    return a


def _square(matrix) -> np.ndarray:
    a = as_operator(matrix)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"Expected a square operator, got shape {a.shape}")
    return a


def operator_from_json(data: dict) -> np.ndarray:
    """{"rows": [[...]], "complex": bool, "imag_rows": optional [[...]]}."""
    try:
        real = np.asarray(data["rows"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"Matrix needs a rectangular 'rows' array: {e}") from e
    imag = data.get("imag_rows")
    if imag is not None:
        imag = np.asarray(imag, dtype=float)
        if imag.shape != real.shape:
            raise DimensionMismatchError(f"imag_rows shape {imag.shape} differs from rows shape {real.shape}")
        return as_operator(real + 1j * imag)
    if data.get("complex", False):
        return as_operator(real.astype(complex))
    return as_operator(real)


def operator_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a)
    data = {"rows": a.real.tolist(), "complex": bool(np.iscomplexobj(a))}
    if np.iscomplexobj(a):
        data["imag_rows"] = a.imag.tolist()
    return data


def _norm2(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class NormEstimate:
    value: float
    quality: str = EXACT

    @property
    def is_exact(self) -> bool:
        return self.quality == EXACT


def _power_iterate(gram: np.ndarray, start: np.ndarray) -> float:
    """Largest eigenvalue of the positive matrix gram, by power iteration."""
    v = start / np.linalg.norm(start)
    value = 0.0
    for _ in range(MAX_POWER_STEPS):
        w = gram @ v
        size = np.linalg.norm(w)
        if size == 0.0:
            return 0.0
        v = w / size
        w = gram @ v
        value = float(np.real(np.vdot(v, w)))
        if np.linalg.norm(w - value * v) <= POWER_TOL * max(value, 1e-300):
            break
    return value


def _spectral_norm(a: np.ndarray, rng: np.random.Generator) -> float:
    gram = a.conj().T @ a
    n = a.shape[1]
    starts = [np.ones(n, dtype=a.dtype) / math.sqrt(n), rng.normal(size=n).astype(a.dtype)]
    return math.sqrt(max(max(_power_iterate(gram, s), 0.0) for s in starts))


def _ascent(a: np.ndarray, p_in: Exponent, p_out: Exponent, rng: np.random.Generator) -> float:
    """Random-restart hill climbing on ||Av||_out / ||v||_in."""
    n = a.shape[1]
    complex_field = np.iscomplexobj(a)

    def ratio(v: np.ndarray) -> float:
        size = vector_lp_norm(v, p_in)
        return vector_lp_norm(a @ v, p_out) / size if size > 0 else 0.0

    def draw() -> np.ndarray:
        v = rng.normal(size=n)
        return v + 1j * rng.normal(size=n) if complex_field else v

    best = max(vector_lp_norm(a[:, j], p_out) for j in range(n))
    for _ in range(ASCENT_RESTARTS):
        v = draw()
        value = ratio(v)
        step = 0.5
        for _ in range(ASCENT_STEPS):
            candidate = v + step * np.linalg.norm(v) * draw()
            candidate_value = ratio(candidate)
            if candidate_value > value:
                v, value = candidate, candidate_value
            else:
                step *= 0.9
        best = max(best, value)
    return best


def operator_norm(matrix, p_in: ExponentLike, p_out: ExponentLike, seed: int = 0) -> NormEstimate:
    """
    sup { ||Av||_out : ||v||_in <= 1 }.

    Exact when p_in = 1 (largest column norm), when p_out = inf and p_in >= 1
    (largest conjugate row norm) and for (2, 2) (power iteration on A^H A).
    Every other pair returns the best value of a random-restart ascent,
    tagged as a lower bound.
    """
    a = as_operator(matrix)
    p_in, p_out = Exponent.parse(p_in), Exponent.parse(p_out)
    rng = np.random.default_rng(seed)

    if p_in.p == 1.0 and p_out.p >= 1.0:
        return NormEstimate(max(vector_lp_norm(a[:, j], p_out) for j in range(a.shape[1])))
    if p_out.is_infinite and p_in.p >= 1.0:
        q = p_in.conjugate()
        return NormEstimate(max(vector_lp_norm(a[i, :], q) for i in range(a.shape[0])))
    if p_in.p == 2.0 and p_out.p == 2.0:
        return NormEstimate(_spectral_norm(a, rng))

    value = _ascent(a, p_in, p_out, rng)
    logger.warning(f"Operator norm ({p_in} -> {p_out}) has no exact method; returning lower bound {value:.6g}")
    return NormEstimate(value, LOWER_BOUND)


@dataclass(frozen=True)
class GelfandEntry:
    n: int
    rho: float


@dataclass
class GelfandTrace:
    entries: List[GelfandEntry] = field(default_factory=list)

    @property
    def running_inf(self) -> float:
        return min(e.rho for e in self.entries)

    def rows(self) -> List[Tuple[int, float, float]]:
        """(n, rho_n, running infimum up to n) for rendering."""
        rows, low = [], math.inf
        for e in self.entries:
            low = min(low, e.rho)
            rows.append((e.n, e.rho, low))
        return rows


def gelfand_trace(matrix, n_max: int = GELFAND_CHECK_POWER) -> GelfandTrace:
    """||a^n||_2^(1/n) for n = 1, 2, 4, ... <= n_max, by repeated squaring."""
    a = _square(matrix)
    if int(n_max) < 1:
        raise InvalidInputError(f"n_max must be at least 1, got {n_max}")
    trace = GelfandTrace()
    # a^n == exp(log_scale) * power, with power kept at unit norm
    power, log_scale, n = a.copy(), 0.0, 1
    while n <= n_max:
        size = _norm2(power)
        if size == 0.0:
            while n <= n_max:
                trace.entries.append(GelfandEntry(n, 0.0))
                n *= 2
            break
        log_norm = log_scale + math.log(size)
        trace.entries.append(GelfandEntry(n, math.exp(log_norm / n)))
        power = power / size
        power = power @ power
        log_scale = 2.0 * log_norm
        n *= 2
    logger.debug(f"Gelfand trace up to n={n_max}: running infimum {trace.running_inf:.6g}")
    return trace


@dataclass
class NeumannResult:
    inverse: np.ndarray
    terms: int
    residual: float
    rounding_floor: float = 0.0
    error_bound: Optional[float] = None
    norm_bound: Optional[float] = None
    norm_certified: Optional[bool] = None


def _rounding_floor(total: np.ndarray) -> float:
    """Residual that floating point leaves in (I - a) S_N - I once the tail is negligible."""
    return ROUNDING_SLACK * float(np.finfo(float).eps) * _norm2(total) * total.shape[0]


def neumann_inverse(matrix, tol: float = 1e-12) -> NeumannResult:
    """
    (I - a)^{-1} as the partial sum S_N = I + a + ... + a^N.

    Accepted whenever the Gelfand sequence drops below 1, which covers
    matrices with ||a|| >= 1 but spectral radius < 1. The first terms are
    added one at a time, so a nilpotent a stops after at most dim terms;
    after that the sum doubles as S_{2M} = S_M (I + a^M). It stops once
    ||(I - a) S_N - I||_2 <= tol, or once ||a^{N+1}|| <= tol and the
    residual is down to the rounding floor of S_N.
    """
    a = _square(matrix)
    if not tol > 0:
        raise InvalidInputError(f"Tolerance must be positive, got {tol}")
    estimate = gelfand_trace(a, GELFAND_CHECK_POWER).running_inf
    if estimate >= 1.0:
        raise DivergenceError(f"Neumann series diverges: spectral radius estimate {estimate:.6g} >= 1")

    identity = np.eye(a.shape[0], dtype=a.dtype)
    complement = identity - a
    linear_terms = min(a.shape[0], LINEAR_NEUMANN_TERMS)
    # total = I + a + ... + a^(terms-1), power = a^terms
    total, power, terms, doublings = identity.copy(), a.copy(), 1, 0
    while True:
        residual = _norm2(complement @ total - identity)
        if not math.isfinite(residual):
            raise DivergenceError(f"Neumann series overflowed after {terms} terms")
        if residual <= tol:
            break
        if terms >= linear_terms and _norm2(power) <= tol and residual <= _rounding_floor(total):
            logger.info(f"Neumann residual {residual:.3g} is at the rounding floor, above tolerance {tol:g}")
            break
        if terms < linear_terms:
            total = total + power
            power = power @ a
            terms += 1
        elif doublings < MAX_NEUMANN_DOUBLINGS:
            total = total + total @ power
            power = power @ power
            terms *= 2
            doublings += 1
        else:
            raise DivergenceError(
                f"Neumann series did not reach tolerance {tol:g} in {terms} terms (residual {residual:.3g})"
            )
    logger.debug(f"Neumann series converged with {terms} terms, residual {residual:.3g}")

    result = NeumannResult(total, terms, residual, _rounding_floor(total))
    size = _norm2(a)
    if size < 1.0:
        result.error_bound = size ** terms / (1.0 - size)
        result.norm_bound = 1.0 / (1.0 - size)
        result.norm_certified = _norm2(total) <= result.norm_bound + tol
    return result


def invert(matrix, tol: float = 1e-12) -> np.ndarray:
    """x^{-1} = x^H (x x^H)^{-1}, the inner inverse taken as a Neumann series."""
    x = _square(matrix)
    scale = _norm2(x) ** 2
    if scale == 0.0:
        raise NotInvertibleError("The zero operator is not invertible")
    gram = x @ x.conj().T / scale
    try:
        inner = neumann_inverse(np.eye(x.shape[0], dtype=x.dtype) - gram, tol)
    except DivergenceError as e:
        raise NotInvertibleError(f"Operator is not invertible by Neumann series: {e}") from e
    return x.conj().T @ inner.inverse / scale


@dataclass
class PerturbedInverse:
    inverse: np.ndarray
    bound: float
    x_inverse_norm: float


def perturbed_inverse(x, a, tol: float = 1e-12, x_inverse=None) -> PerturbedInverse:
    """(x - a)^{-1} = (I - x^{-1} a)^{-1} x^{-1}, with ||.|| <= ||x^{-1}|| / (1 - ||x^{-1}|| ||a||)."""
    x, a = _square(x), _square(a)
    if x.shape != a.shape:
        raise DimensionMismatchError(f"x has shape {x.shape} but a has shape {a.shape}")
    x_inv = invert(x, tol) if x_inverse is None else _square(x_inverse)
    inv_norm, a_norm = _norm2(x_inv), _norm2(a)
    if inv_norm * a_norm >= 1.0:
        raise PerturbationTooLargeError(
            f"||x^-1|| * ||a|| = {inv_norm * a_norm:.6g} >= 1; the perturbation is too large"
        )
    inner = neumann_inverse(x_inv @ a, tol)
    return PerturbedInverse(inner.inverse @ x_inv, inv_norm / (1.0 - inv_norm * a_norm), inv_norm)


@dataclass
class ResolventDecision:
    verdict: str
    resolvent_norm: Optional[float] = None
    criterion_n: Optional[int] = None
    relative_gap: float = 0.0


def resolvent_probe(matrix, lam, n_max: int = GELFAND_CHECK_POWER) -> ResolventDecision:
    """
    Decide whether lam I - a is invertible from its smallest singular value
    relative to its norm, and find the first n <= n_max with |lam|^n > ||a^n||,
    which certifies lam in the resolvent set on its own.
    """
    a = _square(matrix)
    lam = complex(Scalar.of(lam, "complex"))
    shifted = lam * np.eye(a.shape[0]) - a
    singular = np.linalg.svd(shifted, compute_uv=False)
    gap = float(singular[-1] / singular[0]) if singular[0] > 0 else 0.0

    if gap <= SINGULAR_TOL:
        decision = ResolventDecision(IN_SPECTRUM, relative_gap=gap)
    elif gap <= SINGULAR_TOL + INDETERMINATE_BAND:
        logger.warning(f"Resolvent probe at {lam} is indeterminate (relative gap {gap:.3g})")
        decision = ResolventDecision(INDETERMINATE, relative_gap=gap)
    else:
        decision = ResolventDecision(IN_RESOLVENT, 1.0 / float(singular[-1]), relative_gap=gap)

    if lam != 0:
        log_lam = math.log(abs(lam))
        power, log_scale = a.copy(), 0.0
        for n in range(1, int(n_max) + 1):
            size = _norm2(power)
            if size == 0.0 or n * log_lam > log_scale + math.log(size):
                decision.criterion_n = n
                break
            log_scale += math.log(size)
            power = (power / size) @ a
    return decision


def trapezoid_weights(n: int) -> np.ndarray:
    if n < 2:
        raise GridError(f"Kernel grid needs at least 2 points, got {n}")
    weights = np.full(n, 1.0 / (n - 1))
    weights[[0, -1]] *= 0.5
    return weights


def sample_kernel(kernel: Callable, n: int) -> np.ndarray:
    """kernel(x_i, y_j) on the uniform grid of n points in [0, 1]."""
    grid = np.linspace(0.0, 1.0, int(n))
    values = np.asarray(kernel(grid[:, None], grid[None, :]))
    return np.broadcast_to(values, (grid.size, grid.size)).astype(complex if np.iscomplexobj(values) else float)


def kernel_from_json(data: dict) -> np.ndarray:
    """{"n": grid size, "values": row-major list of n*n samples}."""
    try:
        n = int(data["n"])
        values = np.asarray(data["values"], dtype=float).reshape(n, n)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"Kernel needs 'n' and n*n row-major 'values': {e}") from e
    return values


def discretize_integral_kernel(kernel_values, h: Optional[float] = None, grid: Optional[Sequence[float]] = None) -> np.ndarray:
    """M[i, j] = a(x_i, y_j) w_j with trapezoid weights on the uniform grid of [0, 1]."""
    values = _square(kernel_values)
    n = values.shape[0]
    weights = trapezoid_weights(n)
    if h is not None and not math.isclose(h, 1.0 / (n - 1), rel_tol=1e-9):
        raise InvalidInputError(f"Step {h} does not match the uniform grid of {n} points on [0, 1]")
    if grid is not None:
        points = np.asarray(grid, dtype=float)
        if points.size != n or not np.allclose(points, np.linspace(0.0, 1.0, n), atol=1e-12):
            raise InvalidInputError("Kernel grid is not the uniform grid of [0, 1]")
    return values * weights[None, :]


@dataclass
class FiniteRankApproximation:
    operator: np.ndarray
    rank_budget: int
    error: float


def finite_rank_truncate(kernel_values, r: int) -> FiniteRankApproximation:
    """Replace the kernel by its averages over r x r blocks; error in the (inf -> inf) norm."""
    values = _square(kernel_values)
    n = values.shape[0]
    if int(r) < 1 or int(r) > n:
        raise InvalidInputError(f"Rank budget must lie in [1, {n}], got {r}")
    blocks = np.array_split(np.arange(n), int(r))
    averaged = np.empty_like(values)
    for rows in blocks:
        for cols in blocks:
            averaged[np.ix_(rows, cols)] = values[np.ix_(rows, cols)].mean()
    full = discretize_integral_kernel(values)
    approximation = discretize_integral_kernel(averaged)
    error = float(np.max(np.sum(np.abs(full - approximation), axis=1)))
    logger.debug(f"Block-averaged kernel with r={r}: (inf -> inf) error {error:.6g}")
    return FiniteRankApproximation(approximation, int(r), error)


@dataclass
class FredholmDecision:
    invertible: bool
    witness: Optional[np.ndarray] = None
    rank: int = 0


def _eliminate(s: np.ndarray) -> Tuple[int, Optional[np.ndarray]]:
    """Rank of s and, if it is rank deficient, a unit vector of its kernel."""
    work = s.copy()
    rows, cols = work.shape
    threshold = ELIMINATION_TOL * _norm2(s)
    pivots: List[int] = []
    free: List[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            free.append(col)
            continue
        pivot = row + int(np.argmax(np.abs(work[row:, col])))
        if abs(work[pivot, col]) <= threshold:
            free.append(col)
            continue
        work[[row, pivot]] = work[[pivot, row]]
        factors = work[row + 1:, col] / work[row, col]
        work[row + 1:] -= factors[:, None] * work[row]
        pivots.append(col)
        row += 1
    if not free:
        return len(pivots), None

    x = np.zeros(cols, dtype=work.dtype)
    x[free[0]] = 1.0
    for i in reversed(range(len(pivots))):
        c = pivots[i]
        x[c] = -(work[i, c + 1:] @ x[c + 1:]) / work[i, c]
    return len(pivots), x / np.linalg.norm(x)


def fredholm_check(t, a) -> FredholmDecision:
    """Invertibility of T + A for invertible T, decided by whether its kernel is trivial."""
    t, a = _square(t), _square(a)
    if t.shape != a.shape:
        raise DimensionMismatchError(f"T has shape {t.shape} but A has shape {a.shape}")
    if resolvent_probe(t, 0.0, n_max=1).verdict != IN_RESOLVENT:
        raise PreconditionError("T must be invertible")
    rank, witness = _eliminate(t + a)
    return FredholmDecision(witness is None, witness, rank)
