"""
Power series and the Wiener algebra.

PowerSeries carries coefficients a_0..a_N of a (truncated) power series with
its radius of convergence estimated from the tail; LaurentSeq carries a
finitely supported two-sided coefficient sequence, an element of the
algebra of absolutely convergent Fourier series under convolution.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Final, List, Optional, Sequence, Union

import numpy as np

from errors import (
    BandwidthInsufficientError,
    DomainError,
    InvalidInputError,
    NotInvertibleError,
    TailUnboundedError,
)
from operator_algebra import GelfandEntry, GelfandTrace
from sequence_spaces import Scalar

logger = logging.getLogger(__name__)

DEFAULT_CIRCLE_SAMPLES: Final = 1024
WIENER_GRID: Final = 2 ** 16
BANDWIDTH_FACTOR: Final = 8
GRID_FACTOR: Final = 4
MAX_BANDWIDTH: Final = 4096
MAX_NEWTON_STEPS: Final = 60
VANISHING_FACTOR: Final = 10.0


def _coefficients(values: Sequence) -> np.ndarray:
    return np.array([complex(Scalar.of(v)) for v in values], dtype=complex)


@dataclass(frozen=True)
class PowerSeries:
    """
    sum a_n z^n known up to n = truncation. Coefficients past the stored ones
    and up to the truncation are zero; past the truncation they are unknown.
    """

    coeffs: np.ndarray
    truncation: Optional[int] = None

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).ravel()
        if coeffs.size == 0:
            coeffs = np.zeros(1, dtype=complex)
        object.__setattr__(self, "coeffs", coeffs)
        n = coeffs.size - 1 if self.truncation is None else int(self.truncation)
        if n < coeffs.size - 1:
            raise InvalidInputError(f"Truncation {n} is below the {coeffs.size} stored coefficients")
        object.__setattr__(self, "truncation", n)

    @classmethod
    def of(cls, values: Sequence, truncation: Optional[int] = None) -> "PowerSeries":
        return cls(_coefficients(values), truncation)

    @classmethod
    def polynomial(cls, values: Sequence) -> "PowerSeries":
        """A polynomial: the tail window lies past every stored coefficient."""
        coeffs = _coefficients(values)
        return cls(coeffs, 2 * max(coeffs.size, 1))

    @classmethod
    def from_json(cls, data: dict) -> "PowerSeries":
        try:
            values = data["coeffs"]
        except (KeyError, TypeError) as e:
            raise InvalidInputError("Power series needs a 'coeffs' list") from e
        if data.get("polynomial", False):
            return cls.polynomial(values)
        return cls.of(values, data.get("truncation"))

    def to_json(self) -> dict:
        return {"coeffs": [[z.real, z.imag] for z in self.coeffs], "truncation": self.truncation}

    def partial_sum(self, k: int) -> "PowerSeries":
        return PowerSeries.polynomial(self.coeffs[: int(k) + 1])

    def _padded(self, size: int) -> np.ndarray:
        return np.pad(self.coeffs, (0, size - self.coeffs.size))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        size = max(self.coeffs.size, other.coeffs.size)
        return PowerSeries(self._padded(size) - other._padded(size), max(self.truncation, other.truncation))

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        size = max(self.coeffs.size, other.coeffs.size)
        return PowerSeries(self._padded(size) + other._padded(size), max(self.truncation, other.truncation))


@dataclass(frozen=True)
class LaurentSeq:
    """sum a_n z^n over offset <= n < offset + len(coeffs)."""

    offset: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).ravel()
        if coeffs.size == 0:
            coeffs = np.zeros(1, dtype=complex)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "offset", int(self.offset))

    @classmethod
    def delta(cls, n: int = 0, value: complex = 1.0) -> "LaurentSeq":
        return cls(n, np.array([value], dtype=complex))

    @classmethod
    def from_mapping(cls, terms: dict) -> "LaurentSeq":
        low, high = min(terms), max(terms)
        coeffs = np.zeros(high - low + 1, dtype=complex)
        for n, value in terms.items():
            coeffs[n - low] += complex(Scalar.of(value))
        return cls(low, coeffs)

    @classmethod
    def from_json(cls, data: dict) -> "LaurentSeq":
        try:
            return cls(int(data.get("offset", 0)), _coefficients(data["coeffs"]))
        except (KeyError, TypeError) as e:
            raise InvalidInputError("Laurent sequence needs 'offset' and 'coeffs'") from e

    def to_json(self) -> dict:
        trimmed = self.trimmed()
        return {"offset": trimmed.offset, "coeffs": [[z.real, z.imag] for z in trimmed.coeffs]}

    @property
    def top(self) -> int:
        return self.offset + self.coeffs.size - 1

    @property
    def bandwidth(self) -> int:
        return max(abs(self.offset), abs(self.top))

    def coefficient(self, n: int) -> complex:
        k = n - self.offset
        return complex(self.coeffs[k]) if 0 <= k < self.coeffs.size else 0j

    def trimmed(self) -> "LaurentSeq":
        nonzero = np.flatnonzero(self.coeffs)
        if nonzero.size == 0:
            return LaurentSeq(0, np.zeros(1, dtype=complex))
        return LaurentSeq(self.offset + int(nonzero[0]), self.coeffs[nonzero[0]: nonzero[-1] + 1])

    def dense(self, low: int, high: int) -> np.ndarray:
        """Coefficients at indices low..high, zero outside the support."""
        out = np.zeros(high - low + 1, dtype=complex)
        start, stop = max(low, self.offset), min(high, self.top)
        if start <= stop:
            out[start - low: stop - low + 1] = self.coeffs[start - self.offset: stop - self.offset + 1]
        return out

    def window(self, k: int) -> "LaurentSeq":
        """Restriction to indices -k..k."""
        return LaurentSeq(-k, self.dense(-k, k))

    def scale(self, factor: complex) -> "LaurentSeq":
        return LaurentSeq(self.offset, self.coeffs * factor)

    def __sub__(self, other: "LaurentSeq") -> "LaurentSeq":
        low, high = min(self.offset, other.offset), max(self.top, other.top)
        return LaurentSeq(low, self.dense(low, high) - other.dense(low, high))


Series = Union[PowerSeries, LaurentSeq]


def _tail_root(f: PowerSeries) -> float:
    """max |a_n|^(1/n) over nonzero coefficients with truncation/2 < n; 0 if there are none."""
    n = np.arange(f.coeffs.size)
    moduli = np.abs(f.coeffs)
    window = (n > f.truncation / 2.0) & (n >= 1) & (moduli > 0)
    if not np.any(window):
        return 0.0
    return float(np.max(np.exp(np.log(moduli[window]) / n[window])))


def radius_estimate(f: PowerSeries) -> float:
    root = _tail_root(f)
    return math.inf if root == 0.0 else 1.0 / root


def coeff_seminorm(f: PowerSeries, r: float) -> float:
    """max over stored n of |a_n| r^n."""
    if not r > 0:
        raise InvalidInputError(f"Radius must be positive, got {r}")
    return float(np.max(np.abs(f.coeffs) * r ** np.arange(f.coeffs.size)))


def _tail_bound(f: PowerSeries, s: float) -> float:
    root = _tail_root(f)
    if root == 0.0:
        return 0.0
    ratio = root * s
    return ratio ** (f.truncation + 1) / (1.0 - ratio)


@dataclass(frozen=True)
class Evaluation:
    value: complex
    tail_bound: float = 0.0


def circle_sup_seminorm(f: PowerSeries, s: float, samples: int = DEFAULT_CIRCLE_SAMPLES) -> Evaluation:
    """
    max |partial sum| over `samples` points of |z| = s, with a geometric bound
    on the neglected tail. The maximum principle makes the circle enough.
    """
    if not s > 0:
        raise InvalidInputError(f"Radius must be positive, got {s}")
    radius = radius_estimate(f)
    if s >= radius:
        raise TailUnboundedError(f"Circle radius {s} is not inside the estimated radius of convergence {radius:.6g}")
    z = s * np.exp(2j * np.pi * np.arange(int(samples)) / int(samples))
    value = float(np.max(np.abs(np.polyval(f.coeffs[::-1], z))))
    return Evaluation(value, _tail_bound(f, s))


def cauchy_product(f: Series, g: Series) -> Series:
    """Convolution of coefficient sequences; PowerSeries truncations add."""
    if isinstance(f, PowerSeries) and isinstance(g, PowerSeries):
        return PowerSeries(np.convolve(f.coeffs, g.coeffs), f.truncation + g.truncation)
    if isinstance(f, LaurentSeq) and isinstance(g, LaurentSeq):
        return LaurentSeq(f.offset + g.offset, np.convolve(f.coeffs, g.coeffs))
    raise InvalidInputError(f"Cannot multiply a {type(f).__name__} by a {type(g).__name__}")


def derivative(f: PowerSeries) -> PowerSeries:
    if f.coeffs.size == 1:
        return PowerSeries(np.zeros(1, dtype=complex), max(f.truncation - 1, 0))
    n = np.arange(1, f.coeffs.size)
    return PowerSeries(n * f.coeffs[1:], f.truncation - 1)


def evaluate(f: PowerSeries, z) -> Evaluation:
    """Horner evaluation of the partial sum at |z| < radius, with the tail bound."""
    z = complex(Scalar.of(z))
    radius = radius_estimate(f)
    if abs(z) >= radius:
        raise DomainError(f"|z| = {abs(z):.6g} is outside the estimated radius of convergence {radius:.6g}")
    value = 0j
    for a in f.coeffs[::-1]:
        value = value * z + a
    return Evaluation(value, _tail_bound(f, abs(z)))


def eval_circle(g: LaurentSeq, thetas) -> np.ndarray:
    z = np.exp(1j * np.asarray(thetas, dtype=float))
    return np.polyval(g.coeffs[::-1], z) * z ** g.offset


def eval_disk(g: LaurentSeq, z) -> complex:
    """sum_{n >= 0} a_n z^n + sum_{n >= 1} a_{-n} conj(z)^n for |z| <= 1."""
    z = complex(Scalar.of(z))
    if abs(z) > 1.0 + 1e-15:
        raise DomainError(f"Disk extension needs |z| <= 1, got |z| = {abs(z):.6g}")
    total = 0j
    for k, a in enumerate(g.coeffs):
        n = g.offset + k
        total += a * (z ** n if n >= 0 else z.conjugate() ** (-n))
    return total


def circle_values(g: LaurentSeq, m: int) -> np.ndarray:
    """g(exp(2 pi i k / m)) for k = 0..m-1 by one inverse FFT."""
    m = int(m)
    if m < 1:
        raise InvalidInputError(f"Grid size must be positive, got {m}")
    buckets = np.zeros(m, dtype=complex)
    np.add.at(buckets, np.arange(g.offset, g.top + 1) % m, g.coeffs)
    return np.fft.ifft(buckets) * m


def wiener_norm(g: LaurentSeq) -> float:
    return float(np.sum(np.abs(g.coeffs)))


@dataclass
class WienerInverse:
    inverse: LaurentSeq
    residual: float
    bandwidth: int
    truncation_loss: float = 0.0


def _newton_polish(g: LaurentSeq, h: LaurentSeq, k: int, tol: float):
    """h <- h * (2 delta_0 - g * h), kept to indices -k..k; returns the best iterate."""
    unit = LaurentSeq.delta(0)
    best, best_residual, loss = h, wiener_norm(cauchy_product(g, h) - unit), 0.0
    for step in range(MAX_NEWTON_STEPS):
        if best_residual <= tol:
            break
        residual_seq = cauchy_product(g, h) - unit
        full = h - cauchy_product(h, residual_seq)
        h = full.window(k)
        loss = wiener_norm(full) - wiener_norm(h)
        residual = wiener_norm(cauchy_product(g, h) - unit)
        logger.debug(f"Newton step {step} at bandwidth {k}: residual {residual:.3g}, truncated mass {loss:.3g}")
        if residual >= 0.5 * best_residual:
            if residual < best_residual:
                best, best_residual = h, residual
            break
        best, best_residual = h, residual
    return best, best_residual, loss


def wiener_invert(g: LaurentSeq, tol: float = 1e-12, grid: Optional[int] = None, max_bandwidth: int = MAX_BANDWIDTH) -> WienerInverse:
    """
    The convolution inverse of g, which exists when g never vanishes on the
    circle. Seeded from the discrete Fourier coefficients of 1/g on the grid
    and polished by Newton iteration; the bandwidth doubles until the
    residual ||g * h - delta_0||_1 drops to tol or max_bandwidth is reached.
    """
    if not tol > 0:
        raise InvalidInputError(f"Tolerance must be positive, got {tol}")
    g = g.trimmed()
    k = BANDWIDTH_FACTOR * max(g.bandwidth, 1)
    best_residual = math.inf
    while True:
        k = min(k, max(int(max_bandwidth), 1))
        m = int(grid) if grid else GRID_FACTOR * (2 * k + 1)
        values = circle_values(g, m)
        smallest = int(np.argmin(np.abs(values)))
        if abs(values[smallest]) <= VANISHING_FACTOR * tol:
            angle = 2.0 * math.pi * smallest / m
            raise NotInvertibleError(f"g nearly vanishes at angle {angle:.6g} (|g| = {abs(values[smallest]):.3g})", angle)

        reciprocal = np.fft.fft(1.0 / values) / m
        seed = LaurentSeq(-k, reciprocal[np.arange(-k, k + 1) % m])
        h, residual, loss = _newton_polish(g, seed, k, tol)
        best_residual = min(best_residual, residual)
        if residual <= tol:
            logger.debug(f"Wiener inverse found at bandwidth {k} with residual {residual:.3g}")
            return WienerInverse(h.trimmed(), residual, k, loss)
        if k >= max_bandwidth:
            raise BandwidthInsufficientError(
                f"Bandwidth {k} exhausted with residual {best_residual:.3g} > {tol:g}", best_residual
            )
        logger.warning(f"Residual {residual:.3g} at bandwidth {k}; doubling the bandwidth")
        k *= 2


@dataclass
class WienerGelfand:
    trace: GelfandTrace
    circle_max: float


def wiener_gelfand(g: LaurentSeq, n_max: int = 128, grid: int = WIENER_GRID) -> WienerGelfand:
    """||g^{*n}||_1^(1/n) for n = 1, 2, 4, ... <= n_max beside max |g| on the circle."""
    if int(n_max) < 1:
        raise InvalidInputError(f"n_max must be at least 1, got {n_max}")
    trace = GelfandTrace()
    power, log_scale, n = g.trimmed(), 0.0, 1
    while n <= n_max:
        size = wiener_norm(power)
        if size == 0.0:
            trace.entries.append(GelfandEntry(n, 0.0))
            n *= 2
            continue
        log_norm = log_scale + math.log(size)
        trace.entries.append(GelfandEntry(n, math.exp(log_norm / n)))
        power = power.scale(1.0 / size)
        power = cauchy_product(power, power)
        log_scale = 2.0 * log_norm
        n *= 2
    circle_max = float(np.max(np.abs(circle_values(g, grid))))
    return WienerGelfand(trace, circle_max)


def cauchy_verdict(partials: Sequence[PowerSeries], seminorm: Callable[[PowerSeries], float], tol: float) -> bool:
    """
    Finite Cauchy test: every pair from the last half of the list is within
    tol of each other in the given seminorm.
    """
    tail = list(partials)[len(partials) // 2:]
    worst = 0.0
    for i, f in enumerate(tail):
        for h in tail[i + 1:]:
            worst = max(worst, seminorm(f - h))
    return worst <= tol


def family_verdicts(f: PowerSeries, cut_points: Sequence[int], r: float, s: float, tol: float) -> List[bool]:
    """Cauchy verdicts of the partial sums at cut_points under the coefficient and circle families."""
    partials = [f.partial_sum(k) for k in cut_points]
    by_coefficients = cauchy_verdict(partials, lambda d: coeff_seminorm(d, r), tol)
    by_circle = cauchy_verdict(partials, lambda d: circle_sup_seminorm(d, s).value, tol)
    return [by_coefficients, by_circle]
