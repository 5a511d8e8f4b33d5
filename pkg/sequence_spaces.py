"""
Scalars and finitely supported sequences.

Finitely supported sequences stand in for elements of the l^p and c_0
spaces; every norm below is computed exactly on the stored support. The
module also carries the dual pairings, the backward/forward shifts, the
multiplication operators between l^p spaces and the growth/decay
seminorms on sequences.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Final, Iterable, List, Sequence, Tuple, Union

import numpy as np

from errors import InvalidExponentError, InvalidInputError

logger = logging.getLogger(__name__)

REAL: Final = "real"
COMPLEX: Final = "complex"

BACKWARD: Final = "backward"
FORWARD: Final = "forward"

Number = Union[int, float, complex]


def _mode_of(value: complex) -> str:
    return COMPLEX if complex(value).imag != 0.0 else REAL


@dataclass(frozen=True)
class Scalar:
    """A real or complex number tagged with its field."""

    re: float
    im: float = 0.0
    mode: str = REAL

    def __post_init__(self):
        if self.mode not in (REAL, COMPLEX):
            raise InvalidInputError(f"Unknown scalar field: {self.mode!r}")
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(self.im))
        if self.mode == REAL and self.im != 0.0:
            raise InvalidInputError(f"Real scalar with nonzero imaginary part {self.im}")

    @classmethod
    def of(cls, value, mode: str = None) -> "Scalar":
        """Build a scalar from a number, a [re, im] pair or another Scalar."""
        if isinstance(value, Scalar):
            if mode is None or mode == value.mode:
                return value
            return cls(value.re, value.im, mode)
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise InvalidInputError(f"Scalar pair must have two entries, got {value!r}")
            value = complex(float(value[0]), float(value[1]))
        try:
            z = complex(value)
        except (TypeError, ValueError) as e:
            raise InvalidInputError(f"Not a scalar: {value!r}") from e
        return cls(z.real, z.imag, mode or _mode_of(z))

    def modulus(self) -> float:
        return math.hypot(self.re, self.im)

    def conjugate(self) -> "Scalar":
        if self.mode == REAL:
            return self
        return Scalar(self.re, -self.im, COMPLEX)

    def _join(self, other: "Scalar") -> str:
        return COMPLEX if COMPLEX in (self.mode, other.mode) else REAL

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return self.modulus()

    def __mul__(self, other) -> "Scalar":
        other = Scalar.of(other)
        z = complex(self) * complex(other)
        mode = self._join(other)
        return Scalar(z.real, z.imag if mode == COMPLEX else 0.0, mode)

    __rmul__ = __mul__

    def __add__(self, other) -> "Scalar":
        other = Scalar.of(other)
        mode = self._join(other)
        return Scalar(self.re + other.re, self.im + other.im, mode)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im, self.mode)

    def __sub__(self, other) -> "Scalar":
        return self + (-Scalar.of(other))

    def to_json(self) -> List[float]:
        return [self.re, self.im]


@dataclass(frozen=True)
class Exponent:
    """A Lebesgue exponent 0 < p <= infinity."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p <= 0.0:
            raise InvalidExponentError(f"Exponent must be positive, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, value) -> "Exponent":
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in ("inf", "infinity", "∞"):
                return cls(math.inf)
            try:
                return cls(float(text))
            except ValueError as e:
                raise InvalidExponentError(f"Cannot parse exponent {value!r}") from e
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            raise InvalidExponentError(f"Cannot parse exponent {value!r}")
        return cls(float(value))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.p)

    @property
    def reciprocal(self) -> float:
        return 0.0 if self.is_infinite else 1.0 / self.p

    def conjugate(self) -> "Exponent":
        """The exponent q with 1/p + 1/q = 1; only defined for p >= 1."""
        if self.p < 1.0:
            raise InvalidExponentError(f"No conjugate exponent for p = {self.p} < 1")
        if self.is_infinite:
            return Exponent(1.0)
        if self.p == 1.0:
            return Exponent(math.inf)
        return Exponent(self.p / (self.p - 1.0))

    def to_json(self) -> Union[str, float]:
        return "inf" if self.is_infinite else self.p

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"{self.p:g}"


ExponentLike = Union[Exponent, int, float, str]


@dataclass(frozen=True)
class FinSeq:
    """
    A finitely supported sequence x_1, x_2, ... stored as its support.

    Indices start at 1 and are strictly increasing; zero values are never
    stored, so two sequences are equal exactly when their supports and values
    agree.
    """

    indices: Tuple[int, ...] = ()
    values: Tuple[Number, ...] = ()
    scalars: str = REAL

    def __post_init__(self):
        if self.scalars not in (REAL, COMPLEX):
            raise InvalidInputError(f"Unknown scalar field: {self.scalars!r}")
        if len(self.indices) != len(self.values):
            raise InvalidInputError("Indices and values must have the same length")
        indices: List[int] = []
        values: List[Number] = []
        previous = 0
        for j, v in zip(self.indices, self.values):
            if isinstance(j, bool) or int(j) != j:
                raise InvalidInputError(f"Sequence index must be an integer, got {j!r}")
            j = int(j)
            if j <= previous:
                raise InvalidInputError(f"Indices must be positive and strictly increasing (at {j})")
            previous = j
            z = complex(Scalar.of(v))
            if self.scalars == REAL and z.imag != 0.0:
                raise InvalidInputError(f"Complex value {z} in a real sequence at index {j}")
            if z == 0:
                continue
            indices.append(j)
            values.append(z.real if self.scalars == REAL else z)
        object.__setattr__(self, "indices", tuple(indices))
        object.__setattr__(self, "values", tuple(values))

    @classmethod
    def from_entries(cls, entries: Iterable[Tuple[int, Number]], scalars: str = None) -> "FinSeq":
        pairs = [(j, complex(Scalar.of(v))) for j, v in entries]
        if scalars is None:
            scalars = COMPLEX if any(z.imag != 0.0 for _, z in pairs) else REAL
        return cls(tuple(j for j, _ in pairs), tuple(z for _, z in pairs), scalars)

    @classmethod
    def from_dense(cls, values: Sequence[Number], scalars: str = None) -> "FinSeq":
        """Sequence whose first len(values) terms are given, starting at index 1."""
        return cls.from_entries(enumerate(values, start=1), scalars)

    @classmethod
    def from_mapping(cls, mapping: Dict[int, Number], scalars: str = None) -> "FinSeq":
        return cls.from_entries(sorted(mapping.items()), scalars)

    @property
    def entries(self) -> List[Tuple[int, Scalar]]:
        return [(j, Scalar.of(v, self.scalars)) for j, v in zip(self.indices, self.values)]

    def as_dict(self) -> Dict[int, Number]:
        return dict(zip(self.indices, self.values))

    def value_at(self, j: int) -> Number:
        return self.as_dict().get(j, 0.0)

    def moduli(self) -> np.ndarray:
        return np.abs(np.asarray(self.values, dtype=complex)) if self.values else np.zeros(0)

    def dense(self, length: int = None) -> np.ndarray:
        length = length if length is not None else (self.indices[-1] if self.indices else 0)
        out = np.zeros(length, dtype=complex if self.scalars == COMPLEX else float)
        for j, v in zip(self.indices, self.values):
            if j <= length:
                out[j - 1] = v
        return out

    def is_zero(self) -> bool:
        return not self.indices

    def __len__(self) -> int:
        return len(self.indices)

    def _combine(self, other: "FinSeq", sign: float) -> "FinSeq":
        merged = self.as_dict()
        for j, v in zip(other.indices, other.values):
            merged[j] = merged.get(j, 0.0) + sign * v
        scalars = COMPLEX if COMPLEX in (self.scalars, other.scalars) else REAL
        return FinSeq.from_mapping(merged, scalars)

    def __add__(self, other: "FinSeq") -> "FinSeq":
        return self._combine(other, 1.0)

    def __sub__(self, other: "FinSeq") -> "FinSeq":
        return self._combine(other, -1.0)

    def __neg__(self) -> "FinSeq":
        return self.scale(-1.0)

    def scale(self, alpha) -> "FinSeq":
        alpha = Scalar.of(alpha)
        scalars = COMPLEX if COMPLEX in (self.scalars, alpha.mode) else REAL
        factor = complex(alpha)
        return FinSeq(self.indices, tuple(factor * v for v in self.values), scalars)

    def to_json(self) -> Dict:
        return {
            "scalars": self.scalars,
            "entries": [[j, Scalar.of(v).to_json()] for j, v in zip(self.indices, self.values)],
        }

    @classmethod
    def from_json(cls, data: Dict) -> "FinSeq":
        if not isinstance(data, dict) or "entries" not in data:
            raise InvalidInputError("Sequence JSON must be an object with an 'entries' list")
        scalars = data.get("scalars", REAL)
        entries = []
        for item in data["entries"]:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise InvalidInputError(f"Malformed sequence entry {item!r}")
            entries.append((item[0], item[1]))
        return cls(tuple(j for j, _ in entries), tuple(complex(Scalar.of(v)) for _, v in entries), scalars)


def _rescaled_norm(moduli: np.ndarray, p: Exponent) -> float:
    """(sum (m_j/M)^p)^(1/p) * M with M = max m_j; stable for extreme p."""
    if moduli.size == 0:
        return 0.0
    peak = float(np.max(moduli))
    if peak == 0.0 or p.is_infinite:
        return peak
    return peak * float(np.sum((moduli / peak) ** p.p)) ** (1.0 / p.p)


def vector_lp_norm(values, p: ExponentLike) -> float:
    """The l^p norm (or p-norm for p < 1) of a dense real or complex vector."""
    p = Exponent.parse(p)
    return _rescaled_norm(np.abs(np.asarray(values)).ravel(), p)


def lp_norm(x: FinSeq, p: ExponentLike) -> float:
    return _rescaled_norm(x.moduli(), Exponent.parse(p))


def lp_distance(x: FinSeq, y: FinSeq, p: ExponentLike) -> float:
    """
    The translation-invariant metric of l^p: ||x - y||_p for p >= 1 and
    ||x - y||_p^p for 0 < p < 1, where the p-triangle inequality makes the
    p-th power a metric.
    """
    p = Exponent.parse(p)
    d = lp_norm(x - y, p)
    return d if p.p >= 1.0 else d ** p.p


def dual_pairing(x: FinSeq, w: FinSeq) -> Scalar:
    """lambda_w(x) = sum x_j w_j over the common support."""
    weights = w.as_dict()
    total = 0j
    for j, v in zip(x.indices, x.values):
        if j in weights:
            total += v * weights[j]
    mode = COMPLEX if COMPLEX in (x.scalars, w.scalars) else REAL
    return Scalar(total.real, total.imag if mode == COMPLEX else 0.0, mode)


def weak_seminorm(x: FinSeq, w: FinSeq) -> float:
    """|lambda_w(x)|, one member of the seminorm family of the weak topology."""
    return dual_pairing(x, w).modulus()


def shift(x: FinSeq, direction: str) -> FinSeq:
    if direction == BACKWARD:
        pairs = [(j - 1, v) for j, v in zip(x.indices, x.values) if j > 1]
    elif direction == FORWARD:
        pairs = [(j + 1, v) for j, v in zip(x.indices, x.values)]
    else:
        raise InvalidInputError(f"Shift direction must be 'backward' or 'forward', got {direction!r}")
    return FinSeq(tuple(j for j, _ in pairs), tuple(v for _, v in pairs), x.scalars)


def pointwise_multiply(x: FinSeq, w: FinSeq) -> FinSeq:
    weights = w.as_dict()
    pairs = [(j, v * weights[j]) for j, v in zip(x.indices, x.values) if j in weights]
    scalars = COMPLEX if COMPLEX in (x.scalars, w.scalars) else REAL
    return FinSeq.from_entries(pairs, scalars)


def multiplication_exponent(p: ExponentLike, q: ExponentLike) -> Exponent:
    """The exponent r with 1/r = 1/p + 1/q for the product map l^p x l^q -> l^r."""
    total = Exponent.parse(p).reciprocal + Exponent.parse(q).reciprocal
    return Exponent(math.inf) if total == 0.0 else Exponent(1.0 / total)


def weighted_seminorm(x: FinSeq, k: int) -> float:
    """
    sup_j j^k |x_j| over the stored support.

    Positive k gives the seminorms of rapidly decreasing sequences; negative
    k gives the least C with |x_j| <= C j^(-k) on the support (polynomial
    growth of order -k). The empty sequence has seminorm 0.
    """
    if x.is_zero():
        return 0.0
    weights = np.asarray(x.indices, dtype=float) ** int(k)
    return float(np.max(weights * x.moduli()))


@dataclass(frozen=True)
class HolderRow:
    p: Exponent
    q: Exponent
    pairing: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.pairing <= self.bound * (1.0 + 1e-12) + 1e-300


def holder_report(x: FinSeq, w: FinSeq, exponents: Sequence[ExponentLike]) -> List[HolderRow]:
    """Pairing modulus against the Hoelder bound ||x||_p ||w||_q for each p >= 1."""
    pairing = weak_seminorm(x, w)
    rows = []
    for p in exponents:
        p = Exponent.parse(p)
        q = p.conjugate()
        rows.append(HolderRow(p, q, pairing, lp_norm(x, p) * lp_norm(w, q)))
    broken = [str(r.p) for r in rows if not r.holds]
    if broken:
        logger.warning(f"Hoelder bound exceeded beyond rounding for p in {broken} (pairing {pairing:.6g})")
    logger.debug(f"Hoelder report over {len(rows)} exponents, pairing {pairing:.6g}")
    return rows


def set_radius(points: Iterable[FinSeq], p: ExponentLike) -> float:
    """sup of ||x||_p over a finite set; a set is bounded iff this is finite."""
    p = Exponent.parse(p)
    return max((lp_norm(x, p) for x in points), default=0.0)
