"""
Sampled functions on a uniform 1-D grid.

A SampledFunction lives on the grid x_k = -L + k h, symmetric about 0, and is
identically zero off the grid. It carries the sup-on-windows seminorms N_j,
the weighted seminorms M_j, cutoffs, translation and Riemann-sum
convolution. IntervalFunction holds samples on a compact interval for
restriction and extension.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Final, List, Sequence

import numpy as np

from errors import GridError, InvalidInputError
from sequence_spaces import Scalar

logger = logging.getLogger(__name__)

WINDOW_FAMILY: Final = "N"
WEIGHT_FAMILY: Final = "M"
ALIGNMENT_TOL: Final = 1e-9


def _samples(values) -> np.ndarray:
    raw = list(values)
    if raw and isinstance(raw[0], (list, tuple)):
        data = np.array([complex(Scalar.of(v)) for v in raw], dtype=complex)
    else:
        data = np.asarray(raw)
    if data.ndim != 1 or data.size == 0:
        raise InvalidInputError("Samples must be a nonempty list of scalars")
    data = data.astype(complex if np.iscomplexobj(data) else float)
    if np.iscomplexobj(data) and not np.any(data.imag):
        data = data.real.copy()
    return data


def _steps(length: float, h: float) -> int:
    """length / h as an integer, or a GridError if it is not one."""
    ratio = length / h
    k = int(round(ratio))
    if abs(ratio - k) > ALIGNMENT_TOL:
        raise GridError(f"{length:g} is not a whole number of steps h = {h:g}")
    return k


@dataclass(frozen=True)
class SampledFunction:
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise GridError(f"Step must be positive, got {self.h}")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "values", _samples(self.values))

    @classmethod
    def from_callable(cls, func: Callable, half_width: float, h: float) -> "SampledFunction":
        n = 2 * _steps(half_width, h) + 1
        x = -half_width + h * np.arange(n)
        values = np.broadcast_to(np.asarray(func(x)), x.shape)
        return cls(h, values)

    @classmethod
    def zeros_like(cls, other: "SampledFunction") -> "SampledFunction":
        return cls(other.h, np.zeros(other.values.size))

    @classmethod
    def from_json(cls, data: dict) -> "SampledFunction":
        try:
            f = cls(float(data["h"]), data["values"])
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"Function needs 'h' and 'values': {e}") from e
        if "x0" in data and abs(float(data["x0"]) - f.x0) > ALIGNMENT_TOL * f.h:
            raise GridError(f"Grid must be symmetric about 0: x0 = {data['x0']} but expected {f.x0:g}")
        return f

    def to_json(self) -> dict:
        if np.iscomplexobj(self.values):
            values = [[z.real, z.imag] for z in self.values]
        else:
            values = self.values.tolist()
        return {"x0": self.x0, "h": self.h, "values": values}

    @property
    def half_width(self) -> float:
        return (self.values.size - 1) * self.h / 2.0

    @property
    def x0(self) -> float:
        return -self.half_width

    @property
    def grid(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.values.size)

    def value_at(self, x: float):
        k = _steps(x - self.x0, self.h)
        return self.values[k] if 0 <= k < self.values.size else 0.0

    def _check_same_grid(self, other: "SampledFunction") -> None:
        if not math.isclose(self.h, other.h, rel_tol=1e-12) or self.values.size != other.values.size:
            raise GridError(
                f"Grids differ: h = {self.h:g}, {self.values.size} points vs h = {other.h:g}, {other.values.size} points"
            )

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_same_grid(other)
        return SampledFunction(self.h, self.values + other.values)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        self._check_same_grid(other)
        return SampledFunction(self.h, self.values - other.values)

    def scale(self, factor) -> "SampledFunction":
        return SampledFunction(self.h, self.values * factor)


def sup_norm(f: SampledFunction) -> float:
    return float(np.max(np.abs(f.values)))


def multiply(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    f._check_same_grid(g)
    return SampledFunction(f.h, f.values * g.values)


def seminorm(f: SampledFunction, j: float, family: str = WINDOW_FAMILY) -> float:
    """
    N_j(f) = max |f(x)| over |x| <= j, or M_j(f) = max |f(x)| (|x| + 1)^j.

    The weights of M_j grow with j, so a finite value for every j means rapid
    decrease.
    """
    if j < 0:
        raise InvalidInputError(f"Seminorm index must be nonnegative, got {j}")
    x, moduli = f.grid, np.abs(f.values)
    if family == WINDOW_FAMILY:
        if j > f.half_width + ALIGNMENT_TOL * f.h:
            raise GridError(f"Window |x| <= {j} exceeds the grid half-width {f.half_width:g}")
        inside = np.abs(x) <= j + ALIGNMENT_TOL * f.h
        return float(np.max(moduli[inside]))
    if family == WEIGHT_FAMILY:
        return float(np.max(moduli * (np.abs(x) + 1.0) ** j))
    raise InvalidInputError(f"Unknown seminorm family {family!r}; use 'N' or 'M'")


def poly_growth_fit(f: SampledFunction, j: float) -> float:
    """The least C with |f(x)| <= C (1 + |x|)^j at every grid point."""
    if j < 0:
        raise InvalidInputError(f"Growth order must be nonnegative, got {j}")
    return float(np.max(np.abs(f.values) / (1.0 + np.abs(f.grid)) ** j))


def cutoff(plateau: float, half_width: float, h: float) -> SampledFunction:
    """phi_l with l = plateau: 1 on |x| <= l, linear down to 0 at |x| = l + 1, 0 beyond."""
    if plateau + 1 > half_width + ALIGNMENT_TOL * h:
        raise GridError(f"Cutoff phi_{plateau:g} needs half-width at least {plateau + 1:g}, grid has {half_width:g}")
    return SampledFunction.from_callable(lambda x: np.clip(plateau + 1.0 - np.abs(x), 0.0, 1.0), half_width, h)


def convolve(phi: SampledFunction, f: SampledFunction) -> SampledFunction:
    """(phi * f)(x) ~ sum_k phi(y_k) f(x - y_k) h on the grid of length len(phi) + len(f) - 1."""
    if not math.isclose(phi.h, f.h, rel_tol=1e-12):
        raise GridError(f"Cannot convolve samples with steps {phi.h:g} and {f.h:g}")
    return SampledFunction(phi.h, np.convolve(phi.values, f.values) * phi.h)


def translate(f: SampledFunction, a: float) -> SampledFunction:
    """x -> f(x - a) on the same grid; samples pushed off the grid are lost."""
    k = _steps(a, f.h)
    shifted = np.zeros_like(f.values)
    n = f.values.size
    if abs(k) < n:
        if k >= 0:
            shifted[k:] = f.values[: n - k]
        else:
            shifted[:k] = f.values[-k:]
    return SampledFunction(f.h, shifted)


@dataclass(frozen=True)
class IntervalFunction:
    """Samples of a function on the compact interval [start, start + (len - 1) h]."""

    start: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise GridError(f"Step must be positive, got {self.h}")
        object.__setattr__(self, "values", _samples(self.values))

    @property
    def end(self) -> float:
        return self.start + (self.values.size - 1) * self.h

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.h * np.arange(self.values.size)

    def embed(self, half_width: float) -> SampledFunction:
        """The function on the symmetric grid [-half_width, half_width], zero off the interval."""
        n = 2 * _steps(half_width, self.h) + 1
        first = _steps(self.start + half_width, self.h)
        if first < 0 or first + self.values.size > n:
            raise GridError(f"[{self.start:g}, {self.end:g}] does not fit in [-{half_width:g}, {half_width:g}]")
        values = np.zeros(n, dtype=self.values.dtype)
        values[first: first + self.values.size] = self.values
        return SampledFunction(self.h, values)


def restrict(f: SampledFunction, a: float, b: float) -> IntervalFunction:
    """Samples of f on [a, b]; both endpoints must be grid points."""
    first, last = _steps(a - f.x0, f.h), _steps(b - f.x0, f.h)
    if first < 0 or last >= f.values.size or first > last:
        raise GridError(f"[{a:g}, {b:g}] is not inside the grid [{f.x0:g}, {f.half_width:g}]")
    return IntervalFunction(f.x0 + first * f.h, f.h, f.values[first: last + 1].copy())


def restrict_interval(g: IntervalFunction, a: float, b: float) -> IntervalFunction:
    first, last = _steps(a - g.start, g.h), _steps(b - g.start, g.h)
    if first < 0 or last >= g.values.size or first > last:
        raise GridError(f"[{a:g}, {b:g}] is not inside [{g.start:g}, {g.end:g}]")
    return IntervalFunction(g.start + first * g.h, g.h, g.values[first: last + 1].copy())


def extend(g: IntervalFunction, a1: float, b1: float) -> IntervalFunction:
    """
    Continue g to [a1, b1] by its boundary values, multiplied by ramps that
    vanish at a1 and b1. The sup norm does not grow and restricting back to
    the original interval returns g.
    """
    left, right = _steps(g.start - a1, g.h), _steps(b1 - g.end, g.h)
    if left < 1 or right < 1:
        raise GridError(f"[{g.start:g}, {g.end:g}] must lie in the interior of [{a1:g}, {b1:g}]")
    left_ramp = np.arange(left) / left
    right_ramp = (right - 1 - np.arange(right)) / right
    values = np.concatenate([g.values[0] * left_ramp, g.values, g.values[-1] * right_ramp])
    return IntervalFunction(g.start - left * g.h, g.h, values)


def _tail_distances(sequence: Sequence[SampledFunction], measure: Callable[[SampledFunction], float]) -> List[float]:
    tail = list(sequence)[len(sequence) // 2:]
    return [measure(f) for f in tail]


def converges_in_family(sequence: Sequence[SampledFunction], limit: SampledFunction, windows: Sequence[float], tol: float) -> bool:
    """N_j(f_k - limit) <= tol over the last half of the sequence, for every j."""
    for j in windows:
        if max(_tail_distances(sequence, lambda f: seminorm(f - limit, j))) > tol:
            return False
    return True


def converges_uniformly_on_windows(sequence: Sequence[SampledFunction], limit: SampledFunction, windows: Sequence[float], tol: float) -> bool:
    """sup |f_k - limit| on each window [-j, j], measured on the restriction, over the last half of the sequence."""
    for j in windows:
        inside = limit.grid[np.abs(limit.grid) <= j + ALIGNMENT_TOL * limit.h]
        a, b = float(inside[0]), float(inside[-1])
        restricted = lambda f: float(np.max(np.abs(restrict(f, a, b).values - restrict(limit, a, b).values)))
        if max(_tail_distances(sequence, restricted)) > tol:
            return False
    return True
