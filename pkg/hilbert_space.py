"""
Finite-dimensional inner-product spaces.

Vectors are 1-D numpy arrays (real or complex). A Subspace keeps the
vectors it was spanned by together with an orthonormal basis computed by
modified Gram-Schmidt.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Final, List, Optional, Sequence

import numpy as np

from errors import (
    DimensionMismatchError,
    InvalidInputError,
    NumericalError,
    PerturbationTooLargeError,
    PositivityViolatedError,
)
from operator_algebra import as_operator, perturbed_inverse
from sequence_spaces import COMPLEX, REAL, Scalar

logger = logging.getLogger(__name__)

GRAM: Final = "gram"
MINIMIZING_SEQUENCE: Final = "minimizing_sequence"

DEPENDENCE_TOL: Final = 1e-12
ORTHOGONALITY_TOL: Final = 1e-9
AGREEMENT_TOL: Final = 1e-6
DEFAULT_STEPS: Final = 100
SELF_ADJOINT_TOL: Final = 1e-10
POSITIVITY_SAMPLES: Final = 10000
MAX_BASIS_PAIR_DIM: Final = 32


def as_vector(v) -> np.ndarray:
    vector = np.asarray(v)
    if vector.ndim != 1 or vector.size == 0:
        raise InvalidInputError("A vector must be a nonempty list of coordinates")
    return vector.astype(complex if np.iscomplexobj(vector) else float)


def _inner(v: np.ndarray, w: np.ndarray) -> complex:
    return complex(np.vdot(w, v))


def inner_product(v, w) -> Scalar:
    """<v, w> = sum v_i conj(w_i)."""
    v, w = as_vector(v), as_vector(w)
    if v.size != w.size:
        raise DimensionMismatchError(f"Vectors of dimension {v.size} and {w.size}")
    z = _inner(v, w)
    if np.iscomplexobj(v) or np.iscomplexobj(w):
        return Scalar(z.real, z.imag, COMPLEX)
    return Scalar(z.real, 0.0, REAL)


def norm(v) -> float:
    v = as_vector(v)
    return math.sqrt(max(_inner(v, v).real, 0.0))


def _orthonormalize(vectors: np.ndarray, against: Sequence[np.ndarray] = (), scale: float = 1.0) -> List[np.ndarray]:
    """Modified Gram-Schmidt with one re-orthogonalization pass; dependent vectors are dropped."""
    basis = list(against)
    found: List[np.ndarray] = []
    for v in vectors:
        w = np.array(v)
        for _ in range(2):
            for e in basis + found:
                w = w - np.vdot(e, w) * e
        size = float(np.linalg.norm(w))
        if size < DEPENDENCE_TOL * scale:
            continue
        found.append(w / size)
    return found


@dataclass
class Subspace:
    """span of the given vectors inside an ambient space of dimension ambient_dim."""

    spanning: np.ndarray
    ambient_dim: int
    basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.spanning.size and self.spanning.shape[1] != self.ambient_dim:
            raise DimensionMismatchError(
                f"Spanning vectors have dimension {self.spanning.shape[1]}, expected {self.ambient_dim}"
            )
        scale = float(np.max(np.linalg.norm(self.spanning, axis=1))) if self.spanning.size else 1.0
        found = _orthonormalize(self.spanning, scale=max(scale, 1e-300))
        self.basis = np.array(found) if found else np.zeros((0, self.ambient_dim), dtype=self.spanning.dtype)

    @classmethod
    def span(cls, vectors: Sequence, ambient_dim: Optional[int] = None) -> "Subspace":
        rows = [as_vector(v) for v in vectors]
        if not rows:
            if ambient_dim is None:
                raise InvalidInputError("The zero subspace needs an ambient dimension")
            return cls(np.zeros((0, int(ambient_dim))), int(ambient_dim))
        sizes = {r.size for r in rows}
        if len(sizes) != 1 or (ambient_dim is not None and sizes != {int(ambient_dim)}):
            raise DimensionMismatchError(f"Spanning vectors have inconsistent dimensions {sorted(sizes)}")
        dtype = complex if any(np.iscomplexobj(r) for r in rows) else float
        return cls(np.array(rows, dtype=dtype), rows[0].size)

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def reconstruction_error(self) -> float:
        """Largest distance from a spanning vector to the span of the basis."""
        if not self.spanning.size:
            return 0.0
        projected = (self.spanning @ self.basis.conj().T) @ self.basis
        return float(np.max(np.linalg.norm(self.spanning - projected, axis=1)))


def _check_dimension(v: np.ndarray, subspace: Subspace) -> None:
    if v.size != subspace.ambient_dim:
        raise DimensionMismatchError(f"Vector has dimension {v.size}, subspace lives in {subspace.ambient_dim}")


def _gram_projection(v: np.ndarray, subspace: Subspace) -> np.ndarray:
    if subspace.dimension == 0:
        return np.zeros_like(v)
    coefficients = subspace.basis.conj() @ v
    return coefficients @ subspace.basis


def projection_matrix(subspace: Subspace) -> np.ndarray:
    """P with P v = sum <v, e_i> e_i."""
    return subspace.basis.T @ subspace.basis.conj()


def distance_to_subspace(v, subspace: Subspace) -> float:
    v = as_vector(v)
    _check_dimension(v, subspace)
    return float(np.linalg.norm(v - _gram_projection(v, subspace)))


@dataclass
class ProjectionDiagnostics:
    mode: str
    distance: float
    steps: int = 0
    bound_violations: int = 0
    worst_slack: Optional[float] = None
    gram_gap: float = 0.0
    orthogonality_residual: float = 0.0

    @property
    def converged(self) -> bool:
        return self.gram_gap <= AGREEMENT_TOL


@dataclass
class Projection:
    vector: np.ndarray
    diagnostics: ProjectionDiagnostics


def _cauchy_bound_slack(iterates: np.ndarray, distance: float) -> np.ndarray:
    """4 d (1/j + 1/l) + 2/j^2 + 2/l^2 - ||w_j - w_l||^2 for every pair of iterates."""
    j = np.arange(1, iterates.shape[0] + 1, dtype=float)
    bound = 4.0 * distance * (1.0 / j[:, None] + 1.0 / j[None, :]) + 2.0 / j[:, None] ** 2 + 2.0 / j[None, :] ** 2
    gaps = np.sum(np.abs(iterates[:, None, :] - iterates[None, :, :]) ** 2, axis=2)
    return bound - gaps


def project(v, subspace: Subspace, mode: str = GRAM, steps: int = DEFAULT_STEPS, tight: bool = False) -> Projection:
    """
    Orthogonal projection of v onto the subspace.

    minimizing_sequence builds w_j = P(v) + t_j u for j = 1..steps with u a
    unit vector of the subspace and ||v - w_j|| <= dist(v, W) + 1/j, then
    checks the Cauchy estimate for every pair (j, l). t_j shrinks like 2^-j
    so the last iterate agrees with the Gram answer; tight=True takes the
    largest admissible t_j with alternating signs instead.
    """
    v = as_vector(v)
    _check_dimension(v, subspace)
    exact = _gram_projection(v, subspace)
    distance = float(np.linalg.norm(v - exact))

    if mode == GRAM:
        result = exact
        diagnostics = ProjectionDiagnostics(GRAM, distance)
    elif mode == MINIMIZING_SEQUENCE:
        if int(steps) < 1:
            raise InvalidInputError(f"steps must be at least 1, got {steps}")
        j = np.arange(1, int(steps) + 1, dtype=float)
        lengths = np.sqrt(2.0 * distance / j + 1.0 / j ** 2)
        if tight:
            lengths = lengths * np.where(j % 2 == 1, 1.0, -1.0)
        else:
            lengths = lengths * 2.0 ** -j * np.where(j % 2 == 1, 1.0, -1.0)
        tangent = subspace.basis[0] if subspace.dimension else np.zeros_like(exact)
        iterates = exact[None, :] + lengths[:, None] * tangent[None, :]
        slack = _cauchy_bound_slack(iterates, distance)
        violations = int(np.count_nonzero(slack < -1e-12 * (1.0 + distance)))
        result = iterates[-1]
        diagnostics = ProjectionDiagnostics(
            MINIMIZING_SEQUENCE,
            distance,
            steps=int(steps),
            bound_violations=violations,
            worst_slack=float(np.min(slack)),
            gram_gap=float(np.linalg.norm(result - exact)),
        )
        if violations:
            logger.warning(f"Minimizing sequence broke the Cauchy estimate on {violations} pairs")
        if not diagnostics.converged:
            logger.info(f"{steps} steps leave the minimizing sequence {diagnostics.gram_gap:.3g} from the projection")
    else:
        raise InvalidInputError(f"Unknown projection mode {mode!r}; use '{GRAM}' or '{MINIMIZING_SEQUENCE}'")

    if subspace.dimension:
        diagnostics.orthogonality_residual = float(np.max(np.abs(subspace.basis.conj() @ (v - result))))
    return Projection(result, diagnostics)


def orthogonal_complement(subspace: Subspace) -> Subspace:
    """{z : <z, w> = 0 for all w in W}, with dim W + dim W^perp = d checked."""
    d = subspace.ambient_dim
    dtype = subspace.basis.dtype if subspace.dimension else float
    found = _orthonormalize(np.eye(d, dtype=dtype), against=list(subspace.basis))
    complement = Subspace.span(found, ambient_dim=d) if found else Subspace.span([], ambient_dim=d)
    if subspace.dimension + complement.dimension != d:
        raise NumericalError(
            f"Complement has dimension {complement.dimension}; expected {d - subspace.dimension}"
        )
    if subspace.dimension and complement.dimension:
        overlap = float(np.max(np.abs(subspace.basis.conj() @ complement.basis.T)))
        if overlap > ORTHOGONALITY_TOL:
            raise NumericalError(f"Subspace and complement are not orthogonal (overlap {overlap:.3g})")
    return complement


def _unit_samples(rng: np.random.Generator, count: int, d: int, complex_field: bool) -> np.ndarray:
    samples = rng.normal(size=(count, d))
    if complex_field:
        samples = samples + 1j * rng.normal(size=(count, d))
    return samples / np.linalg.norm(samples, axis=1, keepdims=True)


def self_adjoint_defect(matrix, trials: int = 100, seed: int = 0) -> float:
    """max |<Av, w> - <v, Aw>| over basis pairs and sampled unit pairs."""
    a = as_operator(matrix)
    d = a.shape[0]
    if a.shape[1] != d:
        raise DimensionMismatchError(f"Expected a square operator, got shape {a.shape}")
    rng = np.random.default_rng(seed)
    defect = 0.0
    if d <= MAX_BASIS_PAIR_DIM:
        # for basis pairs the defect is |A[j, i] - conj(A[i, j])|
        defect = float(np.max(np.abs(a - a.conj().T)))
    complex_field = np.iscomplexobj(a)
    vs = _unit_samples(rng, int(trials), d, complex_field)
    ws = _unit_samples(rng, int(trials), d, complex_field)
    for v, w in zip(vs, ws):
        defect = max(defect, abs(_inner(a @ v, w) - _inner(v, a @ w)))
    return defect


@dataclass
class PositiveInverse:
    inverse: np.ndarray
    inverse_norm: float
    bound: float
    min_rayleigh: float


def positivity_inverse(matrix, alpha: float, tol: float = 1e-9, samples: int = POSITIVITY_SAMPLES, seed: int = 0) -> PositiveInverse:
    """
    Invert a self-adjoint A with <Av, v> >= alpha ||v||^2.

    Positivity is sampled on the basis vectors and `samples` random unit
    vectors. The inverse comes from perturbing c I with c = (||A||_2 + alpha) / 2;
    the spectrum of A lies in [alpha, ||A||], so ||(c I)^-1 (c I - A)|| is at
    most (||A|| - alpha) / (||A|| + alpha) < 1.
    """
    a = as_operator(matrix)
    if not alpha > 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    defect = self_adjoint_defect(a, seed=seed)
    if defect > SELF_ADJOINT_TOL:
        raise InvalidInputError(f"Operator is not self-adjoint (defect {defect:.3g})")

    d = a.shape[0]
    rng = np.random.default_rng(seed)
    vectors = np.vstack([np.eye(d), _unit_samples(rng, int(samples), d, np.iscomplexobj(a))])
    rayleigh = np.real(np.sum((vectors @ a.T) * vectors.conj(), axis=1))
    worst = int(np.argmin(rayleigh))
    if rayleigh[worst] < alpha - tol:
        raise PositivityViolatedError(
            f"<Av, v> = {rayleigh[worst]:.6g} < alpha = {alpha:g} at a sampled unit vector",
            witness=vectors[worst],
        )

    c = 0.5 * (float(np.linalg.norm(a, 2)) + alpha)
    identity = np.eye(d, dtype=a.dtype)
    try:
        result = perturbed_inverse(c * identity, c * identity - a, tol=tol, x_inverse=identity / c)
    except PerturbationTooLargeError as e:
        _, _, right = np.linalg.svd(c * identity - a)
        raise PositivityViolatedError(
            f"<Av, v> falls below alpha off the sampled vectors: {e}", witness=right[0].conj()
        ) from e
    inverse_norm = float(np.linalg.norm(result.inverse, 2))
    if inverse_norm > 1.0 / alpha + tol:
        _, _, right = np.linalg.svd(result.inverse)
        raise PositivityViolatedError(
            f"||A^-1|| = {inverse_norm:.6g} exceeds 1/alpha; sampling missed a direction", witness=right[0].conj()
        )
    logger.debug(f"Positive operator inverted: ||A^-1|| = {inverse_norm:.6g} <= 1/alpha = {1.0 / alpha:.6g}")
    return PositiveInverse(result.inverse, inverse_norm, 1.0 / alpha, float(rayleigh[worst]))
