"""
Dense Hermitian operators, density matrices and spectral decompositions.

All value types are frozen and hold read-only numpy arrays, so they can be
shared between threads without copying.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from config.settings import (
    DEGENERACY_REL_TOL,
    DENSITY_TRACE_TOL,
    HERMITIAN_TOL,
    PSD_TOL,
)
from quantum.errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)


def _frozen(matrix) -> np.ndarray:
    arr = np.array(matrix, dtype=complex)
    arr.flags.writeable = False
    return arr


def _square(matrix, what: str) -> np.ndarray:
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValidationError(f"{what} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} has non-finite entries")
    return arr


def _check_hermitian(arr: np.ndarray, what: str) -> None:
    scale = np.max(np.abs(arr))
    residue = np.max(np.abs(arr - arr.conj().T))
    if residue > HERMITIAN_TOL * scale:
        raise ValidationError(
            f"{what} is not Hermitian: max |A - A^dagger| = {residue:.3e} "
            f"exceeds {HERMITIAN_TOL:g} x max|A| = {HERMITIAN_TOL * scale:.3e}"
        )


def matrix_of(op) -> np.ndarray:
    """Underlying complex array of an operator, density matrix or array-like."""
    if isinstance(op, (HermitianOperator, DensityMatrix)):
        return op.matrix
    return np.asarray(op, dtype=complex)


def _parse_entry(entry, path: str) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        re, im = entry
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            return complex(re, im)
    raise ValidationError(f"{path}: expected [re, im] pair, got {entry!r}")


def matrix_from_json(rows, what: str = "matrix") -> np.ndarray:
    """Nested rows of [re, im] pairs (plain numbers accepted as real) -> complex array."""
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ValidationError(f"{what}: expected a non-empty list of rows")
    parsed = []
    for i, row in enumerate(rows):
        if not isinstance(row, (list, tuple)) or len(row) != len(rows):
            raise ValidationError(f"{what}[{i}]: row must have {len(rows)} entries")
        parsed.append([_parse_entry(e, f"{what}[{i}][{j}]") for j, e in enumerate(row)])
    return np.array(parsed, dtype=complex)


def matrix_to_json(matrix: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        arr = _square(self.matrix, "Hermitian operator")
        _check_hermitian(arr, "Hermitian operator")
        object.__setattr__(self, "matrix", _frozen(arr))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.matrix.imag == 0))

    @classmethod
    def from_json(cls, rows, what: str = "hamiltonian") -> "HermitianOperator":
        return cls(matrix_from_json(rows, what))

    def to_json(self) -> list:
        return matrix_to_json(self.matrix)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        arr = _square(self.matrix, "density matrix")
        _check_hermitian(arr, "density matrix")
        trace = np.trace(arr).real
        if abs(trace - 1) > DENSITY_TRACE_TOL:
            raise ValidationError(f"density matrix trace is {trace!r}, expected 1 within {DENSITY_TRACE_TOL:g}")
        smallest = np.linalg.eigvalsh(arr).min()
        if smallest < -PSD_TOL:
            raise ValidationError(f"density matrix has eigenvalue {smallest:.3e} below -{PSD_TOL:g}")
        object.__setattr__(self, "matrix", _frozen(arr))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_json(cls, rows, what: str = "initial_state") -> "DensityMatrix":
        return cls(matrix_from_json(rows, what))

    @classmethod
    def symmetrized(cls, matrix) -> "DensityMatrix":
        """Build from a numerically computed state, removing rounding asymmetry."""
        arr = np.asarray(matrix, dtype=complex)
        return cls((arr + arr.conj().T) / 2)

    def to_json(self) -> list:
        return matrix_to_json(self.matrix)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray          # distinct, ascending
    projectors: tuple                # Hermitian matrices, one per eigenvalue
    degeneracies: tuple

    @property
    def levels(self) -> int:
        return len(self.eigenvalues)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def stacked_projectors(self) -> np.ndarray:
        return np.stack(self.projectors)

    def reconstruct(self) -> np.ndarray:
        return sum(e * proj for e, proj in zip(self.eigenvalues, self.projectors))


def _eigh(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return linalg.eigh(arr)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Hermitian eigensolver failed: {e}") from e


def spectral_decompose(H, group_tol: float | None = None) -> SpectralDecomposition:
    """
    Distinct eigenvalues with orthogonal projectors.

    Eigenvalues closer than group_tol (default 1e-9 x spectral range) are
    chained into one degenerate level; the level energy is the group mean.
    """
    if not isinstance(H, HermitianOperator):
        H = HermitianOperator(H)
    if group_tol is not None and group_tol < 0:
        raise ValidationError(f"group_tol must be >= 0, got {group_tol}")
    values, vectors = _eigh(H.matrix)
    if group_tol is None:
        group_tol = DEGENERACY_REL_TOL * (values[-1] - values[0])

    groups: list[list[int]] = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= group_tol:
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues, projectors, degeneracies = [], [], []
    for idx in groups:
        vecs = vectors[:, idx]
        eigenvalues.append(float(np.mean(values[idx])))
        projectors.append(_frozen(vecs @ vecs.conj().T))
        degeneracies.append(len(idx))
    logger.debug(f"Decomposed {H.dim}x{H.dim} operator into {len(groups)} levels")

    energies = np.array(eigenvalues)
    energies.flags.writeable = False
    return SpectralDecomposition(energies, tuple(projectors), tuple(degeneracies))


def project_diagonal(rho: DensityMatrix, d: SpectralDecomposition) -> DensityMatrix:
    """Dephase rho in the eigenbasis of d: sum_n P_n rho P_n."""
    r = matrix_of(rho)
    if r.shape[0] != d.dim:
        raise ValidationError(f"dimension mismatch: state is {r.shape[0]}, decomposition is {d.dim}")
    return DensityMatrix.symmetrized(sum(P @ r @ P for P in d.projectors))


def canonical_state(H, beta: float) -> DensityMatrix:
    """Gibbs state exp(-beta H)/Z, computed relative to the ground energy."""
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    if not isinstance(H, HermitianOperator):
        H = HermitianOperator(H)
    values, vectors = _eigh(H.matrix)
    weights = np.exp(-beta * (values - values[0]))
    weights /= weights.sum()
    return DensityMatrix.symmetrized((vectors * weights) @ vectors.conj().T)


def log_partition_function(H, beta: float) -> float:
    """log Z with Z = sum_n d_n exp(-beta e_n); each eigenvalue counted with its multiplicity."""
    values = np.linalg.eigvalsh(matrix_of(H))
    return float(logsumexp(-beta * values))


def commutator_norm(a, b) -> float:
    A, B = matrix_of(a), matrix_of(b)
    return float(np.linalg.norm(A @ B - B @ A))
