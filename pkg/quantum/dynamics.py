"""
Force protocols: piecewise-constant schedules, their propagators, and the
untouched-work average.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from config.settings import ATOM_MERGE_REL_TOL, HBAR, IMAG_RESIDUE_TOL, UNITARY_TOL
from quantum.errors import NumericalError, ValidationError
from quantum.operators import (
    DensityMatrix,
    HermitianOperator,
    SpectralDecomposition,
    matrix_of,
    spectral_decompose,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Schedule:
    segments: tuple = ()             # ((HermitianOperator, duration), ...) in time order
    hbar: float = HBAR
    dim: int | None = None           # required only when segments is empty

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValidationError(f"hbar must be > 0, got {self.hbar}")
        segments = tuple((h if isinstance(h, HermitianOperator) else HermitianOperator(h), float(t))
                         for h, t in self.segments)
        for k, (h, t) in enumerate(segments):
            if not t > 0:
                raise ValidationError(f"segment {k}: duration must be > 0, got {t}")
        dims = {h.dim for h, _ in segments}
        if self.dim is not None:
            dims.add(self.dim)
        if len(dims) > 1:
            raise ValidationError(f"schedule mixes dimensions {sorted(dims)}")
        if not dims:
            raise ValidationError("empty schedule needs an explicit dim")
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "dim", dims.pop())

    def reversed(self) -> "Schedule":
        return Schedule(tuple(reversed(self.segments)), self.hbar, self.dim)

    @property
    def duration(self) -> float:
        return sum(t for _, t in self.segments)


def segment_propagator(H: HermitianOperator, duration: float, hbar: float = HBAR) -> np.ndarray:
    """exp(-i H t / hbar) by unitary diagonalization."""
    try:
        values, vectors = linalg.eigh(H.matrix)
    except linalg.LinAlgError as e:
        raise NumericalError(f"segment diagonalization failed: {e}") from e
    return (vectors * np.exp(-1j * values * duration / hbar)) @ vectors.conj().T


def propagator_from_schedule(s: Schedule) -> np.ndarray:
    U = np.eye(s.dim, dtype=complex)
    for H, t in s.segments:
        U = segment_propagator(H, t, s.hbar) @ U
    return U


def _check_unitary(U: np.ndarray, what: str) -> None:
    residue = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if residue > UNITARY_TOL:
        raise ValidationError(f"{what} is not unitary: max |U^dagger U - 1| = {residue:.3e}")


@dataclass(frozen=True, eq=False)
class Protocol:
    initial_hamiltonian: HermitianOperator
    final_hamiltonian: HermitianOperator
    propagator: np.ndarray
    schedule: Schedule | None = None
    backward_propagator: np.ndarray | None = None
    hbar: float = field(default=HBAR)

    def __post_init__(self):
        dim = self.initial_hamiltonian.dim
        if self.final_hamiltonian.dim != dim:
            raise ValidationError(
                f"initial and final Hamiltonians differ in dimension ({dim} vs {self.final_hamiltonian.dim})"
            )
        U = np.array(self.propagator, dtype=complex)
        if U.shape != (dim, dim):
            raise ValidationError(f"propagator shape {U.shape} does not match dimension {dim}")
        _check_unitary(U, "propagator")
        U.flags.writeable = False
        object.__setattr__(self, "propagator", U)
        if self.backward_propagator is not None:
            B = np.array(self.backward_propagator, dtype=complex)
            if B.shape != (dim, dim):
                raise ValidationError(f"backward propagator shape {B.shape} does not match dimension {dim}")
            _check_unitary(B, "backward propagator")
            B.flags.writeable = False
            object.__setattr__(self, "backward_propagator", B)

    @classmethod
    def from_schedule(cls, schedule: Schedule, initial: HermitianOperator | None = None,
                      final: HermitianOperator | None = None) -> "Protocol":
        if (initial is None or final is None) and not schedule.segments:
            raise ValidationError("empty schedule: initial and final Hamiltonians must be given")
        initial = initial if initial is not None else schedule.segments[0][0]
        final = final if final is not None else schedule.segments[-1][0]
        return cls(initial, final, propagator_from_schedule(schedule), schedule=schedule, hbar=schedule.hbar)

    @property
    def dim(self) -> int:
        return self.initial_hamiltonian.dim

    @cached_property
    def initial_levels(self) -> SpectralDecomposition:
        return spectral_decompose(self.initial_hamiltonian)

    @cached_property
    def final_levels(self) -> SpectralDecomposition:
        return spectral_decompose(self.final_hamiltonian)

    @cached_property
    def work_values(self) -> np.ndarray:
        """w[m, n] = e_m(tau) - e_n(0)."""
        return self.final_levels.eigenvalues[:, None] - self.initial_levels.eigenvalues[None, :]

    @cached_property
    def energy_scale(self) -> float:
        energies = np.concatenate([self.initial_levels.eigenvalues, self.final_levels.eigenvalues])
        return float(max(energies.max() - energies.min(), np.abs(energies).max()))

    @property
    def atom_tolerance(self) -> float:
        return ATOM_MERGE_REL_TOL * self.energy_scale


def sudden_quench(initial: HermitianOperator, final: HermitianOperator, hbar: float = HBAR) -> Protocol:
    """Instantaneous switch H_i -> H_f: empty schedule, identity propagator."""
    schedule = Schedule((), hbar=hbar, dim=initial.dim)
    return Protocol(initial, final, np.eye(initial.dim, dtype=complex), schedule=schedule, hbar=hbar)


def untouched_average_work(p: Protocol, rho: DensityMatrix) -> float:
    """Tr U^dagger H(tau) U rho - Tr H(0) rho."""
    r = matrix_of(rho)
    if r.shape[0] != p.dim:
        raise ValidationError(f"dimension mismatch: state is {r.shape[0]}, protocol is {p.dim}")
    U = p.propagator
    value = np.trace(U.conj().T @ p.final_hamiltonian.matrix @ U @ r) - np.trace(p.initial_hamiltonian.matrix @ r)
    if abs(value.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(value.real)):
        raise NumericalError(f"untouched work has imaginary residue {value.imag:.3e}")
    return float(value.real)
