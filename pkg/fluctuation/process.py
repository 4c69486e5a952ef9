"""
Forward/backward process pairs for fluctuation relations.
"""

import logging
from dataclasses import dataclass

import numpy as np

from quantum.dynamics import Protocol
from quantum.errors import UnsupportedCaseError, ValidationError
from quantum.operators import (
    DensityMatrix,
    HermitianOperator,
    SpectralDecomposition,
    canonical_state,
    log_partition_function,
    matrix_of,
)

logger = logging.getLogger(__name__)

BOLTZMANN_TOL = 1e-10


def free_energy_difference(initial: HermitianOperator, final: HermitianOperator, beta: float) -> float:
    """Delta F = -(1/beta) ln(Z(tau)/Z(0)); beta = 0 gives the infinite-temperature limit."""
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    if beta == 0:
        return float(np.trace(final.matrix).real / final.dim - np.trace(initial.matrix).real / initial.dim)
    return -(log_partition_function(final, beta) - log_partition_function(initial, beta)) / beta


def check_boltzmann_diagonal(levels: SpectralDecomposition, rho, beta: float, label: str) -> None:
    """Tr P_n rho must equal d_n exp(-beta e_n)/Z; off-diagonal elements are free."""
    r = matrix_of(rho)
    e = levels.eigenvalues
    boltzmann = np.array(levels.degeneracies) * np.exp(-beta * (e - e[0]))
    boltzmann /= boltzmann.sum()
    for n, (P, expected) in enumerate(zip(levels.projectors, boltzmann)):
        got = float(np.trace(P @ r).real)
        if abs(got - expected) > BOLTZMANN_TOL:
            raise ValidationError(
                f"{label}: level {n} (e={e[n]:.6g}) has population {got:.12g}, "
                f"Boltzmann weight is {expected:.12g}"
            )


@dataclass(frozen=True, eq=False)
class ProcessPair:
    forward: Protocol
    forward_state: DensityMatrix
    backward: Protocol
    backward_state: DensityMatrix
    beta: float
    delta_f: float | None = None

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")
        check_boltzmann_diagonal(self.forward.initial_levels, self.forward_state, self.beta, "forward state")
        check_boltzmann_diagonal(self.backward.initial_levels, self.backward_state, self.beta, "backward state")
        if self.delta_f is None:
            object.__setattr__(self, "delta_f", free_energy_difference(
                self.forward.initial_hamiltonian, self.forward.final_hamiltonian, self.beta))


def build_backward(p: Protocol, mode: str = "auto") -> Protocol:
    """
    Time-reversed protocol with swapped Hamiltonians.

    mode "schedule" reverses the segment order (no antiunitary conjugation,
    exact for real Hamiltonians), "explicit" uses p.backward_propagator,
    "auto" prefers the schedule.
    """
    if mode not in ("auto", "schedule", "explicit"):
        raise ValidationError(f"unknown backward mode {mode!r}")
    if mode == "auto":
        mode = "schedule" if p.schedule is not None else "explicit"

    if mode == "explicit":
        if p.backward_propagator is None:
            raise UnsupportedCaseError("protocol has neither a schedule nor an explicit backward propagator")
        return Protocol(p.final_hamiltonian, p.initial_hamiltonian, p.backward_propagator, hbar=p.hbar)

    if p.schedule is None:
        raise UnsupportedCaseError("segment reversal needs a protocol built from a schedule")
    complex_segments = [k for k, (h, _) in enumerate(p.schedule.segments) if not h.is_real]
    if complex_segments:
        logger.warning(f"Segments {complex_segments} have complex Hamiltonians; "
                       "plain segment reversal is not the time-reversed dynamics for them")
    return Protocol.from_schedule(p.schedule.reversed(), initial=p.final_hamiltonian, final=p.initial_hamiltonian)


def canonical_pair(forward: Protocol, beta: float, forward_state: DensityMatrix | None = None,
                   backward_state: DensityMatrix | None = None, mode: str = "auto") -> ProcessPair:
    """Process pair with Gibbs states unless states with Boltzmann diagonals are supplied."""
    backward = build_backward(forward, mode)
    if forward_state is None:
        forward_state = canonical_state(forward.initial_hamiltonian, beta)
    if backward_state is None:
        backward_state = canonical_state(backward.initial_hamiltonian, beta)
    return ProcessPair(forward, forward_state, backward, backward_state, beta)
