"""
Joint probabilities and the three-index amplitude tensor

    p(m, n, n') = Tr P_m(tau) U P_n(0) rho P_n'(0) U^dagger

that feeds every Gaussian-scheme work distribution.
"""

import logging
from dataclasses import dataclass

import numpy as np

from config.settings import PSD_TOL
from quantum.dynamics import Protocol
from quantum.errors import NumericalError, ValidationError
from quantum.operators import DensityMatrix, matrix_of

logger = logging.getLogger(__name__)


def _state(p: Protocol, rho: DensityMatrix) -> np.ndarray:
    r = matrix_of(rho)
    if r.shape != (p.dim, p.dim):
        raise ValidationError(f"dimension mismatch: state is {r.shape[0]}, protocol is {p.dim}")
    return r


def level_blocks(p: Protocol) -> np.ndarray:
    """K[m, n] = P_m(tau) U P_n(0), shape (M, N, d, d)."""
    final = p.final_levels.stacked_projectors()
    initial = p.initial_levels.stacked_projectors()
    return np.einsum("mij,jk,nkl->mnil", final, p.propagator, initial, optimize=True)


@dataclass(frozen=True, eq=False)
class AmplitudeTensor:
    values: np.ndarray               # complex, indexed (m, n, n')
    initial_energies: np.ndarray     # e_n(0)
    final_energies: np.ndarray       # e_m(tau)

    def __post_init__(self):
        v = self.values
        if np.max(np.abs(v - np.conj(np.swapaxes(v, 1, 2)))) > 1e-12:
            raise NumericalError("amplitude tensor is not Hermitian in (n, n')")
        total = np.einsum("mnn->", v).real
        if abs(total - 1) > 1e-10:
            raise NumericalError(f"amplitude tensor diagonal sums to {total!r}, expected 1")

    @property
    def diagonal(self) -> np.ndarray:
        """p(m, n) = p(m, n, n)."""
        return np.einsum("mnn->mn", self.values).real

    @property
    def coherent(self) -> bool:
        """True when some off-diagonal (n != n') weight survives."""
        off = self.values.copy()
        idx = np.arange(off.shape[1])
        off[:, idx, idx] = 0
        return bool(np.max(np.abs(off), initial=0.0) > 1e-14)


def joint_probability(p: Protocol, rho: DensityMatrix) -> np.ndarray:
    """p(m, n) = Tr P_m U P_n rho P_n U^dagger, shape (M, N)."""
    r = _state(p, rho)
    K = level_blocks(p)
    probs = np.einsum("mnij,jk,mnik->mn", K, r, K.conj(), optimize=True).real
    if probs.min() < -PSD_TOL:
        raise NumericalError(f"negative joint probability {probs.min():.3e}")
    return probs


def amplitude_tensor(p: Protocol, rho: DensityMatrix) -> AmplitudeTensor:
    r = _state(p, rho)
    U = p.propagator
    final = p.final_levels.stacked_projectors()
    initial = p.initial_levels.stacked_projectors()
    heisenberg = np.einsum("ji,mjk,kl->mil", U.conj(), final, U, optimize=True)       # U^dagger P_m U
    sandwiched = np.einsum("aij,jk,bkl->abil", initial, r, initial, optimize=True)     # P_n rho P_n'
    values = np.einsum("mij,abji->mab", heisenberg, sandwiched)
    logger.debug(f"Amplitude tensor with shape {values.shape}")
    return AmplitudeTensor(values, p.initial_levels.eigenvalues, p.final_levels.eigenvalues)
