"""
Operations (outcome-resolved quantum channels) for every measurement scheme.

Each operation returns the non-normalized post-measurement operator for one
outcome; the plural variants evaluate a whole outcome grid at once for
integration. Zero-probability outcomes give zero operators, never errors.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from config.settings import PSD_TOL, SELECTIVE_MIN_PROB
from measurement.amplitudes import _state, level_blocks
from pointer.gaussian import GaussianPointer
from quantum.dynamics import Protocol
from quantum.errors import ValidationError
from quantum.operators import DensityMatrix, SpectralDecomposition, matrix_of

logger = logging.getLogger(__name__)

_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class OutcomeOperator:
    outcome: float
    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        herm = (self.matrix + self.matrix.conj().T) / 2
        return bool(np.linalg.eigvalsh(herm).min() >= -tol)


def selective_state(op: OutcomeOperator) -> DensityMatrix | None:
    """Normalized post-measurement state, or None for a negligible outcome."""
    prob = op.trace
    if prob <= SELECTIVE_MIN_PROB:
        return None
    return DensityMatrix.symmetrized(op.matrix / prob)


# ---- Complex-Gaussian coefficients ----

def _coefficients(outcomes, a: np.ndarray, b: np.ndarray, suppression: np.ndarray,
                  variance: float, shift: float) -> np.ndarray:
    """
    c[o, i, j] = exp(-supp[i, j] - (o - (a_i + b_j)/2 + i*shift*(a_i - b_j))^2 / (2 v)) / sqrt(2 pi v)

    The suppression enters the same exponent so that large imaginary center
    shifts never overflow on their own.
    """
    outcomes = np.atleast_1d(np.asarray(outcomes, dtype=float))
    mid = (a[:, None] + b[None, :]) / 2
    diff = a[:, None] - b[None, :]
    center = outcomes[:, None, None] - mid[None] + 1j * shift * diff[None]
    exponent = -suppression[None] - center ** 2 / (2 * variance)
    return np.exp(exponent) / np.sqrt(2 * np.pi * variance)


def _shift(ptr: GaussianPointer) -> float:
    return ptr.sym_xp / (2 * ptr.hbar)


def _eigenframe(levels: SpectralDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenvectors (columns) and the level index of each one."""
    columns, labels = [], []
    for k, proj in enumerate(levels.projectors):
        vals, vecs = linalg.eigh(proj)
        picked = vecs[:, vals > 0.5]
        columns.append(picked)
        labels.extend([k] * picked.shape[1])
    return np.hstack(columns), np.array(labels)


@dataclass(frozen=True, eq=False)
class _PairFrame:
    """
    Operator-pair sums in the eigenbases of H_f (index j) and H_i (index i).

    amplitudes[(j, i), (j', i')] = U[j, i] rho[i, i'] conj(U[j', i']), so that
    sum_ab c_ab K_a rho K_b^dagger = basis (sum_ii' c amplitudes) basis^dagger
    whenever c depends on the levels of j, i, j', i' only.
    """
    basis: np.ndarray
    amplitudes: np.ndarray
    final: np.ndarray                # f of each j
    initial: np.ndarray              # e of each i

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def work(self) -> np.ndarray:
        return (self.final[:, None] - self.initial[None, :]).ravel()

    def assemble(self, coeffs: np.ndarray) -> np.ndarray:
        """coeffs[o, (j, i), (j', i')] -> operators (o, d, d) in the original basis."""
        d = self.dim
        summed = (coeffs * self.amplitudes).reshape(-1, d, d, d, d).sum(axis=(2, 4))
        return np.einsum("ij,ojk,lk->oil", self.basis, summed, self.basis.conj(), optimize=True)


def _pair_frame(p: Protocol, rho) -> _PairFrame:
    r = _state(p, rho)
    final_basis, final_labels = _eigenframe(p.final_levels)
    initial_basis, initial_labels = _eigenframe(p.initial_levels)
    u = final_basis.conj().T @ p.propagator @ initial_basis
    r = initial_basis.conj().T @ r @ initial_basis
    d = p.dim
    amplitudes = np.einsum("ji,ik,lk->jilk", u, r, u.conj()).reshape(d * d, d * d)
    return _PairFrame(final_basis, amplitudes, p.final_levels.eigenvalues[final_labels],
                      p.initial_levels.eigenvalues[initial_labels])


def _pair_operations(frame: _PairFrame, ws, suppression: np.ndarray, variance: float, shift: float) -> np.ndarray:
    ws = np.atleast_1d(np.asarray(ws, dtype=float))
    w = frame.work
    out = np.empty((len(ws), frame.dim, frame.dim), dtype=complex)
    step = max(1, _CHUNK_ELEMENTS // frame.amplitudes.size)
    for start in range(0, len(ws), step):
        chunk = ws[start:start + step]
        out[start:start + step] = frame.assemble(_coefficients(chunk, w, w, suppression, variance, shift))
    return out


def _contract(coeffs: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    return np.einsum("oab,abij->oij", coeffs, blocks)


# ---- Projective energy measurements ----

def pem_operation(p: Protocol, rho: DensityMatrix, w: float) -> OutcomeOperator:
    r = _state(p, rho)
    K = level_blocks(p)
    hits = np.argwhere(np.abs(p.work_values - w) <= p.atom_tolerance)
    out = np.zeros((p.dim, p.dim), dtype=complex)
    for m, n in hits:
        out += K[m, n] @ r @ K[m, n].conj().T
    return OutcomeOperator(float(w), out)


def pem_nonselective(p: Protocol, rho: DensityMatrix) -> DensityMatrix:
    r = _state(p, rho)
    K = level_blocks(p)
    M, N = K.shape[:2]
    return DensityMatrix.symmetrized(sum(K[m, n] @ r @ K[m, n].conj().T for m in range(M) for n in range(N)))


# ---- Single Gaussian energy measurement ----

def _energy_setup(d: SpectralDecomposition, rho) -> tuple[np.ndarray, np.ndarray]:
    r = matrix_of(rho)
    if r.shape[0] != d.dim:
        raise ValidationError(f"dimension mismatch: state is {r.shape[0]}, decomposition is {d.dim}")
    P = d.stacked_projectors()
    return np.einsum("aij,jk,bkl->abil", P, r, P, optimize=True), d.eigenvalues


def gaussian_energy_operations(d: SpectralDecomposition, ptr: GaussianPointer, rho, energies) -> np.ndarray:
    blocks, e = _energy_setup(d, rho)
    suppression = (e[:, None] - e[None, :]) ** 2 / (2 * ptr.sigma_nd2)
    return _contract(_coefficients(energies, e, e, suppression, ptr.sigma_e2, _shift(ptr)), blocks)


def gaussian_energy_operation(d: SpectralDecomposition, ptr: GaussianPointer, rho: DensityMatrix,
                              E: float) -> OutcomeOperator:
    return OutcomeOperator(float(E), gaussian_energy_operations(d, ptr, rho, [E])[0])


def gaussian_energy_nonselective(d: SpectralDecomposition, ptr: GaussianPointer, rho) -> DensityMatrix:
    """Partial dephasing: coherences damped by exp(-(e_n - e_n')^2 / (2 sigma_nd2))."""
    blocks, e = _energy_setup(d, rho)
    weights = np.exp(-(e[:, None] - e[None, :]) ** 2 / (2 * ptr.sigma_nd2))
    return DensityMatrix.symmetrized(np.einsum("ab,abij->ij", weights, blocks))


def kraus_energy_operation(d: SpectralDecomposition, sigma_e2: float, rho, E: float) -> OutcomeOperator:
    """M_E rho M_E^dagger with M_E = (2 pi sigma_e2)^(-1/4) exp(-(E - H)^2 / (4 sigma_e2))."""
    if not sigma_e2 > 0:
        raise ValidationError(f"sigma_e2 must be > 0, got {sigma_e2}")
    r = matrix_of(rho)
    if r.shape[0] != d.dim:
        raise ValidationError(f"dimension mismatch: state is {r.shape[0]}, decomposition is {d.dim}")
    amps = np.exp(-(E - d.eigenvalues) ** 2 / (4 * sigma_e2)) / (2 * np.pi * sigma_e2) ** 0.25
    M = np.einsum("n,nij->ij", amps, d.stacked_projectors())
    return OutcomeOperator(float(E), M @ r @ M.conj().T)


# ---- Two Gaussian energy measurements ----

def _two_gaussian_suppression(frame: _PairFrame, ptr: GaussianPointer) -> np.ndarray:
    f, e = frame.final, frame.initial
    df2 = (f[:, None, None, None] - f[None, None, :, None]) ** 2
    de2 = (e[None, :, None, None] - e[None, None, None, :]) ** 2
    d = frame.dim
    return ((df2 + de2) / (2 * ptr.sigma_nd2)).reshape(d * d, d * d)


def two_gaussian_work_operations(p: Protocol, ptr: GaussianPointer, rho, ws) -> np.ndarray:
    frame = _pair_frame(p, rho)
    return _pair_operations(frame, ws, _two_gaussian_suppression(frame, ptr), 2 * ptr.sigma_e2, _shift(ptr))


def two_gaussian_work_operation(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix, w: float) -> OutcomeOperator:
    return OutcomeOperator(float(w), two_gaussian_work_operations(p, ptr, rho, [w])[0])


def two_gaussian_nonselective(p: Protocol, ptr: GaussianPointer, rho) -> DensityMatrix:
    frame = _pair_frame(p, rho)
    return DensityMatrix.symmetrized(frame.assemble(np.exp(-_two_gaussian_suppression(frame, ptr)))[0])


# ---- Work meter ----

def work_meter_operations(p: Protocol, ptr: GaussianPointer, rho, ws) -> np.ndarray:
    frame = _pair_frame(p, rho)
    w = frame.work
    suppression = (w[:, None] - w[None, :]) ** 2 / (2 * ptr.sigma_nd2)
    return _pair_operations(frame, ws, suppression, ptr.sigma_e2, _shift(ptr))


def work_meter_operation(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix, w: float) -> OutcomeOperator:
    return OutcomeOperator(float(w), work_meter_operations(p, ptr, rho, [w])[0])


def work_meter_nonselective(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix) -> DensityMatrix:
    frame = _pair_frame(p, rho)
    w = frame.work
    weights = np.exp(-(w[:, None] - w[None, :]) ** 2 / (2 * ptr.sigma_nd2))
    return DensityMatrix.symmetrized(frame.assemble(weights)[0])
