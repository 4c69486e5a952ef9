"""
Work distributions of the individual measurement schemes.

    pem_work_pdf            two projective energy measurements (atoms)
    work_meter_pdf          single pointer coupled before and after the protocol
    two_gaussian_work_pdf   two independent Gaussian energy measurements
    imprecise_limit_pdf     kappa -> 0 form of the work meter (no coherence suppression)
    imprecise_q             its deconvolved signed density
    broad_gaussian_approx   single Gaussian at the untouched average
    tmh_quasi_pdf           Terletsky-Margenau-Hill quasi-probability
"""

import logging

import numpy as np

from measurement.amplitudes import AmplitudeTensor, _state, amplitude_tensor, joint_probability
from pointer.gaussian import GaussianPointer
from quantum.dynamics import Protocol, untouched_average_work
from quantum.errors import NumericalError, UnsupportedCaseError, ValidationError
from quantum.operators import DensityMatrix
from work.distributions import AtomDistribution, CharacteristicFunction, GaussianMixture, merge_atoms

logger = logging.getLogger(__name__)


def pem_work_pdf(p: Protocol, rho: DensityMatrix) -> AtomDistribution:
    probs = joint_probability(p, rho)
    positions, weights = merge_atoms(p.work_values, probs, p.atom_tolerance)
    return AtomDistribution(positions, weights, scheme="pem")


# ---- Gaussian mixtures from the amplitude tensor ----

def _terms(tensor: AmplitudeTensor, alpha: complex, sigma_nd2: float | None):
    """Weights, centers e_m - alpha e_n - conj(alpha) e_n' and log suppressions per (m, n, n')."""
    e, f = tensor.initial_energies, tensor.final_energies
    centers = f[:, None, None] - alpha * e[None, :, None] - np.conj(alpha) * e[None, None, :]
    centers = np.broadcast_to(centers, tensor.values.shape)
    if sigma_nd2 is None:
        log_scales = np.zeros(tensor.values.shape)
    else:
        de2 = (e[:, None] - e[None, :]) ** 2
        log_scales = np.broadcast_to(-de2 / (2 * sigma_nd2), tensor.values.shape)
    return tensor.values.ravel(), centers.ravel(), log_scales.ravel()


def _mixture(tensor: AmplitudeTensor, ptr: GaussianPointer, variance: float, scheme: str,
             suppress: bool = True, proper: bool = True) -> GaussianMixture:
    weights, centers, log_scales = _terms(tensor, ptr.alpha, ptr.sigma_nd2 if suppress else None)
    # (m, n, n') pairs with (m, n', n)
    partners = np.arange(len(weights)).reshape(tensor.values.shape).transpose(0, 2, 1).ravel()
    mixture = GaussianMixture(weights, centers, np.full(len(weights), variance), log_scales,
                              scheme=scheme, sigma_e2=ptr.sigma_e2, sigma_nd2=ptr.sigma_nd2, proper=proper,
                              partners=partners)
    logger.debug(f"{scheme} mixture with {len(mixture)} terms")
    return mixture


def work_meter_pdf(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix) -> GaussianMixture:
    return _mixture(amplitude_tensor(p, rho), ptr, ptr.sigma_e2, "work_meter")


def two_gaussian_work_pdf(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix) -> GaussianMixture:
    return _mixture(amplitude_tensor(p, rho), ptr, 2 * ptr.sigma_e2, "two_gaussian")


def imprecise_limit_pdf(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix) -> GaussianMixture:
    return _mixture(amplitude_tensor(p, rho), ptr, ptr.sigma_e2, "imprecise", suppress=False, proper=False)


def characteristic_function(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix) -> CharacteristicFunction:
    return work_meter_pdf(p, ptr, rho).characteristic()


def mean_work(p: Protocol, ptr: GaussianPointer, rho: DensityMatrix) -> float:
    """
    Exact work-meter average: dephased back-action term, minus the initial
    energy, plus coherences damped by exp(-(e_n - e_n')^2 / (2 sigma_nd2)).
    The sym_xp shift of the centers drops out of the average.
    """
    r = _state(p, rho)
    U = p.propagator
    Hf = U.conj().T @ p.final_hamiltonian.matrix @ U
    levels = p.initial_levels
    proj, e = levels.projectors, levels.eigenvalues
    dephased = sum(P @ r @ P for P in proj)
    value = np.trace(Hf @ dephased) - np.trace(p.initial_hamiltonian.matrix @ r)
    for n in range(levels.levels):
        for k in range(n):
            damping = np.exp(-(e[n] - e[k]) ** 2 / (2 * ptr.sigma_nd2))
            coherence = proj[n] @ r @ proj[k] + proj[k] @ r @ proj[n]
            value += damping * np.trace(Hf @ coherence)
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise NumericalError(f"mean work has imaginary residue {value.imag:.3e}")
    return float(value.real)


def imprecise_q(p: Protocol, rho: DensityMatrix, sym_xp: float = 0.0) -> AtomDistribution:
    """
    Signed density whose convolution with N(0, sigma_e2) is the imprecise-limit pdf.
    Atoms at e_m - (e_n + e_n')/2 with weight Re p(m, n, n').
    """
    if sym_xp != 0:
        raise UnsupportedCaseError(
            "imprecise_q needs sym_xp = 0; with position-momentum correlations the "
            "deconvolution diverges"
        )
    tensor = amplitude_tensor(p, rho)
    e, f = tensor.initial_energies, tensor.final_energies
    positions = f[:, None, None] - (e[None, :, None] + e[None, None, :]) / 2
    positions = np.broadcast_to(positions, tensor.values.shape)
    merged_pos, merged_w = merge_atoms(positions, tensor.values, p.atom_tolerance)
    imag = np.max(np.abs(merged_w.imag), initial=0.0)
    if imag > 1e-10:
        raise NumericalError(f"signed density has imaginary atom weight {imag:.3e}")
    dist = AtomDistribution(merged_pos, merged_w.real, scheme="imprecise_q", signed=True)
    if dist.negative:
        logger.info(f"imprecise q has negative weight {dist.weights.min():.3e}")
    return dist


def broad_gaussian_approx(p: Protocol, rho: DensityMatrix, sigma_e2: float) -> GaussianMixture:
    if not sigma_e2 > 0:
        raise ValidationError(f"sigma_e2 must be > 0, got {sigma_e2}")
    center = untouched_average_work(p, rho)
    return GaussianMixture([1.0], [center], [sigma_e2], scheme="broad_gaussian", sigma_e2=sigma_e2)


def tmh_quasi_pdf(p: Protocol, rho: DensityMatrix) -> AtomDistribution:
    """Weights Tr rho {U^dagger P_m U, P_n}/2 = Re sum_n' p(m, n, n') at e_m - e_n."""
    tensor = amplitude_tensor(p, rho)
    weights = tensor.values.sum(axis=2).real
    positions, merged = merge_atoms(p.work_values, weights, p.atom_tolerance)
    return AtomDistribution(positions, merged, scheme="tmh", signed=True)
