"""
Crooks and Jarzynski relations, plain and pointer-modified.

Every check returns a FluctuationReport instead of raising on a violated
relation; only invalid inputs raise.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from config.settings import (
    CROOKS_REL_TOL,
    EVAL_GRID_POINTS,
    JARZYNSKI_REL_TOL,
    MODIFIED_CROOKS_REL_TOL,
)
from fluctuation.process import ProcessPair, check_boltzmann_diagonal, free_energy_difference
from pointer.gaussian import GaussianPointer
from quantum.dynamics import Protocol
from quantum.errors import ValidationError
from quantum.operators import DensityMatrix, commutator_norm
from work.distributions import GaussianMixture
from work.schemes import pem_work_pdf, work_meter_pdf

logger = logging.getLogger(__name__)

_GRID_SIGMAS = 6.0
_TINY = 1e-300


@dataclass
class FluctuationReport:
    relation: str
    max_violation: float
    grid: list = field(default_factory=list)
    passed: bool = False
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"relation": self.relation, "max_violation": self.max_violation,
                "grid": [float(w) for w in self.grid], "pass": self.passed, **self.details}


def _relative_violation(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    return np.where(scale > _TINY, np.abs(lhs - rhs) / np.where(scale > _TINY, scale, 1.0), 0.0)


def _perturbed(weights: np.ndarray, perturbation: float) -> np.ndarray:
    weights = weights.copy()
    if perturbation:
        weights[0] *= 1 + perturbation
    return weights


def crooks_check(pair: ProcessPair, perturbation: float = 0.0) -> FluctuationReport:
    """p_F(w) = exp(-beta (Delta F - w)) p_B(-w) atom by atom."""
    forward = pem_work_pdf(pair.forward, pair.forward_state)
    backward = pem_work_pdf(pair.backward, pair.backward_state)
    tol = max(pair.forward.atom_tolerance, pair.backward.atom_tolerance, 1e-12)
    fw = _perturbed(forward.weights, perturbation)

    lhs = fw
    rhs = np.array([np.exp(-pair.beta * (pair.delta_f - w)) * backward.weight_at(-w, tol)
                    for w in forward.positions])
    violations = list(_relative_violation(lhs, rhs))
    # backward atoms that have no forward partner
    for w_b, p_b in zip(backward.positions, backward.weights):
        if p_b > 0 and np.all(np.abs(forward.positions + w_b) > tol):
            violations.append(1.0)

    worst = float(max(violations, default=0.0))
    report = FluctuationReport("crooks", worst, list(forward.positions), worst <= CROOKS_REL_TOL,
                               {"delta_f": pair.delta_f, "beta": pair.beta})
    logger.info(f"Crooks: max relative violation {worst:.3e} -> {'pass' if report.passed else 'FAIL'}")
    return report


def jarzynski_check(pair: ProcessPair) -> FluctuationReport:
    """<exp(-beta w)> over pem atoms against exp(-beta Delta F)."""
    forward = pem_work_pdf(pair.forward, pair.forward_state)
    positive = forward.weights > 0
    log_lhs = logsumexp(-pair.beta * forward.positions[positive], b=forward.weights[positive])
    deviation = float(abs(np.expm1(log_lhs + pair.beta * pair.delta_f)))
    return FluctuationReport("jarzynski", deviation, [], deviation <= JARZYNSKI_REL_TOL,
                             {"lhs": float(np.exp(log_lhs)), "rhs": float(np.exp(-pair.beta * pair.delta_f))})


def _require_stationary(p: Protocol, rho: DensityMatrix, label: str) -> None:
    residue = commutator_norm(p.initial_hamiltonian, rho)
    if residue > 1e-10:
        raise ValidationError(f"{label} is not canonical: ||[H, rho]|| = {residue:.3e}")


def modified_crooks_check(pair: ProcessPair, sigma_e2: float, scheme: str = "work_meter",
                          perturbation: float = 0.0, n_points: int = EVAL_GRID_POINTS) -> FluctuationReport:
    """
    p_F(w - v beta/2) = exp(-beta (Delta F - w)) p_B(-w - v beta/2) for diagonal-case pdfs,
    with v = sigma_e2 for the work meter and v = 2 sigma_e2 for two Gaussian measurements.
    """
    if scheme not in ("work_meter", "two_gaussian"):
        raise ValidationError(f"unknown scheme {scheme!r} for the modified Crooks relation")
    if sigma_e2 < 0:
        raise ValidationError(f"sigma_e2 must be >= 0, got {sigma_e2}")
    if sigma_e2 == 0:
        return crooks_check(pair, perturbation)
    _require_stationary(pair.forward, pair.forward_state, "forward state")
    _require_stationary(pair.backward, pair.backward_state, "backward state")

    variance = sigma_e2 if scheme == "work_meter" else 2 * sigma_e2
    forward_atoms = pem_work_pdf(pair.forward, pair.forward_state)
    backward_atoms = pem_work_pdf(pair.backward, pair.backward_state)
    forward = GaussianMixture(_perturbed(forward_atoms.weights, perturbation), forward_atoms.positions,
                              np.full(len(forward_atoms.positions), variance), scheme=scheme)
    backward = backward_atoms.smeared(variance, scheme=scheme)

    shift = variance * pair.beta / 2
    width = _GRID_SIGMAS * np.sqrt(variance)
    w = np.linspace(forward_atoms.positions.min() + shift - width,
                    forward_atoms.positions.max() + shift + width, n_points)
    lhs = forward.evaluate(w - shift)
    rhs = np.exp(-pair.beta * (pair.delta_f - w)) * backward.evaluate(-w - shift)
    worst = float(np.max(_relative_violation(lhs, rhs)))
    report = FluctuationReport(f"modified_crooks[{scheme}]", worst, list(w), worst <= MODIFIED_CROOKS_REL_TOL,
                               {"sigma_e2": sigma_e2, "beta": pair.beta, "delta_f": pair.delta_f})
    logger.info(f"Modified Crooks ({scheme}): max relative violation {worst:.3e}")
    return report


@dataclass
class JarzynskiResult:
    log_lhs: float
    log_rhs: float

    @property
    def lhs(self) -> float:
        return float(np.exp(self.log_lhs))

    @property
    def rhs(self) -> float:
        return float(np.exp(self.log_rhs))

    @property
    def deviation(self) -> float:
        """|lhs/rhs - 1|, finite even when both sides overflow."""
        return float(abs(np.expm1(self.log_lhs - self.log_rhs)))

    @property
    def passed(self) -> bool:
        return self.deviation <= JARZYNSKI_REL_TOL

    def __iter__(self):
        return iter((self.lhs, self.rhs))


def modified_jarzynski(p: Protocol, ptr: GaussianPointer, rho_canonical: DensityMatrix,
                       beta: float) -> JarzynskiResult:
    """log <exp(-beta w)> of the work-meter pdf against -beta Delta F + beta^2 sigma_e2 / 2."""
    if beta <= 0:
        raise ValidationError(f"beta must be > 0, got {beta}")
    check_boltzmann_diagonal(p.initial_levels, rho_canonical, beta, "initial state")
    log_lhs = work_meter_pdf(p, ptr, rho_canonical).log_exponential_average(beta)
    delta_f = free_energy_difference(p.initial_hamiltonian, p.final_hamiltonian, beta)
    result = JarzynskiResult(log_lhs, -beta * delta_f + beta ** 2 * ptr.sigma_e2 / 2)
    logger.info(f"Modified Jarzynski: log lhs={result.log_lhs:.12g} log rhs={result.log_rhs:.12g} "
                f"deviation={result.deviation:.3e}")
    return result
