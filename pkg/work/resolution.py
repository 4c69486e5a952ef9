"""
Resolution criteria: when does the work meter behave like projective
measurements, and when is the imprecise-limit form a valid approximation?

"<<" and ">>" are read as a factor MUCH_LESS_FACTOR; the margins themselves
are reported so stricter factors can be applied downstream.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np

from config.settings import ATOM_MERGE_REL_TOL, MUCH_LESS_FACTOR, N_EPSILON_DEFAULT, POSITIVITY_SLACK
from pointer.gaussian import GaussianPointer
from quantum.errors import ValidationError
from quantum.operators import DensityMatrix, SpectralDecomposition, matrix_of
from work.distributions import merge_atoms

logger = logging.getLogger(__name__)


@dataclass
class Criterion:
    name: str
    lhs: float
    rhs: float
    holds: bool


@dataclass
class ResolutionReport:
    coherence: Criterion             # 2 sigma_nd2 << min (e_n - e_n')^2
    work_gap: Criterion              # 2 sigma_e2 << min squared work gap
    imprecise: Criterion             # 2 sigma_nd2 >> (e_n* - e_N)^2 over the truncated level set
    pointer_consistency: Criterion   # (1 + s^2/hbar^2) sigma_nd2 <= 4 sigma_e2
    raw_initial_spread: float        # (max e_n - min e_n)^2 over all initial levels
    truncated_spread: float          # same over N_epsilon

    @property
    def accurate_limit(self) -> bool:
        return self.coherence.holds and self.work_gap.holds

    @property
    def imprecise_limit(self) -> bool:
        return self.imprecise.holds

    def to_json(self) -> dict:
        data = asdict(self)
        data["accurate_limit"] = self.accurate_limit
        data["imprecise_limit"] = self.imprecise_limit
        return data


def _min_squared_gap(values: np.ndarray) -> float:
    if len(values) < 2:
        return float("inf")
    return float(np.min(np.diff(np.sort(values))) ** 2)


def truncated_levels(d0: SpectralDecomposition, rho: DensityMatrix | None, epsilon: float) -> np.ndarray:
    """Smallest set of most-populated levels holding at least 1 - epsilon of the probability."""
    if rho is None:
        return d0.eigenvalues
    r = matrix_of(rho)
    probs = np.array([np.trace(P @ r).real for P in d0.projectors])
    order = np.argsort(-probs, kind="stable")
    cumulative = np.cumsum(probs[order])
    count = int(np.searchsorted(cumulative, 1 - epsilon)) + 1
    return d0.eigenvalues[order[:min(count, len(order))]]


def resolution_check(d0: SpectralDecomposition, dt: SpectralDecomposition, ptr: GaussianPointer,
                     rho: DensityMatrix | None = None, epsilon: float = N_EPSILON_DEFAULT) -> ResolutionReport:
    if not 0 <= epsilon < 1:
        raise ValidationError(f"epsilon must lie in [0, 1), got {epsilon}")
    sigma_e2, sigma_nd2 = ptr.sigma_e2, ptr.sigma_nd2
    factor = MUCH_LESS_FACTOR

    coherence_rhs = _min_squared_gap(d0.eigenvalues)
    coherence = Criterion("coherence", 2 * sigma_nd2, coherence_rhs, factor * 2 * sigma_nd2 <= coherence_rhs)

    work = (dt.eigenvalues[:, None] - d0.eigenvalues[None, :]).ravel()
    scale = max(np.ptp(work), np.abs(work).max())
    distinct, _ = merge_atoms(work, np.ones_like(work), ATOM_MERGE_REL_TOL * scale)
    gap_rhs = _min_squared_gap(distinct)
    work_gap = Criterion("work_gap", 2 * sigma_e2, gap_rhs, factor * 2 * sigma_e2 <= gap_rhs)

    kept = truncated_levels(d0, rho, epsilon)
    truncated_spread = float(np.ptp(kept) ** 2)
    imprecise = Criterion("imprecise", 2 * sigma_nd2, truncated_spread, 2 * sigma_nd2 >= factor * truncated_spread)

    consistency_lhs = (1 + ptr.sym_xp ** 2 / ptr.hbar ** 2) * sigma_nd2
    pointer_consistency = Criterion("pointer_consistency", consistency_lhs, 4 * sigma_e2,
                                    consistency_lhs <= 4 * sigma_e2 * (1 + POSITIVITY_SLACK))

    report = ResolutionReport(coherence, work_gap, imprecise, pointer_consistency,
                              raw_initial_spread=float(d0.spectral_range ** 2),
                              truncated_spread=truncated_spread)
    logger.info(f"Resolution: accurate={report.accurate_limit} imprecise={report.imprecise_limit} "
                f"(sigma_e2={sigma_e2:.3g}, sigma_nd2={sigma_nd2:.3g})")
    return report
