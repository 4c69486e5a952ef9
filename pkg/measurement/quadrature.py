"""Outcome grids and trapezoid integration for outcome-resolved operators."""

import numpy as np
from scipy.integrate import trapezoid

from config.settings import QUADRATURE_SIGMAS, QUADRATURE_SPACING


def outcome_grid(centers, sigma_e2: float, variance_factor: float = 1.0) -> np.ndarray:
    """Span all (real parts of) centers, extended by 8 widths, step sigma_e/20."""
    centers = np.real(np.atleast_1d(np.asarray(centers)))
    width = np.sqrt(variance_factor * sigma_e2)
    lo = centers.min() - QUADRATURE_SIGMAS * width
    hi = centers.max() + QUADRATURE_SIGMAS * width
    step = QUADRATURE_SPACING * np.sqrt(sigma_e2)
    n = int(np.ceil((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def integrate_outcomes(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Trapezoid rule along the leading (outcome) axis."""
    return trapezoid(values, grid, axis=0)
