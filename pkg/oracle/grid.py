"""
Position grid for the brute-force pointer simulation, and the pure-state
decomposition of the Gaussian pointer on it.

A Gaussian pointer state with correlation s = <{X, P}> is a chirp
exp(i s x^2 / (4 hbar <X^2>)) applied to an uncorrelated Gaussian, which is a
thermal oscillator state. Its eigenfunctions are therefore chirped Hermite
functions with geometric weights (1 - r) r^k.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from config.settings import (
    KERNEL_MAX_MODES,
    KERNEL_WEIGHT_CUTOFF,
    ORACLE_GRID_POINTS,
    ORACLE_LEAK_TOL,
)
from pointer.gaussian import GaussianPointer
from quantum.dynamics import Protocol
from quantum.errors import GridLeakError, NumericalError, ValidationError

logger = logging.getLogger(__name__)

_GRID_SIGMAS = 8.0


@dataclass(frozen=True)
class PointerGrid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2 or self.n_points & (self.n_points - 1):
            raise ValidationError(f"n_points must be a power of two, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValidationError(f"empty grid [{self.x_min}, {self.x_max})")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers p / hbar in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, self.dx)


def make_grid(p: Protocol, ptr: GaussianPointer, n_points: int = ORACLE_GRID_POINTS) -> PointerGrid:
    """Symmetric grid of half-width kappa * span + 8 sqrt(var_x)."""
    energies = np.concatenate([p.initial_levels.eigenvalues, p.final_levels.eigenvalues, p.work_values.ravel()])
    half = ptr.kappa * np.abs(energies).max() + _GRID_SIGMAS * ptr.width
    return PointerGrid(-half, half, n_points)


def check_leakage(grid: PointerGrid, ptr: GaussianPointer, offsets) -> float:
    """Largest pointer mass outside the grid over all displacement centers."""
    offsets = np.asarray(offsets, dtype=float)
    below = ndtr((grid.x_min - offsets) / ptr.width)
    above = ndtr((offsets - grid.x_max) / ptr.width)
    leaked = float(np.max(below + above))
    if leaked > ORACLE_LEAK_TOL:
        needed = np.abs(offsets).max() + _GRID_SIGMAS * ptr.width
        raise GridLeakError(leaked, f"use a grid of half-width at least {needed:.4g}")
    return leaked


def _hermite_functions(xi: np.ndarray, count: int) -> np.ndarray:
    """Normalized Hermite functions h_0..h_{count-1} by the stable three-term recursion."""
    out = np.empty((count, len(xi)))
    out[0] = np.pi ** -0.25 * np.exp(-xi ** 2 / 2)
    if count > 1:
        out[1] = np.sqrt(2) * xi * out[0]
    for j in range(2, count):
        out[j] = np.sqrt(2 / j) * xi * out[j - 1] - np.sqrt((j - 1) / j) * out[j - 2]
    return out


def pointer_modes(ptr: GaussianPointer, grid: PointerGrid) -> tuple[np.ndarray, np.ndarray]:
    """
    Weights lambda_k and sampled eigenfunctions phi_k(x) of the pointer kernel,
    truncated once the remaining weight drops below KERNEL_WEIGHT_CUTOFF.
    """
    var_x, hbar, s = ptr.var_x, ptr.hbar, ptr.sym_xp
    var_p_eff = ptr.var_p - s ** 2 / (4 * var_x)
    nu = np.sqrt(var_x * var_p_eff)
    omega = nu / var_x
    length = np.sqrt(hbar / omega)
    r = max((nu - hbar / 2) / (nu + hbar / 2), 0.0)
    if r <= KERNEL_WEIGHT_CUTOFF:
        count = 1
    else:
        count = int(np.ceil(np.log(KERNEL_WEIGHT_CUTOFF) / np.log(r)))
    if count > KERNEL_MAX_MODES:
        raise NumericalError(f"pointer too mixed for the oracle: {count} modes needed (limit {KERNEL_MAX_MODES})")

    weights = (1 - r) * r ** np.arange(count)
    x = grid.x
    chirp = np.exp(1j * s * x ** 2 / (4 * hbar * var_x))
    modes = chirp * _hermite_functions(x / length, count) / np.sqrt(length)
    logger.debug(f"Pointer decomposed into {count} modes (r={r:.3g})")
    return weights, modes
