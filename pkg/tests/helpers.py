"""Random instances for property tests, all driven by integer seeds."""

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import unitary_group

from quantum.dynamics import Protocol, Schedule
from quantum.operators import DensityMatrix, HermitianOperator


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> HermitianOperator:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianOperator(scale * (a + a.conj().T) / 2)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    r = a @ a.conj().T
    return DensityMatrix.symmetrized(r / np.trace(r).real)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_protocol(rng: np.random.Generator, dim: int) -> Protocol:
    return Protocol(random_hermitian(rng, dim), random_hermitian(rng, dim), random_unitary(rng, dim))


def random_real_hermitian(rng: np.random.Generator, dim: int) -> HermitianOperator:
    a = rng.normal(size=(dim, dim))
    return HermitianOperator((a + a.T) / 2)


def two_segment_protocol(rng: np.random.Generator, dim: int = 4) -> Protocol:
    """H(0) -> H_mid for a while -> H(tau), all real symmetric."""
    initial, middle, final = (random_real_hermitian(rng, dim) for _ in range(3))
    schedule = Schedule(((initial, 0.7), (middle, 1.3)))
    return Protocol.from_schedule(schedule, initial=initial, final=final)


def window_masses(centers: np.ndarray, density, points: int = 4001) -> np.ndarray:
    """Mass of density within half the smallest gap around every center."""
    half = np.min(np.diff(centers)) / 2
    masses = []
    for c in centers:
        x = np.linspace(c - half, c + half, points)
        masses.append(trapezoid(density(x), x))
    return np.array(masses)
