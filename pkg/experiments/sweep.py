"""
Concurrent parameter sweeps.

Each point is independent, so the sweep fans out over worker threads with
asyncio.gather and comes back in input order.
"""

import asyncio
import logging
from typing import Callable

import numpy as np

from pointer.gaussian import pure_pointer
from quantum.dynamics import Protocol
from quantum.operators import DensityMatrix
from work.schemes import mean_work

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_E2 = np.logspace(-6, 4, 41)


async def gather_sweep(fn: Callable[[float], float], values) -> list[float]:
    return list(await asyncio.gather(*(asyncio.to_thread(fn, float(v)) for v in values)))


def mean_work_sweep(p: Protocol, rho: DensityMatrix, sigma_e2s=DEFAULT_SIGMA_E2, kappa: float = 1.0) -> np.ndarray:
    """Work-meter average for a pure pointer at each sigma_e2."""
    sigma_e2s = np.asarray(sigma_e2s, dtype=float)
    means = asyncio.run(gather_sweep(lambda s: mean_work(p, pure_pointer(s, kappa, p.hbar), rho), sigma_e2s))
    logger.info(f"Mean-work sweep over {len(sigma_e2s)} values of sigma_e2 done")
    return np.array(means)


async def gather_curves(jobs: dict[str, Callable[[], object]]) -> dict[str, object]:
    """Run named zero-argument jobs concurrently."""
    results = await asyncio.gather(*(asyncio.to_thread(job) for job in jobs.values()))
    return dict(zip(jobs.keys(), results))
