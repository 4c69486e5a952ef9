"""
Spin-1/2 sudden quench: H_i = (eps_i/2) sigma_z switched to H_f = (eps_f/2) sigma_x.

The initial state is given in the H_i eigenbasis ordered (ground, excited):
ground population p and coherence q. Curves are reported in units of
eps_i (energies divided by eps_i, sigma_e2 in units of eps_i^2).

Usage:
    python main.py spin-quench [config.json] --out results/spin
"""

import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from config.settings import CLOSED_FORM_TOL
from experiments.io import write_distribution, write_frame, write_json
from experiments.sweep import DEFAULT_SIGMA_E2, gather_curves, mean_work_sweep
from pointer.gaussian import pure_pointer
from quantum.dynamics import Protocol, sudden_quench, untouched_average_work
from quantum.errors import NumericalError, ValidationError
from quantum.operators import DensityMatrix, HermitianOperator
from work.schemes import imprecise_limit_pdf, pem_work_pdf, work_meter_pdf

logger = logging.getLogger(__name__)

SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)

PEAK_SIGMA_E2 = (0.01, 0.1, 1.0)
COHERENT_SIGMA_E2 = 0.1
IMPRECISE_SIGMA_E2 = (1.0, 2.0)
W_RANGE = (-4.0, 4.0)
W_POINTS = 1601


@dataclass
class TwoLevelParams:
    p: float = 0.7          # ground-state population
    q_re: float = 0.0
    q_im: float = 0.0
    eps_i: float = 1.0
    eps_f: float = 2.0

    @property
    def q(self) -> complex:
        return complex(self.q_re, self.q_im)

    @property
    def max_coherence(self) -> float:
        return float(np.sqrt(self.p * (1 - self.p)))


def two_level_quench(p: float, q: complex, eps_i: float, eps_f: float) -> tuple[Protocol, DensityMatrix]:
    if not 0 <= p <= 1:
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    if abs(q) ** 2 > p * (1 - p) + 1e-12:
        raise ValidationError(f"|q|^2 = {abs(q) ** 2:.6g} exceeds p(1-p) = {p * (1 - p):.6g}")
    if not (eps_i > 0 and eps_f > 0):
        raise ValidationError(f"eps_i and eps_f must be > 0, got {eps_i}, {eps_f}")
    protocol = sudden_quench(HermitianOperator(eps_i / 2 * SIGMA_Z), HermitianOperator(eps_f / 2 * SIGMA_X))
    # standard basis: |0> is excited, |1> is ground
    rho = DensityMatrix(np.array([[1 - p, np.conj(q)], [q, p]], dtype=complex))
    return protocol, rho


def _normal(w, center, variance):
    return np.exp(-(w - center) ** 2 / (2 * variance)) / np.sqrt(2 * np.pi * variance)


def closed_form_pdf(w, p: float, q: complex, eps_i: float, eps_f: float, sigma_e2: float):
    """Work-meter pdf for a pure pointer, written out term by term."""
    w = np.asarray(w, dtype=float)
    f = eps_f / 2
    diagonal = sum(pop / 2 * _normal(w, sign * f - e, sigma_e2)
                   for pop, e in ((p, -eps_i / 2), (1 - p, eps_i / 2)) for sign in (1, -1))
    coherent = q.real * np.exp(-eps_i ** 2 / (8 * sigma_e2)) * (_normal(w, f, sigma_e2) - _normal(w, -f, sigma_e2))
    return diagonal + coherent


def closed_form_mean(p: float, q: complex, eps_i: float, eps_f: float, sigma_e2: float) -> float:
    return (2 * p - 1) * eps_i / 2 + eps_f * q.real * np.exp(-eps_i ** 2 / (8 * sigma_e2))


def _tag(q: float, sigma_e2: float) -> str:
    return f"q{q:+.4f}_sigma_e2_{sigma_e2:g}"


def _curve(params: TwoLevelParams, q: complex, sigma_e2: float, w: np.ndarray, imprecise: bool = False):
    protocol, rho = two_level_quench(params.p, q, params.eps_i, params.eps_f)
    ptr = pure_pointer(sigma_e2 * params.eps_i ** 2, hbar=protocol.hbar)
    dist = imprecise_limit_pdf(protocol, ptr, rho) if imprecise else work_meter_pdf(protocol, ptr, rho)
    if not imprecise:
        reference = closed_form_pdf(w, params.p, q, params.eps_i, params.eps_f, ptr.sigma_e2)
        deviation = float(np.max(np.abs(dist.evaluate(w) - reference)) / max(1.0, np.max(np.abs(reference))))
        if deviation > CLOSED_FORM_TOL:
            raise NumericalError(f"{_tag(q.real, sigma_e2)}: mixture deviates from the closed form by {deviation:.3e}")
        logger.debug(f"{_tag(q.real, sigma_e2)}: max deviation from closed form {deviation:.3e}")
    return dist


def _peak_curves(params: TwoLevelParams, w: np.ndarray, out_dir: Path, fmt: str) -> list[Path]:
    q_max = params.max_coherence
    jobs = {_tag(0.0, s): (0j, s) for s in PEAK_SIGMA_E2}
    for q in (q_max, -q_max):
        jobs[_tag(q, COHERENT_SIGMA_E2)] = (complex(q), COHERENT_SIGMA_E2)

    curves = asyncio.run(gather_curves(
        {tag: (lambda q=q, s=s: _curve(params, q, s, w)) for tag, (q, s) in jobs.items()}))

    written = []
    for tag, dist in curves.items():
        written += write_distribution(dist, w, out_dir, f"peaks_{tag}", fmt, scale=params.eps_i)
    protocol, rho = two_level_quench(params.p, 0j, params.eps_i, params.eps_f)
    atoms = pem_work_pdf(protocol, rho)
    written.append(write_json({"vertical_lines": atoms.positions / params.eps_i,
                               "pem_weights": atoms.weights, "unit": "eps_i"},
                              out_dir / "peaks_markers.json"))
    return written


def _average_curves(params: TwoLevelParams, sigma_e2s: np.ndarray, out_dir: Path) -> list[Path]:
    q_max = params.max_coherence
    written, asymptotes = [], {}
    for q in (q_max, 0.5 * q_max, 0.0, -0.5 * q_max, -q_max):
        protocol, rho = two_level_quench(params.p, complex(q), params.eps_i, params.eps_f)
        means = mean_work_sweep(protocol, rho, sigma_e2s * params.eps_i ** 2)
        frame = pd.DataFrame({"sigma_e2": sigma_e2s, "mean": means / params.eps_i})
        written.append(write_frame(frame, out_dir / f"average_mean_q{q:+.4f}.csv"))
        asymptotes[f"{q:+.4f}"] = {
            "projective": pem_work_pdf(protocol, rho).mean() / params.eps_i,
            "untouched": untouched_average_work(protocol, rho) / params.eps_i,
        }
    written.append(write_json({"asymptotes": asymptotes, "unit": "eps_i"}, out_dir / "average_asymptotes.json"))
    return written


def _imprecise_comparison(params: TwoLevelParams, w: np.ndarray, out_dir: Path, fmt: str) -> list[Path]:
    q = complex(params.max_coherence)
    written, summary = [], {}
    for s in IMPRECISE_SIGMA_E2:
        exact = _curve(params, q, s, w)
        limit = _curve(params, q, s, w, imprecise=True)
        written += write_distribution(exact, w, out_dir, f"imprecise_exact_sigma_e2_{s:g}", fmt, scale=params.eps_i)
        written += write_distribution(limit, w, out_dir, f"imprecise_limit_sigma_e2_{s:g}", fmt, scale=params.eps_i)
        exact_values, limit_values = exact.evaluate(w), limit.evaluate(w)
        summary[f"{s:g}"] = {
            "l1_distance": float(np.sum(np.abs(exact_values - limit_values)) * (w[1] - w[0]) / params.eps_i),
            "imprecise_min": float(limit_values.min() * params.eps_i),
            "exact_min": float(exact_values.min() * params.eps_i),
        }
        if limit_values.min() < 0:
            logger.info(f"Imprecise-limit pdf goes negative at sigma_e2={s:g} (min {limit_values.min():.3e})")
    written.append(write_json({"comparison": summary, "q": q.real}, out_dir / "imprecise_summary.json"))
    return written


def cmd_spin_quench(params: TwoLevelParams | None, out_dir, fmt: str = "csv", w=None,
                    sigma_e2s=None) -> list[Path]:
    """Write peak curves, the average-work sweep and the imprecise-limit comparison."""
    params = params or TwoLevelParams()
    out_dir = Path(out_dir)
    w_units = np.linspace(*W_RANGE, W_POINTS) if w is None else np.asarray(w, dtype=float)
    w = w_units * params.eps_i
    sigma_e2s = DEFAULT_SIGMA_E2 if sigma_e2s is None else np.asarray(sigma_e2s, dtype=float)

    written = _peak_curves(params, w, out_dir, fmt)
    written += _average_curves(params, sigma_e2s, out_dir)
    written += _imprecise_comparison(params, w, out_dir, fmt)
    logger.info(f"Spin quench (p={params.p}, eps_f/eps_i={params.eps_f / params.eps_i:g}): {len(written)} files")
    return written
