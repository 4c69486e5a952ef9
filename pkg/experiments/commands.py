"""
work-pdf, average-sweep and oracle-compare subcommands.
"""

import logging
from pathlib import Path

import pandas as pd

from config.settings import ORACLE_L1_TOL
from experiments.config import ExperimentConfig
from experiments.io import write_distribution, write_frame, write_json
from experiments.sweep import DEFAULT_SIGMA_E2, mean_work_sweep
from oracle.grid import PointerGrid, make_grid
from oracle.simulate import simulate_two_measurements, simulate_work_meter
from quantum.dynamics import untouched_average_work
from quantum.errors import ConfigError
from work.resolution import resolution_check
from work.schemes import (
    imprecise_limit_pdf,
    pem_work_pdf,
    tmh_quasi_pdf,
    two_gaussian_work_pdf,
    work_meter_pdf,
)

logger = logging.getLogger(__name__)

_POINTER_SCHEMES = {
    "work_meter": work_meter_pdf,
    "two_gaussian": two_gaussian_work_pdf,
    "imprecise": imprecise_limit_pdf,
}


def output_dir(cfg: ExperimentConfig, out_dir) -> Path:
    out_dir = Path(out_dir)
    return out_dir / cfg.output.path if cfg.output.path else out_dir


def work_distribution(cfg: ExperimentConfig):
    """The configured scheme's distribution: atoms for pem/tmh, a Gaussian mixture otherwise."""
    if cfg.scheme == "pem":
        return pem_work_pdf(cfg.protocol, cfg.state)
    if cfg.scheme == "tmh":
        return tmh_quasi_pdf(cfg.protocol, cfg.state)
    return _POINTER_SCHEMES[cfg.scheme](cfg.protocol, cfg.require_pointer(f"scheme {cfg.scheme}"), cfg.state)


def cmd_work_pdf(cfg: ExperimentConfig, out_dir) -> list[Path]:
    target = output_dir(cfg, out_dir)
    dist = work_distribution(cfg)
    written = []
    if cfg.scheme in ("pem", "tmh"):
        if cfg.output.format == "json":
            written.append(write_json(dist.to_json(), target / f"{cfg.scheme}.json"))
        else:
            written.append(write_frame(dist.to_frame(), target / f"{cfg.scheme}.csv"))
    else:
        w = cfg.output.grid(dist.support())
        written += write_distribution(dist, w, target, cfg.scheme, cfg.output.format)
        report = resolution_check(cfg.protocol.initial_levels, cfg.protocol.final_levels, cfg.pointer, cfg.state)
        written.append(write_json(report.to_json(), target / "resolution.json"))
    logger.info(f"work-pdf ({cfg.scheme}): mean {dist.mean():.10g}")
    return written


def cmd_average_sweep(cfg: ExperimentConfig, out_dir) -> list[Path]:
    """Work-meter mean against sigma_e2 for a pure pointer, with both limits."""
    target = output_dir(cfg, out_dir)
    sigma_e2s = DEFAULT_SIGMA_E2 if cfg.sweep is None else cfg.sweep
    kappa = cfg.pointer.kappa if cfg.pointer else 1.0
    means = mean_work_sweep(cfg.protocol, cfg.state, sigma_e2s, kappa)
    limits = {
        "projective": pem_work_pdf(cfg.protocol, cfg.state).mean(),
        "untouched": untouched_average_work(cfg.protocol, cfg.state),
    }
    return [
        write_frame(pd.DataFrame({"sigma_e2": sigma_e2s, "mean": means}), target / "average_sweep.csv"),
        write_json(limits, target / "average_limits.json"),
    ]


def oracle_grid(cfg: ExperimentConfig) -> PointerGrid:
    ptr = cfg.require_pointer("the grid oracle")
    if cfg.oracle.half_width is None:
        return make_grid(cfg.protocol, ptr, cfg.oracle.n_points)
    half = cfg.oracle.half_width
    return PointerGrid(-half, half, cfg.oracle.n_points)


def oracle_comparison(cfg: ExperimentConfig, scheme: str) -> tuple[dict, pd.DataFrame]:
    """Brute-force pointer simulation against the analytic pdf of the same scheme."""
    ptr = cfg.require_pointer("the grid oracle")
    grid = oracle_grid(cfg)
    if scheme == "work_meter":
        result = simulate_work_meter(cfg.protocol, ptr, cfg.state, grid)
        analytic = work_meter_pdf(cfg.protocol, ptr, cfg.state)
    elif scheme == "two_gaussian":
        result = simulate_two_measurements(cfg.protocol, ptr, cfg.state, grid)
        analytic = two_gaussian_work_pdf(cfg.protocol, ptr, cfg.state)
    else:
        raise ConfigError("scheme", f"the oracle covers work_meter and two_gaussian, got {scheme!r}")
    l1 = result.l1_distance(analytic)
    summary = {
        "scheme": scheme,
        "l1_distance": l1,
        "mass": result.mass,
        "oracle_mean": result.moment(1),
        "analytic_mean": analytic.mean(),
        "oracle_variance": result.variance(),
        "analytic_variance": analytic.variance(),
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points},
        "pass": bool(l1 <= ORACLE_L1_TOL),
    }
    frame = result.to_frame().assign(analytic=analytic.evaluate(result.w))
    logger.info(f"Oracle ({scheme}): L1 = {l1:.3e} -> {'pass' if summary['pass'] else 'FAIL'}")
    return summary, frame


def cmd_oracle_compare(cfg: ExperimentConfig, out_dir) -> tuple[list[Path], bool]:
    target = output_dir(cfg, out_dir)
    summary, frame = oracle_comparison(cfg, cfg.scheme)
    written = [
        write_frame(frame[["w", "pdf"]], target / f"oracle_{cfg.scheme}.csv"),
        write_frame(frame[["w", "analytic"]].rename(columns={"analytic": "pdf"}), target / f"analytic_{cfg.scheme}.csv"),
        write_json(summary, target / f"oracle_{cfg.scheme}.json"),
    ]
    return written, summary["pass"]
