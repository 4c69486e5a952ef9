"""
Verification runner: fluctuation relations, resolution criteria and oracle
comparisons selected by the config's "checks" list.

A check that raises is logged and recorded as failed; the run always
finishes and writes verify_report.json.
"""

import logging
from pathlib import Path

from experiments.commands import output_dir, oracle_comparison
from experiments.config import ExperimentConfig
from experiments.io import write_json
from fluctuation.process import canonical_pair
from fluctuation.theorems import (
    FluctuationReport,
    crooks_check,
    jarzynski_check,
    modified_crooks_check,
    modified_jarzynski,
)
from work.resolution import resolution_check

logger = logging.getLogger(__name__)


def _pair(cfg: ExperimentConfig, what: str):
    # the configured state serves as forward state; it must be Boltzmann-diagonal at beta
    return canonical_pair(cfg.protocol, cfg.require_beta(what), forward_state=cfg.state)


def _modified_jarzynski(cfg: ExperimentConfig) -> FluctuationReport:
    ptr = cfg.require_pointer("modified_jarzynski")
    result = modified_jarzynski(cfg.protocol, ptr, cfg.state, cfg.require_beta("modified_jarzynski"))
    return FluctuationReport("modified_jarzynski", result.deviation, [], result.passed,
                             {"log_lhs": result.log_lhs, "log_rhs": result.log_rhs, "lhs": result.lhs,
                              "rhs": result.rhs, "sigma_e2": ptr.sigma_e2})


def _resolution(cfg: ExperimentConfig) -> FluctuationReport:
    report = resolution_check(cfg.protocol.initial_levels, cfg.protocol.final_levels,
                              cfg.require_pointer("resolution"), cfg.state)
    consistency = report.pointer_consistency
    return FluctuationReport("resolution", max(consistency.lhs - consistency.rhs, 0.0), [],
                             consistency.holds, report.to_json())


def _oracle(cfg: ExperimentConfig, scheme: str) -> FluctuationReport:
    summary, _ = oracle_comparison(cfg, scheme)
    return FluctuationReport(f"oracle[{scheme}]", summary["l1_distance"], [], summary["pass"], summary)


def _checkers(cfg: ExperimentConfig, perturbation: float) -> dict:
    def sigma_e2(what: str) -> float:
        return cfg.require_pointer(what).sigma_e2

    return {
        "crooks": lambda: crooks_check(_pair(cfg, "crooks"), perturbation),
        "jarzynski": lambda: jarzynski_check(_pair(cfg, "jarzynski")),
        "modified_crooks": lambda: modified_crooks_check(
            _pair(cfg, "modified_crooks"), sigma_e2("modified_crooks"), "work_meter", perturbation),
        "modified_crooks_two_gaussian": lambda: modified_crooks_check(
            _pair(cfg, "modified_crooks_two_gaussian"), sigma_e2("modified_crooks_two_gaussian"),
            "two_gaussian", perturbation),
        "modified_jarzynski": lambda: _modified_jarzynski(cfg),
        "resolution": lambda: _resolution(cfg),
        "oracle_work_meter": lambda: _oracle(cfg, "work_meter"),
        "oracle_two_gaussian": lambda: _oracle(cfg, "two_gaussian"),
    }


def run_checks(cfg: ExperimentConfig, perturbation: float = 0.0) -> list[FluctuationReport]:
    checkers = _checkers(cfg, perturbation)
    reports = []
    for name in cfg.checks:
        try:
            report = checkers[name]()
        except Exception as e:
            logger.warning(f"Check {name} failed: {e}")
            report = FluctuationReport(name, float("inf"), [], False, {"error": str(e)})
        reports.append(report)
    return reports


def cmd_verify(cfg: ExperimentConfig, out_dir, perturbation: float = 0.0) -> tuple[Path, bool]:
    if perturbation:
        logger.info(f"Injecting relative perturbation {perturbation:g} into the first forward weight")
    reports = run_checks(cfg, perturbation)
    passed = all(r.passed for r in reports)
    for r in reports:
        logger.info(f"  - {r.relation}: {r.max_violation:.3e} {'pass' if r.passed else 'FAIL'}")
    data = {"pass": passed, "perturbation": perturbation, "checks": [r.to_json() for r in reports]}
    path = write_json(data, output_dir(cfg, out_dir) / "verify_report.json")
    return path, passed
