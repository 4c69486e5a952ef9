"""
Experiment config files.

A config is one JSON object:

    {
      "system": {
        "two_level": {"p": 0.7, "q_re": 0.458, "q_im": 0, "eps_i": 1, "eps_f": 2}
      } | {
        "hamiltonians": {"initial": M | "file.json", "final": M | "file.json"},
        "schedule": [{"hamiltonian": M | "file.json", "duration": t}, ...],   optional
        "hbar": 1.0,                                                          optional
        "initial_state": M | "file.json" | {"canonical": beta}
      },
      "pointer": {"var_x": .., "var_p": .., "sym_xp": .., "kappa": ..} | {"sigma_e2": .., "purity": "pure"},
      "scheme": "pem" | "two_gaussian" | "work_meter" | "imprecise" | "tmh",
      "output": {"grid": {"w_min": .., "w_max": .., "n_points": ..}, "format": "csv" | "json", "path": "name"},
      "beta": 1.0,
      "checks": ["crooks", "modified_jarzynski", ...],
      "sweep": {"sigma_e2": [..]} | {"sigma_e2": {"log_min": -6, "log_max": 4, "points": 41}},
      "oracle": {"n_points": 16384, "half_width": 20.0}
    }

M is a list of rows of [re, im] pairs (plain numbers are read as real).
Every problem is reported as a ConfigError prefixed with the field path.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from config.settings import EVAL_GRID_POINTS, HBAR, ORACLE_GRID_POINTS
from experiments.spin_quench import TwoLevelParams, two_level_quench
from pointer.gaussian import GaussianPointer, pointer_from_config
from quantum.dynamics import Protocol, Schedule, sudden_quench
from quantum.errors import ConfigError, ValidationError
from quantum.operators import DensityMatrix, HermitianOperator, canonical_state, matrix_from_json

logger = logging.getLogger(__name__)

SCHEMES = ("pem", "two_gaussian", "work_meter", "imprecise", "tmh")
CHECKS = ("crooks", "jarzynski", "modified_crooks", "modified_crooks_two_gaussian",
          "modified_jarzynski", "resolution", "oracle_work_meter", "oracle_two_gaussian")
DEFAULT_CHECKS = ("crooks", "jarzynski", "modified_crooks", "modified_jarzynski")
_TOP_LEVEL = {"system", "pointer", "scheme", "output", "beta", "checks", "sweep", "oracle"}
_MISSING = object()


@dataclass
class OutputSpec:
    w_min: float | None = None
    w_max: float | None = None
    n_points: int = EVAL_GRID_POINTS
    format: str = "csv"
    path: str | None = None             # subdirectory under --out

    def grid(self, default: tuple[float, float]) -> np.ndarray:
        lo = default[0] if self.w_min is None else self.w_min
        hi = default[1] if self.w_max is None else self.w_max
        return np.linspace(lo, hi, self.n_points)


@dataclass
class OracleSpec:
    n_points: int = ORACLE_GRID_POINTS
    half_width: float | None = None     # None: sized from the spectrum and pointer width


@dataclass
class ExperimentConfig:
    protocol: Protocol
    state: DensityMatrix
    pointer: GaussianPointer | None = None
    scheme: str = "work_meter"
    output: OutputSpec = field(default_factory=OutputSpec)
    beta: float | None = None
    checks: tuple = DEFAULT_CHECKS
    sweep: np.ndarray | None = None
    oracle: OracleSpec = field(default_factory=OracleSpec)
    two_level: TwoLevelParams | None = None
    source: Path | None = None

    def require_pointer(self, what: str) -> GaussianPointer:
        if self.pointer is None:
            raise ConfigError("pointer", f"required by {what}")
        return self.pointer

    def require_beta(self, what: str) -> float:
        if self.beta is None:
            raise ConfigError("beta", f"required by {what}")
        return self.beta


# ---- Field helpers ----

def _object(data, path: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    return data


def _number(data: dict, key: str, path: str, default=_MISSING, positive: bool = False) -> float:
    value = data.get(key, default)
    if value is _MISSING:
        raise ConfigError(f"{path}.{key}", "required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {value}")
    return float(value)


def _integer(data: dict, key: str, path: str, default: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 2:
        raise ConfigError(f"{path}.{key}", f"expected an integer >= 2, got {value!r}")
    return value


def _choice(value, options, path: str) -> str:
    if value not in options:
        raise ConfigError(path, f"expected one of {', '.join(options)}, got {value!r}")
    return value


def _matrix(value, path: str, base: Path | None):
    """Inline rows, or a path (relative to the config file) to a JSON file holding them."""
    if isinstance(value, str):
        file = (base / value) if base else Path(value)
        if not file.is_file():
            raise ConfigError(path, f"referenced file {file} does not exist")
        try:
            value = json.loads(file.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(path, f"{file} is not valid JSON: {e}") from e
    try:
        return matrix_from_json(value, path)
    except ValidationError as e:
        raise ConfigError(path, str(e)) from e


def _hamiltonian(value, path: str, base: Path | None) -> HermitianOperator:
    try:
        return HermitianOperator(_matrix(value, path, base))
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(path, str(e)) from e


# ---- Sections ----

def _two_level(data: dict, path: str) -> TwoLevelParams:
    data = _object(data, path)
    defaults = TwoLevelParams()
    return TwoLevelParams(
        p=_number(data, "p", path, defaults.p),
        q_re=_number(data, "q_re", path, defaults.q_re),
        q_im=_number(data, "q_im", path, defaults.q_im),
        eps_i=_number(data, "eps_i", path, defaults.eps_i, positive=True),
        eps_f=_number(data, "eps_f", path, defaults.eps_f, positive=True),
    )


def _system(data, base: Path | None) -> tuple[Protocol, DensityMatrix, TwoLevelParams | None, float | None]:
    """Returns the protocol, the initial state, two-level params if used, and beta of a canonical state."""
    data = _object(data, "system")
    if "two_level" in data:
        params = _two_level(data["two_level"], "system.two_level")
        try:
            protocol, rho = two_level_quench(params.p, params.q, params.eps_i, params.eps_f)
        except ValidationError as e:
            raise ConfigError("system.two_level", str(e)) from e
        return protocol, rho, params, None

    hams = _object(data.get("hamiltonians"), "system.hamiltonians")
    for key in ("initial", "final"):
        if key not in hams:
            raise ConfigError(f"system.hamiltonians.{key}", "required")
    initial = _hamiltonian(hams["initial"], "system.hamiltonians.initial", base)
    final = _hamiltonian(hams["final"], "system.hamiltonians.final", base)
    hbar = _number(data, "hbar", "system", HBAR, positive=True)

    try:
        if "schedule" in data:
            segments = data["schedule"]
            if not isinstance(segments, list):
                raise ConfigError("system.schedule", "expected a list of segments")
            parsed = []
            for k, seg in enumerate(segments):
                seg_path = f"system.schedule[{k}]"
                seg = _object(seg, seg_path)
                parsed.append((_hamiltonian(seg.get("hamiltonian"), f"{seg_path}.hamiltonian", base),
                               _number(seg, "duration", seg_path, positive=True)))
            protocol = Protocol.from_schedule(Schedule(tuple(parsed), hbar=hbar, dim=initial.dim), initial, final)
        else:
            protocol = sudden_quench(initial, final, hbar)
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError("system", str(e)) from e

    state = data.get("initial_state", _MISSING)
    if state is _MISSING:
        raise ConfigError("system.initial_state", "required")
    beta = None
    try:
        if isinstance(state, dict):
            beta = _number(state, "canonical", "system.initial_state")
            if beta < 0:
                raise ConfigError("system.initial_state.canonical", f"must be >= 0, got {beta}")
            rho = canonical_state(initial, beta)
        else:
            rho = DensityMatrix(_matrix(state, "system.initial_state", base))
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError("system.initial_state", str(e)) from e
    if rho.dim != protocol.dim:
        raise ConfigError("system.initial_state", f"dimension {rho.dim} does not match Hamiltonians ({protocol.dim})")
    return protocol, rho, None, beta


def _output(data) -> OutputSpec:
    data = _object(data, "output")
    spec = OutputSpec(format=_choice(data.get("format", "csv"), ("csv", "json"), "output.format"))
    if "path" in data:
        if not isinstance(data["path"], str) or not data["path"]:
            raise ConfigError("output.path", "expected a non-empty string")
        spec.path = data["path"]
    if "grid" in data:
        grid = _object(data["grid"], "output.grid")
        spec.w_min = _number(grid, "w_min", "output.grid")
        spec.w_max = _number(grid, "w_max", "output.grid")
        spec.n_points = _integer(grid, "n_points", "output.grid", EVAL_GRID_POINTS)
        if not spec.w_max > spec.w_min:
            raise ConfigError("output.grid", f"w_max must exceed w_min ({spec.w_min} >= {spec.w_max})")
    return spec


def _sweep(data) -> np.ndarray:
    data = _object(data, "sweep")
    values = data.get("sigma_e2")
    if isinstance(values, dict):
        lo = _number(values, "log_min", "sweep.sigma_e2")
        hi = _number(values, "log_max", "sweep.sigma_e2")
        return np.logspace(lo, hi, _integer(values, "points", "sweep.sigma_e2", 41))
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.sigma_e2", "expected a non-empty list or a log range")
    for k, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"sweep.sigma_e2[{k}]", f"expected a positive number, got {v!r}")
    return np.array(values, dtype=float)


def _checks(data) -> tuple:
    if not isinstance(data, list) or not data:
        raise ConfigError("checks", "expected a non-empty list")
    return tuple(_choice(c, CHECKS, f"checks[{k}]") for k, c in enumerate(data))


def _oracle(data) -> OracleSpec:
    data = _object(data, "oracle")
    n = _integer(data, "n_points", "oracle", ORACLE_GRID_POINTS)
    if n & (n - 1):
        raise ConfigError("oracle.n_points", f"must be a power of two, got {n}")
    half = data.get("half_width")
    if half is not None:
        half = _number(data, "half_width", "oracle", positive=True)
    return OracleSpec(n, half)


def parse_config(data, source: Path | None = None) -> ExperimentConfig:
    data = _object(data, "config")
    unknown = sorted(set(data) - _TOP_LEVEL)
    if unknown:
        raise ConfigError(unknown[0], f"unknown field (expected one of {', '.join(sorted(_TOP_LEVEL))})")
    if "system" not in data:
        raise ConfigError("system", "required")
    base = source.parent if source else None
    protocol, rho, two_level, canonical_beta = _system(data["system"], base)

    cfg = ExperimentConfig(protocol, rho, two_level=two_level, source=source)
    if "pointer" in data:
        cfg.pointer = pointer_from_config(data["pointer"])
    cfg.scheme = _choice(data.get("scheme", "work_meter"), SCHEMES, "scheme")
    if "output" in data:
        cfg.output = _output(data["output"])
    cfg.beta = canonical_beta
    if "beta" in data:
        cfg.beta = _number(data, "beta", "config")
        if cfg.beta < 0:
            raise ConfigError("beta", f"must be >= 0, got {cfg.beta}")
    if "checks" in data:
        cfg.checks = _checks(data["checks"])
    if "sweep" in data:
        cfg.sweep = _sweep(data["sweep"])
    if "oracle" in data:
        cfg.oracle = _oracle(data["oracle"])
    logger.info(f"Config: dim={protocol.dim}, scheme={cfg.scheme}, pointer={'yes' if cfg.pointer else 'no'}")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"{path} is not valid JSON: {e}") from e
    return parse_config(data, path)
