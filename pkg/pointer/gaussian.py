"""
Gaussian von Neumann pointer.

The pointer state has zero mean position and momentum and is fixed by its
second moments <X^2>, <P^2> and the symmetrized correlation s = <{X, P}>.
Coupled with strength kappa, it yields the effective parameters every
Gaussian measurement depends on:

    sigma_e2  = <X^2> / kappa^2          imprecision of the energy reading
    sigma_nd2 = hbar^2 / (kappa^2 <P^2>) survival scale of coherences
    alpha     = (1 - i s / hbar) / 2
"""

import logging
from dataclasses import dataclass

import numpy as np

from config.settings import HBAR, POSITIVITY_SLACK
from quantum.errors import ConfigError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianPointer:
    var_x: float
    var_p: float
    sym_xp: float = 0.0
    kappa: float = 1.0
    hbar: float = HBAR

    def __post_init__(self):
        for name in ("var_x", "var_p", "kappa", "hbar"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"pointer {name} must be a positive number, got {value}")
        if not np.isfinite(self.sym_xp):
            raise ValidationError(f"pointer sym_xp must be finite, got {self.sym_xp}")
        bound = (self.hbar ** 2 + self.sym_xp ** 2) / 4
        if self.var_x * self.var_p < bound - POSITIVITY_SLACK:
            raise ValidationError(
                "pointer state is not positive: var_x * var_p >= (hbar^2 + sym_xp^2)/4 fails "
                f"({self.var_x * self.var_p:.6g} < {bound:.6g})"
            )

    @property
    def sigma_e2(self) -> float:
        return self.var_x / self.kappa ** 2

    @property
    def sigma_nd2(self) -> float:
        return self.hbar ** 2 / (self.kappa ** 2 * self.var_p)

    @property
    def alpha(self) -> complex:
        return complex(0.5, -self.sym_xp / (2 * self.hbar))

    @property
    def is_pure(self) -> bool:
        return abs(self.var_x * self.var_p - self.sym_xp ** 2 / 4 - self.hbar ** 2 / 4) <= 1e-12 * self.hbar ** 2

    @property
    def width(self) -> float:
        """Standard deviation of the pointer position."""
        return float(np.sqrt(self.var_x))


def make_pointer(var_x: float, var_p: float, sym_xp: float = 0.0, kappa: float = 1.0,
                 hbar: float = HBAR) -> GaussianPointer:
    return GaussianPointer(float(var_x), float(var_p), float(sym_xp), float(kappa), float(hbar))


def pure_pointer(sigma_e2: float, kappa: float = 1.0, hbar: float = HBAR) -> GaussianPointer:
    """Minimum-uncertainty pointer with imprecision sigma_e2 at coupling kappa."""
    if not sigma_e2 > 0:
        raise ValidationError(f"sigma_e2 must be > 0, got {sigma_e2}")
    var_x = sigma_e2 * kappa ** 2
    return make_pointer(var_x, hbar ** 2 / (4 * var_x), 0.0, kappa, hbar)


def effective_params(p: GaussianPointer) -> tuple[float, float, complex]:
    return p.sigma_e2, p.sigma_nd2, p.alpha


def pointer_kernel(p: GaussianPointer, x, y):
    """Position matrix elements <x|sigma|y>; broadcasts over array arguments."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diff = x - y
    shifted = (x + y) / 2 - 1j * p.sym_xp * diff / (2 * p.hbar)
    mu = p.var_p * diff ** 2 / (2 * p.hbar ** 2) + shifted ** 2 / (2 * p.var_x)
    return np.exp(-mu) / np.sqrt(2 * np.pi * p.var_x)


def pointer_from_config(spec: dict, path: str = "pointer") -> GaussianPointer:
    """
    Two accepted shapes:
        {"var_x": .., "var_p": .., "sym_xp": .., "kappa": .., "hbar": ..}
        {"sigma_e2": .., "purity": "pure"}          (kappa = 1)
    """
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")

    def number(key: str, default: float | None = None) -> float:
        value = spec.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
        return float(value)

    try:
        if "sigma_e2" in spec:
            if spec.get("purity", "pure") != "pure":
                raise ConfigError(f"{path}.purity", "only 'pure' is supported with sigma_e2")
            return pure_pointer(number("sigma_e2"), hbar=number("hbar", HBAR))
        return make_pointer(number("var_x"), number("var_p"), number("sym_xp", 0.0),
                            number("kappa", 1.0), number("hbar", HBAR))
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(path, str(e)) from e
