"""
Work distribution objects.

AtomDistribution holds point masses (possibly signed), GaussianMixture holds
complex-Gaussian terms

    weight * exp(log_scale - (w - center)^2 / (2 variance)) / sqrt(2 pi variance)

with complex weights and centers. Terms come in conjugate pairs, so every
evaluation is real up to rounding. log_scale carries the coherence
suppression separately from the weight, keeping terms with large imaginary
center shifts finite.
"""

import logging
from dataclasses import dataclass, field
from math import comb

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from config.settings import (
    EVAL_GRID_POINTS,
    EVAL_GRID_SIGMAS,
    FFT_SIZE,
    IMAG_RESIDUE_TOL,
    NEGATIVE_WEIGHT_TOL,
)
from quantum.errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)

_UNDERFLOW = -745.0
_CHUNK_ELEMENTS = 1 << 21


def _row_chunks(rows: int, cols: int):
    step = max(1, _CHUNK_ELEMENTS // max(1, cols))
    for start in range(0, rows, step):
        yield slice(start, min(rows, start + step))


def _conjugate_match(weights, centers, variances, log_scales, i, j, scale: float) -> np.ndarray:
    """True where term j is the complex conjugate of term i."""
    return ((np.abs(weights[i] - np.conj(weights[j])) <= 1e-10 * np.maximum(1.0, np.abs(weights[i])))
            & (np.abs(centers[i] - np.conj(centers[j])) <= 1e-10 * scale)
            & (variances[i] == variances[j])
            & (np.abs(log_scales[i] - log_scales[j]) <= 1e-12 * np.maximum(1.0, np.abs(log_scales[i]))))


def find_conjugate_partners(weights, centers, variances, log_scales) -> np.ndarray:
    """
    Index of the conjugate partner of every term, -1 where there is none.

    Terms are sorted by the real part of their center; a partner can only
    sit inside the tolerance window around it, so the sweep runs over window
    offsets rather than over all pairs.
    """
    n = len(weights)
    scale = max(1.0, float(np.max(np.abs(centers), initial=0.0)))
    order = np.argsort(centers.real, kind="stable")
    real = centers.real[order]
    lo = np.searchsorted(real, real - 1e-10 * scale, side="left")
    hi = np.searchsorted(real, real + 1e-10 * scale, side="right")
    found = np.full(n, -1)
    rows = np.arange(n)
    for offset in range(int(np.max(hi - lo, initial=0))):
        cand = lo + offset
        open_ = (found < 0) & (cand < hi)
        if not open_.any():
            break
        i, j = order[rows[open_]], order[cand[open_]]
        hit = _conjugate_match(weights, centers, variances, log_scales, i, j, scale)
        found[rows[open_][hit]] = j[hit]
    partners = np.full(n, -1)
    partners[order] = found
    return partners


def merge_atoms(positions, weights, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Chain positions closer than tol into one atom; position = cluster mean, weight = sum."""
    positions = np.asarray(positions, dtype=float).ravel()
    weights = np.asarray(weights).ravel()
    order = np.argsort(positions, kind="stable")
    positions, weights = positions[order], weights[order]
    merged_pos, merged_w = [], []
    start = 0
    for i in range(1, len(positions) + 1):
        if i == len(positions) or positions[i] - positions[i - 1] > tol:
            merged_pos.append(positions[start:i].mean())
            merged_w.append(weights[start:i].sum())
            start = i
    return np.array(merged_pos), np.array(merged_w)


@dataclass(frozen=True, eq=False)
class AtomDistribution:
    positions: np.ndarray
    weights: np.ndarray
    scheme: str = "pem"
    signed: bool = False

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        wts = np.asarray(self.weights, dtype=float)
        if pos.shape != wts.shape or pos.ndim != 1:
            raise ValidationError("atom positions and weights must be equal-length vectors")
        total = wts.sum()
        if abs(total - 1) > 1e-10:
            raise NumericalError(f"{self.scheme} atoms sum to {total!r}, expected 1")
        if not self.signed and wts.min() < -NEGATIVE_WEIGHT_TOL:
            raise NumericalError(f"{self.scheme} atoms have negative weight {wts.min():.3e}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", wts)

    @property
    def negative(self) -> bool:
        return bool(self.weights.min() < -NEGATIVE_WEIGHT_TOL)

    def as_dict(self) -> dict[float, float]:
        return {float(w): float(p) for w, p in zip(self.positions, self.weights)}

    def weight_at(self, w: float, tol: float = 1e-9) -> float:
        hits = np.abs(self.positions - w) <= tol
        return float(self.weights[hits].sum())

    def evaluate(self, w):
        """Point mass at w (atoms have no density)."""
        w = np.asarray(w, dtype=float)
        return np.vectorize(self.weight_at, otypes=[float])(w) if w.ndim else self.weight_at(float(w))

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.positions ** k))

    def mean(self) -> float:
        return self.moment(1)

    def characteristic(self, u):
        u = np.asarray(u, dtype=float)
        return np.sum(self.weights * np.exp(1j * np.multiply.outer(u, self.positions)), axis=-1)

    def smeared(self, sigma_e2: float, scheme: str | None = None) -> "GaussianMixture":
        """Convolution with N(0, sigma_e2)."""
        n = len(self.positions)
        return GaussianMixture(self.weights.astype(complex), self.positions.astype(complex),
                               np.full(n, float(sigma_e2)), scheme=scheme or f"{self.scheme}_smeared",
                               sigma_e2=sigma_e2)

    def to_json(self) -> dict:
        return {"scheme": self.scheme, "signed": self.signed,
                "atoms": [[float(w), float(p)] for w, p in zip(self.positions, self.weights)]}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"w": self.positions, "weight": self.weights})


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    weights: np.ndarray
    centers: np.ndarray
    variances: np.ndarray
    log_scales: np.ndarray | None = None
    scheme: str = "work_meter"
    sigma_e2: float | None = None
    sigma_nd2: float | None = None
    proper: bool = True              # False for limiting objects that may go negative
    check_pairs: bool = field(default=True, repr=False)
    partners: np.ndarray | None = field(default=None, repr=False)   # index of each term's conjugate

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=complex).ravel()
        centers = np.asarray(self.centers, dtype=complex).ravel()
        variances = np.asarray(self.variances, dtype=float).ravel()
        log_scales = (np.zeros(len(weights)) if self.log_scales is None
                      else np.asarray(self.log_scales, dtype=float).ravel())
        if not (len(weights) == len(centers) == len(variances) == len(log_scales)):
            raise ValidationError("mixture term arrays must have equal length")
        if np.any(variances <= 0):
            raise ValidationError("mixture variances must be > 0")
        # peak log-magnitude of each term over real w
        reach = log_scales + centers.imag ** 2 / (2 * variances)
        keep = (weights != 0) & (reach > _UNDERFLOW)
        weights, centers, variances, log_scales = weights[keep], centers[keep], variances[keep], log_scales[keep]
        if self.partners is not None:
            partners = np.asarray(self.partners, dtype=int).ravel()
            if len(partners) != len(keep):
                raise ValidationError("mixture partner index must have one entry per term")
            # conjugates share weight magnitude and reach, so they are kept or dropped together
            if not np.all(keep[partners[keep]]):
                raise NumericalError(f"{self.scheme} mixture dropped one term of a conjugate pair")
            renumber = np.cumsum(keep) - 1
            object.__setattr__(self, "partners", renumber[partners[keep]])
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "log_scales", log_scales)
        if self.check_pairs:
            self._check_conjugate_pairs()

    def _check_conjugate_pairs(self) -> None:
        w, c, v, s = self.weights, self.centers, self.variances, self.log_scales
        if self.partners is None:
            partners = find_conjugate_partners(w, c, v, s)
            missing = int(np.sum(partners < 0))
        else:
            partners = self.partners
            scale = max(1.0, float(np.max(np.abs(c), initial=0.0)))
            idx = np.arange(len(w))
            paired = (partners[partners] == idx) & _conjugate_match(w, c, v, s, idx, partners, scale)
            missing = int(np.sum(~paired))
        if missing:
            raise NumericalError(f"{self.scheme} mixture has {missing} terms without a conjugate partner")

    def __len__(self) -> int:
        return len(self.weights)

    def evaluate(self, w):
        w = np.asarray(w, dtype=float)
        flat = w.ravel()
        total = np.empty(len(flat), dtype=complex)
        magnitude = np.empty(len(flat))
        norm = np.sqrt(2 * np.pi * self.variances)
        for rows in _row_chunks(len(flat), len(self.weights)):
            z = flat[rows, None] - self.centers
            terms = self.weights * np.exp(self.log_scales - z ** 2 / (2 * self.variances)) / norm
            total[rows] = terms.sum(axis=-1)
            magnitude[rows] = np.abs(terms).sum(axis=-1)
        total, magnitude = total.reshape(w.shape), magnitude.reshape(w.shape)
        residue = np.max(np.abs(total.imag) / np.maximum(1.0, magnitude), initial=0.0)
        if residue > IMAG_RESIDUE_TOL:
            raise NumericalError(f"{self.scheme} density has imaginary residue {residue:.3e}")
        return total.real

    def total_mass(self) -> float:
        return float(np.sum(self.weights * np.exp(self.log_scales)).real)

    def moment(self, k: int) -> float:
        """E[(c + sqrt(v) Z)^k] per term, summed with weights."""
        c, v = self.centers, self.variances
        total = np.zeros(len(c), dtype=complex)
        gaussian_moment = 1.0            # (2j - 1)!!
        for j in range(k // 2 + 1):
            total += comb(k, 2 * j) * c ** (k - 2 * j) * v ** j * gaussian_moment
            gaussian_moment *= 2 * j + 1
        return float(np.sum(self.weights * np.exp(self.log_scales) * total).real)

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    def characteristic(self) -> "CharacteristicFunction":
        return CharacteristicFunction(self.weights, self.centers, self.variances, self.log_scales, self.scheme)

    def log_exponential_average(self, beta: float) -> float:
        """log <exp(-beta w)>, summed around the largest exponent."""
        exponents = self.log_scales - beta * self.centers + beta ** 2 * self.variances / 2
        shift = float(np.max(exponents.real))
        terms = self.weights * np.exp(exponents - shift)
        value = np.sum(terms)
        if abs(value.imag) > IMAG_RESIDUE_TOL * max(1.0, np.sum(np.abs(terms))):
            raise NumericalError(f"exponential average has imaginary residue {value.imag:.3e}")
        if not value.real > 0:
            raise NumericalError(f"{self.scheme} exponential average is not positive ({value.real:.3e})")
        return shift + float(np.log(value.real))

    def exponential_average(self, beta: float) -> float:
        """<exp(-beta w)>; inf when it overflows, use log_exponential_average then."""
        return float(np.exp(self.log_exponential_average(beta)))

    def support(self, sigmas: float = EVAL_GRID_SIGMAS) -> tuple[float, float]:
        width = sigmas * np.sqrt(self.variances.max())
        return float(self.centers.real.min() - width), float(self.centers.real.max() + width)

    def grid(self, n_points: int = EVAL_GRID_POINTS, sigmas: float = EVAL_GRID_SIGMAS) -> np.ndarray:
        lo, hi = self.support(sigmas)
        return np.linspace(lo, hi, n_points)

    def quadrature_mass(self, n_points: int = EVAL_GRID_POINTS) -> float:
        w = self.grid(n_points)
        return float(trapezoid(self.evaluate(w), w))

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "sigma_e2": self.sigma_e2,
            "sigma_nd2": self.sigma_nd2,
            "terms": [
                {"weight": [float(wt.real), float(wt.imag)], "center": [float(c.real), float(c.imag)],
                 "variance": float(v), "log_scale": float(s)}
                for wt, c, v, s in zip(self.weights, self.centers, self.variances, self.log_scales)
            ],
        }

    def to_frame(self, w=None) -> pd.DataFrame:
        w = self.grid() if w is None else np.asarray(w, dtype=float)
        return pd.DataFrame({"w": w, "pdf": self.evaluate(w)})


@dataclass(frozen=True, eq=False)
class CharacteristicFunction:
    weights: np.ndarray
    centers: np.ndarray
    variances: np.ndarray
    log_scales: np.ndarray
    scheme: str = "work_meter"

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        out = np.empty(len(flat), dtype=complex)
        for rows in _row_chunks(len(flat), len(self.weights)):
            uu = flat[rows, None]
            exponent = self.log_scales + 1j * uu * self.centers - self.variances * uu ** 2 / 2
            out[rows] = np.sum(self.weights * np.exp(exponent), axis=-1)
        return out.reshape(u.shape) if u.ndim else out[0]


def invert_characteristic(cf: CharacteristicFunction, n: int = FFT_SIZE,
                          sigmas: float = 12.0) -> tuple[np.ndarray, np.ndarray]:
    """
    pdf(w) = (1/2pi) int exp(-i u w) G(u) du on an n-point FFT grid.

    The w grid spans the centers plus `sigmas` widths; the u grid is its
    reciprocal, u_k = u0 + k du with du dw = 2 pi / n.
    """
    width = np.sqrt(cf.variances.min())
    lo = cf.centers.real.min() - sigmas * np.sqrt(cf.variances.max())
    hi = cf.centers.real.max() + sigmas * np.sqrt(cf.variances.max())
    dw = (hi - lo) / n
    if dw > 0.3 * width:
        logger.warning(f"FFT grid step {dw:.3g} is coarse against width {width:.3g}; raise FFT_SIZE")
    du = 2 * np.pi / (n * dw)
    u0 = -du * n / 2
    k = np.arange(n)
    u = u0 + k * du
    w = lo + k * dw
    spectrum = np.fft.fft(cf(u) * np.exp(-1j * k * du * lo))
    pdf = du / (2 * np.pi) * np.exp(-1j * u0 * w) * spectrum
    return w, pdf.real


def evaluate(dist, w):
    return dist.evaluate(w)


def moments(dist, k: int) -> float:
    return dist.moment(k)
