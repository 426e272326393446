"""Extreme value probability kernels.

Generalised Pareto and GEV distribution functions, the semiparametric
transform of threshold excesses to unit Frechet margins, and the bivariate
logistic family with its first and mixed partial derivatives.

All functions accept scalars or numpy arrays and return a float for scalar
input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels_py import SMALL_SHAPE, frechet_transform
from .errors import ParameterError

__all__ = [
    "GpdParams",
    "GevParams",
    "ThresholdModel",
    "gpd_cdf",
    "gpd_logpdf",
    "gpd_quantile",
    "gev_cdf",
    "gev_to_gpd_scale",
    "to_frechet",
    "frechet_censor_point",
    "logistic_cdf",
    "logistic_partial",
    "logistic_density",
]


def _out(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


@dataclass(frozen=True)
class GpdParams:
    """GPD for threshold excesses: ``scale`` (seconds) and ``shape``."""

    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise ParameterError(f"GPD scale must be positive and finite, got {self.scale}")
        if not math.isfinite(self.shape):
            raise ParameterError(f"GPD shape must be finite, got {self.shape}")

    @property
    def upper_endpoint(self) -> float:
        """Largest attainable excess; ``inf`` unless the shape is negative."""
        if self.shape < 0:
            return -self.scale / self.shape
        return math.inf


@dataclass(frozen=True)
class GevParams:
    location: float
    scale: float
    shape: float

    def __post_init__(self):
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise ParameterError(f"GEV scale must be positive and finite, got {self.scale}")


@dataclass(frozen=True)
class ThresholdModel:
    """Marginal tail above ``threshold``.

    ``exceed_rate`` is the probability of exceeding the threshold, so the
    implied distribution function above it is
    ``1 - exceed_rate * (1 - gpd_cdf(x - threshold))``.
    """

    threshold: float
    exceed_rate: float
    gpd: GpdParams

    def __post_init__(self):
        if not 0.0 < self.exceed_rate <= 1.0:
            raise ParameterError(
                f"exceedance rate must lie in (0, 1], got {self.exceed_rate}"
            )

    def cdf(self, x):
        """Semiparametric distribution function for ``x > threshold``."""
        y = np.asarray(x, dtype=float) - self.threshold
        return _out(1.0 - self.exceed_rate * (1.0 - np.asarray(gpd_cdf(y, self.gpd))))


def gpd_cdf(y, params: GpdParams):
    """GPD distribution function of excess ``y``.

    Negative excesses give 0; excesses beyond the upper endpoint (negative
    shape) give 1.
    """
    y = np.maximum(np.asarray(y, dtype=float), 0.0)
    s, xi = params.scale, params.shape
    if abs(xi) < SMALL_SHAPE:
        return _out(-np.expm1(-y / s))
    r = xi * y / s
    inside = r > -1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -np.expm1(-np.log1p(np.where(inside, r, 0.0)) / xi)
    return _out(np.where(inside, val, 1.0))


def gpd_logpdf(y, params: GpdParams):
    """GPD log-density of excess ``y``; ``-inf`` outside the support."""
    y = np.asarray(y, dtype=float)
    s, xi = params.scale, params.shape
    if abs(xi) < SMALL_SHAPE:
        val = -math.log(s) - y / s
        return _out(np.where(y >= 0.0, val, -np.inf))
    r = xi * y / s
    inside = (r > -1.0) & (y >= 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -math.log(s) - (1.0 + 1.0 / xi) * np.log1p(np.where(inside, r, 0.0))
    return _out(np.where(inside, val, -np.inf))


def gpd_quantile(p, params: GpdParams):
    """Inverse of :func:`gpd_cdf` for probabilities in ``[0, 1)``."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0.0) | (p >= 1.0)) or np.any(np.isnan(p)):
        raise ParameterError("GPD quantile requires probabilities in [0, 1)")
    s, xi = params.scale, params.shape
    if abs(xi) < SMALL_SHAPE:
        return _out(-s * np.log1p(-p))
    return _out(s / xi * np.expm1(-xi * np.log1p(-p)))


def gev_cdf(y, params: GevParams):
    """GEV distribution function ``exp(-(1 + xi (y - mu)/sigma)^(-1/xi))``."""
    z = (np.asarray(y, dtype=float) - params.location) / params.scale
    xi = params.shape
    if abs(xi) < SMALL_SHAPE:
        return _out(np.exp(-np.exp(-z)))
    r = xi * z
    inside = r > -1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = np.exp(-np.exp(-np.log1p(np.where(inside, r, 0.0)) / xi))
    # below the lower endpoint (xi > 0) the d.f. is 0, above the upper one 1
    return _out(np.where(inside, val, 0.0 if xi > 0 else 1.0))


def gev_to_gpd_scale(g: GevParams, u: float) -> float:
    """GPD scale for excesses of ``u`` implied by GEV block-maximum parameters."""
    s = g.scale + g.shape * (u - g.location)
    if not s > 0:
        raise ParameterError(f"implied GPD scale {s} is not positive at threshold {u}")
    return float(s)


def to_frechet(x, tm: ThresholdModel):
    """Unit Frechet value ``-1/log F(x)`` of above-threshold data ``x``.

    Sub-threshold values have no individual image; they are represented by
    :func:`frechet_censor_point`.  Values beyond the GPD upper endpoint map
    to ``inf``.
    """
    x = np.asarray(x, dtype=float)
    y = x - tm.threshold
    if np.any(y <= 0.0):
        raise ParameterError(
            "to_frechet needs values above the threshold; use frechet_censor_point"
        )
    g = tm.gpd
    y_flat = np.atleast_1d(y).ravel()
    inside = y_flat < g.upper_endpoint
    z = np.full(y_flat.shape, np.inf)
    if inside.any():
        lz, _, _ = frechet_transform(y_flat[inside], g.scale, g.shape, tm.exceed_rate)
        z[inside] = np.exp(lz)
    return _out(z.reshape(y.shape))


def frechet_censor_point(tm: ThresholdModel) -> float:
    """Frechet image ``-1/log(1 - rate)`` of the threshold itself."""
    lam = tm.exceed_rate
    if lam >= 1.0:
        raise ParameterError("censor point is degenerate when every value exceeds u")
    return -1.0 / math.log1p(-lam)


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"logistic dependence alpha must lie in (0, 1], got {alpha}")


def _logistic_parts(z1, z2, alpha):
    _check_alpha(alpha)
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if np.any(z1 <= 0.0) or np.any(z2 <= 0.0):
        raise ParameterError("logistic model needs positive Frechet arguments")
    lz1, lz2 = np.log(z1), np.log(z2)
    la1, la2 = -lz1 / alpha, -lz2 / alpha
    logs = np.logaddexp(la1, la2)
    sa = np.exp(alpha * logs)
    return lz1, lz2, la1, la2, logs, sa


def logistic_cdf(z1, z2, alpha: float):
    """Bivariate logistic d.f. ``exp(-(z1^(-1/a) + z2^(-1/a))^a)``."""
    *_, sa = _logistic_parts(z1, z2, alpha)
    return _out(np.exp(-sa))


def logistic_partial(z1, z2, alpha: float):
    """Partial derivative of :func:`logistic_cdf` in its first argument."""
    lz1, _, la1, _, logs, sa = _logistic_parts(z1, z2, alpha)
    return _out(np.exp(-sa + (alpha - 1.0) * logs + la1 - lz1))


def logistic_density(z1, z2, alpha: float):
    """Joint density: mixed second partial of :func:`logistic_cdf`."""
    lz1, lz2, la1, la2, logs, sa = _logistic_parts(z1, z2, alpha)
    c = (1.0 - alpha) / alpha
    return _out(
        np.exp(la1 + la2 - lz1 - lz2 - sa + (alpha - 2.0) * logs + np.log(sa + c))
    )
