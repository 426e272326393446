"""Synthetic negated-PET series from the logistic Markov model, theta(alpha)
by simulation, and return levels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import kernels
from ._kernels_py import SMALL_SHAPE
from .errors import ParameterError
from .evd import ThresholdModel
from .likelihood import ModelParams, PreparedSeries, scale_at
from .mcmc import make_rng
from .threshold import runs_theta

__all__ = [
    "SimSpec",
    "SimulatedSeries",
    "uniform_open",
    "simulate_logistic_chain",
    "frechet_to_data",
    "simulate_series",
    "theta_from_alpha",
    "return_level",
]

PLACEHOLDER_WIDTH = 5.0


@dataclass(frozen=True)
class SimSpec:
    """Generating model for a two-period synthetic site.

    ``n_per_period`` observations are split into days of ``day_length``
    consecutive intervals; each day is an independent chain started from
    stationarity.
    """

    n_per_period: tuple
    theta: ModelParams
    threshold: float
    exceed_rate: tuple
    seed: int = 0
    day_length: int = 72

    def __post_init__(self):
        n = tuple(int(v) for v in self.n_per_period)
        lam = tuple(float(v) for v in self.exceed_rate)
        if len(n) != 2 or min(n) < 0:
            raise ParameterError("n_per_period needs two non-negative counts")
        if len(lam) != 2 or not all(0.0 < v < 1.0 for v in lam):
            raise ParameterError("exceedance rates must lie in (0, 1)")
        if self.day_length < 1:
            raise ParameterError("day_length must be positive")
        if not 0.0 < self.theta[3] <= 1.0:
            raise ParameterError("alpha must lie in (0, 1]")
        object.__setattr__(self, "n_per_period", n)
        object.__setattr__(self, "exceed_rate", lam)
        object.__setattr__(self, "theta", ModelParams(*(float(v) for v in self.theta)))

    def threshold_model(self, t: int):
        from .evd import GpdParams

        th = self.theta
        return ThresholdModel(
            self.threshold, self.exceed_rate[t], GpdParams(scale_at(th.beta0, th.beta1, t), th.xi)
        )


@dataclass(frozen=True, eq=False)
class SimulatedSeries:
    values: np.ndarray
    period: np.ndarray
    day: np.ndarray  # day index within the study, per observation
    slot: np.ndarray  # interval index within the day
    z: np.ndarray
    spec: SimSpec

    def prepared(self) -> PreparedSeries:
        brk = np.ones(self.values.size, dtype=bool)
        brk[1:] = self.day[1:] != self.day[:-1]
        return PreparedSeries(self.values, self.period, brk, self.spec.threshold)


def uniform_open(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    return (rng.integers(0, 2**53, size=n, dtype=np.int64) + 0.5) / 2.0**53


def simulate_logistic_chain(n: int, alpha: float, seed=0) -> np.ndarray:
    """Stationary unit-Frechet logistic Markov chain of length ``n``.

    ``seed`` may be an integer, SeedSequence or a numpy Generator.
    """
    if n < 1:
        raise ParameterError("chain length must be at least 1")
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    return kernels.sample_logistic_chain(uniform_open(rng, n), float(alpha))


def frechet_to_data(z, spec: SimSpec, period, rng: Optional[np.random.Generator] = None):
    """Map Frechet values to the data scale through the inverse tail model.

    Values above the period's censor point become ``u + y`` with ``y`` the
    GPD excess; the rest become placeholders drawn uniformly below ``u``.
    """
    z = np.asarray(z, dtype=float)
    period = np.asarray(period)
    rng = make_rng(spec.seed) if rng is None else rng
    th = spec.theta
    lam = np.asarray(spec.exceed_rate)[period]
    scale = np.exp(th.beta0 + th.beta1 * period)
    zu = -1.0 / np.log1p(-lam)
    exc = z > zu
    out = spec.threshold - PLACEHOLDER_WIDTH * uniform_open(rng, z.size)
    ratio = -np.expm1(-1.0 / z[exc]) / lam[exc]  # tail probability over lambda
    if abs(th.xi) < SMALL_SHAPE:
        y = -scale[exc] * np.log(ratio)
    else:
        y = scale[exc] / th.xi * np.expm1(-th.xi * np.log(ratio))
    out[exc] = spec.threshold + y
    return out


def simulate_series(spec: SimSpec) -> SimulatedSeries:
    """Simulate both periods; day ``d`` occupies a fresh stationary chain."""
    ss = np.random.SeedSequence(spec.seed)
    chain_rng, place_rng = (make_rng(s) for s in ss.spawn(2))
    L = spec.day_length
    zs, periods, days, slots = [], [], [], []
    day0 = 0
    for t, n in enumerate(spec.n_per_period):
        n_days = -(-n // L)
        for d in range(n_days):
            m = min(L, n - d * L)
            zs.append(simulate_logistic_chain(m, spec.theta.alpha, chain_rng))
            periods.append(np.full(m, t, dtype=np.int8))
            days.append(np.full(m, day0 + d, dtype=np.int64))
            slots.append(np.arange(m, dtype=np.int64))
        day0 += n_days
    if zs:
        z = np.concatenate(zs)
        period = np.concatenate(periods)
        day = np.concatenate(days)
        slot = np.concatenate(slots)
    else:
        z = np.empty(0)
        period = np.empty(0, dtype=np.int8)
        day = slot = np.empty(0, dtype=np.int64)
    values = frechet_to_data(z, spec, period, place_rng)
    return SimulatedSeries(values, period, day, slot, z, spec)


def theta_from_alpha(alpha: float, sim_n: int = 1_000_000, u_q: float = 0.99,
                     kappa: int = 10, seed: int = 0) -> float:
    """Extremal index implied by ``alpha``: runs estimate on a simulated chain
    at its Frechet ``u_q`` quantile."""
    if sim_n < 100_000:
        raise ParameterError("sim_n must be at least 1e5")
    if not 0.0 < u_q < 1.0:
        raise ParameterError("u_q must lie in (0, 1)")
    z = simulate_logistic_chain(int(sim_n), alpha, seed)
    return runs_theta(z, -1.0 / math.log(u_q), kappa)


def return_level(m: float, tm: ThresholdModel, theta: float = 1.0) -> float:
    """Level exceeded on average once per ``m`` observations, given clustering ``theta``."""
    r = m * tm.exceed_rate * theta
    if not r > 1.0:
        raise ParameterError(f"m * lambda * theta = {r} must exceed 1 for a level above u")
    s, xi = tm.gpd.scale, tm.gpd.shape
    if abs(xi) < SMALL_SHAPE:
        return tm.threshold + s * math.log(r)
    return tm.threshold + s / xi * math.expm1(xi * math.log(r))
