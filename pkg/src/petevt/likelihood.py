"""Log-likelihoods for the three dependence treatments, the prior, and the
unnormalised log-posterior.

The Markov likelihood works period by period.  The period boundary is always
a chain break, so the total is a sum of per-period terms, each depending on
``(scale_t, xi, alpha)`` only.  :class:`LogPosterior` caches those terms,
which makes a component-wise sampler update of ``beta1`` or ``alpha`` cost a
fraction of a full evaluation.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ._backend import kernels
from .errors import DataValidationError, ParameterError
from .threshold import decluster

__all__ = [
    "MODES",
    "ModelParams",
    "PriorSpec",
    "PreparedSeries",
    "PeriodLayout",
    "scale_at",
    "loglik_independent",
    "loglik_declustered",
    "loglik_markov",
    "log_prior",
    "log_posterior",
    "LogPosterior",
]

MODES = ("ignore", "decluster", "markov")
_LOG_2PI = math.log(2.0 * math.pi)


class ModelParams(NamedTuple):
    """Parameter vector ``(beta0, beta1, xi, alpha)``."""

    beta0: float
    beta1: float
    xi: float
    alpha: float = 0.5


def scale_at(beta0: float, beta1: float, t) -> float:
    """GPD scale ``exp(beta0 + beta1 * t)`` for period indicator ``t``."""
    val = np.exp(beta0 + beta1 * np.asarray(t, dtype=float))
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class PriorSpec:
    """Independent normal priors (mean, variance) on beta0, beta1, xi; U(0,1) on alpha."""

    beta0_mean: float = 0.0
    beta0_var: float = 10.0
    beta1_mean: float = 0.0
    beta1_var: float = 10.0
    xi_mean: float = 0.0
    xi_var: float = 100.0

    def __post_init__(self):
        for name in ("beta0_var", "beta1_var", "xi_var"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParameterError(f"prior {name} must be positive, got {v}")

    @property
    def means(self) -> np.ndarray:
        return np.array([self.beta0_mean, self.beta1_mean, self.xi_mean])

    @property
    def variances(self) -> np.ndarray:
        return np.array([self.beta0_var, self.beta1_var, self.xi_var])


def log_prior(theta, p: PriorSpec = PriorSpec(), include_alpha: bool = True) -> float:
    """Log prior density.  ``alpha`` must lie in (0, 1]; the boundary point
    alpha = 1 (independence) is admitted so the limit is reachable."""
    b0, b1, xi, al = (float(v) for v in theta)
    if include_alpha and not 0.0 < al <= 1.0:
        return -math.inf
    m, v = p.means, p.variances
    x = np.array([b0, b1, xi])
    return float(-0.5 * np.sum(_LOG_2PI + np.log(v) + (x - m) ** 2 / v))


@dataclass(frozen=True)
class PeriodLayout:
    """Likelihood bookkeeping for the observations of one period.

    Exceedances are kept in series order.  ``pair_next[j]`` flags that
    exceedance ``j`` and ``j + 1`` are adjacent in one segment, ``n_cens[j]``
    counts censored neighbours of exceedance ``j`` and ``weight[j]`` is its
    signed marginal multiplicity (-1 interior, +1 singleton segment, else 0).
    ``n00`` is the number of fully censored pairs and ``c0`` the net
    multiplicity of censored marginals, each worth ``log(1 - lambda)``.
    """

    n_obs: int
    excess: np.ndarray
    pair_next: np.ndarray
    n_cens: np.ndarray
    weight: np.ndarray
    n00: int
    c0: int
    exceed_rate: float

    @property
    def n_exc(self) -> int:
        return self.excess.size

    @property
    def max_excess(self) -> float:
        return float(self.excess.max()) if self.excess.size else 0.0

    @property
    def log_censor(self) -> float:
        """``log z_u`` for the period's censor point."""
        lam = self.exceed_rate
        if lam <= 0.0 or lam >= 1.0:
            return 0.0  # unused: no exceedances, or nothing censored
        return -math.log(-math.log1p(-lam))


def _build_layout(excess_flag, seg_start, y, lam) -> PeriodLayout:
    n = excess_flag.size
    ex = excess_flag
    seg_end = np.empty(n, dtype=bool)
    if n:
        seg_end[:-1] = seg_start[1:]
        seg_end[-1] = True
    linked = ~seg_end  # i and i+1 in one segment
    cens = ~ex
    # neighbour counts inside segments
    prev_c = np.zeros(n, dtype=np.int64)
    next_c = np.zeros(n, dtype=np.int64)
    prev_c[1:] = (linked[:-1] & cens[:-1])
    next_c[:-1] = (linked[:-1] & cens[1:])
    next_e = np.zeros(n, dtype=bool)
    next_e[:-1] = linked[:-1] & ex[1:]
    # marginal multiplicity: -1 interior, +1 singleton
    mult = np.zeros(n, dtype=np.int64)
    interior = ~seg_start & ~seg_end
    mult[interior] = -1
    mult[seg_start & seg_end] = 1
    n00 = int(np.count_nonzero(linked[:-1] & cens[:-1] & cens[1:])) if n else 0
    c0 = int(mult[cens].sum())
    return PeriodLayout(
        n_obs=n,
        excess=np.ascontiguousarray(y[ex], dtype=float),
        pair_next=next_e[ex].astype(float),
        n_cens=(prev_c + next_c)[ex].astype(float),
        weight=mult[ex].astype(float),
        n00=n00,
        c0=c0,
        exceed_rate=lam,
    )


@dataclass(frozen=True, eq=False)
class PreparedSeries:
    """A site's negated-PET series ready for likelihood evaluation.

    ``break_before[i]`` marks a gap immediately before observation ``i``.  The
    start of each period is always a break.  Exceedance rates are the
    empirical per-period fractions of values above ``threshold``.
    """

    values: np.ndarray
    period: np.ndarray
    break_before: np.ndarray
    threshold: float
    exceed: np.ndarray = field(init=False)
    exceed_rate: tuple = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        t = np.asarray(self.period)
        b = np.array(self.break_before, dtype=bool)
        if v.ndim != 1 or t.shape != v.shape or b.shape != v.shape:
            raise DataValidationError("values, period and break flags must be aligned 1-d arrays")
        if not np.all(np.isfinite(v)):
            raise DataValidationError("series values must be finite")
        if not np.all((t == 0) | (t == 1)):
            raise DataValidationError("period indicator must be 0 or 1")
        t = t.astype(np.int8)
        if np.any(np.diff(t) < 0):
            raise DataValidationError("before-period observations must precede after-period ones")
        if v.size:
            b[0] = True
            b[1:] |= t[1:] != t[:-1]
        ex = v > self.threshold
        rates = []
        for k in (0, 1):
            m = t == k
            rates.append(float(ex[m].mean()) if m.any() else math.nan)
        for arr in (v, t, b, ex):
            arr.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "period", t)
        object.__setattr__(self, "break_before", b)
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "exceed", ex)
        object.__setattr__(self, "exceed_rate", tuple(rates))

    @classmethod
    def from_arrays(cls, values, period=None, break_before=None, threshold: float = 0.0):
        values = np.asarray(values, dtype=float)
        if period is None:
            period = np.zeros(values.size, dtype=np.int8)
        if break_before is None:
            break_before = np.zeros(values.size, dtype=bool)
        return cls(values, np.asarray(period), np.asarray(break_before, dtype=bool), threshold)

    def __len__(self):
        return self.values.size

    def n_exceedances(self, t: Optional[int] = None) -> int:
        if t is None:
            return int(self.exceed.sum())
        return int(self.exceed[self.period == t].sum())

    def excesses(self, t: int) -> np.ndarray:
        m = (self.period == t) & self.exceed
        return np.ascontiguousarray(self.values[m] - self.threshold)

    def peak_excesses(self, kappa: int) -> tuple:
        """Per-period cluster-peak excesses from runs declustering."""
        cs = decluster(self.values, self.threshold, kappa, self.break_before)
        idx = cs.peak_indices
        exc = cs.peak_excesses
        return tuple(np.ascontiguousarray(exc[self.period[idx] == k]) for k in (0, 1))

    @cached_property
    def layouts(self) -> tuple:
        out = []
        for k in (0, 1):
            m = self.period == k
            y = self.values[m] - self.threshold
            out.append(_build_layout(self.exceed[m], self.break_before[m], y, self.exceed_rate[k]))
        return tuple(out)


def _gpd_sum(y: np.ndarray, scale: float, xi: float) -> float:
    if y.size == 0:
        return 0.0
    return float(kernels.gpd_loglik_sum(y, scale, xi))


def loglik_independent(beta0: float, beta1: float, xi: float, s: PreparedSeries) -> float:
    """GPD log-likelihood treating every exceedance as independent."""
    return loglik_declustered(beta0, beta1, xi, (s.excesses(0), s.excesses(1)))


def loglik_declustered(beta0: float, beta1: float, xi: float, peaks: Sequence) -> float:
    """GPD log-likelihood of per-period peak excesses ``(peaks_t0, peaks_t1)``."""
    total = 0.0
    for t, y in enumerate(peaks):
        y = np.ascontiguousarray(y, dtype=float)
        if y.size:
            total += _gpd_sum(y, scale_at(beta0, beta1, t), xi)
    return total


def _outside_support(lay: PeriodLayout, scale: float, xi: float) -> bool:
    return xi < 0 and lay.n_exc > 0 and lay.max_excess * (-xi) >= scale


def _period_transform(lay: PeriodLayout, scale: float, xi: float):
    return kernels.frechet_transform(lay.excess, scale, xi, lay.exceed_rate)


def _period_markov(lay: PeriodLayout, tr, alpha: float) -> float:
    if lay.n_obs == 0 or lay.n_exc == 0:
        # all censored with lambda = 0: every pair and marginal has probability 1
        return 0.0
    lz, logj, logd = tr
    val = kernels.markov_period_loglik(
        lz, logj, logd, lay.pair_next, lay.n_cens, lay.weight,
        alpha, lay.log_censor, lay.n00,
    )
    if lay.c0:
        val += lay.c0 * math.log1p(-lay.exceed_rate)
    return float(val)


def _check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"logistic dependence alpha must lie in (0, 1], got {alpha}")


def loglik_markov(theta, s: PreparedSeries) -> float:
    """Censored first-order logistic Markov chain log-likelihood.

    Each unbroken segment contributes its pairwise joint terms minus the
    marginals of its interior points; a single-observation segment
    contributes its marginal.  Returns ``-inf`` when an excess lies beyond
    the GPD upper endpoint.
    """
    b0, b1, xi, al = (float(v) for v in theta)
    _check_alpha(al)
    total = 0.0
    for t, lay in enumerate(s.layouts):
        scale = math.exp(b0 + b1 * t)
        if _outside_support(lay, scale, xi):
            return -math.inf
        total += _period_markov(lay, _period_transform(lay, scale, xi), al)
    return total


class _Lru:
    def __init__(self, size: int):
        self.size = size
        self.data: OrderedDict = OrderedDict()

    def get(self, key):
        v = self.data.get(key)
        if v is not None:
            self.data.move_to_end(key)
        return v

    def put(self, key, value):
        self.data[key] = value
        if len(self.data) > self.size:
            self.data.popitem(last=False)


class LogPosterior:
    """Callable unnormalised log-posterior ``theta -> float`` for one mode.

    ``theta`` is ``(beta0, beta1, xi, alpha)``; alpha is ignored outside
    markov mode.  Per-period Markov terms are memoised on
    ``(scale, xi, alpha)`` and Frechet transforms on ``(scale, xi)``, so
    evaluating a proposal that changes only ``beta1`` or ``alpha`` reuses the
    unchanged work.  Instances hold mutable caches: give each chain its own.
    """

    def __init__(self, series: PreparedSeries, prior: PriorSpec = PriorSpec(),
                 mode: str = "markov", kappa: int = 10, cache_size: int = 8):
        if mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
        self.series = series
        self.prior = prior
        self.mode = mode
        self.kappa = kappa
        if mode == "ignore":
            self._data = (series.excesses(0), series.excesses(1))
        elif mode == "decluster":
            self._data = series.peak_excesses(kappa)
        self._tr = [_Lru(cache_size), _Lru(cache_size)]
        self._ll = [_Lru(2 * cache_size), _Lru(2 * cache_size)]

    @property
    def n_contributions(self) -> int:
        """Number of GPD density terms in ignore/decluster mode."""
        if self.mode == "markov":
            return len(self.series)
        return sum(y.size for y in self._data)

    def loglik(self, theta) -> float:
        b0, b1, xi, al = (float(v) for v in theta)
        if self.mode != "markov":
            return loglik_declustered(b0, b1, xi, self._data)
        if not 0.0 < al <= 1.0:
            return -math.inf
        total = 0.0
        for t, lay in enumerate(self.series.layouts):
            scale = math.exp(b0 + b1 * t)
            key = (scale, xi, al)
            v = self._ll[t].get(key)
            if v is None:
                if _outside_support(lay, scale, xi):
                    v = -math.inf
                else:
                    tr = self._tr[t].get(key[:2])
                    if tr is None:
                        tr = _period_transform(lay, scale, xi)
                        self._tr[t].put(key[:2], tr)
                    v = _period_markov(lay, tr, al)
                self._ll[t].put(key, v)
            total += v
        return total

    def __call__(self, theta) -> float:
        lp = log_prior(theta, self.prior, include_alpha=self.mode == "markov")
        if lp == -math.inf:
            return lp
        ll = self.loglik(theta)
        if math.isnan(ll):
            return -math.inf
        return lp + ll


def log_posterior(theta, s: PreparedSeries, p: PriorSpec = PriorSpec(),
                  mode: str = "markov", kappa: int = 10) -> float:
    """One-off log-posterior evaluation; use :class:`LogPosterior` in loops."""
    return LogPosterior(s, p, mode, kappa)(theta)
