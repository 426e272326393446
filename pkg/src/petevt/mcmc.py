"""Component-wise random-walk Metropolis-Hastings with pilot tuning.

Parameters flagged in ``logit`` live on (0, 1) and are proposed on the logit
scale; the acceptance ratio then carries the Jacobian ``x (1 - x)`` of the
inverse map.  Burn-in is counted in retained (post-thinning) draws, so a run
performs ``(retained_draws + burn_in) * thin`` sweeps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import EstimationError, InitializationError, ParameterError

__all__ = [
    "PARAM_NAMES",
    "McmcConfig",
    "Chain",
    "ParamSummary",
    "PosteriorSummary",
    "Diagnostics",
    "make_rng",
    "run_mh",
    "pilot_tune",
    "sample_posterior",
    "summarize",
    "autocorrelation",
    "effective_sample_size",
    "diagnostics",
]

PARAM_NAMES = ("beta0", "beta1", "xi", "alpha")
_BLOCK = 4096
_BATCH = 100


@dataclass(frozen=True)
class McmcConfig:
    retained_draws: int = 100_000
    thin: int = 10
    burn_in: int = 2000
    seed: int = 0
    pilot_iterations: int = 5000
    target_acceptance: float = 0.44

    def __post_init__(self):
        for name in ("retained_draws", "thin", "pilot_iterations"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer, got {v}")
        if int(self.burn_in) != self.burn_in or self.burn_in < 0:
            raise ParameterError(f"burn_in must be a non-negative integer, got {self.burn_in}")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ParameterError("target_acceptance must lie in (0, 1)")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an integer in [0, 2**64)")

    @property
    def raw_iterations(self) -> int:
        return (self.retained_draws + self.burn_in) * self.thin


@dataclass(frozen=True, eq=False)
class Chain:
    """Retained draws (rows) of the updated parameters (columns)."""

    draws: np.ndarray
    names: tuple
    acceptance_rate: np.ndarray
    raw_iterations: int
    log_target: np.ndarray
    proposal_sd: np.ndarray

    def __len__(self):
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]


class ParamSummary(NamedTuple):
    mean: float
    sd: float
    lo: float
    hi: float


class PosteriorSummary(dict):
    """Mapping ``name -> ParamSummary`` in parameter order."""

    @property
    def names(self) -> tuple:
        return tuple(self)


class Diagnostics(NamedTuple):
    acceptance_rate: np.ndarray
    acf: np.ndarray  # shape (n_params, max_lag), lags 1..max_lag
    ess: np.ndarray
    degenerate: np.ndarray


def make_rng(seed) -> np.random.Generator:
    """Counter-based Philox generator; ``seed`` may be an int or SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def _to_internal(x, logit):
    return [math.log(v / (1.0 - v)) if lg else v for v, lg in zip(x, logit)]


def _log_jac(v: float) -> float:
    # x = 1/(1+e^-v);  log dx/dv = log x + log(1-x)
    return -abs(v) - 2.0 * math.log1p(math.exp(-abs(v)))


def _sigmoid(v: float) -> float:
    if v >= 0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


def _sweeps(target, state, lp, scales, n_sweeps, rng, logit, active,
            record_every=0, skip=0):
    """Run ``n_sweeps`` component-wise sweeps in place of ``state``.

    Returns ``(lp, accepted, draws, lps)``; draws are recorded every
    ``record_every`` sweeps after the first ``skip`` recordings.
    """
    d = len(state)
    act = [j for j in range(d) if active[j]]
    na = len(act)
    x = [(_sigmoid(v) if logit[j] else v) for j, v in enumerate(state)]
    accepted = [0] * d
    n_rec = (n_sweeps // record_every - skip) if record_every else 0
    draws = np.empty((max(n_rec, 0), na))
    lps = np.empty(max(n_rec, 0))
    rec = 0
    since = 0
    done = 0
    while done < n_sweeps:
        m = min(_BLOCK, n_sweeps - done)
        z = rng.standard_normal((m, na)).tolist()
        lu = np.log1p(-rng.random((m, na))).tolist()  # log of U(0,1], never -inf
        for i in range(m):
            zi, lui = z[i], lu[i]
            for c in range(na):
                j = act[c]
                cur = state[j]
                prop = cur + scales[j] * zi[c]
                old_x = x[j]
                if logit[j]:
                    nx = _sigmoid(prop)
                    if not 0.0 < nx < 1.0:
                        continue
                    x[j] = nx
                    extra = _log_jac(prop) - _log_jac(cur)
                else:
                    x[j] = prop
                    extra = 0.0
                lp_new = target(x)
                if lui[c] < lp_new - lp + extra:
                    state[j] = prop
                    lp = lp_new
                    accepted[j] += 1
                else:
                    x[j] = old_x
            if record_every:
                since += 1
                if since == record_every:
                    since = 0
                    if skip:
                        skip -= 1
                    else:
                        draws[rec] = [x[j] for j in act]
                        lps[rec] = lp
                        rec += 1
        done += m
    return lp, accepted, draws, lps


def _prepare(target, init, logit, active):
    init = [float(v) for v in init]
    d = len(init)
    logit = tuple(bool(v) for v in (logit if logit is not None else [False] * d))
    active = tuple(bool(v) for v in (active if active is not None else [True] * d))
    if len(logit) != d or len(active) != d:
        raise ParameterError("logit and active masks must match the parameter count")
    for v, lg in zip(init, logit):
        if lg and not 0.0 < v < 1.0:
            raise InitializationError(f"logit-scale parameter initial value {v} outside (0, 1)")
    lp = float(target(list(init)))
    if not math.isfinite(lp):
        raise InitializationError(f"log target is not finite at the initial value {init}")
    return init, logit, active, lp


def pilot_tune(target: Callable, init: Sequence[float], cfg: McmcConfig,
               scales: Optional[Sequence[float]] = None, logit=None, active=None,
               rng: Optional[np.random.Generator] = None):
    """Adapt per-component proposal sds over ``cfg.pilot_iterations`` sweeps.

    Each batch of 100 sweeps moves ``log sd`` by ``2 (acc - target)/sqrt(1 + b/10)``.
    The result is the sd of the batch whose acceptance was closest to the
    target; a warning is issued if that batch still misses the
    ``target +/- 0.1`` band.  Returns ``(scales, final_state)``.
    """
    init, logit, active, lp = _prepare(target, init, logit, active)
    d = len(init)
    rng = make_rng(cfg.seed) if rng is None else rng
    sd = [1.0] * d if scales is None else [float(s) for s in scales]
    state = _to_internal(init, logit)
    tgt = cfg.target_acceptance
    best = list(sd)
    best_gap = [math.inf] * d
    n_batches = max(1, cfg.pilot_iterations // _BATCH)
    for b in range(n_batches):
        lp, acc, _, _ = _sweeps(target, state, lp, sd, _BATCH, rng, logit, active)
        step = 2.0 / math.sqrt(1.0 + b / 10.0)
        for j in range(d):
            if not active[j]:
                continue
            rate = acc[j] / _BATCH
            gap = abs(rate - tgt)
            if gap <= best_gap[j]:
                best_gap[j], best[j] = gap, sd[j]
            sd[j] *= math.exp(step * (rate - tgt))
    missed = [j for j in range(d) if active[j] and best_gap[j] > 0.1]
    if missed:
        warnings.warn(
            f"pilot tuning did not reach the acceptance band for components {missed}",
            RuntimeWarning,
            stacklevel=2,
        )
    final = [(_sigmoid(v) if lg else v) for v, lg in zip(state, logit)]
    return np.array(best), final


def run_mh(target: Callable, init: Sequence[float], scales: Sequence[float],
           cfg: McmcConfig, logit=None, active=None, names=None,
           rng: Optional[np.random.Generator] = None) -> Chain:
    """Component-wise normal random-walk MH with fixed proposal sds.

    ``target`` receives a list of parameters on their natural scale and
    returns the log target.  Components are updated in index order; inactive
    components are held at their initial values and not reported.
    """
    init, logit, active, lp = _prepare(target, init, logit, active)
    d = len(init)
    if len(scales) != d or any(not s > 0 for s in scales):
        raise ParameterError("need one positive proposal sd per parameter")
    names = tuple(names) if names is not None else (
        PARAM_NAMES if d == 4 else tuple(f"x{i}" for i in range(d))
    )
    rng = make_rng(cfg.seed) if rng is None else rng
    state = _to_internal(init, logit)
    n_sweeps = cfg.raw_iterations
    lp, acc, draws, lps = _sweeps(
        target, state, lp, [float(s) for s in scales], n_sweeps, rng, logit, active,
        record_every=cfg.thin, skip=cfg.burn_in,
    )
    act = [j for j in range(d) if active[j]]
    return Chain(
        draws=draws,
        names=tuple(names[j] for j in act),
        acceptance_rate=np.array([acc[j] / n_sweeps for j in act]),
        raw_iterations=n_sweeps,
        log_target=lps,
        proposal_sd=np.array([float(scales[j]) for j in act]),
    )


def sample_posterior(target: Callable, cfg: McmcConfig, init=(0.0, 0.0, 0.0, 0.5),
                     alpha_active: bool = True) -> Chain:
    """Pilot-tune then run the sampler for a ``(beta0, beta1, xi, alpha)`` target."""
    logit = (False, False, False, True)
    active = (True, True, True, alpha_active)
    rng = make_rng(cfg.seed)
    scales, state = pilot_tune(target, init, cfg, scales=(0.1, 0.1, 0.1, 0.5),
                               logit=logit, active=active, rng=rng)
    return run_mh(target, state, scales, cfg, logit=logit, active=active, rng=rng)


def summarize(c: Chain) -> PosteriorSummary:
    """Posterior mean, sd and 95% equal-tailed interval per parameter."""
    if len(c) == 0:
        raise EstimationError("cannot summarise an empty chain")
    d = c.draws
    mean = d.mean(axis=0)
    sd = d.std(axis=0, ddof=1) if len(c) > 1 else np.zeros(d.shape[1])
    lo, hi = np.quantile(d, [0.025, 0.975], axis=0, method="linear")
    return PosteriorSummary(
        (n, ParamSummary(float(mean[i]), float(sd[i]), float(lo[i]), float(hi[i])))
        for i, n in enumerate(c.names)
    )


def autocorrelation(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags ``0..max_lag`` (FFT, biased normalisation)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    y = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    if acov[0] <= 0:
        return np.ones(max_lag + 1)
    return np.clip(acov / acov[0], -1.0, 1.0)


def effective_sample_size(x) -> float:
    """Geyer initial-positive-sequence ESS."""
    x = np.asarray(x, dtype=float)
    n = x.size
    rho = autocorrelation(x, n - 1)
    if np.ptp(x) == 0:
        return 1.0
    tau = -1.0
    for k in range(0, n - 1, 2):
        g = rho[k] + rho[k + 1]
        if g <= 0:
            break
        tau += 2.0 * g
    return float(min(n, n / tau))


def diagnostics(c: Chain, max_lag: int = 50) -> Diagnostics:
    n = len(c)
    if n < 100:
        raise EstimationError(f"diagnostics need at least 100 draws, got {n}")
    acf = np.empty((len(c.names), max_lag))
    ess = np.empty(len(c.names))
    degen = np.zeros(len(c.names), dtype=bool)
    for i in range(len(c.names)):
        col = c.draws[:, i]
        degen[i] = np.ptp(col) == 0
        acf[i] = autocorrelation(col, max_lag)[1:]
        ess[i] = effective_sample_size(col)
    return Diagnostics(c.acceptance_rate.copy(), acf, ess, degen)
