"""Pure-numpy implementations of the hot likelihood and simulation kernels.

This module mirrors the compiled ``_kernels`` extension function for function
and is used when the extension is unavailable (or when ``PETEVT_PURE_PYTHON``
is set).  All functions assume their inputs were validated by the caller.
"""

import math

import numpy as np
from scipy.optimize import brentq

SMALL_SHAPE = 1e-8
_LOG2 = math.log(2.0)


def gpd_loglik_sum(y, scale, xi):
    """Sum of GPD log-densities of positive excesses ``y``; -inf off support."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return 0.0
    r = xi * y / scale
    if abs(xi) < SMALL_SHAPE:
        return float(-y.size * math.log(scale) - np.sum(y) / scale)
    if np.min(r) <= -1.0:
        return -math.inf
    return float(-y.size * math.log(scale) - (1.0 + 1.0 / xi) * np.sum(np.log1p(r)))


def frechet_transform(y, scale, xi, lam):
    """Map excesses to the unit Frechet scale through the semiparametric tail.

    Returns ``(lz, logj, logdens)``: log z, log dz/dx and log dF/dx, where
    F(x) = 1 - lam * (1 + xi*y/scale)**(-1/xi).  Support must be checked by
    the caller.
    """
    y = np.asarray(y, dtype=float)
    r = xi * y / scale
    if abs(xi) < SMALL_SHAPE:
        w = r
        w_over_xi = y / scale
    else:
        w = np.log1p(r)
        w_over_xi = w / xi
    logtail = math.log(lam) - w_over_xi
    tail = np.exp(logtail)
    logf = np.log1p(-tail)
    with np.errstate(divide="ignore"):
        lmlf = np.where(tail > 1e-10, np.log(-logf), logtail + 0.5 * tail)
    lz = -lmlf
    logdens = logtail - math.log(scale) - w
    logj = 2.0 * lz - logf + logdens
    return lz, logj, logdens


def _log_sum_pow(la1, la2):
    m = np.maximum(la1, la2)
    return m + np.log1p(np.exp(-np.abs(la1 - la2)))


def markov_period_loglik(lz, logj, logdens, pair_next, n_cens, weight,
                         alpha, lz_u, n00):
    """Censored logistic Markov log-likelihood of one period, exceedance part.

    Exceedances are in series order, so consecutive exceeding observations
    form the pair ``(j, j + 1)``; ``pair_next[j]`` flags such pairs.
    ``n_cens[j]`` counts the censored neighbours of exceedance ``j`` inside its
    segment, ``weight[j]`` is its signed marginal multiplicity and ``n00`` the
    number of fully censored pairs.  The constant contribution of censored
    marginals is added by the caller.
    """
    inv_a = 1.0 / alpha
    total = 0.0
    mask = np.asarray(pair_next, dtype=bool)[:-1]
    if mask.any():
        lz1 = lz[:-1][mask]
        lz2 = lz[1:][mask]
        la1 = -lz1 * inv_a
        la2 = -lz2 * inv_a
        logs = _log_sum_pow(la1, la2)
        sa = np.exp(alpha * logs)
        dens = (la1 + la2 - lz1 - lz2 - sa + (alpha - 2.0) * logs
                + np.log(sa + (1.0 - alpha) * inv_a)
                + logj[:-1][mask] + logj[1:][mask])
        total += float(np.sum(dens))
    cens = np.asarray(n_cens) > 0
    if cens.any():
        lz1 = lz[cens]
        la1 = -lz1 * inv_a
        logs = _log_sum_pow(la1, -lz_u * inv_a)
        sa = np.exp(alpha * logs)
        part = la1 - lz1 - sa + (alpha - 1.0) * logs + logj[cens]
        total += float(np.dot(n_cens[cens], part))
    if n00:
        total -= n00 * math.exp(alpha * _LOG2 - lz_u)
    total += float(np.dot(weight, logdens))
    return total


def _log_cond_cdf(v, lz1, alpha):
    # log P(Z2 <= e^v | Z1 = e^lz1) under the logistic model
    la1 = -lz1 / alpha
    la2 = -v / alpha
    m = max(la1, la2)
    logs = m + math.log1p(math.exp(-abs(la1 - la2)))
    sa = math.exp(alpha * logs)
    return -sa + math.exp(-lz1) + (alpha - 1.0) * logs + la1 + lz1


def sample_logistic_chain(u, alpha, tol=1e-10):
    """Unit Frechet logistic Markov chain driven by uniforms ``u``.

    The first state is the Frechet quantile of ``u[0]``; each later state
    inverts the conditional distribution given its predecessor at ``u[t]``.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    out = np.empty(n)
    if n == 0:
        return out
    out[0] = -1.0 / math.log(u[0])
    if alpha >= 1.0:
        out[1:] = -1.0 / np.log(u[1:])
        return out
    lz = math.log(out[0])
    for t in range(1, n):
        target = u[t]

        def f(v):
            return math.exp(_log_cond_cdf(v, lz, alpha)) - target

        lo, hi = lz - 1.0, lz + 1.0
        while f(lo) > 0.0:
            lo -= 2.0 * (hi - lo)
        while f(hi) < 0.0:
            hi += 2.0 * (hi - lo)
        v = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        if abs(f(v)) > tol:
            v = _bisect(f, lo, hi, tol)
        lz = v
        out[t] = math.exp(v)
    return out


def _bisect(f, lo, hi, tol):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol:
            return mid
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
