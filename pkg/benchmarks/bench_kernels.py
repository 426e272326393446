"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each kernel is
timed on a 25,000-observation two-period site (about 17,000 exceedances)
and the two backends' results are checked for agreement.
"""

import argparse
import timeit

import numpy as np

from petevt import _kernels_py
from petevt.likelihood import PreparedSeries

try:
    from petevt import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None


def make_series(n=25_000, seed=0):
    rng = np.random.default_rng(seed)
    values = -rng.gamma(2.0, 1.6, n)
    values = np.where(rng.random(n) < 0.68, rng.exponential(1.5, n) - 3.0, values - 3.0)
    period = np.repeat([0, 1], [n // 2, n - n // 2])
    return PreparedSeries.from_arrays(values, period, rng.random(n) < 0.014, -3.0)


def bench(fn, repeat):
    t = timeit.Timer(fn)
    number, _ = t.autorange()
    best = min(t.repeat(repeat, number)) / number
    return best * 1e6


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    s = make_series()
    lay = s.layouts[0]
    scale, xi, alpha = 1.4, 0.08, 0.5
    u = (np.arange(100_000) + 0.5) / 100_000
    np.random.default_rng(1).shuffle(u)
    print(f"series: {len(s)} observations, {s.n_exceedances()} exceedances; period-0 layout "
          f"{lay.n_obs} obs / {lay.n_exc} exceedances")
    backends = [("python", _kernels_py)] + ([("compiled", _compiled)] if _compiled else [])
    rows = {}
    for name, k in backends:
        tr = k.frechet_transform(lay.excess, scale, xi, lay.exceed_rate)
        args_m = (*tr, lay.pair_next, lay.n_cens, lay.weight, alpha, lay.log_censor, lay.n00)
        rows[name] = {
            "gpd_loglik_sum": bench(lambda: k.gpd_loglik_sum(lay.excess, scale, xi), args.repeat),
            "frechet_transform": bench(lambda: k.frechet_transform(lay.excess, scale, xi, lay.exceed_rate), args.repeat),
            "markov_period_loglik": bench(lambda: k.markov_period_loglik(*args_m), args.repeat),
            "sample_logistic_chain (1e4 steps)": bench(lambda: k.sample_logistic_chain(u[:10_000], alpha), 3),
        }
        rows[name]["_value"] = k.markov_period_loglik(*args_m)
    print(f"{'kernel':36s}" + "".join(f"{n:>14s}" for n in rows) + ("     speedup" if len(rows) == 2 else ""))
    for key in rows["python"]:
        if key.startswith("_"):
            continue
        vals = [rows[n][key] for n in rows]
        line = f"{key:36s}" + "".join(f"{v:11.1f} us" for v in vals)
        if len(vals) == 2:
            line += f"{vals[0] / vals[1]:11.1f}x"
        print(line)
    if len(rows) == 2:
        a, b = rows["python"]["_value"], rows["compiled"]["_value"]
        print(f"markov period log-likelihood: python {a:.10f}, compiled {b:.10f}, "
              f"rel. diff {abs(a - b) / abs(a):.1e}")


if __name__ == "__main__":
    main()
