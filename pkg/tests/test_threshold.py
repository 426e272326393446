import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petevt.errors import EstimationError, ParameterError
from petevt.threshold import (
    decluster,
    default_mrl_grid,
    extract_excesses,
    mrl_curve,
    runs_theta,
)


def brute_clusters(data, u, kappa, breaks=None):
    """Sequential scan written independently of the vectorized version."""
    out = []
    current = None
    below = 0
    for i, x in enumerate(data):
        if breaks is not None and breaks[i] and current is not None:
            out.append(current)
            current = None
        if x > u:
            if current is None:
                current = [i, i, i, x, 1]
            else:
                current[1] = i
                current[4] += 1
                if x > current[3]:
                    current[2], current[3] = i, x
            below = 0
        else:
            below += 1
            if current is not None and below >= kappa:
                out.append(current)
                current = None
    if current is not None:
        out.append(current)
    return [tuple(c) for c in out]


def as_tuples(cs):
    return [(c.start, c.end, c.peak_index, c.peak_value, c.size) for c in cs.clusters]


def test_mrl_hand_example():
    (pt,) = mrl_curve([1, 2, 3, 4], [2.5])
    assert pt.mean_excess == pytest.approx(1.0)
    assert pt.n_excess == 2


def test_mrl_below_minimum_and_above_maximum():
    data = np.array([3.0, 5.0, 9.0])
    lo, hi = mrl_curve(data, [1.0, 10.0])
    assert lo.mean_excess == pytest.approx(data.mean() - 1.0)
    assert hi.n_excess == 0 and hi.mean_excess is None and hi.ci_halfwidth == 0.0


def test_mrl_single_point_matches_direct_mean():
    rng = np.random.default_rng(3)
    data = rng.normal(size=500)
    (pt,) = mrl_curve(data, [0.4])
    exc = data[data > 0.4] - 0.4
    assert pt.mean_excess == pytest.approx(exc.mean(), rel=1e-14)
    assert pt.ci_halfwidth == pytest.approx(1.96 * exc.std(ddof=1) / np.sqrt(exc.size))


def test_mrl_exponential_is_flat():
    rng = np.random.default_rng(2024)
    data = rng.exponential(size=100_000)
    grid = np.linspace(0.0, 2.0, 41)
    pts = mrl_curve(data, grid)
    slope = np.polyfit(grid, [p.mean_excess for p in pts], 1)[0]
    assert abs(slope) < 0.05


def test_mrl_empty_and_bad_grid():
    assert mrl_curve([], [1.0]) == []
    with pytest.raises(ParameterError):
        mrl_curve([1.0, 2.0], [2.0, 1.0])


def test_default_grid():
    data = np.arange(1000.0)
    grid = default_mrl_grid(data)
    assert grid.size == 200
    assert grid[0] == pytest.approx(np.percentile(data, 50))
    assert grid[-1] == pytest.approx(np.percentile(data, 99))


def test_extract_excesses():
    idx, exc = extract_excesses([1, 5, 3], 2)
    assert idx.tolist() == [1, 2] and exc.tolist() == [3, 1]
    idx, exc = extract_excesses([1, 0, -3], 2)
    assert idx.size == 0 and exc.size == 0


def test_decluster_example():
    data = [12, 3, 11, 2, 2, 13, 12, 1]
    cs = decluster(data, 10, 2)
    assert len(cs) == 2
    assert cs.peak_values.tolist() == [12, 13]
    assert cs.n_exceedances == 4
    assert runs_theta(data, 10, 2) == 0.5


def test_decluster_kappa_one_isolated():
    data = [11, 0, 12, 0, 13, 0, 14]
    cs = decluster(data, 10, 1)
    assert len(cs) == 4
    assert runs_theta(data, 10, 1) == 1.0


def test_decluster_tie_earliest_and_bad_kappa():
    cs = decluster([0, 5, 5, 0], 1, 3)
    assert cs.clusters[0].peak_index == 1
    with pytest.raises(ParameterError):
        decluster([1, 2], 0, 0)


def test_breaks_terminate_clusters():
    data = [5, 5, 5, 5]
    breaks = [False, False, True, False]
    cs = decluster(data, 1, 10, breaks)
    assert [(c.start, c.end) for c in cs.clusters] == [(0, 1), (2, 3)]


def test_runs_theta_no_exceedances():
    with pytest.raises(EstimationError):
        runs_theta([1, 2, 3], 10, 2)


def test_runs_theta_iid_uniform():
    # for iid data a cluster closes after an exceedance iff the next kappa
    # values are all sub-threshold, so E[theta_hat] is close to (1 - p)**kappa
    rng = np.random.default_rng(5)
    x = rng.random(200_000)
    theta = runs_theta(x, 0.95, 5)
    assert theta == pytest.approx(0.95**5, abs=0.02)
    assert runs_theta(x, 0.95, 1) == pytest.approx(0.95, abs=0.01)


def test_decluster_matches_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(300):
        n = int(rng.integers(1, 80))
        data = np.round(rng.normal(size=n), 1)
        u = float(rng.normal(0.5, 0.5))
        kappa = int(rng.integers(1, 6))
        breaks = rng.random(n) < 0.1 if rng.random() < 0.5 else None
        assert as_tuples(decluster(data, u, kappa, breaks)) == brute_clusters(data, u, kappa, breaks)


@settings(max_examples=80, deadline=None)
@given(
    data=st.lists(st.integers(0, 20), min_size=1, max_size=60),
    kappa=st.integers(1, 6),
)
def test_decluster_properties(data, kappa):
    u = 10
    cs = decluster(data, u, kappa)
    n_exc = sum(x > u for x in data)
    assert cs.n_exceedances == n_exc
    # appending kappa sub-threshold points creates no new cluster
    padded = decluster(list(data) + [0] * kappa, u, kappa)
    assert as_tuples(padded) == as_tuples(cs)
    # ordered, disjoint, separated by at least kappa sub-threshold points
    for a, b in zip(cs.clusters, cs.clusters[1:]):
        assert b.start - a.end - 1 >= kappa
    for c in cs.clusters:
        seg = np.asarray(data[c.start:c.end + 1])
        assert c.peak_value == seg.max()
    if n_exc:
        theta = runs_theta(data, u, kappa)
        assert 0 < theta <= 1
        idx = [i for i, x in enumerate(data) if x > u]
        if all(b - a - 1 >= kappa for a, b in zip(idx, idx[1:])):
            assert theta == 1.0
