import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petevt.errors import ParameterError
from petevt.evd import (
    GevParams,
    GpdParams,
    ThresholdModel,
    frechet_censor_point,
    gev_cdf,
    gev_to_gpd_scale,
    gpd_cdf,
    gpd_logpdf,
    gpd_quantile,
    logistic_cdf,
    logistic_density,
    logistic_partial,
    to_frechet,
)

# expected values below were computed with mpmath at 30 digits


def test_gpd_cdf_examples():
    assert gpd_cdf(1.0, GpdParams(1.0, 0.0)) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert gpd_cdf(1.0, GpdParams(1.0, 0.2)) == pytest.approx(0.598122427983539, abs=1e-12)
    for shape in (-0.3, 0.0, 0.4):
        assert gpd_cdf(0.0, GpdParams(2.0, shape)) == 0.0


def test_gpd_cdf_beyond_endpoint_is_one():
    assert gpd_cdf(7.0, GpdParams(1.0, -0.2)) == 1.0


def test_gpd_logpdf_examples():
    assert gpd_logpdf(0.0, GpdParams(2.0, 0.0)) == pytest.approx(math.log(0.5), abs=1e-12)
    assert gpd_logpdf(1.0, GpdParams(1.0, 0.2)) == pytest.approx(-1.0939293407637275, abs=1e-12)
    assert gpd_logpdf(10.0, GpdParams(1.0, -0.2)) == -math.inf


def test_gpd_params_reject_bad_scale():
    with pytest.raises(ParameterError):
        GpdParams(0.0, 0.1)
    with pytest.raises(ParameterError):
        GpdParams(-1.0, 0.1)


def test_gpd_quantile_examples():
    assert gpd_quantile(0.0, GpdParams(3.0, -0.2)) == 0.0
    assert gpd_quantile(1 - math.exp(-1), GpdParams(1.0, 0.0)) == pytest.approx(1.0, abs=1e-12)
    assert gpd_quantile(0.598122427983539, GpdParams(1.0, 0.2)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        gpd_quantile(1.0, GpdParams(1.0, 0.0))
    with pytest.raises(ParameterError):
        gpd_quantile(-0.1, GpdParams(1.0, 0.0))


@pytest.mark.parametrize("shape", [-0.45, -0.1, 0.0, 1e-9, 0.2, 0.8])
def test_gpd_quantile_roundtrip(shape):
    p = np.linspace(0.001, 0.999, 999)
    params = GpdParams(1.7, shape)
    assert np.max(np.abs(gpd_cdf(gpd_quantile(p, params), params) - p)) < 1e-10


def test_gev_cdf_examples():
    assert gev_cdf(0.0, GevParams(0.0, 1.0, 0.0)) == pytest.approx(math.exp(-1), abs=1e-12)
    assert gev_cdf(1.0, GevParams(0.0, 1.0, 0.0)) == pytest.approx(0.692200627555346, abs=1e-12)
    grid = np.linspace(-3, 8, 200)
    diff = gev_cdf(grid, GevParams(0.5, 1.3, 1e-9)) - gev_cdf(grid, GevParams(0.5, 1.3, 0.0))
    assert np.max(np.abs(diff)) < 1e-6


def test_gev_cdf_outside_support():
    assert gev_cdf(-10.0, GevParams(0.0, 1.0, 0.5)) == 0.0
    assert gev_cdf(10.0, GevParams(0.0, 1.0, -0.5)) == 1.0


def test_gev_to_gpd_scale():
    assert gev_to_gpd_scale(GevParams(3.0, 1.0, 0.0), 7.5) == 1.0
    assert gev_to_gpd_scale(GevParams(0.0, 1.0, 0.5), 2.0) == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        gev_to_gpd_scale(GevParams(0.0, 1.0, -0.5), 3.0)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_shape_zero_continuity(sign):
    y = np.linspace(0.0, 6.0, 121)
    near, zero = GpdParams(1.4, sign * 1e-8), GpdParams(1.4, 0.0)
    assert np.max(np.abs(gpd_cdf(y, near) - gpd_cdf(y, zero))) < 1e-6
    assert np.max(np.abs(gpd_logpdf(y, near) - gpd_logpdf(y, zero))) < 1e-6
    g_near, g_zero = GevParams(0.2, 1.4, sign * 1e-8), GevParams(0.2, 1.4, 0.0)
    x = np.linspace(-3.0, 6.0, 121)
    assert np.max(np.abs(gev_cdf(x, g_near) - gev_cdf(x, g_zero))) < 1e-6


@settings(max_examples=60, deadline=None)
@given(
    scale=st.floats(0.05, 20.0),
    shape=st.floats(-0.9, 1.5),
    ys=st.lists(st.floats(0.0, 50.0), min_size=2, max_size=30),
)
def test_gpd_cdf_monotone_and_bounded(scale, shape, ys):
    ys = np.sort(np.asarray(ys))
    vals = np.asarray(gpd_cdf(ys, GpdParams(scale, shape)))
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert np.all(np.diff(vals) >= -1e-15)


@settings(max_examples=60, deadline=None)
@given(
    loc=st.floats(-5, 5),
    scale=st.floats(0.05, 20.0),
    shape=st.floats(-0.9, 1.5),
    ys=st.lists(st.floats(-30.0, 30.0), min_size=2, max_size=30),
)
def test_gev_cdf_monotone_and_bounded(loc, scale, shape, ys):
    ys = np.sort(np.asarray(ys))
    vals = np.asarray(gev_cdf(ys, GevParams(loc, scale, shape)))
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert np.all(np.diff(vals) >= -1e-15)


def test_to_frechet_example():
    tm = ThresholdModel(2.0, 0.1, GpdParams(1.0, 0.0))
    assert to_frechet(3.0, tm) == pytest.approx(26.67969488372160, rel=1e-12)


def test_to_frechet_boundary_and_censor_point():
    tm = ThresholdModel(0.0, 1.0, GpdParams(1.0, 0.0))
    assert to_frechet(1e-9, tm) < 0.06
    tm = ThresholdModel(-5.0, 0.2, GpdParams(1.3, -0.15))
    zu = frechet_censor_point(tm)
    assert to_frechet(-5.0 + 1e-12, tm) == pytest.approx(zu, rel=1e-9)
    with pytest.raises(ParameterError):
        to_frechet(-5.0, tm)


@settings(max_examples=50, deadline=None)
@given(
    lam=st.floats(0.01, 0.95),
    shape=st.floats(-0.5, 0.8),
    ks=st.lists(st.integers(1, 2_000_000), min_size=2, max_size=20, unique=True),
)
def test_to_frechet_strictly_increasing(lam, shape, ks):
    tm = ThresholdModel(1.0, lam, GpdParams(1.0, shape))
    ys = np.sort(np.asarray(ks)) * 1e-6
    z = np.asarray(to_frechet(1.0 + ys, tm))
    assert np.all(z > frechet_censor_point(tm))
    assert np.all(np.diff(z) > 0)


def test_frechet_censor_point():
    rate = 1 - math.exp(-1)
    assert frechet_censor_point(ThresholdModel(0, rate, GpdParams(1, 0))) == pytest.approx(1.0)
    assert frechet_censor_point(ThresholdModel(0, 0.1, GpdParams(1, 0))) == pytest.approx(
        9.491221581029903, rel=1e-12
    )
    assert frechet_censor_point(ThresholdModel(0, 1e-9, GpdParams(1, 0))) > 1e8
    with pytest.raises(ParameterError):
        frechet_censor_point(ThresholdModel(0, 1.0, GpdParams(1, 0)))


def test_logistic_cdf_examples():
    assert logistic_cdf(1.0, 1.0, 1.0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert logistic_cdf(1.0, 1.0, 0.5) == pytest.approx(0.2431167344342142, rel=1e-14)
    assert logistic_cdf(1.0, 2.0, 1e-3) == pytest.approx(math.exp(-1), rel=1e-9)
    assert logistic_cdf(0.7, 3.1, 0.4) == pytest.approx(logistic_cdf(3.1, 0.7, 0.4), rel=1e-14)
    with pytest.raises(ParameterError):
        logistic_cdf(1.0, 1.0, 1.2)
    with pytest.raises(ParameterError):
        logistic_cdf(1.0, 1.0, 0.0)


def test_logistic_partial_examples():
    assert logistic_partial(1.0, 1.0, 1.0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert logistic_partial(1.0, 1.0, 0.5) == pytest.approx(0.17190949153836189, rel=1e-12)
    # symmetry of G: d/dz2 G(a, b) equals d/dz1 G(b, a)
    h = 1e-6
    a, b, al = 0.8, 2.5, 0.35
    num = (logistic_cdf(a, b + h, al) - logistic_cdf(a, b - h, al)) / (2 * h)
    assert logistic_partial(b, a, al) == pytest.approx(num, rel=1e-6)


def test_logistic_density_examples():
    assert logistic_density(1.0, 1.0, 1.0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert logistic_density(1.0, 2.0, 0.5) == pytest.approx(0.06193297278875992, rel=1e-12)


def test_logistic_density_integrates_to_rectangle_mass():
    from scipy.integrate import dblquad

    al = 0.5
    lo, hi = 0.1, 100.0
    # integrate on log scale for accuracy: dz = z dv
    val, _ = dblquad(
        lambda v2, v1: logistic_density(math.exp(v1), math.exp(v2), al) * math.exp(v1 + v2),
        math.log(lo), math.log(hi), math.log(lo), math.log(hi),
        epsabs=1e-10, epsrel=1e-10,
    )
    mass = (logistic_cdf(hi, hi, al) - 2 * logistic_cdf(hi, lo, al)
            + logistic_cdf(lo, lo, al))
    assert abs(val - mass) < 1e-4


def _fd_partial(z1, z2, al, h=1e-5):
    return (logistic_cdf(z1 + h, z2, al) - logistic_cdf(z1 - h, z2, al)) / (2 * h)


def _fd_mixed(z1, z2, al, h=1e-4):
    f = logistic_cdf
    return (f(z1 + h, z2 + h, al) - f(z1 + h, z2 - h, al)
            - f(z1 - h, z2 + h, al) + f(z1 - h, z2 - h, al)) / (4 * h * h)


def test_logistic_derivatives_match_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        z1, z2 = np.exp(rng.uniform(-0.7, 1.5, 2))
        al = rng.uniform(0.2, 0.99)
        assert logistic_partial(z1, z2, al) == pytest.approx(_fd_partial(z1, z2, al), rel=1e-5)
        assert logistic_density(z1, z2, al) == pytest.approx(_fd_mixed(z1, z2, al), rel=1e-5)
