import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magnoncool.analysis import (DivergentVariance, SqueezingInputs, UnphysicalParameters,
                                 cooperativity, s21_notch, s21_spectrum, spectrum_columns,
                                 squeezed_variance, squeezing_validity)
from magnoncool.core import ConfigurationError, dbm_to_watts, hz
from magnoncool.dynamics import top_operating_point
from magnoncool.magnon import spin_count

W1 = hz(500e6)
K_I = K_EXT = hz(500.0)
W_M = hz(20e9)


def inputs(**kw):
    base = dict(n_minus=4.8e7, g_xz1=hz(12.835), kappa_r1=hz(1e3), kappa_m=hz(4e6), n_th=0.10)
    base.update(kw)
    return SqueezingInputs(**base)


def quiet(func, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return func(*a, **kw)


# -- transmission ---------------------------------------------------------------

def test_far_detuned_baseline():
    assert abs(s21_notch(W1 + hz(1e9), W1, K_I + K_EXT, K_EXT)) == pytest.approx(1.0, abs=1e-6)


def test_symmetric_coupling_depth():
    assert abs(s21_notch(W1, W1, K_I + K_EXT, K_EXT)) == pytest.approx(0.5, rel=1e-14)


def test_no_coupling_is_transparent():
    grid = W1 + hz(np.linspace(-5e3, 5e3, 101))
    assert np.all(s21_notch(grid, W1, K_I, 0.0) == 1.0)


def test_overcoupled_is_rejected():
    with pytest.raises(UnphysicalParameters):
        s21_notch(W1, W1, hz(100.0), hz(200.0))


@given(st.floats(-1e4, 1e4), st.floats(0, 1e3), st.floats(1.0, 1e3))
def test_passive_response(detune, k_ext, k_int):
    s = s21_notch(W1 + hz(detune), W1, hz(k_ext + k_int), hz(k_ext))
    assert abs(s) <= 1.0 + 1e-12


def test_dip_location_and_width():
    w_eff, k_eff = W1 + hz(37.0), hz(1.5e3)
    grid = W1 + hz(np.linspace(-10e3, 10e3, 20001))
    pts = s21_spectrum(w_eff, k_eff, K_EXT, grid)
    mag = np.array([abs(p.s21) for p in pts])
    assert np.argmin(mag) == np.argmin(np.abs(grid - w_eff))
    # 1 - |S21|**2 is not a Lorentzian here, but the dip of |1 - S21| is, with FWHM kappa
    depth = np.abs(1 - np.array([p.s21 for p in pts])) ** 2
    above = grid[depth >= depth.max() / 2]
    assert above[-1] - above[0] == pytest.approx(k_eff, abs=3 * (grid[1] - grid[0]))


def test_spectrum_columns():
    pts = s21_spectrum(W1, K_I + K_EXT, K_EXT, [W1, W1 + hz(1e3)])
    cols = spectrum_columns(pts)
    assert list(cols) == ["probe_freq_hz", "re_s21", "im_s21", "abs_s21", "abs_s21_db"]
    assert cols["probe_freq_hz"][0] == pytest.approx(500e6)
    assert cols["abs_s21_db"][0] == pytest.approx(20 * np.log10(0.5))


def test_drive_broadens_and_shifts(top_device):
    res = top_device.resonator
    k1 = K_I + K_EXT
    grid = W1 + hz(np.linspace(-3e3, 3e3, 6001))
    on = top_operating_point(top_device, dbm_to_watts(-10), -hz(500e6), W_M)
    off = top_operating_point(top_device, dbm_to_watts(-10), -hz(498e6), W_M)
    dips = []
    for r in (on, off):
        pts = s21_spectrum(W1 + r.delta_omega_r1, k1 + r.delta_kappa_r1, K_EXT, grid)
        mag = np.array([abs(p.s21) for p in pts])
        dips.append((grid[np.argmin(mag)] - W1, mag.min()))
    bare = abs(s21_notch(W1, W1, k1, K_EXT))
    assert abs(dips[0][0]) <= hz(2.0)
    assert dips[0][1] > bare
    assert dips[1][0] > hz(2.0)
    assert dips[1][1] > bare


# -- squeezing ----------------------------------------------------------------

def test_cooperativity_values():
    assert cooperativity(inputs()) == pytest.approx(2.0, rel=0.02)
    assert cooperativity(inputs()) == pytest.approx(1.97685, rel=1e-5)
    assert cooperativity(inputs(n_minus=0.0)) == 0.0
    assert cooperativity(inputs(n_minus=9.6e7)) == pytest.approx(2 * cooperativity(inputs()))


def test_quoted_variance():
    r = quiet(squeezed_variance, inputs(kappa_r1=2.5e-4, kappa_m=1.0), cooperativity_override=7.9)
    assert r.variance == pytest.approx(0.390, rel=0.01)
    assert r.squeezing_db == pytest.approx(4.1, rel=0.01)
    assert r.variance == pytest.approx(0.3900418, rel=1e-6)


def test_high_cooperativity_value():
    r = squeezed_variance(inputs(kappa_r1=1e-3, kappa_m=1.0, n_th=0.0), cooperativity_override=100.0)
    assert r.variance == pytest.approx(0.101, rel=1e-12)
    assert not r.low_cooperativity


def test_infinite_squeezing_limit():
    r = squeezed_variance(inputs(kappa_r1=1e-12, kappa_m=1.0, n_th=0.0), cooperativity_override=1e20)
    assert r.variance < 1e-9


def test_low_cooperativity_warns():
    with pytest.warns(UserWarning, match="cooperativity"):
        r = squeezed_variance(inputs())
    assert r.low_cooperativity


def test_zero_cooperativity_diverges():
    with pytest.raises(DivergentVariance):
        squeezed_variance(inputs(n_minus=0.0))


@pytest.mark.parametrize("kw", [dict(kappa_m=0.0), dict(kappa_r1=0.0), dict(n_th=-0.1),
                                dict(n_minus=-1.0)])
def test_invalid_inputs(kw):
    with pytest.raises(ConfigurationError):
        inputs(**kw)


@given(st.floats(1.0, 1e4), st.floats(1.0, 1e4), st.floats(0, 5), st.floats(1e-6, 1e-1))
def test_variance_decreasing_in_cooperativity(c1, c2, n_th, ratio):
    lo, hi = sorted((c1, c2))
    if hi / lo < 1 + 1e-9:
        return
    x = inputs(n_th=n_th, kappa_r1=ratio, kappa_m=1.0)
    assert quiet(squeezed_variance, x, hi).variance < quiet(squeezed_variance, x, lo).variance


@given(st.floats(0, 5), st.floats(0, 5), st.floats(1.0, 1e4))
def test_variance_increasing_in_n_th(n1, n2, c):
    lo, hi = sorted((n1, n2))
    if hi - lo < 1e-9:
        return
    a = quiet(squeezed_variance, inputs(n_th=lo), c).variance
    b = quiet(squeezed_variance, inputs(n_th=hi), c).variance
    assert b > a


@given(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0))
def test_variance_increasing_in_damping_ratio(r1, r2):
    lo, hi = sorted((r1, r2))
    if hi / lo < 1 + 1e-9:
        return
    a = quiet(squeezed_variance, inputs(kappa_r1=lo, kappa_m=1.0), 20.0).variance
    b = quiet(squeezed_variance, inputs(kappa_r1=hi, kappa_m=1.0), 20.0).variance
    assert b > a


def test_validity_report_at_squeezing_point(top_device):
    rep = squeezing_validity(top_device, inputs())
    assert rep["population_ratio"].value == pytest.approx(4.8e7 / 3.8e11, rel=0.02)
    assert rep["population_ratio"].ok
    assert rep["kerr_ratio"].value == pytest.approx(0.12, rel=1e-12)
    assert rep["kerr_ratio"].ok
    assert rep["sideband_resolution"].value == pytest.approx(4e6 / 500e6)
    assert rep["sideband_resolution"].ok
    assert not rep["cooperativity"].ok
    assert squeezing_validity(top_device, inputs(), cooperativity_override=12.0)["cooperativity"].ok


def test_population_flag_fails_when_saturated(top_device):
    n = spin_count(top_device.magnet)
    rep = squeezing_validity(top_device, inputs(n_minus=n))
    assert not rep["population_ratio"].ok
    assert [r.threshold for r in rep.values()] == [0.01, 1.0, 10.0, 1.0]
