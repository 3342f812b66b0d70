import numpy as np
import pytest
from hypothesis import given, strategies as st

from magnoncool.core import (CONSTANTS, ConfigurationError, PhysicalConstants, dbm_to_watts,
                             hz, thermal_occupation, to_hz, watts_to_dbm)


@pytest.mark.parametrize("p_dbm, watts", [(0, 1e-3), (-10, 1e-4), (-30, 1e-6), (10, 1e-2)])
def test_dbm_to_watts(p_dbm, watts):
    assert dbm_to_watts(p_dbm) == pytest.approx(watts, rel=1e-14)


@given(st.floats(-80, 40), st.floats(-80, 40))
def test_dbm_log_additivity(a, b):
    assert dbm_to_watts(a) * dbm_to_watts(b) == pytest.approx(dbm_to_watts(a + b) * 1e-3, rel=1e-12)


@given(st.floats(-100, 50))
def test_dbm_roundtrip(p):
    assert watts_to_dbm(dbm_to_watts(p)) == pytest.approx(p, abs=1e-10)


def test_hz_roundtrip():
    assert to_hz(hz(123.4)) == pytest.approx(123.4)
    assert hz(1.0) == pytest.approx(2 * np.pi)


def test_gamma_e():
    assert CONSTANTS.gamma_e / (2 * np.pi) == pytest.approx(28.02495e9, rel=1e-6)
    assert CONSTANTS.g_e == 2.00232


def test_constants_must_be_positive():
    with pytest.raises(ConfigurationError):
        PhysicalConstants(hbar=-1.0)


def test_thermal_occupation_dilution_fridge():
    assert thermal_occupation(hz(500e6), 0.010) == pytest.approx(0.10, rel=0.02)


def test_thermal_occupation_zero_temperature():
    assert thermal_occupation(hz(5e9), 0.0) == 0.0


def test_thermal_occupation_microwave_magnon():
    assert thermal_occupation(hz(20e9), 0.010) < 1e-40


def test_thermal_occupation_bose_factor():
    # ħω = k_B T -> 1/(e - 1)
    omega = CONSTANTS.k_B * 0.05 / CONSTANTS.hbar
    assert thermal_occupation(omega, 0.05) == pytest.approx(1 / (np.e - 1), rel=1e-12)


@pytest.mark.parametrize("omega, temp", [(0.0, 1.0), (-1.0, 1.0), (1e9, -0.1)])
def test_thermal_occupation_domain(omega, temp):
    with pytest.raises(ValueError):
        thermal_occupation(omega, temp)


@given(st.floats(1e8, 1e11), st.floats(1e8, 1e11), st.floats(1e-3, 1.0))
def test_thermal_occupation_decreasing_in_frequency(f1, f2, temp):
    lo, hi = sorted((f1, f2))
    if hi / lo < 1 + 1e-6:
        return
    n_lo, n_hi = thermal_occupation(hz(lo), temp), thermal_occupation(hz(hi), temp)
    assert n_hi <= n_lo
    if n_lo > 1e-300:
        assert n_hi < n_lo


@given(st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_thermal_occupation_increasing_in_temperature(t1, t2):
    lo, hi = sorted((t1, t2))
    if hi / lo < 1 + 1e-6:
        return
    assert thermal_occupation(hz(500e6), hi) > thermal_occupation(hz(500e6), lo)
