"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a one-line PASS/FAIL verdict; the lines are printed as the
test runs (visible with ``-s``) and again in the terminal summary.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from magnoncool.analysis import SqueezingInputs, squeezed_variance
from magnoncool.config import Axis, SweepGrid, load_config
from magnoncool.core import dbm_to_watts, hz, thermal_occupation
from magnoncool.device import DriveSpec, Port
from magnoncool.dynamics import (backaction_45, driven_amplitudes_45, magnon_number_45,
                                 magnon_number_direct, steady_state_system, top_operating_point)
from magnoncool.magnon import YIG, kerr_shift, magnon_ext_damping, spin_count, with_material
from magnoncool.resonator import external_damping
from magnoncool.sweep import run_sweep, to_csv
from magnoncool.timedomain import desk_scaled_point, verify_backaction

TWO_PI = 2 * np.pi
VERDICTS = {}


def rel(a, b):
    return abs(a - b) / abs(b)


def record(number, title, checks):
    """``checks`` is a list of (label, ok) pairs; all must hold."""
    ok = all(c for _, c in checks)
    detail = "; ".join(label for label, _ in checks)
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    VERDICTS[number] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def top():
    return load_config("table1_top_cpw")


@pytest.fixture(scope="module")
def tilted():
    return load_config("table2_45deg")


def test_criterion_01_g_xz(top, tilted):
    g_top = top.device.couplings.g_xz1 / TWO_PI
    g_45 = tilted.device.couplings.g_xz1 / TWO_PI
    record(1, "g_XZ1", [
        (f"top-CPW {g_top:.4f} Hz vs 12.835 ({rel(g_top, 12.835):.2%} <= 0.5%)", rel(g_top, 12.835) <= 0.005),
        (f"45 deg {g_45:.4f} Hz vs 9.076 ({rel(g_45, 9.076):.2%} <= 0.5%)", rel(g_45, 9.076) <= 0.005),
    ])


def test_criterion_02_g_xx(tilted):
    dev = tilted.device
    g = [dev.g_xx(w) / TWO_PI / 1e6 for w in dev.harmonics]
    yig = replace(dev, magnet=with_material(dev.magnet, YIG), couplings=None)
    gy = [yig.g_xx(w) / TWO_PI / 1e6 for w in yig.harmonics]
    checks = []
    for val, ref in zip(g + gy, (41.5, 42.6, 174.0, 178.0)):
        checks.append((f"{val:.2f} vs {ref} MHz ({rel(val, ref):.2%} <= 2%)", rel(val, ref) <= 0.02))
    record(2, "g_XX", checks)


def test_criterion_03_magnon_radiative_coupling(top):
    dev = top.device
    kappa, q = magnon_ext_damping(dev.magnet, dev.wire_width, hz(20e9), dev.resonator.z0)
    k = kappa / TWO_PI / 1e6
    record(3, "magnon radiative coupling", [
        (f"Q_m,c {q:.0f} vs 10000 ({rel(q, 1e4):.2%} <= 2%)", rel(q, 1e4) <= 0.02),
        (f"kappa_m,ext {k:.4f} vs 2 MHz ({rel(k, 2.0):.2%} <= 2%)", rel(k, 2.0) <= 0.02),
    ])


def test_criterion_04_spin_counts(top, tilted):
    n_yig = spin_count(top.device.magnet)
    n_v = spin_count(tilted.device.magnet)
    record(4, "spin counts", [
        (f"YIG {n_yig:.3e} vs 3.8e11 ({rel(n_yig, 3.8e11):.2%} <= 2%)", rel(n_yig, 3.8e11) <= 0.02),
        (f"V[TCNE]x {n_v:.3e} vs 2.2e12 ({rel(n_v, 2.2e12):.2%} <= 2%)", rel(n_v, 2.2e12) <= 0.02),
    ])


def test_criterion_05_drive_population(top):
    w_m = top.operating_omega_m
    drive = DriveSpec(power=dbm_to_watts(0.0), omega_d=w_m - top.device.resonator.omega_r1,
                      port=Port.MAGNON_LINE)
    n = magnon_number_direct(top.device, drive, w_m)
    record(5, "drive population", [(f"n_m {n:.4e} vs 4.8e7 ({rel(n, 4.8e7):.2%} <= 5%)",
                                    rel(n, 4.8e7) <= 0.05)])


def test_criterion_06_backaction_anchor(top):
    w_m = top.operating_omega_m
    p = dbm_to_watts(-10.0)
    red = top_operating_point(top.device, p, -hz(500e6), w_m).delta_kappa_r1 / TWO_PI
    blue = top_operating_point(top.device, p, hz(500e6), w_m).delta_kappa_r1 / TWO_PI
    record(6, "backaction anchor", [
        (f"red {red:+.1f} Hz vs +792 ({rel(red, 792):.2%} <= 5%)", rel(red, 792) <= 0.05),
        (f"blue {blue:+.1f} Hz vs -792 ({rel(blue, -792):.2%} <= 5%)", rel(blue, -792) <= 0.05),
    ])


def test_criterion_07_harmonic_coupling_scaling(tilted):
    res = tilted.device.resonator
    k3 = external_damping(res, hz(20.5e9)) / TWO_PI / 1e6
    k1 = external_damping(res, hz(0.5e9)) / TWO_PI / 1e3
    record(7, "harmonic coupling scaling", [
        (f"kappa_r3,ext {k3:.4f} vs 2.21 MHz ({rel(k3, 2.21):.2%} <= 1%)", rel(k3, 2.21) <= 0.01),
        (f"kappa_r1,ext {k1:.4f} kHz in [1.25, 1.32]", 1.25 <= k1 <= 1.32),
    ])


def test_criterion_08_thermal_occupation():
    n = thermal_occupation(hz(500e6), 0.010)
    record(8, "thermal occupation", [(f"{n:.5f} vs 0.10 ({rel(n, 0.10):.2%} <= 2%)", rel(n, 0.10) <= 0.02)])


def test_criterion_09_kerr_shift():
    shift = kerr_shift(YIG, 4.8e7)
    record(9, "Kerr shift", [(f"{shift / TWO_PI:.6g} Hz vs 0.48 MHz (exact)",
                              np.isclose(shift, TWO_PI * 0.48e6, rtol=1e-14, atol=0))])


def test_criterion_10_squeezing():
    import warnings
    base = SqueezingInputs(n_minus=1.0, g_xz1=1.0, kappa_r1=2.5e-4, kappa_m=1.0, n_th=0.10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = squeezed_variance(base, cooperativity_override=7.9)
        cs = np.geomspace(1.0, 1e4, 10)
        nths = np.linspace(0.0, 2.0, 10)
        grid = np.array([[squeezed_variance(replace(base, n_th=nt), cooperativity_override=c).variance
                          for c in cs] for nt in nths])
    decreasing_c = bool(np.all(np.diff(grid, axis=1) < 0))
    increasing_n = bool(np.all(np.diff(grid, axis=0) > 0))
    record(10, "squeezing formula", [
        (f"variance {r.variance:.5f} vs 0.390 ({rel(r.variance, 0.39):.2%} <= 1%)", rel(r.variance, 0.39) <= 0.01),
        (f"{r.squeezing_db:.3f} dB vs 4.1 ({rel(r.squeezing_db, 4.1):.2%} <= 1%)", rel(r.squeezing_db, 4.1) <= 0.01),
        ("decreasing in C over 10x10 grid", decreasing_c),
        ("increasing in n_th over 10x10 grid", increasing_n),
    ])


def test_criterion_11_oracle():
    t0 = time.perf_counter()
    reports = {}
    for ratio in (-1.0, 0.0, 1.0):
        device, point = desk_scaled_point(delta_over_omega_r1=ratio)
        reports[ratio] = verify_backaction(device, point)
    elapsed = time.perf_counter() - t0
    red, zero, blue = reports[-1.0], reports[0.0], reports[1.0]
    record(11, "oracle equivalence", [
        (f"red dw err {red.rel_err_omega:.2%}, dk err {red.rel_err_kappa:.2%} (< 2%)",
         red.rel_err_omega < 0.02 and red.rel_err_kappa < 0.02),
        (f"blue dw err {blue.rel_err_omega:.2%}, dk err {blue.rel_err_kappa:.2%} (< 2%)",
         blue.rel_err_omega < 0.02 and blue.rel_err_kappa < 0.02),
        (f"Delta=0 oracle dk {zero.delta_kappa_oracle:.2e} rad/s (cancels)",
         abs(zero.delta_kappa_oracle) < 1e-6 * zero.kappa_bare and zero.delta_kappa_analytic == 0),
        ("sign flips with Delta", red.delta_kappa_oracle > 0 > blue.delta_kappa_oracle
         and np.sign(red.delta_omega_oracle) == -np.sign(blue.delta_omega_oracle)),
        (f"runtime {elapsed:.1f} s (< 30 s)", elapsed < 30.0),
    ])


def test_criterion_12_brute_force(tilted):
    rng = np.random.default_rng(12)
    dev0 = tilted.device
    worst = 0.0
    for _ in range(1000):
        g = dev0.couplings.g_xx
        s2, s3 = rng.uniform(0.05, 3.0, size=2)
        dev = replace(dev0, couplings=replace(dev0.couplings, g_xx=(0.0, g[1] * s2, g[2] * s3)),
                      kappa_m_internal=hz(rng.uniform(0.2e6, 20e6)))
        drive = DriveSpec(power=dbm_to_watts(rng.uniform(-60.0, 0.0)),
                          omega_d=hz(rng.uniform(18.5e9, 21.5e9)), port=Port.FEEDLINE)
        b = rng.uniform(0.66, 0.76)
        x = np.array(driven_amplitudes_45(dev, drive, b))
        m, rhs = steady_state_system(dev, drive, b)
        ref = np.linalg.solve(m, rhs)
        worst = max(worst, float(np.max(np.abs(x - ref) / np.abs(ref))))
    record(12, "brute-force equivalence", [(f"worst relative deviation {worst:.2e} over 1000 points (<= 1e-10)",
                                            worst <= 1e-10)])


def test_criterion_13_two_harmonic_map(tilted):
    dev = tilted.device
    f = np.linspace(19e9, 21e9, 400)
    step = f[1] - f[0]
    lc = backaction_45(dev, DriveSpec(dbm_to_watts(-30.0), hz(f), Port.FEEDLINE), 0.709305)
    det = f - 20e9
    dk = lc.delta_kappa_r1
    i_max, i_min = int(np.argmax(dk)), int(np.argmin(dk))

    w2 = dev.harmonics[0]
    b_cross = w2 / dev.magnet.gamma
    g2 = dev.couplings.g_xx[1] / TWO_PI
    fine = 19.5e9 + np.linspace(-150e6, 150e6, 30001)
    n = magnon_number_45(dev, DriveSpec(dbm_to_watts(-30.0), hz(fine), Port.FEEDLINE), b_cross)
    peaks = [i for i in range(1, len(n) - 1) if n[i] > n[i - 1] and n[i] > n[i + 1]]
    split = fine[peaks[-1]] - fine[peaks[0]] if len(peaks) >= 2 else np.nan

    wide = np.linspace(19e9, 21e9, 4001)
    branches = []
    for b in (0.69, 0.709305, 0.73):
        nn = magnon_number_45(dev, DriveSpec(dbm_to_watts(-30.0), hz(wide), Port.FEEDLINE), b)
        branches.append(sum(1 for i in range(1, len(nn) - 1) if nn[i] > nn[i - 1] and nn[i] > nn[i + 1]))

    t0 = time.perf_counter()
    data = run_sweep(tilted)
    elapsed = time.perf_counter() - t0
    record(13, "two-harmonic map", [
        (f"max dk at {det[i_max] / 1e6:+.1f} MHz, min at {det[i_min] / 1e6:+.1f} MHz (step {step / 1e6:.2f})",
         abs(det[i_max] + 500e6) <= step and abs(det[i_min] - 500e6) <= step),
        (f"opposite signs ({dk[i_max] / TWO_PI:+.0f}, {dk[i_min] / TWO_PI:+.0f} Hz)", dk[i_max] > 0 > dk[i_min]),
        (f"three branches per row {branches}", branches == [3, 3, 3]),
        (f"splitting {split / 1e6:.2f} vs 2 g_XX2 {2 * g2 / 1e6:.2f} MHz ({rel(split, 2 * g2):.2%} <= 2%)",
         rel(split, 2 * g2) <= 0.02),
        (f"400x400 sweep {elapsed:.1f} s (< 60 s), {len(data)} rows", elapsed < 60 and len(data) == 160000),
    ])


def test_criterion_14_determinism(tilted, top):
    grid = SweepGrid(b_field=Axis(0.69, 0.73, 60), drive_freq=Axis(19e9, 21e9, 80))
    first = to_csv(run_sweep(tilted, grid, workers=1).columns)
    again = to_csv(run_sweep(tilted, grid, workers=1).columns)
    parallel = to_csv(run_sweep(tilted, grid, workers=8).columns)
    t_serial = to_csv(run_sweep(top, workers=1).columns)
    t_parallel = to_csv(run_sweep(top, workers=4, chunk_size=50).columns)
    record(14, "determinism", [
        ("repeated runs byte-identical", first == again),
        ("parallel == serial (45 deg)", first == parallel),
        ("parallel == serial (top-CPW)", t_serial == t_parallel),
    ])
