"""Time-domain check of the top-CPW backaction formulas.

The linearized classical equations of motion

    d(dbeta)/dt = (i delta - kappa_m/2) dbeta + i G beta_bar Phi
    C1 Phi''    = -C1 omega_r1**2 Phi - C1 kappa_r1 Phi' + hbar G (beta_bar* dbeta + beta_bar dbeta*)

are integrated with fixed-step RK4 from a displaced, magnon-free state, and
the ringdown of the flux is fitted to a damped cosine.  The fitted frequency
and damping are independent of the frequency-domain derivation and so serve
as an oracle for it.

At the literal device scale (500 MHz resonator, sub-kHz shifts) a ringdown
needs ~1e8 steps.  ``desk_scaled_point`` gives a 1 MHz resonator with the same
dimensionless ratios where a run takes about a second.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .core import CONSTANTS, TWO_PI, NumericalError
from .device import DeviceConfig, Geometry
from .dynamics import backaction_top
from .magnon import MagnetSpec
from .resonator import ResonatorSpec, total_damping

log = logging.getLogger(__name__)


class IntegrationDiverged(NumericalError):
    def __init__(self, step):
        super().__init__(f"non-finite state at step {step}")
        self.step = step


class FitFailed(NumericalError):
    def __init__(self, residual, reason=""):
        super().__init__(f"ringdown fit failed (relative residual {residual:.3g}) {reason}".strip())
        self.residual = residual


@dataclass(frozen=True)
class SimState:
    delta_beta_m: complex
    phi: float
    phi_dot: float


@dataclass
class Trajectory:
    """Uniformly sampled solution.  Columns of ``states`` are Re dbeta, Im dbeta, Phi, Phi'."""

    times: np.ndarray
    states: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) < 2 or np.any(np.diff(self.times) <= 0):
            raise ValueError("a trajectory needs >= 2 strictly increasing samples")

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i) -> SimState:
        re, im, phi, phi_dot = self.states[i]
        return SimState(complex(re, im), float(phi), float(phi_dot))

    @property
    def phi(self):
        return self.states[:, 2]

    def to_csv(self, path):
        header = "t_s,re_delta_beta_m,im_delta_beta_m,phi_wb,phi_dot_wb_per_s"
        np.savetxt(path, np.column_stack([self.times, self.states]), delimiter=",",
                   header=header, comments="", fmt="%.17g")


def max_step(device: DeviceConfig, delta: float, omega_m: float) -> float:
    """Largest step accepted by the integrator: 50 steps per fastest period."""
    fastest = max(device.resonator.omega_r1, abs(delta), device.kappa_m(omega_m))
    return 1.0 / (50.0 * fastest / TWO_PI)


def integrate_linearized(device: DeviceConfig, beta_bar: complex, delta: float, phi0: float,
                         t_end: float, dt: float, omega_m: float = None,
                         big_g: float = None, sample_every: int = 1) -> Trajectory:
    """Fixed-step RK4 integration of the linearized top-CPW equations.

    ``big_g`` defaults to the device's flux coupling G.  Every
    ``sample_every``-th step is stored.
    """
    res = device.resonator
    omega_m = res.omega_r1 * 40 if omega_m is None else omega_m
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > max_step(device, delta, omega_m) * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} s exceeds the resolution limit "
                         f"{max_step(device, delta, omega_m):g} s")
    big_g = device.couplings.big_g if big_g is None else big_g
    w1 = res.omega_r1
    k1 = total_damping(res, w1)
    c1 = 1.0 / np.sqrt(w1 * res.z0)
    kappa_m = device.kappa_m(omega_m)

    lin = complex(-kappa_m / 2.0, delta)
    drive = 1j * big_g * beta_bar
    back = CONSTANTS.hbar * big_g / c1
    bbar_c = complex(beta_bar).conjugate()
    w1sq = w1 * w1

    def rhs(b, p, v):
        force = back * 2.0 * (bbar_c * b).real
        return lin * b + drive * p, v, -w1sq * p - k1 * v + force

    n_steps = int(round(t_end / dt))
    n_out = n_steps // sample_every + 1
    out = np.empty((n_out, 4))
    b, p, v = 0j, float(phi0), 0.0
    out[0] = (0.0, 0.0, p, 0.0)
    h, h2, h6 = dt, dt / 2.0, dt / 6.0
    j = 1
    for i in range(1, n_steps + 1):
        a1 = rhs(b, p, v)
        a2 = rhs(b + h2 * a1[0], p + h2 * a1[1], v + h2 * a1[2])
        a3 = rhs(b + h2 * a2[0], p + h2 * a2[1], v + h2 * a2[2])
        a4 = rhs(b + h * a3[0], p + h * a3[1], v + h * a3[2])
        b += h6 * (a1[0] + 2.0 * a2[0] + 2.0 * a3[0] + a4[0])
        p += h6 * (a1[1] + 2.0 * a2[1] + 2.0 * a3[1] + a4[1])
        v += h6 * (a1[2] + 2.0 * a2[2] + 2.0 * a3[2] + a4[2])
        if i % sample_every == 0:
            if not (np.isfinite(p) and np.isfinite(v) and np.isfinite(b.real) and np.isfinite(b.imag)):
                raise IntegrationDiverged(i)
            out[j] = (b.real, b.imag, p, v)
            j += 1
    times = np.arange(n_out) * dt * sample_every
    params = dict(beta_bar=beta_bar, delta=delta, phi0=phi0, dt=dt, t_end=t_end,
                  big_g=big_g, omega_r1=w1, kappa_r1=k1, kappa_m=kappa_m)
    return Trajectory(times=times, states=out[:j], params=params)


def _initial_guess(t, y):
    # zero crossings for the frequency, log of the peak envelope for the damping
    s = np.signbit(y)
    idx = np.flatnonzero(s[1:] != s[:-1])
    if idx.size < 4:
        raise FitFailed(np.inf, "(too few oscillations)")
    tc = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    omega = np.pi / np.mean(np.diff(tc))
    peaks = np.array([np.max(np.abs(y[a:b + 1])) for a, b in zip(idx[:-1], idx[1:])])
    tp = 0.5 * (tc[:-1] + tc[1:])
    slope = np.polyfit(tp, np.log(peaks), 1)[0]
    kappa = max(-2.0 * slope, 0.0)
    amp = peaks[0] * np.exp(kappa * (tp[0] - t[0]) / 2.0)
    # phase from the first crossing: omega tc + phi = pi/2 (mod pi)
    phase = np.pi / 2.0 - omega * (tc[0] - t[0])
    if y[0] < 0:
        phase += np.pi
    return amp, kappa, omega, phase


def fit_ringdown(traj: Trajectory, t_skip: float = None, max_residual: float = 1e-3):
    """Fit Phi(t) to A exp(-kappa t / 2) cos(omega t + phase).

    The first ``t_skip`` seconds are discarded so the fast magnon-like
    transients have decayed; by default 30 / kappa_m when the trajectory
    records kappa_m, else nothing.

    Returns
    -------
    (omega_eff, kappa_eff) in rad/s.
    """
    if t_skip is None:
        kappa_m = traj.params.get("kappa_m")
        t_skip = 30.0 / kappa_m if kappa_m else 0.0
    keep = traj.times >= traj.times[0] + t_skip
    t = traj.times[keep] - traj.times[keep][0]
    y = traj.phi[keep]
    if t.size < 8:
        raise FitFailed(np.inf, "(trajectory too short)")
    x0 = np.array(_initial_guess(t, y))
    n_periods = x0[2] * t[-1] / TWO_PI
    if n_periods < 20:
        raise FitFailed(np.inf, f"(only {n_periods:.1f} periods)")
    scale = np.array([abs(x0[0]), max(x0[1], x0[2] * 1e-9), x0[2], 1.0])

    def model_residual(x):
        amp, kappa, omega, phase = x
        return amp * np.exp(-kappa * t / 2.0) * np.cos(omega * t + phase) - y

    sol = least_squares(model_residual, x0, x_scale=scale, method="lm",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    residual = np.linalg.norm(sol.fun) / np.linalg.norm(y)
    if not sol.success or residual > max_residual:
        raise FitFailed(residual)
    return float(sol.x[2]), float(sol.x[1])


@dataclass(frozen=True)
class OperatingPoint:
    n_m: float
    delta: float
    omega_m: float


@dataclass(frozen=True)
class OracleReport:
    delta_omega_analytic: float
    delta_omega_oracle: float
    delta_kappa_analytic: float
    delta_kappa_oracle: float
    omega_eff: float
    kappa_eff: float
    omega_bare: float
    kappa_bare: float
    coupling_ratio: float
    trajectory: Optional[Trajectory] = field(default=None, repr=False, compare=False)

    @staticmethod
    def _rel(a, b):
        scale = max(abs(a), abs(b))
        return 0.0 if scale == 0 else abs(a - b) / scale

    @property
    def rel_err_omega(self):
        return self._rel(self.delta_omega_oracle, self.delta_omega_analytic)

    @property
    def rel_err_kappa(self):
        return self._rel(self.delta_kappa_oracle, self.delta_kappa_analytic)

    def as_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "trajectory"}
        d["rel_err_omega"] = self.rel_err_omega
        d["rel_err_kappa"] = self.rel_err_kappa
        return d


def desk_scaled_point(delta_over_omega_r1: float = -1.0, damping_ratio: float = 0.5):
    """Scaled top-CPW device and operating point for the time-domain oracle.

    omega_r1 / 2 pi = 1 MHz, kappa_r1 / 2 pi = 1 kHz, kappa_m / 2 pi = 200 kHz.
    The magnon number is chosen so that at the red sideband the analytic
    extra damping is ``damping_ratio * kappa_r1``.
    """
    w1 = TWO_PI * 1e6
    res = ResonatorSpec(z0=50.0, omega_r1=w1, mode_freqs=(w1,), kappa_internal=(TWO_PI * 500.0,),
                        kappa_ext_override=(TWO_PI * 500.0,))
    magnet = MagnetSpec(m_s=140e3, dims=(5e-6, 5e-6, 1e-6), name="desk")
    device = DeviceConfig(geometry=Geometry.TOP_CPW, resonator=res, magnet=magnet,
                          wire_width=5e-6, kappa_m_internal=TWO_PI * 100e3,
                          kappa_m_ext_override=TWO_PI * 100e3)
    omega_m = TWO_PI * 40e6
    unit = backaction_top(device, 1.0, -w1, omega_m).delta_kappa_r1
    n_m = damping_ratio * total_damping(res, w1) / unit
    return device, OperatingPoint(n_m=n_m, delta=delta_over_omega_r1 * w1, omega_m=omega_m)


def verify_backaction(device: DeviceConfig, point: OperatingPoint, dt: float = 5e-9,
                      t_end: float = None, phi0: float = None, sample_every: int = 4):
    """Compare the analytic backaction with a fitted time-domain ringdown.

    The oracle shifts are measured against an uncoupled run with the same step,
    so the integrator's own phase error and the small frequency pull of the
    bare damping cancel.
    """
    analytic = backaction_top(device, point.n_m, point.delta, point.omega_m)
    if not analytic.weak_coupling_ok:
        log.warning("operating point is outside the weak-coupling regime")
    res = device.resonator
    k1 = total_damping(res, res.omega_r1)
    if t_end is None:
        t_end = 2.0 / max(k1 + analytic.delta_kappa_r1, 0.2 * k1) + 30.0 / device.kappa_m(point.omega_m)
    if phi0 is None:
        phi0 = 1e3 * device.couplings.flux_zpf
    beta_bar = np.sqrt(point.n_m)

    coupled = integrate_linearized(device, beta_bar, point.delta, phi0, t_end, dt,
                                   omega_m=point.omega_m, sample_every=sample_every)
    bare = integrate_linearized(device, beta_bar, point.delta, phi0, t_end, dt,
                                omega_m=point.omega_m, big_g=0.0, sample_every=sample_every)
    w_eff, k_eff = fit_ringdown(coupled)
    w_bare, k_bare = fit_ringdown(bare)
    ratio = np.sqrt(point.n_m) * device.couplings.g_xz1 / device.kappa_m(point.omega_m)
    return OracleReport(
        delta_omega_analytic=float(analytic.delta_omega_r1),
        delta_omega_oracle=w_eff - w_bare,
        delta_kappa_analytic=float(analytic.delta_kappa_r1),
        delta_kappa_oracle=k_eff - k_bare,
        omega_eff=w_eff, kappa_eff=k_eff, omega_bare=w_bare, kappa_bare=k_bare,
        coupling_ratio=float(ratio), trajectory=coupled)
