"""Driven steady states and dynamical backaction on the fundamental mode.

Detuning conventions follow the two equations of motion they come from:

* top-CPW: ``delta = omega_d - omega_m`` (rotating frame of the drive on the
  magnon line);
* 45-degree: ``Delta_m = omega_m - omega_d`` and ``Delta_k = omega_k - omega_d``
  for each driven harmonic.

Callers working with a single user-facing detuning should pass
``omega_d = omega_m + delta`` in both cases.  Every function broadcasts over
numpy arrays of field, drive frequency and power.
"""

from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS, ConfigurationError
from .device import DeviceConfig, DriveSpec, Geometry, Port
from .magnon import larmor_frequency, spin_count
from .resonator import coupling_q, external_damping, total_damping


@dataclass(frozen=True)
class ValidityThresholds:
    """Ratio limits for the approximations behind the backaction formulas."""

    weak_coupling: float = 0.1   # sqrt(n_m) g_xz1 / kappa_m
    kerr: float = 1.0            # K n_m / kappa_m
    population: float = 0.01     # n_m / N


DEFAULT_THRESHOLDS = ValidityThresholds()


@dataclass(frozen=True)
class BackactionResult:
    """Frequency shift and extra damping of the fundamental mode (rad/s).

    Fields are scalars or arrays of a common broadcast shape.
    """

    delta_omega_r1: object
    delta_kappa_r1: object
    n_m: object
    weak_coupling_ok: object
    kerr_ok: object
    population_ok: object


def _flags(device, n_m, kappa_m, thresholds):
    g = device.couplings.g_xz1
    n = spin_count(device.magnet)
    with np.errstate(divide="ignore", invalid="ignore"):
        weak = np.sqrt(n_m) * g / kappa_m < thresholds.weak_coupling
        kerr = device.magnet.kerr_k * n_m / kappa_m < thresholds.kerr
        pop = n_m / n < thresholds.population if n > 0 else np.zeros_like(weak)
    return weak, kerr, pop


def _scalarize(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def _result(device, n_m, dw, dk, kappa_m, thresholds):
    weak, kerr, pop = _flags(device, n_m, kappa_m, thresholds)
    return BackactionResult(*(_scalarize(v) for v in (dw, dk, n_m, weak, kerr, pop)))


# -- top-CPW layout -----------------------------------------------------------

def magnon_number_direct(device: DeviceConfig, drive: DriveSpec, omega_m):
    """Lorentzian magnon population under a magnon-line drive.

    n_m = (2P / hbar omega_d) kappa_m,ext / (kappa_m**2 + 4 (omega_d - omega_m)**2)
    """
    if device.geometry is not Geometry.TOP_CPW or drive.port is not Port.MAGNON_LINE:
        raise ConfigurationError("direct magnon drive needs the top-CPW layout and the magnon line")
    kappa_ext = device.kappa_m_ext(omega_m)
    kappa_m = device.kappa_m(omega_m)
    detuning = drive.omega_d - omega_m
    return (2.0 * drive.power / (CONSTANTS.hbar * drive.omega_d)
            * kappa_ext / (kappa_m ** 2 + 4.0 * detuning ** 2))


def _top_shifts(n_m, g, kappa_m, delta, omega_r1, omega):
    half = kappa_m / 2.0
    lo = delta - omega
    hi = delta + omega
    pref = n_m * g ** 2 * omega_r1 / omega
    dw = pref * (hi / (hi ** 2 + half ** 2) + lo / (lo ** 2 + half ** 2))
    dk = pref * (kappa_m / (hi ** 2 + half ** 2) - kappa_m / (lo ** 2 + half ** 2))
    return dw, dk


def backaction_top(device: DeviceConfig, n_m, delta, omega_m, probe_omega=None, *,
                   thresholds=DEFAULT_THRESHOLDS, self_consistent=False,
                   max_iter=100, rtol=1e-13) -> BackactionResult:
    """Spring shift and optical-damping analogue for the top-CPW layout.

    Parameters
    ----------
    n_m : float or array
        Mean magnon number set by the drive.
    delta : float or array
        omega_d - omega_m, rad/s.
    omega_m : float
        Kittel frequency; fixes the radiative part of kappa_m.
    probe_omega : float, optional
        Frequency at which the magnon susceptibility is evaluated.  Defaults to
        omega_r1.  With ``self_consistent`` the probe is iterated to
        omega_r1 + delta_omega_r1.
    """
    omega_r1 = device.resonator.omega_r1
    omega = omega_r1 if probe_omega is None else probe_omega
    kappa_m = device.kappa_m(omega_m)
    g = device.couplings.g_xz1
    dw, dk = _top_shifts(n_m, g, kappa_m, delta, omega_r1, omega)
    if self_consistent:
        for _ in range(max_iter):
            omega = omega_r1 + dw
            dw_new, dk = _top_shifts(n_m, g, kappa_m, delta, omega_r1, omega)
            done = np.all(np.abs(dw_new - dw) <= rtol * omega_r1)
            dw = dw_new
            if done:
                break
    return _result(device, n_m, dw, dk, kappa_m, thresholds)


def top_operating_point(device: DeviceConfig, power, delta, omega_m, probe_omega=None,
                        thresholds=DEFAULT_THRESHOLDS) -> BackactionResult:
    """Backaction with the Lorentzian population at drive omega_d = omega_m + delta."""
    drive = DriveSpec(power=power, omega_d=omega_m + delta, port=Port.MAGNON_LINE)
    n_m = magnon_number_direct(device, drive, omega_m)
    return backaction_top(device, n_m, delta, omega_m, probe_omega, thresholds=thresholds)


# -- 45-degree layout ---------------------------------------------------------

def _check_45(device, drive=None):
    if device.geometry is not Geometry.FORTY_FIVE:
        raise ConfigurationError("this operation needs the 45-degree layout")
    if drive is not None and drive.port is not Port.FEEDLINE:
        raise ConfigurationError("the 45-degree layout is driven through the feedline")


def _harmonic_terms(device, b_field):
    res = device.resonator
    modes = device.harmonics
    return [(w, total_damping(res, w), external_damping(res, w), coupling_q(res, w),
             device.g_xx(w, b_field)) for w in modes]


def feedline_drive_rates(device: DeviceConfig, drive: DriveSpec):
    """Drive term sqrt(2 P Q_c / hbar omega_d**2) kappa_ext / 2 for each harmonic."""
    _check_45(device, drive)
    res = device.resonator
    return [np.sqrt(2.0 * drive.power * coupling_q(res, w) / (CONSTANTS.hbar * drive.omega_d ** 2))
            * external_damping(res, w) / 2.0 for w in device.harmonics]


def driven_amplitudes_45(device: DeviceConfig, drive: DriveSpec, b_field, method="exact"):
    """Steady-state amplitudes of the driven harmonics and of the Kittel mode.

    In the frame of the drive, each harmonic k obeys
    ``d_k alpha_k - i g_k beta = f_k`` and the magnet
    ``d_m beta - i sum_k g_k alpha_k = 0``, with
    ``d_x = i (omega_d - omega_x) - kappa_x / 2``.

    ``method="exact"`` eliminates this system in closed form with every
    harmonic driven at once:
    ``beta = i sum_k (g_k f_k / d_k) / (d_m + sum_k g_k**2 / d_k)``.

    ``method="nested"`` evaluates each cavity amplitude as if only its own port
    were driven (nested continued-fraction denominators, two harmonics only)
    and then forms ``beta = i sum_k g_k alpha_k / d_m``.  It neglects the
    interference between the two feed paths and is kept for comparison.

    Returns
    -------
    tuple
        ``(alpha_r2, alpha_r3, ..., beta_m)``, complex.
    """
    _check_45(device, drive)
    omega_m = larmor_frequency(device.magnet, b_field)
    omega_d = drive.omega_d
    d_m = 1j * (omega_d - omega_m) - device.kappa_m(omega_m) / 2.0
    terms = _harmonic_terms(device, b_field)
    f = feedline_drive_rates(device, drive)
    d = [1j * (omega_d - w) - kappa / 2.0 for (w, kappa, _, _, _) in terms]
    g = [t[4] for t in terms]

    if method == "exact":
        num = sum(gk * fk / dk for gk, fk, dk in zip(g, f, d))
        den = d_m + sum(gk ** 2 / dk for gk, dk in zip(g, d))
        beta = 1j * num / den
        alphas = [(fk + 1j * gk * beta) / dk for gk, fk, dk in zip(g, f, d)]
    elif method == "nested":
        if len(terms) != 2:
            raise ConfigurationError("the nested form is defined for two harmonics")
        (d2, d3), (g2, g3), (f2, f3) = d, g, f
        a2 = f2 / (d2 + g2 ** 2 / (d_m + g3 ** 2 / d3))
        a3 = f3 / (d3 + g3 ** 2 / (d_m + g2 ** 2 / d2))
        alphas = [a2, a3]
        beta = 1j * g2 / d_m * a2 + 1j * g3 / d_m * a3
    else:
        raise ValueError(f"unknown method {method!r}")
    return (*alphas, beta)


def steady_state_system(device: DeviceConfig, drive: DriveSpec, b_field: float):
    """Dense linear system ``M x = rhs`` for x = (alpha_r2, alpha_r3, ..., beta)."""
    _check_45(device, drive)
    omega_m = larmor_frequency(device.magnet, b_field)
    terms = _harmonic_terms(device, b_field)
    f = feedline_drive_rates(device, drive)
    n = len(terms)
    m = np.zeros((n + 1, n + 1), dtype=complex)
    for k, (w, kappa, _, _, g) in enumerate(terms):
        m[k, k] = 1j * (drive.omega_d - w) - kappa / 2.0
        m[k, n] = -1j * g
        m[n, k] = -1j * g
    m[n, n] = 1j * (drive.omega_d - omega_m) - device.kappa_m(omega_m) / 2.0
    rhs = np.array(list(f) + [0.0], dtype=complex)
    return m, rhs


def magnon_number_45(device: DeviceConfig, drive: DriveSpec, b_field, method="exact"):
    return np.abs(driven_amplitudes_45(device, drive, b_field, method)[-1]) ** 2


def susceptibility_terms_45(device: DeviceConfig, omega_d, b_field, probe_omega=None):
    """Real and imaginary parts (A, B, C, D) of the dressed magnon response.

    A + iC and B - iD are the denominators of the magnon response at +omega
    and -omega once the harmonics have been eliminated.
    """
    _check_45(device)
    omega = device.resonator.omega_r1 if probe_omega is None else probe_omega
    omega_m = larmor_frequency(device.magnet, b_field)
    delta_m = omega_m - omega_d
    half_m = device.kappa_m(omega_m) / 2.0
    a = -delta_m + omega
    b = -delta_m - omega
    c = half_m + 0.0 * a
    d = half_m + 0.0 * b
    for (w, kappa, _, _, g) in _harmonic_terms(device, b_field):
        delta_k = w - omega_d
        up = -delta_k + omega
        dn = -delta_k - omega
        lor_up = kappa ** 2 / 4.0 + up ** 2
        lor_dn = kappa ** 2 / 4.0 + dn ** 2
        a = a - g ** 2 * up / lor_up
        b = b - g ** 2 * dn / lor_dn
        c = c + g ** 2 * (kappa / 2.0) / lor_up
        d = d + g ** 2 * (kappa / 2.0) / lor_dn
    return a, b, c, d


def backaction_45(device: DeviceConfig, drive: DriveSpec, b_field, probe_omega=None, *,
                  n_m=None, method="exact", thresholds=DEFAULT_THRESHOLDS) -> BackactionResult:
    """Backaction on the fundamental when the magnet is dressed by two harmonics.

    delta_omega_r1 = n g**2 (omega_r1/omega) (A/(A**2+C**2) + B/(B**2+D**2))
    delta_kappa_r1 = n g**2 (omega_r1/omega) (2C/(A**2+C**2) - 2D/(B**2+D**2))

    The relative sign in the damping follows from the imaginary parts of
    1/(A + iC) and 1/(B - iD); it reduces to the top-CPW result when the XX
    couplings vanish.  ``n_m`` may be supplied to bypass the driven population.
    """
    _check_45(device, drive)
    omega_r1 = device.resonator.omega_r1
    omega = omega_r1 if probe_omega is None else probe_omega
    if n_m is None:
        n_m = magnon_number_45(device, drive, b_field, method)
    a, b, c, d = susceptibility_terms_45(device, drive.omega_d, b_field, omega)
    pref = n_m * device.couplings.g_xz1 ** 2 * omega_r1 / omega
    dw = pref * (a / (a ** 2 + c ** 2) + b / (b ** 2 + d ** 2))
    dk = pref * (2.0 * c / (a ** 2 + c ** 2) - 2.0 * d / (b ** 2 + d ** 2))
    omega_m = larmor_frequency(device.magnet, b_field)
    return _result(device, n_m, dw, dk, device.kappa_m(omega_m), thresholds)


def hybrid_eigenmodes(device: DeviceConfig, b_field: float):
    """Complex eigenfrequencies of the harmonics hybridized with the Kittel mode.

    Eigenvalues of the non-Hermitian coupled-mode matrix with diagonal
    omega_x - i kappa_x / 2 and XX couplings off the diagonal, sorted by
    real part.
    """
    _check_45(device)
    omega_m = larmor_frequency(device.magnet, b_field)
    terms = _harmonic_terms(device, b_field)
    n = len(terms)
    h = np.zeros((n + 1, n + 1), dtype=complex)
    for k, (w, kappa, _, _, g) in enumerate(terms):
        h[k, k] = w - 0.5j * kappa
        h[k, n] = h[n, k] = g
    h[n, n] = omega_m - 0.5j * device.kappa_m(omega_m)
    ev = np.linalg.eigvals(h)
    return ev[np.argsort(ev.real, kind="stable")]
