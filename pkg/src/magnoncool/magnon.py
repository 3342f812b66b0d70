"""Magnetic element: spin count, coupling rates, radiative damping, Kerr shift.

Material presets
----------------
``YIG``
    M_s = 140 emu/cm^3, free-electron gyromagnetic ratio, 5 x 5 x 1 um^3,
    Kerr coefficient 2 pi x 0.01 Hz (shape-anisotropy estimate for this size).
``VTCNE``
    500 x 5 x 1 um^3.  M_s is back-derived from a spin count of 2.2e12 in that
    volume (M_s = N mu_B / V = 8.16 emu/cm^3).  gamma is set so that the
    Larmor frequency at 0.709305 T is exactly 20 GHz (gamma / 2 pi = 28.197
    GHz/T).  No Kerr estimate exists for this element, so K = 0.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .core import CONSTANTS, EMU_PER_CM3, TWO_PI, ConfigurationError
from .resonator import i_zpf


@dataclass(frozen=True)
class MagnetSpec:
    """Uniformly magnetized element.

    ``m_s`` and ``m_eff`` in A/m, ``dims`` = (length, width, thickness) in m,
    ``gamma`` in rad/(s T), ``kerr_k`` in rad/s per magnon.
    """

    m_s: float
    dims: Tuple[float, float, float]
    gamma: float = CONSTANTS.gamma_e
    m_eff: float = 0.0
    kerr_k: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(float(d) for d in self.dims))
        if len(self.dims) != 3:
            raise ConfigurationError("dims must be (length, width, thickness)")
        if not self.m_s > 0:
            raise ConfigurationError("m_s must be positive")
        if any(d < 0 for d in self.dims):
            raise ConfigurationError("magnet dimensions must be non-negative")
        if not self.gamma > 0:
            raise ConfigurationError("gamma must be positive")
        if self.kerr_k < 0:
            raise ConfigurationError("kerr_k must be non-negative")

    @property
    def volume(self) -> float:
        return float(np.prod(self.dims))


@dataclass(frozen=True)
class CouplingSet:
    """Coupling rates (rad/s) of one device.

    ``g_xx`` is aligned with the resonator's ``mode_freqs``; the fundamental
    carries no XX term.  ``big_g`` is the magnon frequency shift per unit flux
    (rad/s per Wb) and ``flux_zpf`` the matching zero-point flux.
    """

    g_xz1: float
    g_xx: tuple
    big_g: float
    flux_zpf: float

    def __post_init__(self):
        object.__setattr__(self, "g_xx", tuple(float(g) for g in self.g_xx))
        if not np.isclose(self.big_g * self.flux_zpf, self.g_xz1, rtol=1e-9, atol=0):
            raise ConfigurationError("g_xz1 must equal big_g * flux_zpf")


VTCNE_SPIN_COUNT = 2.2e12
VTCNE_DIMS = (500e-6, 5e-6, 1e-6)
VTCNE_LINECUT_FIELD = 0.709305

YIG = MagnetSpec(m_s=140.0 * EMU_PER_CM3, dims=(5e-6, 5e-6, 1e-6),
                 m_eff=140.0 * EMU_PER_CM3, kerr_k=TWO_PI * 0.01, name="YIG")
VTCNE = MagnetSpec(m_s=VTCNE_SPIN_COUNT * CONSTANTS.mu_B / float(np.prod(VTCNE_DIMS)),
                   dims=VTCNE_DIMS, gamma=TWO_PI * 20e9 / VTCNE_LINECUT_FIELD,
                   name="VTCNE")

MATERIALS = {"YIG": YIG, "VTCNE": VTCNE}


def material_preset(name: str, **overrides) -> MagnetSpec:
    """Look up a material by name (case-insensitive) and apply field overrides."""
    key = name.upper().replace("[", "").replace("]", "").replace("_", "")
    if key == "VTCNEX":
        key = "VTCNE"
    if key not in MATERIALS:
        raise ConfigurationError(f"unknown material {name!r}; known: {sorted(MATERIALS)}")
    return replace(MATERIALS[key], **overrides) if overrides else MATERIALS[key]


def spin_count(mag: MagnetSpec, constants=CONSTANTS) -> float:
    """N = M_s V / mu_B."""
    return mag.m_s * mag.volume / constants.mu_B


def b_rf(wire_width, constants=CONSTANTS):
    """Field at the spins per unit wire current, mu0 / 2w, in T/A."""
    if np.any(np.asarray(wire_width) <= 0):
        raise ValueError("wire_width must be positive")
    return constants.mu0 / (2.0 * wire_width)


def larmor_frequency(mag: MagnetSpec, b_field):
    """omega_m = gamma B (anisotropy neglected)."""
    if np.any(np.asarray(b_field) < 0):
        raise ValueError("b_field must be non-negative")
    return mag.gamma * b_field


def field_for_frequency(mag: MagnetSpec, omega_m):
    return omega_m / mag.gamma


def frequency_per_current(mag: MagnetSpec, wire_width: float, constants=CONSTANTS) -> float:
    """d omega_m / dI at the current antinode: gamma mu0 / 2w."""
    return mag.gamma * b_rf(wire_width, constants)


def flux_zpf(resonator, constants=CONSTANTS) -> float:
    """Zero-point flux normalised to the effective mass C1 = 1/sqrt(omega_r1 Z0).

    With this normalisation hbar G**2 = 2 C1 omega_r1 g_xz1**2, which is the
    identity linking the flux equation of motion to the backaction formulas.
    """
    c1 = 1.0 / np.sqrt(resonator.omega_r1 * resonator.z0)
    return np.sqrt(constants.hbar / (2.0 * c1 * resonator.omega_r1))


def g_xz(device, constants=CONSTANTS) -> float:
    """XZ rate between the fundamental mode and the Kittel mode (rad/s).

    gamma (mu0/2w) I_ZPF, times the projection of the rf field of the wire
    onto the precession plane (1 for the top-CPW layout, 1/sqrt(2) at 45 deg).
    """
    return (device.geometry.projection
            * frequency_per_current(device.magnet, device.wire_width, constants)
            * i_zpf(device.resonator, constants))


def g_xx_harmonic(device, harmonic_freq: float, constants=CONSTANTS) -> float:
    """XX rate between the Kittel mode and one resonator harmonic (rad/s).

    Current at the antinode of harmonic k of a lambda/4 line of fundamental
    omega_r1 gives g = g_e mu_B b_rf sqrt(omega_r1 omega_k) sqrt(N / 2 pi hbar Z0),
    scaled by the geometric projection.
    """
    res = device.resonator
    n = spin_count(device.magnet, constants)
    if n <= 0:
        raise ConfigurationError("XX coupling needs a magnet with N > 0")
    return (device.geometry.projection * constants.g_e * constants.mu_B
            * b_rf(device.wire_width, constants)
            * np.sqrt(res.omega_r1 * harmonic_freq)
            * np.sqrt(n / (2.0 * np.pi * constants.hbar * res.z0)))


def coupling_set(device, constants=CONSTANTS) -> CouplingSet:
    res = device.resonator
    g1 = g_xz(device, constants)
    phi = flux_zpf(res, constants)
    g_xx = tuple(0.0 if np.isclose(w, res.omega_r1) else g_xx_harmonic(device, w, constants)
                 for w in res.mode_freqs)
    return CouplingSet(g_xz1=g1, g_xx=g_xx, big_g=g1 / phi, flux_zpf=phi)


def magnon_ext_damping(mag: MagnetSpec, wire_width: float, omega_m, z0: float,
                       constants=CONSTANTS):
    """Radiative damping of the Kittel mode into a magnon driving line.

    Returns
    -------
    kappa_ext : float
        b_rf**2 omega_m mu_B N gamma / (2 Z0), rad/s.
    q_c : float
        omega_m / kappa_ext = 2 Z0 / (b_rf**2 mu_B N gamma), independent of omega_m.
    """
    b = b_rf(wire_width, constants)
    moment = constants.mu_B * spin_count(mag, constants)
    kappa = b ** 2 * omega_m * moment * mag.gamma / (2.0 * z0)
    q_c = 2.0 * z0 / (b ** 2 * moment * mag.gamma) if moment > 0 else np.inf
    return kappa, q_c


def _anisotropy_ratio(h_field, m_eff):
    h_field = np.asarray(h_field, dtype=float)
    if np.any(h_field <= 0):
        raise ValueError("h_field must be positive")
    ratio = (h_field + m_eff) / h_field
    if np.any(ratio <= 0):
        raise ValueError("h_field + m_eff must be positive")
    return ratio


def anisotropy_q_factor(h_field, m_eff):
    """Divisor sqrt((H + M_eff)/H) on the radiative Q of a thin in-plane film."""
    r = np.sqrt(_anisotropy_ratio(h_field, m_eff))
    return float(r) if np.ndim(r) == 0 else r


def anisotropy_g_factor(h_field, m_eff):
    """Multiplier ((H + M_eff)/H)**(1/4) on the XX rate."""
    r = _anisotropy_ratio(h_field, m_eff) ** 0.25
    return float(r) if np.ndim(r) == 0 else r


def h_from_b(b_field, constants=CONSTANTS):
    """Applied field H = B / mu0 in A/m."""
    return b_field / constants.mu0


def kerr_shift(mag: MagnetSpec, n_m):
    if np.any(np.asarray(n_m) < 0):
        raise ValueError("n_m must be non-negative")
    return mag.kerr_k * n_m


def with_material(mag: MagnetSpec, other: MagnetSpec, keep_dims: bool = True,
                  name: Optional[str] = None) -> MagnetSpec:
    """Swap the material of ``mag`` for ``other`` while keeping its geometry."""
    return replace(other, dims=mag.dims if keep_dims else other.dims,
                   name=name or other.name)
