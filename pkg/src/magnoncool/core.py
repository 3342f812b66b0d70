"""Physical constants, unit conventions and elementary conversions.

Every rate handled inside the package is an angular frequency in rad/s.
Configuration files, CSV output and the command line use Hz; the helpers
``hz`` and ``to_hz`` are the single conversion boundary.
"""

from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

TWO_PI = 2.0 * np.pi

# 1 emu/cm^3 of magnetization is 1e3 A/m.
EMU_PER_CM3 = 1.0e3


class ConfigurationError(ValueError):
    """Raised for inconsistent or incomplete device descriptions."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _sc.hbar
    mu0: float = _sc.mu_0
    mu_B: float = _sc.physical_constants["Bohr magneton"][0]
    k_B: float = _sc.k
    g_e: float = 2.00232

    def __post_init__(self):
        for name in ("hbar", "mu0", "mu_B", "k_B", "g_e"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"physical constant {name} must be positive")

    @property
    def gamma_e(self) -> float:
        """Free-electron gyromagnetic ratio g_e mu_B / hbar in rad/(s T)."""
        return self.g_e * self.mu_B / self.hbar


CONSTANTS = PhysicalConstants()


def hz(f):
    """Convert a frequency in Hz to an angular frequency in rad/s."""
    return TWO_PI * f


def to_hz(omega):
    """Convert an angular frequency in rad/s to Hz."""
    return omega / TWO_PI


def dbm_to_watts(p_dbm):
    """Power in dBm to power in W."""
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w):
    return 10.0 * np.log10(p_w / 1e-3)


def thermal_occupation(omega, temperature, constants=CONSTANTS):
    """Bose-Einstein occupation 1/(exp(hbar w / kB T) - 1).

    Returns exactly 0 at zero temperature; deep in the quantum regime the
    exponent overflows harmlessly to an occupation of 0.
    """
    omega = np.asarray(omega, dtype=float)
    temperature = np.asarray(temperature, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    if np.any(temperature < 0):
        raise ValueError("temperature must be non-negative")
    with np.errstate(divide="ignore", over="ignore"):
        x = np.where(temperature > 0,
                     constants.hbar * omega / (constants.k_B * np.where(temperature > 0, temperature, 1.0)),
                     np.inf)
        n = 1.0 / np.expm1(x)
    return float(n) if n.ndim == 0 else n
