"""Feedline transmission and two-tone squeezing estimates."""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError
from .magnon import kerr_shift, spin_count


class UnphysicalParameters(ValueError):
    pass


class DivergentVariance(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumPoint:
    omega_p: float
    s21: complex


def s21_notch(omega_p, omega_r_eff, kappa_total_eff, kappa_ext):
    """Side-coupled resonator transmission 1 - (kappa_ext/2) / (i(w_p - w_r) + kappa/2)."""
    if kappa_ext > kappa_total_eff:
        raise UnphysicalParameters(
            f"kappa_ext ({kappa_ext:g}) exceeds the total damping ({kappa_total_eff:g})")
    omega_p = np.asarray(omega_p, dtype=float)
    return 1.0 - (kappa_ext / 2.0) / (1j * (omega_p - omega_r_eff) + kappa_total_eff / 2.0)


def s21_spectrum(omega_r_eff, kappa_total_eff, kappa_ext, probe_grid):
    s = s21_notch(probe_grid, omega_r_eff, kappa_total_eff, kappa_ext)
    return [SpectrumPoint(float(w), complex(v)) for w, v in zip(np.asarray(probe_grid), s)]


def spectrum_columns(points):
    """CSV columns for a list of ``SpectrumPoint``: Hz, Re, Im, |S21|, |S21| in dB."""
    w = np.array([p.omega_p for p in points])
    s = np.array([p.s21 for p in points])
    mag = np.abs(s)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return {"probe_freq_hz": w / (2 * np.pi), "re_s21": s.real, "im_s21": s.imag,
            "abs_s21": mag, "abs_s21_db": db}


@dataclass(frozen=True)
class SqueezingInputs:
    """Red-sideband magnon number, rates in rad/s, thermal occupation of r1."""

    n_minus: float
    g_xz1: float
    kappa_r1: float
    kappa_m: float
    n_th: float

    def __post_init__(self):
        if min(self.n_minus, self.g_xz1, self.n_th) < 0:
            raise ConfigurationError("squeezing inputs must be non-negative")
        if not (self.kappa_m > 0 and self.kappa_r1 > 0):
            raise ConfigurationError("kappa_m and kappa_r1 must be positive")


def cooperativity(inputs: SqueezingInputs) -> float:
    """C = n_- g**2 / (kappa_r1 kappa_m)."""
    return inputs.n_minus * inputs.g_xz1 ** 2 / (inputs.kappa_r1 * inputs.kappa_m)


@dataclass(frozen=True)
class SqueezingResult:
    variance: float        # 2 <dX1^2>, vacuum = 1
    squeezing_db: float    # -10 log10(variance), positive below vacuum
    cooperativity: float
    low_cooperativity: bool


def squeezed_variance(inputs: SqueezingInputs, cooperativity_override: float = None,
                      low_c_threshold: float = 10.0) -> SqueezingResult:
    """Minimum variance of the squeezed quadrature under balanced two-tone driving.

    2 <dX1^2> = (kappa_r1/kappa_m)(2 n_th + 1) + sqrt((2 n_th + 1) / C)

    Valid for C >> 1; ``low_cooperativity`` is set (and a warning issued)
    below ``low_c_threshold``.  ``cooperativity_override`` replaces the C
    computed from the inputs.
    """
    c = cooperativity(inputs) if cooperativity_override is None else float(cooperativity_override)
    if c <= 0:
        raise DivergentVariance("the squeezed variance diverges at zero cooperativity")
    thermal = 2.0 * inputs.n_th + 1.0
    v = inputs.kappa_r1 / inputs.kappa_m * thermal + np.sqrt(thermal / c)
    low = c < low_c_threshold
    if low:
        warnings.warn(f"cooperativity {c:.3g} is not >> 1; the variance estimate is rough",
                      stacklevel=2)
    return SqueezingResult(variance=float(v), squeezing_db=float(-10.0 * np.log10(v)),
                           cooperativity=float(c), low_cooperativity=bool(low))


@dataclass(frozen=True)
class ValidityItem:
    value: float
    threshold: float
    ok: bool


def squeezing_validity(device, inputs: SqueezingInputs, omega_r1: float = None,
                       cooperativity_override: float = None):
    """Population, Kerr, cooperativity and sideband-resolution checks.

    Thresholds: n_-/N < 0.01, K n_-/kappa_m < 1, C >= 10, kappa_m/omega_r1 < 1.
    """
    omega_r1 = device.resonator.omega_r1 if omega_r1 is None else omega_r1
    n = spin_count(device.magnet)
    c = cooperativity(inputs) if cooperativity_override is None else cooperativity_override
    pop = inputs.n_minus / n
    kerr = kerr_shift(device.magnet, inputs.n_minus) / inputs.kappa_m
    resolved = inputs.kappa_m / omega_r1
    return {
        "population_ratio": ValidityItem(pop, 0.01, pop < 0.01),
        "kerr_ratio": ValidityItem(kerr, 1.0, kerr < 1.0),
        "cooperativity": ValidityItem(c, 10.0, c >= 10.0),
        "sideband_resolution": ValidityItem(resolved, 1.0, resolved < 1.0),
    }
