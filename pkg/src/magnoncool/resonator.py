"""Circuit model of a quarter-wave coplanar-waveguide resonator.

The resonator is shorted at one end (current antinode, where the magnet sits)
and capacitively coupled to a feedline at the open end.  Lumped equivalents
are obtained by integrating the line capacitance over a quarter wavelength;
the zero-point current follows from equating the zero-point energy to the
inductive energy.

External damping of each harmonic can be given in three ways, in order of
precedence: an explicit per-mode value, a calibration pair (one known rate at
a reference frequency, scaled as omega**2 because the coupling capacitor is a
high-pass element), or the coupling capacitance itself.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import CONSTANTS, ConfigurationError


@dataclass(frozen=True)
class ResonatorSpec:
    """Quarter-wave resonator and the harmonics used in a device.

    Attributes
    ----------
    z0 : float
        Characteristic impedance in Ohm.
    omega_r1 : float
        Fundamental mode, rad/s.
    mode_freqs : tuple of float
        Modes in play (rad/s), strictly increasing.  Must contain ``omega_r1``.
    kappa_internal : tuple of float
        Internal damping of each mode in ``mode_freqs`` (rad/s).
    coupling_capacitance : float, optional
        Feedline coupling capacitance C_c in F.
    kappa_ext_override : tuple, optional
        Per-mode explicit external damping (rad/s); ``None`` entries fall
        through to the calibration pair or to ``coupling_capacitance``.
    kappa_ext_calibration : (omega_ref, kappa_ref), optional
        Known external damping ``kappa_ref`` at frequency ``omega_ref``.
    """

    z0: float
    omega_r1: float
    mode_freqs: tuple
    kappa_internal: tuple
    coupling_capacitance: Optional[float] = None
    kappa_ext_override: Optional[tuple] = None
    kappa_ext_calibration: Optional[tuple] = None
    harmonic_rtol: float = field(default=0.01, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mode_freqs", tuple(float(w) for w in self.mode_freqs))
        object.__setattr__(self, "kappa_internal", tuple(float(k) for k in self.kappa_internal))
        if self.kappa_ext_override is not None:
            object.__setattr__(self, "kappa_ext_override", tuple(
                None if k is None else float(k) for k in self.kappa_ext_override))

        if not self.z0 > 0:
            raise ConfigurationError("z0 must be positive")
        if not self.omega_r1 > 0:
            raise ConfigurationError("omega_r1 must be positive")
        w = np.array(self.mode_freqs)
        if w.size == 0 or np.any(np.diff(w) <= 0):
            raise ConfigurationError("mode_freqs must be non-empty and strictly increasing")
        if not np.isclose(w, self.omega_r1, rtol=1e-12).any():
            raise ConfigurationError("mode_freqs must include the fundamental omega_r1")
        if len(self.kappa_internal) != w.size:
            raise ConfigurationError("kappa_internal needs one entry per mode")
        if any(k < 0 for k in self.kappa_internal):
            raise ConfigurationError("internal damping rates must be non-negative")
        if self.kappa_ext_override is not None:
            if len(self.kappa_ext_override) != w.size:
                raise ConfigurationError("kappa_ext_override needs one entry per mode")
            if any(k is not None and k < 0 for k in self.kappa_ext_override):
                raise ConfigurationError("external damping rates must be non-negative")
        if self.coupling_capacitance is not None and self.coupling_capacitance < 0:
            raise ConfigurationError("coupling_capacitance must be non-negative")
        if self.kappa_ext_calibration is not None:
            omega_ref, kappa_ref = self.kappa_ext_calibration
            if not (omega_ref > 0 and kappa_ref >= 0):
                raise ConfigurationError("calibration needs omega_ref > 0 and kappa_ref >= 0")

        # Quarter-wave harmonics sit at odd multiples of the fundamental.
        ratio = w / self.omega_r1
        nearest = 2 * np.round((ratio - 1) / 2) + 1
        off = np.abs(ratio - nearest) > self.harmonic_rtol * nearest
        if off.any():
            warnings.warn(f"modes {w[off]} rad/s are not odd multiples of omega_r1",
                          stacklevel=3)

    def index(self, mode: float) -> int:
        hits = np.flatnonzero(np.isclose(self.mode_freqs, mode, rtol=1e-9, atol=0))
        if hits.size == 0:
            raise ConfigurationError(f"{mode} rad/s is not a mode of this resonator")
        return int(hits[0])

    @property
    def n_modes(self) -> int:
        return len(self.mode_freqs)


def total_capacitance(spec: ResonatorSpec) -> float:
    """C_total = (1 / 4 Z0) (2 pi / omega_r1), the line capacitance of lambda/4."""
    return (1.0 / (4.0 * spec.z0)) * (2.0 * np.pi / spec.omega_r1)


def total_inductance(spec: ResonatorSpec) -> float:
    return total_capacitance(spec) * spec.z0 ** 2


def i_zpf(spec: ResonatorSpec, constants=CONSTANTS) -> float:
    """Zero-point current at the current antinode, sqrt(2 hbar / pi Z0) omega_r1."""
    return np.sqrt(2.0 * constants.hbar / (np.pi * spec.z0)) * spec.omega_r1


def i_zpf_half_wave(z0: float, omega: float, constants=CONSTANTS) -> float:
    """Zero-point antinode current of a lambda/2 line (twice the lambda/4 inductance)."""
    l_total = z0 * np.pi / omega
    return np.sqrt(constants.hbar * omega / l_total)


def i_zpf_lumped(z: float, omega: float, constants=CONSTANTS) -> float:
    """Zero-point current of a lumped LC with L = Z / omega."""
    return np.sqrt(constants.hbar * omega / (2.0 * z / omega))


def external_damping(spec: ResonatorSpec, mode: float) -> float:
    """External (feedline) damping rate of one mode, rad/s."""
    i = spec.index(mode)
    if spec.kappa_ext_override is not None and spec.kappa_ext_override[i] is not None:
        return spec.kappa_ext_override[i]
    if spec.kappa_ext_calibration is not None:
        omega_ref, kappa_ref = spec.kappa_ext_calibration
        return kappa_ref * (mode / omega_ref) ** 2
    if spec.coupling_capacitance is not None:
        return spec.z0 * mode ** 2 * spec.coupling_capacitance ** 2 / total_capacitance(spec)
    raise ConfigurationError(
        "external damping needs an explicit value, a calibration pair or a coupling capacitance")


def coupling_q(spec: ResonatorSpec, mode: float) -> float:
    kappa = external_damping(spec, mode)
    if kappa == 0:
        raise ZeroDivisionError("coupling Q is undefined for zero external damping")
    return mode / kappa


def total_damping(spec: ResonatorSpec, mode: float) -> float:
    """kappa = kappa_internal + kappa_ext for one mode."""
    return spec.kappa_internal[spec.index(mode)] + external_damping(spec, mode)


def calibrated_capacitance(spec: ResonatorSpec, omega_ref: float, kappa_ref: float) -> float:
    """Coupling capacitance that reproduces ``kappa_ref`` at ``omega_ref``."""
    return np.sqrt(kappa_ref * total_capacitance(spec) / spec.z0) / omega_ref

