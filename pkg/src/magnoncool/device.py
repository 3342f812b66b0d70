"""Device geometries and drive descriptions."""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import magnon
from .core import ConfigurationError
from .magnon import CouplingSet, MagnetSpec
from .resonator import ResonatorSpec


class Geometry(enum.Enum):
    """Layout of magnet, resonator wire and static field.

    TOP_CPW: wire perpendicular to the field, a separate magnon driving line
    crosses the magnet.  FORTY_FIVE: wire at 45 deg to the field, no driving
    line; the resonator harmonics drive the magnet through XX coupling.
    """

    TOP_CPW = "top_cpw"
    FORTY_FIVE = "45deg"

    @property
    def projection(self) -> float:
        return 1.0 if self is Geometry.TOP_CPW else 1.0 / np.sqrt(2.0)


class Port(enum.Enum):
    MAGNON_LINE = "magnon_line"
    FEEDLINE = "feedline"


@dataclass(frozen=True)
class DriveSpec:
    power: float
    omega_d: float
    port: Port

    def __post_init__(self):
        if np.any(np.asarray(self.power) < 0):
            raise ConfigurationError("drive power must be non-negative")
        if np.any(np.asarray(self.omega_d) <= 0):
            raise ConfigurationError("drive frequency must be positive")


@dataclass(frozen=True)
class DeviceConfig:
    """A complete device.

    ``kappa_m_ext_override`` replaces the radiative damping computed from the
    magnon driving line.  ``couplings`` is computed from the circuit and the
    magnet when not supplied.  With ``anisotropy`` set, the thin-film
    corrections to the radiative Q and to the XX rates are applied at the
    operating field.
    """

    geometry: Geometry
    resonator: ResonatorSpec
    magnet: MagnetSpec
    wire_width: float
    kappa_m_internal: float
    kappa_m_ext_override: Optional[float] = None
    couplings: Optional[CouplingSet] = None
    anisotropy: bool = False

    def __post_init__(self):
        if not self.wire_width > 0:
            raise ConfigurationError("wire_width must be positive")
        if self.kappa_m_internal < 0:
            raise ConfigurationError("kappa_m_internal must be non-negative")
        if self.geometry is Geometry.TOP_CPW:
            if self.resonator.n_modes != 1:
                raise ConfigurationError("the top-CPW layout uses exactly one resonator mode")
            if self.kappa_m_ext_override is not None and not self.kappa_m_ext_override > 0:
                raise ConfigurationError("the top-CPW layout needs a magnon driving line (kappa_m_ext > 0)")
        else:
            if self.resonator.n_modes < 3:
                raise ConfigurationError("the 45-degree layout needs the fundamental and two harmonics")
            if self.kappa_m_ext_override not in (None, 0.0):
                raise ConfigurationError("the 45-degree layout has no magnon driving line (kappa_m_ext = 0)")
        if self.couplings is None:
            object.__setattr__(self, "couplings", magnon.coupling_set(self))
        elif len(self.couplings.g_xx) != self.resonator.n_modes:
            raise ConfigurationError("couplings.g_xx needs one entry per resonator mode")

    @property
    def harmonics(self):
        """Resonator modes other than the fundamental, in increasing order."""
        w1 = self.resonator.omega_r1
        return tuple(w for w in self.resonator.mode_freqs if not np.isclose(w, w1))

    def kappa_m_ext(self, omega_m):
        """Radiative damping of the magnet into the magnon driving line (rad/s)."""
        if self.geometry is Geometry.FORTY_FIVE:
            return 0.0 * omega_m
        if self.kappa_m_ext_override is not None:
            return self.kappa_m_ext_override + 0.0 * omega_m
        kappa, _ = magnon.magnon_ext_damping(self.magnet, self.wire_width, omega_m,
                                             self.resonator.z0)
        if self.anisotropy:
            b = magnon.field_for_frequency(self.magnet, omega_m)
            kappa = kappa * magnon.anisotropy_q_factor(magnon.h_from_b(b), self.magnet.m_eff)
        return kappa

    def kappa_m(self, omega_m):
        """Total magnon damping kappa_m,i + kappa_m,ext."""
        return self.kappa_m_internal + self.kappa_m_ext(omega_m)

    def g_xx(self, mode: float, b_field=None):
        """XX rate to ``mode``, with the anisotropy enhancement when enabled."""
        g = self.couplings.g_xx[self.resonator.index(mode)]
        if self.anisotropy and b_field is not None:
            g = g * magnon.anisotropy_g_factor(magnon.h_from_b(b_field), self.magnet.m_eff)
        return g

    @property
    def spin_count(self) -> float:
        return magnon.spin_count(self.magnet)
