"""Dynamical backaction and squeezing in magnon-resonator hybrid circuits."""

from .core import (CONSTANTS, ConfigurationError, NumericalError, PhysicalConstants,
                   dbm_to_watts, hz, thermal_occupation, to_hz, watts_to_dbm)
from .device import DeviceConfig, DriveSpec, Geometry, Port
from .dynamics import (BackactionResult, backaction_45, backaction_top, driven_amplitudes_45,
                       hybrid_eigenmodes, magnon_number_45, magnon_number_direct,
                       steady_state_system, susceptibility_terms_45, top_operating_point)
from .magnon import (VTCNE, YIG, CouplingSet, MagnetSpec, kerr_shift, larmor_frequency,
                     magnon_ext_damping, material_preset, spin_count)
from .resonator import ResonatorSpec, external_damping, i_zpf, total_capacitance, total_inductance

__version__ = "0.1.0"
