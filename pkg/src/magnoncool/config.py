"""Configuration files.

A configuration is a TOML document (JSON with the same layout is also
accepted) with the sections ``[device]``, ``[resonator]``, ``[magnet]``,
``[couplings]``, ``[drive]``, ``[sweep]``, ``[spectrum]`` and ``[squeeze]``.
Frequencies are in Hz, fields in T, powers in dBm and lengths in m; see
``presets/*.toml`` for annotated examples.  Unknown keys are rejected.
"""

import copy
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import EMU_PER_CM3, ConfigurationError, dbm_to_watts, hz
from .device import DeviceConfig, DriveSpec, Geometry, Port
from .magnon import CouplingSet, flux_zpf, larmor_frequency, material_preset
from .resonator import ResonatorSpec


class ConfigParseError(ConfigurationError):
    pass


class ConfigValidationError(ConfigurationError):
    def __init__(self, key, constraint):
        super().__init__(f"{key}: {constraint}")
        self.key = key


PRESETS = ("table1_top_cpw", "table2_45deg")

_SCHEMA = {
    "device": {"geometry", "wire_width_m", "kappa_m_internal_hz", "kappa_m_ext_hz", "anisotropy"},
    "resonator": {"z0_ohm", "fundamental_hz", "mode_freqs_hz", "kappa_internal_hz",
                  "kappa_ext_hz", "kappa_ext_calibration", "coupling_capacitance_f"},
    "magnet": {"material", "dims_m", "ms_emu_cm3", "gamma_hz_per_t", "meff_emu_cm3", "kerr_hz"},
    "couplings": {"g_xz1_hz", "g_xx_hz"},
    "drive": {"power_dbm", "port", "magnon_freq_hz", "b_field_t", "detuning_hz",
              "drive_freq_hz", "temperature_k"},
    "sweep": {"b_field_t", "drive_freq_hz", "detuning_hz", "workers"},
    "spectrum": {"span_hz", "points", "center_hz"},
    "squeeze": {"power_dbm", "cooperativity", "n_th", "temperature_k"},
}
_REQUIRED = {"device", "resonator", "magnet", "drive"}


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ConfigValidationError("sweep axis", "count must be an integer >= 2")
        if not self.lo < self.hi:
            raise ConfigValidationError("sweep axis", "min must be < max")

    def values(self):
        import numpy as np
        return np.linspace(self.lo, self.hi, int(self.count))


@dataclass(frozen=True)
class SweepGrid:
    """Field axis (T) and one frequency axis (Hz): drive frequency or detuning."""

    b_field: Optional[Axis] = None
    drive_freq: Optional[Axis] = None
    detuning: Optional[Axis] = None

    def __post_init__(self):
        if (self.drive_freq is None) == (self.detuning is None):
            raise ConfigValidationError("sweep", "give exactly one of drive_freq_hz and detuning_hz")


@dataclass(frozen=True)
class RunConfig:
    device: DeviceConfig
    power: float                      # W
    port: Port
    omega_m: Optional[float]          # top-CPW operating point
    b_field: Optional[float]          # 45-degree operating point
    delta: float                      # omega_d - omega_m
    temperature: float
    sweep: Optional[SweepGrid]
    spectrum: dict
    squeeze: dict
    snapshot: dict = field(default_factory=dict, compare=False)
    source: str = ""

    @property
    def operating_omega_m(self) -> float:
        if self.omega_m is not None:
            return self.omega_m
        return float(larmor_frequency(self.device.magnet, self.b_field))

    @property
    def operating_b_field(self) -> float:
        if self.b_field is not None:
            return self.b_field
        return self.omega_m / self.device.magnet.gamma

    @property
    def drive(self) -> DriveSpec:
        return DriveSpec(power=self.power, omega_d=self.operating_omega_m + self.delta,
                         port=self.port)


def _read_text(source: str):
    path = Path(source)
    if path.is_file():
        return path.read_text(), path.suffix.lower(), str(path)
    name = source[:-5] if source.endswith(".toml") else source
    if name in PRESETS:
        text = resources.files("magnoncool.presets").joinpath(f"{name}.toml").read_text()
        return text, ".toml", f"preset:{name}"
    raise ConfigParseError(f"no such configuration file or preset: {source!r}")


def parse_text(text: str, suffix: str = ".toml") -> dict:
    if not text.strip():
        raise ConfigParseError("configuration is empty")
    try:
        if suffix == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"JSON parse error at line {exc.lineno}: {exc.msg}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"TOML parse error: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigParseError("top level of the configuration must be a table")
    return raw


def _num(sec, key, value, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(f"{sec}.{key}", "must be a number")
    value = float(value)
    if positive and not value > 0:
        raise ConfigValidationError(f"{sec}.{key}", "must be > 0")
    if nonneg and not value >= 0:
        raise ConfigValidationError(f"{sec}.{key}", "must be >= 0")
    return value


def _numlist(sec, key, value, n=None, **kw):
    if not isinstance(value, list):
        raise ConfigValidationError(f"{sec}.{key}", "must be a list")
    if n is not None and len(value) != n:
        raise ConfigValidationError(f"{sec}.{key}", f"must have {n} entries")
    return [_num(sec, key, v, **kw) for v in value]


def _axis(sec, key, value):
    vals = _numlist(sec, key, value, n=3)
    try:
        return Axis(vals[0], vals[1], int(vals[2]) if vals[2] == int(vals[2]) else vals[2])
    except ConfigValidationError as exc:
        raise ConfigValidationError(f"{sec}.{key}", str(exc).split(": ", 1)[1]) from exc


def _enum(sec, key, value, enum_cls):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(repr(e.value) for e in enum_cls)
        raise ConfigValidationError(f"{sec}.{key}", f"must be one of {allowed}") from None


def build(raw: dict, source: str = "") -> RunConfig:
    """Validate a parsed configuration and build the run description."""
    for sec, body in raw.items():
        if sec not in _SCHEMA:
            raise ConfigValidationError(sec, "unknown section")
        if not isinstance(body, dict):
            raise ConfigValidationError(sec, "must be a table")
        for key in body:
            if key not in _SCHEMA[sec]:
                raise ConfigValidationError(f"{sec}.{key}", "unknown key")
    for sec in _REQUIRED:
        if sec not in raw:
            raise ConfigValidationError(sec, "missing section")

    dev, res, mag = raw["device"], raw["resonator"], raw["magnet"]
    drv = raw["drive"]

    def need(sec_name, sec, key):
        if key not in sec:
            raise ConfigValidationError(f"{sec_name}.{key}", "required")
        return sec[key]

    geometry = _enum("device", "geometry", need("device", dev, "geometry"), Geometry)

    # resonator
    modes_hz = _numlist("resonator", "mode_freqs_hz", need("resonator", res, "mode_freqs_hz"),
                        positive=True)
    fundamental_hz = _num("resonator", "fundamental_hz", res.get("fundamental_hz", modes_hz[0]),
                          positive=True)
    k_int = _numlist("resonator", "kappa_internal_hz", need("resonator", res, "kappa_internal_hz"),
                     n=len(modes_hz), nonneg=True)
    k_ext = None
    if "kappa_ext_hz" in res:
        if not isinstance(res["kappa_ext_hz"], list) or len(res["kappa_ext_hz"]) != len(modes_hz):
            raise ConfigValidationError("resonator.kappa_ext_hz", "needs one entry per mode")
        # negative entries mean "not given" (TOML has no null)
        k_ext = tuple(None if _num("resonator", "kappa_ext_hz", v) < 0 else hz(float(v))
                      for v in res["kappa_ext_hz"])
    calib = None
    if "kappa_ext_calibration" in res:
        c = res["kappa_ext_calibration"]
        if not isinstance(c, dict) or set(c) != {"freq_hz", "kappa_hz"}:
            raise ConfigValidationError("resonator.kappa_ext_calibration",
                                        "must be a table with freq_hz and kappa_hz")
        calib = (hz(_num("resonator", "kappa_ext_calibration.freq_hz", c["freq_hz"], positive=True)),
                 hz(_num("resonator", "kappa_ext_calibration.kappa_hz", c["kappa_hz"], nonneg=True)))
    cc = res.get("coupling_capacitance_f")
    if cc is not None:
        cc = _num("resonator", "coupling_capacitance_f", cc, nonneg=True)
    z0 = _num("resonator", "z0_ohm", need("resonator", res, "z0_ohm"), positive=True)
    try:
        resonator = ResonatorSpec(
            z0=z0,
            omega_r1=hz(fundamental_hz), mode_freqs=tuple(hz(f) for f in modes_hz),
            kappa_internal=tuple(hz(k) for k in k_int), coupling_capacitance=cc,
            kappa_ext_override=k_ext, kappa_ext_calibration=calib)
    except ConfigurationError as exc:
        raise ConfigValidationError("resonator", str(exc)) from exc

    # magnet
    overrides = {}
    if "dims_m" in mag:
        overrides["dims"] = tuple(_numlist("magnet", "dims_m", mag["dims_m"], n=3, positive=True))
    if "ms_emu_cm3" in mag:
        overrides["m_s"] = _num("magnet", "ms_emu_cm3", mag["ms_emu_cm3"], positive=True) * EMU_PER_CM3
    if "gamma_hz_per_t" in mag:
        overrides["gamma"] = hz(_num("magnet", "gamma_hz_per_t", mag["gamma_hz_per_t"], positive=True))
    if "meff_emu_cm3" in mag:
        overrides["m_eff"] = _num("magnet", "meff_emu_cm3", mag["meff_emu_cm3"]) * EMU_PER_CM3
    if "kerr_hz" in mag:
        overrides["kerr_k"] = hz(_num("magnet", "kerr_hz", mag["kerr_hz"], nonneg=True))
    material = mag.get("material", "custom")
    try:
        if material == "custom":
            for key in ("m_s", "dims"):
                if key not in overrides:
                    raise ConfigValidationError("magnet", "a custom material needs ms_emu_cm3 and dims_m")
            from .magnon import MagnetSpec
            magnet = MagnetSpec(**overrides)
        else:
            magnet = material_preset(str(material), **overrides)
    except ConfigValidationError:
        raise
    except ConfigurationError as exc:
        raise ConfigValidationError("magnet.material", str(exc)) from exc

    kappa_m_ext = dev.get("kappa_m_ext_hz")
    if kappa_m_ext is not None:
        kappa_m_ext = hz(_num("device", "kappa_m_ext_hz", kappa_m_ext, nonneg=True))
    anisotropy = dev.get("anisotropy", False)
    if not isinstance(anisotropy, bool):
        raise ConfigValidationError("device.anisotropy", "must be true or false")
    device_kw = dict(
        geometry=geometry, resonator=resonator, magnet=magnet,
        wire_width=_num("device", "wire_width_m", need("device", dev, "wire_width_m"), positive=True),
        kappa_m_internal=hz(_num("device", "kappa_m_internal_hz",
                                 need("device", dev, "kappa_m_internal_hz"), nonneg=True)),
        kappa_m_ext_override=kappa_m_ext, anisotropy=anisotropy)
    try:
        device = DeviceConfig(**device_kw)
        if "couplings" in raw:
            device = _apply_coupling_overrides(device, raw["couplings"])
    except ConfigValidationError:
        raise
    except ConfigurationError as exc:
        raise ConfigValidationError("device", str(exc)) from exc

    # operating point
    port = _enum("drive", "port", drv.get("port", "magnon_line" if geometry is Geometry.TOP_CPW
                                          else "feedline"), Port)
    power = dbm_to_watts(_num("drive", "power_dbm", need("drive", drv, "power_dbm")))
    omega_m = b_field = None
    if "magnon_freq_hz" in drv and "b_field_t" in drv:
        raise ConfigValidationError("drive", "give magnon_freq_hz or b_field_t, not both")
    if "magnon_freq_hz" in drv:
        omega_m = hz(_num("drive", "magnon_freq_hz", drv["magnon_freq_hz"], positive=True))
    elif "b_field_t" in drv:
        b_field = _num("drive", "b_field_t", drv["b_field_t"], positive=True)
    else:
        raise ConfigValidationError("drive", "needs magnon_freq_hz or b_field_t")
    omega_m_op = omega_m if omega_m is not None else float(larmor_frequency(magnet, b_field))
    if "detuning_hz" in drv and "drive_freq_hz" in drv:
        raise ConfigValidationError("drive", "give detuning_hz or drive_freq_hz, not both")
    if "drive_freq_hz" in drv:
        delta = hz(_num("drive", "drive_freq_hz", drv["drive_freq_hz"], positive=True)) - omega_m_op
    else:
        delta = hz(_num("drive", "detuning_hz", drv.get("detuning_hz", 0.0)))
    temperature = _num("drive", "temperature_k", drv.get("temperature_k", 0.01), nonneg=True)

    sweep = None
    if "sweep" in raw:
        sw = raw["sweep"]
        sweep = SweepGrid(
            b_field=_axis("sweep", "b_field_t", sw["b_field_t"]) if "b_field_t" in sw else None,
            drive_freq=_axis("sweep", "drive_freq_hz", sw["drive_freq_hz"]) if "drive_freq_hz" in sw else None,
            detuning=_axis("sweep", "detuning_hz", sw["detuning_hz"]) if "detuning_hz" in sw else None)
        if geometry is Geometry.FORTY_FIVE and sweep.b_field is None:
            raise ConfigValidationError("sweep.b_field_t", "required for the 45-degree layout")
        if geometry is Geometry.TOP_CPW and sweep.b_field is not None:
            raise ConfigValidationError("sweep.b_field_t", "the top-CPW sweep runs at a fixed field")

    spectrum = dict(raw.get("spectrum", {}))
    for key in ("span_hz", "center_hz"):
        if key in spectrum:
            spectrum[key] = _num("spectrum", key, spectrum[key], positive=True)
    if "points" in spectrum:
        spectrum["points"] = int(_num("spectrum", "points", spectrum["points"], positive=True))
    squeeze = dict(raw.get("squeeze", {}))
    for key in squeeze:
        squeeze[key] = _num("squeeze", key, squeeze[key], nonneg=(key != "power_dbm"))

    return RunConfig(device=device, power=power, port=port, omega_m=omega_m, b_field=b_field,
                     delta=delta, temperature=temperature, sweep=sweep, spectrum=spectrum,
                     squeeze=squeeze, snapshot=copy.deepcopy(raw), source=source)


def _apply_coupling_overrides(device: DeviceConfig, body: dict) -> DeviceConfig:
    from dataclasses import replace
    base = device.couplings
    g1 = hz(_num("couplings", "g_xz1_hz", body["g_xz1_hz"], nonneg=True)) \
        if "g_xz1_hz" in body else base.g_xz1
    g_xx = base.g_xx
    if "g_xx_hz" in body:
        g_xx = tuple(hz(v) for v in _numlist("couplings", "g_xx_hz", body["g_xx_hz"],
                                             n=device.resonator.n_modes, nonneg=True))
    phi = flux_zpf(device.resonator)
    couplings = CouplingSet(g_xz1=g1, g_xx=g_xx, big_g=g1 / phi, flux_zpf=phi)
    return replace(device, couplings=couplings)


def read_raw(source: str):
    """Parsed but unvalidated configuration and a label for its origin."""
    text, suffix, label = _read_text(str(source))
    return parse_text(text, suffix), label


def load_config(source: str) -> RunConfig:
    """Load and validate a configuration file or a shipped preset by name."""
    raw, label = read_raw(source)
    return build(raw, source=label)
