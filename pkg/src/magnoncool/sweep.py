"""Grid evaluation and deterministic CSV/JSON emission."""

import datetime
import json
import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import TWO_PI
from .device import DriveSpec, Geometry
from .dynamics import backaction_45, backaction_top, magnon_number_direct
from .magnon import larmor_frequency

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("b_field_t", "detuning_hz", "drive_freq_hz", "n_m", "delta_omega_r1_hz",
                 "delta_kappa_r1_hz", "weak_coupling_ok", "kerr_ok", "population_ok")
_FLAGS = ("weak_coupling_ok", "kerr_ok", "population_ok")


@dataclass
class Dataset:
    """Named columns of equal length, in output order."""

    columns: dict
    nan_cells: int = 0
    failed_rows: int = 0

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0


@dataclass
class RunManifest:
    config: dict
    source: str
    command: str
    outputs: list = field(default_factory=list)
    nan_cells: int = 0
    failed_rows: int = 0
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.datetime.now(
        datetime.timezone.utc).isoformat(timespec="seconds"))

    def write(self, directory):
        path = Path(directory) / "manifest.json"
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")
        return path


def _row_top(cfg, detuning):
    device = cfg.device
    omega_m = cfg.operating_omega_m
    drive = DriveSpec(power=cfg.power, omega_d=omega_m + detuning, port=cfg.port)
    n_m = magnon_number_direct(device, drive, omega_m)
    r = backaction_top(device, n_m, detuning, omega_m)
    return omega_m + detuning, r


def _row_45(cfg, b_field, omega_d):
    drive = DriveSpec(power=cfg.power, omega_d=omega_d, port=cfg.port)
    return backaction_45(cfg.device, drive, b_field)


def _pack(n, b_field, detuning, omega_d, r):
    cols = {
        "b_field_t": np.full(n, np.nan if b_field is None else b_field),
        "detuning_hz": np.broadcast_to(detuning / TWO_PI, (n,)).astype(float),
        "drive_freq_hz": np.broadcast_to(omega_d / TWO_PI, (n,)).astype(float),
    }
    if r is None:
        for key in SWEEP_COLUMNS[3:]:
            cols[key] = np.full(n, np.nan)
        return cols
    cols["n_m"] = np.broadcast_to(r.n_m, (n,)).astype(float)
    cols["delta_omega_r1_hz"] = np.broadcast_to(r.delta_omega_r1 / TWO_PI, (n,)).astype(float)
    cols["delta_kappa_r1_hz"] = np.broadcast_to(r.delta_kappa_r1 / TWO_PI, (n,)).astype(float)
    for key in _FLAGS:
        cols[key] = np.broadcast_to(getattr(r, key), (n,)).astype(float)
    return cols


def _evaluate_row(cfg, grid, b_field, chunk):
    """One task: a row of the field axis (45 deg) or a chunk of detunings (top)."""
    if cfg.device.geometry is Geometry.TOP_CPW:
        detuning = chunk
        omega_d = cfg.operating_omega_m + detuning
    elif grid.drive_freq is not None:
        omega_d = chunk
        detuning = omega_d - larmor_frequency(cfg.device.magnet, b_field)
    else:
        detuning = chunk
        omega_d = larmor_frequency(cfg.device.magnet, b_field) + detuning
    n = len(chunk)
    with np.errstate(all="ignore"):
        try:
            if cfg.device.geometry is Geometry.TOP_CPW:
                _, r = _row_top(cfg, detuning)
            else:
                r = _row_45(cfg, b_field, omega_d)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            log.warning("row at B=%s failed: %s", b_field, exc)
            return _pack(n, b_field, detuning, omega_d, None), 1
    return _pack(n, b_field, detuning, omega_d, r), 0


def _tasks(cfg, grid, chunk_size):
    if cfg.device.geometry is Geometry.TOP_CPW:
        axis = TWO_PI * grid.detuning.values()
        return [(None, axis[i:i + chunk_size]) for i in range(0, len(axis), chunk_size)]
    freq_axis = grid.drive_freq if grid.drive_freq is not None else grid.detuning
    freqs = TWO_PI * freq_axis.values()
    return [(float(b), freqs) for b in grid.b_field.values()]


def run_sweep(cfg, grid=None, workers=None, chunk_size=256) -> Dataset:
    """Evaluate the backaction over ``grid`` (defaults to the configured sweep).

    Rows follow the field axis (outer) and the frequency axis (inner).  Tasks
    are evaluated by a thread pool of ``workers`` (default: CPU count) and
    reassembled in grid order, so the result does not depend on scheduling.
    Failed rows become NaN and are counted.
    """
    grid = cfg.sweep if grid is None else grid
    if grid is None:
        raise ValueError("configuration has no [sweep] section")
    workers = workers or os.cpu_count() or 1
    tasks = _tasks(cfg, grid, chunk_size)
    if workers == 1:
        parts = [_evaluate_row(cfg, grid, b, chunk) for b, chunk in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda t: _evaluate_row(cfg, grid, *t), tasks))
    names = SWEEP_COLUMNS if cfg.device.geometry is Geometry.FORTY_FIVE else SWEEP_COLUMNS[1:]
    columns = {k: np.concatenate([p[0][k] for p in parts]) for k in names}
    failed = sum(p[1] for p in parts)
    nan_cells = int(sum(np.count_nonzero(np.isnan(columns[k])) for k in names[-6:]))
    if nan_cells:
        warnings.warn(f"{nan_cells} sweep cells are NaN", RuntimeWarning, stacklevel=2)
    return Dataset(columns=columns, nan_cells=nan_cells, failed_rows=failed)


def _format(key, value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    v = float(value)
    if key in _FLAGS and not np.isnan(v):
        return "true" if v else "false"
    return repr(v)


def _json_value(key, value):
    if isinstance(value, (str, bool)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    v = float(value)
    if np.isnan(v):
        return None
    if key in _FLAGS:
        return bool(v)
    return v


def to_csv(columns: dict) -> str:
    """CSV text with shortest round-trip float formatting."""
    keys = list(columns)
    lines = [",".join(keys)]
    n = len(columns[keys[0]]) if keys else 0
    for i in range(n):
        lines.append(",".join(_format(k, columns[k][i]) for k in keys))
    return "\n".join(lines) + "\n"


def to_json(columns: dict) -> str:
    keys = list(columns)
    n = len(columns[keys[0]]) if keys else 0
    rows = [{k: _json_value(k, columns[k][i]) for k in keys} for i in range(n)]
    return json.dumps(rows, indent=1) + "\n"


def write_table(columns: dict, directory, stem: str, fmt: str = "csv"):
    """Write ``stem.csv`` or ``stem.json``; returns the written path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{stem}.{fmt}"
    path.write_text(to_csv(columns) if fmt == "csv" else to_json(columns))
    return path
