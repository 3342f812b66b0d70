"""Magnon-mediated backaction on a microwave resonator: command-line entry point.

Subcommands: params, backaction, sweep, spectrum, squeeze, oracle.  Exit
status is 0 on success, 2 on invalid input and 3 on a numerical failure.
"""

import argparse
import copy
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (DivergentVariance, SqueezingInputs, UnphysicalParameters,
                       s21_spectrum, spectrum_columns, squeezed_variance, squeezing_validity)
from .config import build, read_raw
from .core import TWO_PI, ConfigurationError, NumericalError, dbm_to_watts, thermal_occupation
from .device import DriveSpec, Geometry, Port
from .dynamics import backaction_45, backaction_top, magnon_number_45, magnon_number_direct
from .magnon import magnon_ext_damping
from .resonator import (coupling_q, external_damping, i_zpf, total_capacitance, total_damping,
                        total_inductance)
from .sweep import RunManifest, run_sweep, to_csv, to_json, write_table
from .timedomain import desk_scaled_point, verify_backaction

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
ORACLE_TOLERANCE = 0.02


def _one_row(values: dict) -> dict:
    return {k: np.array([v]) for k, v in values.items()}


def _apply_overrides(raw: dict, args) -> dict:
    raw = copy.deepcopy(raw)
    drive = raw.setdefault("drive", {})
    for flag, key in (("power_dbm", "power_dbm"), ("detuning_hz", "detuning_hz"),
                      ("drive_freq_hz", "drive_freq_hz"), ("b_field_t", "b_field_t"),
                      ("magnon_freq_hz", "magnon_freq_hz"), ("temperature_k", "temperature_k")):
        value = getattr(args, flag, None)
        if value is None:
            continue
        if key == "detuning_hz":
            drive.pop("drive_freq_hz", None)
        elif key == "drive_freq_hz":
            drive.pop("detuning_hz", None)
        elif key == "b_field_t":
            drive.pop("magnon_freq_hz", None)
        elif key == "magnon_freq_hz":
            drive.pop("b_field_t", None)
        drive[key] = value
    squeeze = {k: getattr(args, k, None) for k in ("cooperativity", "n_th")}
    squeeze = {k: v for k, v in squeeze.items() if v is not None}
    if squeeze:
        raw.setdefault("squeeze", {}).update(squeeze)
    return raw


def _params(cfg, args):
    dev = cfg.device
    res = dev.resonator
    omega_m = cfg.operating_omega_m
    row = {
        "omega_r1_hz": res.omega_r1 / TWO_PI,
        "i_zpf_a": i_zpf(res),
        "c_total_f": total_capacitance(res),
        "l_total_h": total_inductance(res),
        "flux_zpf_wb": dev.couplings.flux_zpf,
        "spin_count": dev.spin_count,
        "magnon_freq_hz": omega_m / TWO_PI,
        "b_field_t": cfg.operating_b_field,
        "g_xz1_hz": dev.couplings.g_xz1 / TWO_PI,
    }
    for k, w in enumerate(res.mode_freqs, start=1):
        row[f"mode{k}_freq_hz"] = w / TWO_PI
        row[f"kappa_r{k}_int_hz"] = res.kappa_internal[k - 1] / TWO_PI
        row[f"kappa_r{k}_ext_hz"] = external_damping(res, w) / TWO_PI
        row[f"kappa_r{k}_hz"] = total_damping(res, w) / TWO_PI
        kext = external_damping(res, w)
        row[f"q_r{k}_c"] = coupling_q(res, w) if kext > 0 else float("inf")
        if k > 1:
            row[f"g_xx{k}_hz"] = dev.g_xx(w, cfg.operating_b_field) / TWO_PI
    kappa_line, q_line = magnon_ext_damping(dev.magnet, dev.wire_width, omega_m, res.z0)
    row["kappa_m_int_hz"] = dev.kappa_m_internal / TWO_PI
    row["kappa_m_ext_hz"] = float(dev.kappa_m_ext(omega_m)) / TWO_PI
    row["kappa_m_hz"] = float(dev.kappa_m(omega_m)) / TWO_PI
    row["kappa_m_line_hz"] = float(kappa_line) / TWO_PI
    row["q_m_c"] = float(q_line)
    row["n_th_r1"] = float(thermal_occupation(res.omega_r1, cfg.temperature))
    return {"params": _one_row(row)}


def _operating_result(cfg, power=None):
    dev = cfg.device
    power = cfg.power if power is None else power
    drive = DriveSpec(power=power, omega_d=cfg.drive.omega_d, port=cfg.port)
    if dev.geometry is Geometry.TOP_CPW:
        n_m = magnon_number_direct(dev, drive, cfg.operating_omega_m)
        return drive, backaction_top(dev, n_m, cfg.delta, cfg.operating_omega_m)
    return drive, backaction_45(dev, drive, cfg.operating_b_field)


def _backaction(cfg, args):
    drive, r = _operating_result(cfg)
    row = {}
    if cfg.device.geometry is Geometry.FORTY_FIVE:
        row["b_field_t"] = cfg.operating_b_field
    row.update({
        "detuning_hz": cfg.delta / TWO_PI,
        "drive_freq_hz": drive.omega_d / TWO_PI,
        "n_m": r.n_m,
        "delta_omega_r1_hz": r.delta_omega_r1 / TWO_PI,
        "delta_kappa_r1_hz": r.delta_kappa_r1 / TWO_PI,
        "weak_coupling_ok": bool(r.weak_coupling_ok),
        "kerr_ok": bool(r.kerr_ok),
        "population_ok": bool(r.population_ok),
    })
    return {"backaction": _one_row(row)}


def _sweep(cfg, args):
    if cfg.sweep is None:
        raise ConfigurationError("sweep: the configuration has no [sweep] section")
    workers = args.workers or cfg.snapshot.get("sweep", {}).get("workers")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        data = run_sweep(cfg, workers=int(workers) if workers else None)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    args._counts = (data.nan_cells, data.failed_rows)
    return {"sweep": data.columns}


def _spectrum(cfg, args):
    res = cfg.device.resonator
    w1 = res.omega_r1
    if args.no_drive:
        dw = dk = 0.0
    else:
        _, r = _operating_result(cfg)
        dw, dk = float(r.delta_omega_r1), float(r.delta_kappa_r1)
    kappa = total_damping(res, w1)
    span = TWO_PI * cfg.spectrum.get("span_hz", 10 * kappa / TWO_PI)
    center = TWO_PI * cfg.spectrum.get("center_hz", w1 / TWO_PI)
    grid = np.linspace(center - span / 2, center + span / 2, int(cfg.spectrum.get("points", 2001)))
    points = s21_spectrum(w1 + dw, kappa + dk, external_damping(res, w1), grid)
    return {"spectrum": spectrum_columns(points)}


def _squeeze(cfg, args):
    dev = cfg.device
    res = dev.resonator
    w1 = res.omega_r1
    omega_m = cfg.operating_omega_m
    power = cfg.power
    if "power_dbm" in cfg.squeeze:
        power = dbm_to_watts(cfg.squeeze["power_dbm"])
    if dev.geometry is Geometry.TOP_CPW:
        red = DriveSpec(power=power, omega_d=omega_m - w1, port=Port.MAGNON_LINE)
        n_minus = float(magnon_number_direct(dev, red, omega_m))
    else:
        red = DriveSpec(power=power, omega_d=omega_m - w1, port=cfg.port)
        n_minus = float(magnon_number_45(dev, red, cfg.operating_b_field))
    n_th = cfg.squeeze.get("n_th", float(thermal_occupation(w1, cfg.temperature)))
    inputs = SqueezingInputs(n_minus=n_minus, g_xz1=dev.couplings.g_xz1,
                             kappa_r1=total_damping(res, w1), kappa_m=float(dev.kappa_m(omega_m)),
                             n_th=n_th)
    c_override = cfg.squeeze.get("cooperativity")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = squeezed_variance(inputs, cooperativity_override=c_override)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    report = squeezing_validity(dev, inputs, cooperativity_override=c_override)
    row = {
        "variance": result.variance,
        "squeezing_db": result.squeezing_db,
        "cooperativity": result.cooperativity,
        "low_cooperativity": result.low_cooperativity,
        "n_minus": n_minus,
        "n_th": n_th,
        "kappa_r1_hz": inputs.kappa_r1 / TWO_PI,
        "kappa_m_hz": inputs.kappa_m / TWO_PI,
        "kappa_ratio": inputs.kappa_r1 / inputs.kappa_m,
    }
    for name, item in report.items():
        row[name] = item.value
        row[f"{name}_limit"] = item.threshold
        row[f"{name}_ok"] = item.ok
    return {"squeeze": _one_row(row)}


def _oracle(cfg, args):
    device, point = desk_scaled_point(args.delta_over_omega)
    report = verify_backaction(device, point, dt=args.dt)
    d = report.as_dict()
    row = {
        "delta_omega_analytic_hz": d["delta_omega_analytic"] / TWO_PI,
        "delta_omega_oracle_hz": d["delta_omega_oracle"] / TWO_PI,
        "delta_kappa_analytic_hz": d["delta_kappa_analytic"] / TWO_PI,
        "delta_kappa_oracle_hz": d["delta_kappa_oracle"] / TWO_PI,
        "omega_eff_hz": d["omega_eff"] / TWO_PI,
        "kappa_eff_hz": d["kappa_eff"] / TWO_PI,
        "coupling_ratio": d["coupling_ratio"],
        "rel_err_omega": d["rel_err_omega"],
        "rel_err_kappa": d["rel_err_kappa"],
    }
    if args.trajectory:
        if not args.out:
            raise ConfigurationError("--trajectory needs --out")
        Path(args.out).mkdir(parents=True, exist_ok=True)
        report.trajectory.to_csv(Path(args.out) / "trajectory.csv")
        args._extra_outputs = ["trajectory.csv"]
    args._oracle_ok = max(report.rel_err_omega, report.rel_err_kappa) < ORACLE_TOLERANCE
    return {"oracle": _one_row(row)}


_COMMANDS = {
    "params": (_params, "derived device quantities"),
    "backaction": (_backaction, "backaction at the configured operating point"),
    "sweep": (_sweep, "backaction over the configured grid"),
    "spectrum": (_spectrum, "feedline transmission around the fundamental"),
    "squeeze": (_squeeze, "two-tone squeezing estimate and validity report"),
    "oracle": (_oracle, "time-domain check of the backaction formulas"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="magnoncool", description=__doc__.split(":")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=name != "oracle",
                       help="TOML/JSON file or preset name (table1_top_cpw, table2_45deg)")
        p.add_argument("--out", help="output directory; tables go to stdout when omitted")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("backaction", "spectrum", "squeeze", "params", "sweep"):
            p.add_argument("--power-dbm", type=float)
            p.add_argument("--detuning-hz", type=float)
            p.add_argument("--drive-freq-hz", type=float)
            p.add_argument("--b-field-t", type=float)
            p.add_argument("--magnon-freq-hz", type=float)
            p.add_argument("--temperature-k", type=float)
        if name == "sweep":
            p.add_argument("--workers", type=int, help="worker threads (default: CPU count)")
        if name == "spectrum":
            p.add_argument("--no-drive", action="store_true", help="bare resonator response")
        if name == "squeeze":
            p.add_argument("--cooperativity", type=float, help="use this C instead of the computed one")
            p.add_argument("--n-th", type=float, help="thermal occupation of the fundamental")
        if name == "oracle":
            p.add_argument("--delta-over-omega", type=float, default=-1.0,
                           help="drive detuning in units of omega_r1")
            p.add_argument("--dt", type=float, default=5e-9, help="RK4 step in s")
            p.add_argument("--trajectory", action="store_true",
                           help="also write the coupled ringdown to trajectory.csv")
    return parser


def _emit(tables: dict, args, manifest):
    if args.out:
        out = Path(args.out)
        for stem, columns in tables.items():
            manifest.outputs.append(write_table(columns, out, stem, "csv").name)
            manifest.outputs.append(write_table(columns, out, stem, "json").name)
        if manifest.config:
            (out / "config.json").write_text(json.dumps(manifest.config, indent=2) + "\n")
            manifest.outputs.append("config.json")
        manifest.write(out)
        print(f"wrote {', '.join(manifest.outputs)}, manifest.json to {out}", file=sys.stderr)
        return
    for columns in tables.values():
        sys.stdout.write(to_csv(columns) if args.format == "csv" else to_json(columns))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    func = _COMMANDS[args.command][0]
    try:
        cfg, raw, label = None, {}, ""
        if args.config is not None:
            raw, label = read_raw(args.config)
            raw = _apply_overrides(raw, args)
            cfg = build(raw, source=label)
        tables = func(cfg, args)
        manifest = RunManifest(config=raw, source=label, command=args.command)
        manifest.outputs.extend(getattr(args, "_extra_outputs", []))
        counts = getattr(args, "_counts", None)
        if counts:
            manifest.nan_cells, manifest.failed_rows = counts
        _emit(tables, args, manifest)
    except (DivergentVariance, UnphysicalParameters, NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "_oracle_ok", True) is False:
        print(f"oracle disagreement exceeds {ORACLE_TOLERANCE:.0%}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
