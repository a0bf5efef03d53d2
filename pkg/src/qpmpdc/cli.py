"""Command-line front end.

Each subcommand reads an optional YAML run configuration, lets flags
override it, writes its data files into ``--out`` and a ``manifest.json``
holding the fully resolved configuration. Errors end the process with the
exit code of their class (see ``qpmpdc.errors.EXIT_CODES``).
"""

import argparse
import copy
import math
import sys
import time
from dataclasses import replace
from importlib import metadata, resources
from pathlib import Path

import numpy as np
import yaml

from . import io as qio
from .dispersion import load_model, wavelength_to_omega
from .errors import ConfigError, QPMError
from .jsa import SpectralGrid, correlation_time, jsa, marginal_spectrum
from .metrology import BrightnessInput, analyze_scan, brightness_lower_bound
from .phasematch import ProcessConfig, WaveguideSpec
from .tuning import bandwidth_fw_at_fraction, classify_regime, pump_sweep_bandwidth, temperature_map
from .workingpoint import SolverTolerances, solve_design_point, solve_gv_matched_signal

DEFAULTS = {
    "model": "congruent_ln",
    "waveguide": {
        "length_mm": 40.0,
        "poling_period_um": 6.0,
        "width_um": None,
        "pump": "o",
        "signal": "e",
        "idler": "o",
        "thermal_expansion_per_k": 0.0,
        "reference_temperature_c": 25.0,
    },
    # model value = configured (lab) value + offset
    "offsets": {"temperature_k": 0.0, "pump_nm": 0.0},
    "solver": {
        "pump_range_nm": [600.0, 700.0],
        "signal_range_nm": [700.0, 1100.0],
        "temperature_range_c": None,
        "tolerances": {
            "gv_s_per_m": 1e-16,
            "gvd_s2_per_m": 1e-29,
            "delta_beta_rad_per_m": 1e-9,
            "signal_interval_nm": 1e-6,
            "pump_interval_nm": 1e-4,
            "scan_points": 201,
            "temperature_scan_points": 31,
        },
    },
    # lab values; any None means: use the solved design point
    "operating_point": {"pump_nm": None, "signal_nm": None, "temperature_c": None},
    "grid": {"half_span_thz": 30.0, "points": 4097},
    "fraction": 0.8,
    # bandwidths use every grid column; the written matrix keeps every column_stride-th
    "tune": {"pump_shift_nm": 0.0, "temperature_span_k": 4.0, "temperature_steps": 801, "column_stride": 2,
             "classify": True},
    "sweep": {
        "pump_shifts_nm": [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0],
        "temperature_span_k": 16.0,
        "temperature_steps": 641,
    },
    "loss": {"scans": None},
    "brightness": {
        "detected_rate": None,
        "background_rate": 0.0,
        "pump_power_mw": None,
        "bandwidth_ghz": None,
        "coupling_efficiency": None,
        "calibration_scale": 1.0,
    },
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be a mapping")
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def load_config(path):
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as err:
        raise ConfigError(f"config {path}: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be a mapping")
    return data


def _range(value, name):
    if value is None:
        return None
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a pair of numbers") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConfigError(f"{name} {list(value)} is empty or not finite")
    return [lo, hi]


def _finite(value, name):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number") from None
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    return v


def resolve_config(args):
    """Defaults, then the config file, then flags."""
    cfg = _merge(DEFAULTS, load_config(args.config))
    if args.model is not None:
        cfg["model"] = args.model
    if args.temp_offset is not None:
        cfg["offsets"]["temperature_k"] = args.temp_offset
    if args.pump_offset is not None:
        cfg["offsets"]["pump_nm"] = args.pump_offset
    for flag, key in (("pump_nm", "pump_nm"), ("signal_nm", "signal_nm"), ("temperature_c", "temperature_c")):
        v = getattr(args, flag, None)
        if v is not None:
            cfg["operating_point"][key] = v
    if getattr(args, "period_um", None) is not None:
        cfg["waveguide"]["poling_period_um"] = args.period_um
    if getattr(args, "pump_shift_nm", None) is not None:
        cfg["tune"]["pump_shift_nm"] = args.pump_shift_nm
    if getattr(args, "scans", None):
        cfg["loss"]["scans"] = [str(p) for p in args.scans]
    for key in ("detected_rate", "background_rate", "pump_power_mw", "bandwidth_ghz",
                "coupling_efficiency", "calibration_scale"):
        v = getattr(args, key, None)
        if v is not None:
            cfg["brightness"][key] = v

    for k in ("temperature_k", "pump_nm"):
        cfg["offsets"][k] = _finite(cfg["offsets"][k], f"offsets.{k}")
    s = cfg["solver"]
    s["pump_range_nm"] = _range(s["pump_range_nm"], "solver.pump_range_nm")
    s["signal_range_nm"] = _range(s["signal_range_nm"], "solver.signal_range_nm")
    s["temperature_range_c"] = _range(s["temperature_range_c"], "solver.temperature_range_c")
    if cfg["tune"]["temperature_steps"] < 2 or cfg["sweep"]["temperature_steps"] < 2:
        raise ConfigError("temperature maps need at least two steps")
    if not 0 < float(cfg["fraction"]) < 1:
        raise ConfigError("fraction must lie in (0, 1)")
    # fail before any work on malformed waveguide, tolerance or grid sections
    _waveguide(cfg)
    _tolerances(cfg)
    _grid(cfg)
    # model paths are resolved now so the manifest records the file used
    model = cfg["model"]
    if Path(str(model)).suffix or Path(str(model)).exists():
        cfg["model"] = str(Path(model).resolve())
    if cfg["loss"]["scans"] is not None:
        cfg["loss"]["scans"] = [str(Path(p).resolve()) for p in cfg["loss"]["scans"]]
    return cfg


def _waveguide(cfg):
    try:
        return WaveguideSpec(**cfg["waveguide"])
    except (TypeError, ValueError, QPMError) as err:
        raise ConfigError(f"waveguide: {err}") from None


def _tolerances(cfg):
    try:
        return SolverTolerances(**cfg["solver"]["tolerances"])
    except TypeError as err:
        raise ConfigError(f"solver.tolerances: {err}") from None


def _grid(cfg):
    g = cfg["grid"]
    try:
        return SpectralGrid.from_thz(float(g["half_span_thz"]), int(g["points"]))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"grid: {err}") from None


def _design(cfg, model, wg):
    s = cfg["solver"]
    return solve_design_point(model, wg, s["temperature_range_c"], tuple(s["pump_range_nm"]),
                              tuple(s["signal_range_nm"]), _tolerances(cfg))


def _operating_point(cfg, model, wg):
    """Model-side process configuration and, when solved, the working point."""
    op, off = cfg["operating_point"], cfg["offsets"]
    if op["pump_nm"] is None or op["temperature_c"] is None:
        wp = _design(cfg, model, wg)
        pump, temp, signal = wp.pump_nm, wp.temperature_c, wp.signal_nm
        if op["signal_nm"] is not None:
            signal = float(op["signal_nm"])
        return ProcessConfig.from_wavelengths(model, wg, pump, signal, temp), wp
    pump = float(op["pump_nm"]) + off["pump_nm"]
    temp = float(op["temperature_c"]) + off["temperature_k"]
    if op["signal_nm"] is None:
        ws, _ = solve_gv_matched_signal(model, pump, temp, wg, tuple(cfg["solver"]["signal_range_nm"]),
                                        _tolerances(cfg))
        return ProcessConfig(model, wg, wavelength_to_omega(pump), ws, temp), None
    return ProcessConfig.from_wavelengths(model, wg, pump, float(op["signal_nm"]), temp), None


def _lab(cfg, process):
    off = cfg["offsets"]
    return {"pump_nm": process.pump_nm - off["pump_nm"], "temperature_c": process.temperature_c - off["temperature_k"]}


def cmd_design(cfg, model, out):
    wg = _waveguide(cfg)
    wp = _design(cfg, model, wg)
    off = cfg["offsets"]
    doc = {
        "working_point": wp.to_dict(),
        "within_tolerance": wp.within_tolerance(),
        "lab": {"pump_nm": wp.pump_nm - off["pump_nm"], "temperature_c": wp.temperature_c - off["temperature_k"]},
    }
    qio.write_json(out / "design.json", doc)
    print(f"period {wp.poling_period_um:g} um: pump {wp.pump_nm:.4f} nm, T {wp.temperature_c:.3f} C, "
          f"signal {wp.signal_nm:.3f} nm, idler {wp.idler_nm:.3f} nm")
    print(f"residuals: gv {wp.gv_residual:.3g} s/m, gvd {wp.gvd_residual:.3g} s^2/m, "
          f"mismatch {wp.delta_beta0_residual:.3g} rad/m")
    return ["design.json"]


def cmd_jsa(cfg, model, out):
    wg = _waveguide(cfg)
    process, wp = _operating_point(cfg, model, wg)
    result = jsa(process, _grid(cfg))
    sig = marginal_spectrum(result, "signal")
    idl = marginal_spectrum(result, "idler")
    qio.write_jsa_csv(out / "jsa.csv", result)
    qio.write_csv(out / "marginals.csv",
                  ("signal_detuning_rad_s", "lambda_s_nm", "signal_intensity", "lambda_i_nm", "idler_intensity"),
                  zip(sig.detuning, sig.wavelength_nm, sig.intensity, idl.wavelength_nm, idl.intensity))
    report = bandwidth_fw_at_fraction(sig, float(cfg["fraction"]))
    summary = {
        "process": process.as_dict(),
        "lab": _lab(cfg, process),
        "working_point": None if wp is None else wp.to_dict(),
        "bandwidth": report.to_dict(),
        "correlation_time_fs": correlation_time(sig),
    }
    qio.write_json(out / "jsa_summary.json", summary)
    print(f"FW80 {report.width_thz:.3f} THz, correlation time {summary['correlation_time_fs']:.2f} fs")
    return ["jsa.csv", "marginals.csv", "jsa_summary.json"]


def _temperature_axis(center, span, steps):
    return center + np.linspace(-span, span, int(steps))


def cmd_tune(cfg, model, out):
    wg = _waveguide(cfg)
    process, wp = _operating_point(cfg, model, wg)
    t = cfg["tune"]
    base = process.with_pump_nm(process.pump_nm + float(t["pump_shift_nm"]))
    temps = _temperature_axis(process.temperature_c, float(t["temperature_span_k"]), t["temperature_steps"])
    tmap = temperature_map(base, temps, _grid(cfg), float(cfg["fraction"]))
    # the written axis is in lab terms
    stride = int(t["column_stride"])
    if stride < 1:
        raise ConfigError("tune.column_stride must be a positive integer")
    lab_map = replace(tmap, parameter=temps - cfg["offsets"]["temperature_k"],
                      wavelength_nm=tmap.wavelength_nm[::stride], detuning=tmap.detuning[::stride],
                      intensity=tmap.intensity[:, ::stride])
    qio.write_tuning_map(out / "tuning_map.csv", out / "tuning_map.json", lab_map)
    bw = tmap.bandwidth_thz
    best = int(np.nanargmax(bw))
    summary = {
        "pump_nm": base.pump_nm,
        "lab": _lab(cfg, base),
        "best_temperature_c": float(temps[best]),
        "best_bandwidth_thz": float(bw[best]),
        "working_point": None if wp is None else wp.to_dict(),
        "regime": None,
    }
    files = ["tuning_map.csv", "tuning_map.json", "tuning_summary.json"]
    if t["classify"]:
        summary["regime"] = classify_regime(tmap).value
    qio.write_json(out / "tuning_summary.json", summary)
    print(f"best bandwidth {bw[best]:.3f} THz at {temps[best]:.3f} C" +
          (f"; regime {summary['regime']}" if summary["regime"] else ""))
    return files


def cmd_sweep(cfg, model, out):
    wg = _waveguide(cfg)
    process, wp = _operating_point(cfg, model, wg)
    s = cfg["sweep"]
    pumps = process.pump_nm + np.asarray(s["pump_shifts_nm"], dtype=float)
    temps = _temperature_axis(process.temperature_c, float(s["temperature_span_k"]), s["temperature_steps"])
    surface = pump_sweep_bandwidth(process, pumps, temps, _grid(cfg), float(cfg["fraction"]))
    surface = replace(surface, pump_nm=pumps - cfg["offsets"]["pump_nm"],
                      temperature_c=temps - cfg["offsets"]["temperature_k"])
    qio.write_bandwidth_surface(out / "bandwidth_surface.csv", surface)
    qio.write_json(out / "sweep_summary.json", {
        "pump_nm": surface.pump_nm,
        "best_temperature_c": surface.best_temperature_c,
        "max_bandwidth_thz": surface.max_bandwidth_thz,
        "working_point": None if wp is None else wp.to_dict(),
    })
    for p, tb, bmax in zip(surface.pump_nm, surface.best_temperature_c, surface.max_bandwidth_thz):
        print(f"pump {p:.3f} nm: max {bmax:.3f} THz at {tb:.3f} C")
    return ["bandwidth_surface.csv", "sweep_summary.json"]


def bundled_fringe_scans():
    root = resources.files("qpmpdc") / "data" / "fringes"
    return sorted(str(p) for p in root.iterdir() if p.name.endswith(".csv"))


def cmd_loss(cfg, model, out):
    scans = cfg["loss"]["scans"] or bundled_fringe_scans()
    if cfg["loss"]["scans"] is None:
        cfg["loss"]["scans"] = scans
    results = [analyze_scan(qio.read_fringe_scan(p, model)) for p in scans]
    qio.write_loss_report(out / "loss_report.csv", results)
    for r in results:
        print(f"{r.waveguide_id}: K {r.contrast:.4f}, R {r.reflectivity:.4f}, {r.loss_db_per_cm:.4f} dB/cm")
    return ["loss_report.csv"]


def cmd_brightness(cfg, model, out):
    b = cfg["brightness"]
    missing = [k for k in ("detected_rate", "pump_power_mw", "bandwidth_ghz") if b[k] is None]
    if missing:
        raise ConfigError(f"brightness needs {', '.join(missing)}")
    try:
        inp = BrightnessInput(**{k: (None if v is None else float(v)) for k, v in b.items()})
    except ValueError as err:
        raise ConfigError(f"brightness: {err}") from None
    res = brightness_lower_bound(inp)
    qio.write_json(out / "brightness.json", {"input": inp, "result": res.to_dict()})
    print(f"brightness lower bound {res.lower_bound:.6g} {res.units}" +
          ("" if res.estimate is None else f"; coupling-corrected estimate {res.estimate:.6g}"))
    return ["brightness.json"]


COMMANDS = {
    "design": cmd_design,
    "jsa": cmd_jsa,
    "tune": cmd_tune,
    "sweep": cmd_sweep,
    "loss": cmd_loss,
    "brightness": cmd_brightness,
}


def tool_version():
    try:
        return metadata.version("qpmpdc")
    except metadata.PackageNotFoundError:
        return "unknown"


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    common.add_argument("--model", metavar="PATH", help="dispersion model file or bundled name")
    common.add_argument("--temp-offset", dest="temp_offset", metavar="K", type=float,
                        help="temperature calibration offset in K (model = lab + offset)")
    common.add_argument("--pump-offset", dest="pump_offset", metavar="NM", type=float,
                        help="pump wavelength calibration offset in nm (model = lab + offset)")

    parser = argparse.ArgumentParser(prog="qpmpdc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", parents=[common], help="solve the working point for a poling period")
    p.add_argument("--period-um", dest="period_um", type=float, help="poling period in um")

    for name, text in (("jsa", "joint spectral amplitude and marginals"),
                       ("tune", "temperature tuning map"),
                       ("sweep", "bandwidth over pump wavelength and temperature")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--period-um", dest="period_um", type=float, help="poling period in um")
        p.add_argument("--pump-nm", dest="pump_nm", type=float, help="lab pump wavelength in nm")
        p.add_argument("--signal-nm", dest="signal_nm", type=float, help="signal centre in nm")
        p.add_argument("--temperature-c", dest="temperature_c", type=float, help="lab temperature in C")
        if name == "tune":
            p.add_argument("--pump-shift-nm", dest="pump_shift_nm", type=float,
                           help="pump detuning from the operating point in nm")

    p = sub.add_parser("loss", parents=[common], help="propagation loss from fringe scans")
    p.add_argument("scans", nargs="*", type=Path, help="scan CSV files (default: bundled corpus)")

    p = sub.add_parser("brightness", parents=[common], help="brightness lower bound")
    p.add_argument("--detected-rate", dest="detected_rate", type=float, help="counts/s")
    p.add_argument("--background-rate", dest="background_rate", type=float, help="counts/s")
    p.add_argument("--pump-power-mw", dest="pump_power_mw", type=float)
    p.add_argument("--bandwidth-ghz", dest="bandwidth_ghz", type=float)
    p.add_argument("--coupling-efficiency", dest="coupling_efficiency", type=float)
    p.add_argument("--calibration-scale", dest="calibration_scale", type=float)
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    cfg = resolve_config(args)
    model = load_model(cfg["model"], cfg["waveguide"]["width_um"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = COMMANDS[args.command](cfg, model, out)
    qio.write_json(out / "manifest.json", {
        "command": args.command,
        "config": cfg,
        "model": {"name": model.name, "version": model.version, "source": model.source},
        "tool_version": tool_version(),
        "outputs": files,
        "wall_time_s": time.perf_counter() - start,
    })
    return 0


def main(argv=None):
    try:
        return run(argv)
    except QPMError as err:
        print(f"qpmpdc: error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
