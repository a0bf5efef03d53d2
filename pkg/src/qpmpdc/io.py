"""Deterministic CSV/JSON emission and the fringe-scan input format.

Floats are written with ``repr`` (shortest round-trip form) and JSON keys are
sorted, so identical results give identical bytes. Every file is written to
a temporary sibling and renamed into place.
"""

import csv
import io
import json
import math
import os
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .dispersion import refractive_index
from .errors import ConfigError
from .metrology import FringeScan, fresnel_reflectivity


def _cell(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def _plain(obj):
    """JSON-ready copy of ``obj`` (dataclasses, enums, numpy, NaN -> null)."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # a plain exclusive open keeps the usual umask-derived permissions
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    try:
        with open(tmp, "x", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def dumps_json(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    return atomic_write(path, dumps_json(obj))


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return atomic_write(path, buf.getvalue())


JSA_COLUMNS = ("delta_omega_rad_s", "lambda_s_nm", "lambda_i_nm", "re_f", "im_f", "intensity")


def write_jsa_csv(path, result):
    rows = zip(result.delta_omega, result.signal_nm, result.idler_nm,
               result.amplitude.real, result.amplitude.imag, result.intensity)
    return write_csv(path, JSA_COLUMNS, rows)


def write_tuning_map(csv_path, json_path, tmap):
    """Matrix CSV (first row wavelength axis, first column parameter) and a
    JSON companion with one bandwidth report per row."""
    header = [tmap.parameter_name + "\\lambda_s_nm"] + [_cell(v) for v in tmap.wavelength_nm]
    rows = ([p] + list(r) for p, r in zip(tmap.parameter, tmap.intensity))
    write_csv(csv_path, header, rows)
    peaks = tmap.peak_wavelength_nm
    reports = []
    for i, p in enumerate(tmap.parameter):
        rep = tmap.reports[i]
        reports.append({
            tmap.parameter_name: p,
            "present": bool(tmap.present[i]),
            "peak_nm": peaks[i],
            "bandwidth": None if rep is None else rep.to_dict(),
        })
    return write_json(json_path, {"parameter": tmap.parameter_name, "rows": reports})


def write_bandwidth_surface(csv_path, surface):
    header = ["pump_nm\\temperature_c"] + [_cell(t) for t in surface.temperature_c]
    rows = ([p] + list(r) for p, r in zip(surface.pump_nm, surface.bandwidth_thz))
    return write_csv(csv_path, header, rows)


LOSS_COLUMNS = ("waveguide_id", "K", "R", "loss_db_per_cm", "flags")


def write_loss_report(path, results):
    rows = ((r.waveguide_id, r.contrast, r.reflectivity, r.loss_db_per_cm, r.flags) for r in results)
    return write_csv(path, LOSS_COLUMNS, rows)


def write_fringe_scan(csv_path, scan, sidecar=None, reflectivity=True):
    """Scan CSV plus JSON sidecar. With ``reflectivity=False`` the sidecar
    omits R, which must then be derivable from ``sidecar`` (probe fields)."""
    write_csv(csv_path, ("scan_axis", "power"), zip(scan.axis, scan.power))
    meta = {"waveguide_id": scan.waveguide_id, "length_cm": scan.length_cm}
    if reflectivity:
        meta["reflectivity"] = scan.reflectivity
    meta.update(sidecar or {})
    return write_json(Path(csv_path).with_suffix(".json"), meta)


def read_fringe_scan(csv_path, model=None):
    """Two-column scan CSV plus its JSON sidecar (same stem).

    The sidecar gives ``length_cm`` and either ``reflectivity`` or a probe
    ``probe_wavelength_nm`` with ``polarization`` (and optional
    ``temperature_c``), from which R follows by Fresnel reflection at the
    model index.
    """
    csv_path = Path(csv_path)
    side = csv_path.with_suffix(".json")
    try:
        meta = json.loads(side.read_text())
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read fringe scan {csv_path}: {err}") from None
    if "length_cm" not in meta:
        raise ConfigError(f"{side}: missing 'length_cm'")
    if "reflectivity" in meta:
        r = float(meta["reflectivity"])
    elif "probe_wavelength_nm" in meta and "polarization" in meta:
        if model is None:
            raise ConfigError(f"{side}: reflectivity from the probe wavelength needs a dispersion model")
        n = refractive_index(model, float(meta["probe_wavelength_nm"]),
                             float(meta.get("temperature_c", 25.0)), meta["polarization"])
        r = fresnel_reflectivity(n)
    else:
        raise ConfigError(f"{side}: give 'reflectivity' or 'probe_wavelength_nm' with 'polarization'")
    try:
        return FringeScan(data[:, 0], data[:, 1], r, float(meta["length_cm"]),
                          str(meta.get("waveguide_id", csv_path.stem)))
    except ValueError as err:
        raise ConfigError(f"{csv_path}: {err}") from None
