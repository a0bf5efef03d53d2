import json
import math
import os
import stat

import numpy as np
import pytest

from qpmpdc import io as qio
from qpmpdc.dispersion import refractive_index
from qpmpdc.errors import ConfigError
from qpmpdc.metrology import FringeScan, fresnel_reflectivity, synthetic_scan


def test_floats_round_trip_through_csv(tmp_path):
    values = [0.1, 1 / 3, 2.5e-17, -7.0, float("nan")]
    qio.write_csv(tmp_path / "a.csv", ("x",), ([v] for v in values))
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "x"
    back = [float(v) for v in lines[1:]]
    assert back[:4] == values[:4]
    assert math.isnan(back[4])


def test_json_is_canonical(tmp_path):
    doc = {"b": np.float64(0.1), "a": [np.int64(3), np.bool_(True), float("inf")], "c": np.array([1.5, 2.0])}
    text = qio.dumps_json(doc)
    assert text == qio.dumps_json(dict(reversed(list(doc.items()))))
    assert json.loads(text) == {"a": [3, True, None], "b": 0.1, "c": [1.5, 2.0]}


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "sub" / "out.json"
    qio.write_json(target, {"x": 1})
    qio.write_json(target, {"x": 2})
    assert json.loads(target.read_text()) == {"x": 2}
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]
    # permissions follow the umask like any other file
    mask = os.umask(0)
    os.umask(mask)
    assert stat.S_IMODE(target.stat().st_mode) == 0o666 & ~mask


def test_failed_write_keeps_the_old_file(tmp_path):
    target = tmp_path / "out.json"
    qio.write_json(target, {"x": 1})
    with pytest.raises(TypeError):
        qio.write_json(target, {"x": object()})
    assert json.loads(target.read_text()) == {"x": 1}
    assert len(list(tmp_path.iterdir())) == 1


def test_fringe_scan_round_trip(tmp_path):
    scan = synthetic_scan(0.14, 0.2, 4.0, waveguide_id="wgX")
    qio.write_fringe_scan(tmp_path / "wgX.csv", scan)
    back = qio.read_fringe_scan(tmp_path / "wgX.csv")
    assert np.array_equal(back.axis, scan.axis)
    assert np.array_equal(back.power, scan.power)
    assert (back.reflectivity, back.length_cm, back.waveguide_id) == (0.14, 4.0, "wgX")


def test_reflectivity_from_probe_wavelength(tmp_path, model):
    scan = FringeScan(np.arange(5.0), np.array([1.0, 2.0, 1.0, 2.0, 1.0]), 0.1, 2.0, "p")
    side = {"probe_wavelength_nm": 1550.0, "polarization": "e", "temperature_c": 25.0}
    qio.write_fringe_scan(tmp_path / "p.csv", scan, side, reflectivity=False)
    back = qio.read_fringe_scan(tmp_path / "p.csv", model)
    assert back.reflectivity == fresnel_reflectivity(refractive_index(model, 1550.0, 25.0, "e"))
    with pytest.raises(ConfigError):
        qio.read_fringe_scan(tmp_path / "p.csv")


@pytest.mark.parametrize("sidecar", [{"reflectivity": 0.1}, {"length_cm": 2.0}, None])
def test_bad_fringe_inputs(tmp_path, sidecar):
    (tmp_path / "s.csv").write_text("scan_axis,power\n0,1\n1,2\n2,1\n")
    if sidecar is not None:
        (tmp_path / "s.json").write_text(json.dumps(sidecar))
    with pytest.raises(ConfigError):
        qio.read_fringe_scan(tmp_path / "s.csv")


def test_non_monotonic_scan_is_a_config_error(tmp_path):
    (tmp_path / "s.csv").write_text("scan_axis,power\n0,1\n2,2\n1,1\n")
    (tmp_path / "s.json").write_text(json.dumps({"reflectivity": 0.1, "length_cm": 2.0}))
    with pytest.raises(ConfigError):
        qio.read_fringe_scan(tmp_path / "s.csv")
