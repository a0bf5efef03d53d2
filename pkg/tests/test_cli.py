import json
import re
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from qpmpdc.cli import DEFAULTS, bundled_fringe_scans, main
from qpmpdc.errors import EXIT_CODES

ROOT = Path(__file__).resolve().parents[1]

# frozen working point of the default 6.0 um waveguide, so runs skip the solve
FAST = {
    "operating_point": {"pump_nm": 635.0089, "signal_nm": 825.321, "temperature_c": 242.3427},
    "grid": {"half_span_thz": 30.0, "points": 257},
    "tune": {"temperature_span_k": 0.5, "temperature_steps": 41, "classify": False},
    "sweep": {"pump_shifts_nm": [0.0, 0.5], "temperature_span_k": 1.0, "temperature_steps": 21},
    "brightness": {"detected_rate": 1.25e8, "pump_power_mw": 1.0, "bandwidth_ghz": 25000.0,
                   "coupling_efficiency": 0.2},
}

DATA_FILES = {
    "design": ["design.json"],
    "jsa": ["jsa.csv", "marginals.csv", "jsa_summary.json"],
    "tune": ["tuning_map.csv", "tuning_map.json", "tuning_summary.json"],
    "sweep": ["bandwidth_surface.csv", "sweep_summary.json"],
    "loss": ["loss_report.csv"],
    "brightness": ["brightness.json"],
}


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "fast.yaml"
    path.write_text(yaml.safe_dump(FAST))
    return path


def _run(command, out, *extra, config=None):
    argv = [command, "--out", str(out)]
    if config is not None:
        argv += ["--config", str(config)]
    return main(argv + list(extra))


def _manifest_without_timing(out):
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["wall_time_s"] >= 0
    del doc["wall_time_s"]
    return doc


@pytest.mark.parametrize("command", ["jsa", "tune", "sweep", "loss", "brightness"])
def test_reruns_are_byte_identical(tmp_path, fast_config, command):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(command, a, config=fast_config) == 0
    assert _run(command, b, config=fast_config) == 0
    for name in DATA_FILES[command]:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert _manifest_without_timing(a) == _manifest_without_timing(b)
    assert _manifest_without_timing(a)["outputs"] == DATA_FILES[command]


def test_design_run_and_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("design", a) == 0
    assert _run("design", b) == 0
    assert (a / "design.json").read_bytes() == (b / "design.json").read_bytes()
    doc = json.loads((a / "design.json").read_text())
    assert doc["within_tolerance"] is True
    wp = doc["working_point"]
    assert abs(wp["gv_residual"]) <= 1e-16 and abs(wp["gvd_residual"]) <= 1e-29
    assert abs(wp["delta_beta0_residual"]) <= 1e-9


def test_manifest_reproduces_the_run(tmp_path, fast_config):
    first = tmp_path / "first"
    assert _run("jsa", first, config=fast_config) == 0
    manifest = json.loads((first / "manifest.json").read_text())
    # the recorded config alone (no defaults, no flags) reproduces the outputs
    replay_cfg = tmp_path / "replay.yaml"
    replay_cfg.write_text(json.dumps(manifest["config"]))
    second = tmp_path / "second"
    assert _run("jsa", second, config=replay_cfg) == 0
    for name in DATA_FILES["jsa"]:
        assert (first / name).read_bytes() == (second / name).read_bytes()
    assert set(manifest["config"]) == set(DEFAULTS)
    assert manifest["model"]["name"] == "congruent_ln"
    assert manifest["command"] == "jsa"


def test_flags_override_the_config(tmp_path, fast_config):
    out = tmp_path / "o"
    assert _run("jsa", out, "--temperature-c", "242.0", "--temp-offset", "0.3427", config=fast_config) == 0
    cfg = json.loads((out / "manifest.json").read_text())["config"]
    assert cfg["operating_point"]["temperature_c"] == 242.0
    assert cfg["offsets"]["temperature_k"] == 0.3427
    # model temperature = lab + offset: the same physics as the frozen point
    summary = json.loads((out / "jsa_summary.json").read_text())
    assert summary["process"]["temperature_c"] == pytest.approx(242.3427, abs=1e-12)
    assert summary["lab"]["temperature_c"] == pytest.approx(242.0, abs=1e-12)


def test_pump_offset_is_applied_and_reported(tmp_path, fast_config):
    out = tmp_path / "o"
    assert _run("sweep", out, "--pump-nm", "632.6089", "--pump-offset", "2.4", config=fast_config) == 0
    summary = json.loads((out / "sweep_summary.json").read_text())
    # pumps are written in lab terms
    assert summary["pump_nm"] == pytest.approx([632.6089, 633.1089], abs=1e-9)


def test_loss_on_bundled_corpus(tmp_path):
    assert _run("loss", tmp_path) == 0
    rows = (tmp_path / "loss_report.csv").read_text().splitlines()
    assert rows[0] == "waveguide_id,K,R,loss_db_per_cm,flags"
    got = {r.split(",")[0]: float(r.split(",")[3]) for r in rows[1:]}
    assert len(got) == len(bundled_fringe_scans()) >= 8
    for csv in bundled_fringe_scans():
        side = json.loads(Path(csv).with_suffix(".json").read_text())
        assert got[side["waveguide_id"]] == pytest.approx(side["injected_loss_db_per_cm"], rel=0.01)


def test_brightness_command(tmp_path):
    argv = ["--detected-rate", "1.25e8", "--pump-power-mw", "1", "--bandwidth-ghz", "25000",
            "--coupling-efficiency", "0.2"]
    assert _run("brightness", tmp_path, *argv) == 0
    res = json.loads((tmp_path / "brightness.json").read_text())["result"]
    assert res == {"lower_bound": 5000.0, "estimate": 25000.0, "units": "counts/(s mW GHz)"}


def _write(tmp_path, doc):
    path = tmp_path / "cfg.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


@pytest.mark.parametrize("argv, code", [
    (["design", "--model", "/no/such/model.yaml"], 3),
    (["brightness"], 3),
    (["brightness", "--detected-rate", "1", "--background-rate", "2", "--pump-power-mw", "1",
      "--bandwidth-ghz", "1"], 35),
    (["brightness", "--detected-rate", "1", "--pump-power-mw", "-1", "--bandwidth-ghz", "1"], 3),
    (["design", "--config", "/no/such/config.yaml"], 3),
    (["jsa", "--pump-nm", "635.0089", "--signal-nm", "825.321", "--temperature-c", "400"], 10),
    (["jsa", "--pump-nm", "634.5", "--temperature-c", "242.3427"], 15),
    (["jsa", "--pump-nm", "635.5", "--temperature-c", "242.3427"], 2),
])
def test_exit_codes(tmp_path, capsys, argv, code):
    assert main(argv[:1] + ["--out", str(tmp_path)] + argv[1:]) == code
    err = capsys.readouterr().err
    assert err.startswith("qpmpdc: error: ")
    if "--model" in argv:
        assert "/no/such/model.yaml" in err


@pytest.mark.parametrize("doc, code", [
    ({"solver": {"pump_range_nm": [640.0, 640.0]}}, 3),
    ({"solver": {"temperature_range_c": [100.0, 120.0]}}, 2),
    ({"offsets": {"temperature_k": float("nan")}}, 3),
    ({"no_such_key": 1}, 3),
    ({"waveguide": {"length_mm": -1.0}}, 3),
    ({"grid": {"points": 100}}, 3),
])
def test_config_errors(tmp_path, doc, code):
    assert _run("design", tmp_path / "o", config=_write(tmp_path, doc)) == code


def test_classification_needing_a_wider_scan(tmp_path, fast_config):
    # a 0.3 K scan starting above the working temperature has its best row on the edge
    argv = ["--temperature-c", "243.0"]
    doc = dict(FAST, tune={"temperature_span_k": 0.15, "temperature_steps": 7, "classify": True})
    assert _run("tune", tmp_path / "o", *argv, config=_write(tmp_path, doc)) == 25


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qpmpdc", "brightness", "--out", str(tmp_path),
                           "--detected-rate", "10", "--pump-power-mw", "1", "--bandwidth-ghz", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "lower bound 5" in proc.stdout


def test_readme_documents_every_exit_code():
    readme = (ROOT / "README.md").read_text()
    for name, code in EXIT_CODES.items():
        assert re.search(rf"\|\s*`?{name}`?\s*\|\s*{code}\s*\|", readme), name
