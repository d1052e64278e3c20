import json
import subprocess
import sys

import numpy as np
import pytest

from rramvmm import io
from rramvmm.cli import main
from rramvmm.device import PRESET_NAMES


def _config(tmp_path, **raw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_presets_lists_four_devices(capsys):
    assert main(["presets"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert [d["name"] for d in table] == list(PRESET_NAMES)


def test_run_writes_outputs_with_provenance(tmp_path):
    out = tmp_path / "run"
    cfg = _config(tmp_path, device="TaOx/HfOx", trials=5, fit=False, bins=12)
    assert main(["run", "--config", cfg, "--out", str(out), "--seed", "9"]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["histogram.csv", "manifest.json",
                                                     "samples.csv", "summary.json"]
    manifest = json.loads((out / "manifest.json").read_text())
    summary = json.loads((out / "summary.json").read_text())
    digest = io.load_config(cfg).digest()
    assert manifest["config_digest"] == summary["config_digest"] == digest
    assert manifest["seed"] == summary["seed"] == 9
    assert len((out / "samples.csv").read_text().splitlines()) == 5 * 32 + 1
    assert len((out / "histogram.csv").read_text().splitlines()) == 13


def test_seed_changes_samples_but_not_digest(tmp_path):
    cfg = _config(tmp_path, trials=2, fit=False)
    for seed in ("1", "2"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / seed), "--seed", seed]) == 0
    a = (tmp_path / "1" / "samples.csv").read_bytes()
    b = (tmp_path / "2" / "samples.csv").read_bytes()
    assert a != b
    da = json.loads((tmp_path / "1" / "manifest.json").read_text())["config_digest"]
    db = json.loads((tmp_path / "2" / "manifest.json").read_text())["config_digest"]
    assert da == db


def test_thread_count_does_not_change_output(tmp_path):
    cfg = _config(tmp_path, experiment="compare", trials=60, fit=False)
    for n in ("1", "4"):
        assert main(["compare", "--config", cfg, "--out", str(tmp_path / n), "--threads", n]) == 0
    names = sorted(p.name for p in (tmp_path / "1").iterdir())
    assert len([n for n in names if n.startswith("samples_")]) == 8
    for name in names:
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()


def test_sweep_command(tmp_path):
    cfg = _config(tmp_path, experiment="sweep", trials=3,
                  sweep={"parameter": "c2c", "values": [0.0, 0.02], "with_nonlinearity": True})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    doc = json.loads((tmp_path / "s" / "summary.json").read_text())
    assert [r["series"] for r in doc["records"]] == ["without_nonlinearity"] * 2 + \
        ["with_nonlinearity"] * 2
    assert doc["records"][0]["best_fit"] is None


def test_fit_and_histogram_from_samples(tmp_path):
    samples = tmp_path / "x.csv"
    x = np.random.default_rng(0).standard_normal(400)
    samples.write_text("trial,row,error\n" + "".join(f"0,{i},{float(v)!r}\n" for i, v in enumerate(x)))
    assert main(["histogram", "--input", str(samples), "--bins", "20",
                 "--out", str(tmp_path / "h")]) == 0
    table = (tmp_path / "h" / "histogram.csv").read_text().splitlines()
    assert len(table) == 21
    assert main(["fit", "--input", str(samples), "--out", str(tmp_path / "f")]) == 0
    rec = json.loads((tmp_path / "f" / "summary.json").read_text())["records"][0]
    assert rec["best_fit"] in ("Normal", "Normal-2-Mixture", "Normal-3-Mixture", "Johnson Su",
                               "SHASH")
    assert rec["n"] == 400


@pytest.mark.parametrize("argv", [
    ["run", "--config", "/nonexistent/cfg.json"],
    ["run", "--seed", "-3"],
    ["run", "--threads", "0"],
    ["histogram", "--bins", "3", "--input", "x.csv"],
    ["fit"],
])
def test_validation_errors_exit_1(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_config_contents_exit_1(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"trials": 0}')
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    cfg.write_text('{"experiment": "sweep"}')
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_malformed_samples_exit_1(tmp_path):
    samples = tmp_path / "bad.csv"
    samples.write_text("trial,row,error\n0,0,abc\n")
    assert main(["histogram", "--input", str(samples), "--out", str(tmp_path / "h")]) == 1


def test_runtime_error_exits_2(tmp_path):
    samples = tmp_path / "few.csv"
    samples.write_text("trial,row,error\n0,0,1.0\n0,1,2.0\n")
    assert main(["fit", "--input", str(samples), "--out", str(tmp_path / "f")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rramvmm", "presets"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0 and "EpiRAM" in proc.stdout
