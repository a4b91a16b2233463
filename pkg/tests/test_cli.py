import json
import os

import numpy as np
import pytest

from frontlab import storage
from frontlab.cli import main

SMALL = {
    "potential": {"kind": "quadratic", "a": 1.0},
    "kernel": {"kind": "constant", "k": 1.0},
    "alpha": 0.25,
    "grid": {"R_y": 10.0, "n_y": 201, "L_x": 30.0, "n_x": 121},
    "time": {"T": 1.0, "dt": "auto", "snapshot_stride": 10},
    "initial": {"amplitude": 0.02, "r_x": 2.0, "r_y": 1.0},
    "spectrum": {"k": 6},
}


def write_cfg(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


def test_spectrum_subcommand(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "spectrum"]) == 0
    report = storage.read_json(out / "spectrum_report.json")
    assert abs(report["eigenvalues"][0] - 0.5) < 1e-3
    assert report["config_hash"]
    vals, vecs = storage.read_spectral_csv(out / "spectral_basis.csv")
    assert len(vals) == 6 and vecs.shape == (6, 201)


def test_missing_potential_exits_2(tmp_path, capsys):
    payload = dict(SMALL)
    del payload["potential"]
    cfg = write_cfg(tmp_path, payload)
    code = main(["--config", str(cfg), "spectrum"])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"]["message"] == "config.potential required"
    assert err["error"]["code"] == 2


def test_corrupt_json_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["--config", str(p), "spectrum"]) == 2


def test_spectrum_outputs_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["--config", str(cfg), "--out", str(out1), "spectrum"]) == 0
    assert main(["--config", str(cfg), "--out", str(out2), "spectrum"]) == 0
    a = (out1 / "spectral_basis.csv").read_bytes()
    b = (out2 / "spectral_basis.csv").read_bytes()
    assert a == b


def test_alpha_bar_subcommand(tmp_path):
    payload = dict(SMALL, grid={"R_y": 10.0, "n_y": 801, "L_x": 30.0, "n_x": 121},
                   alpha_bar_tol=1e-4)
    cfg = write_cfg(tmp_path, payload)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "alpha-bar"]) == 0
    report = storage.read_json(out / "alpha_bar.json")
    assert abs(report["alpha_bar"] - 1.0) < 2e-3


def test_wave_partial_success(tmp_path):
    payload = dict(SMALL, speeds=["cstar", "1.05*cstar", "0.9*cstar"])
    cfg = write_cfg(tmp_path, payload)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "wave"]) == 0
    report = storage.read_json(out / "wave_report.json")
    statuses = [w["status"] for w in report["waves"]]
    assert statuses[0] == "ok" and statuses[1] == "ok"
    assert statuses[2].startswith("rejected")
    assert (out / "profile_c00.csv").exists()
    assert (out / "wave_c00.bin").exists()
    assert not (out / "profile_c02.csv").exists()


def test_wave_empty_speed_list_defaults_to_cstar(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "wave"]) == 0
    report = storage.read_json(out / "wave_report.json")
    assert len(report["waves"]) == 1
    assert report["waves"][0]["c"] == pytest.approx(report["c_star"])


def test_wave_threads_give_same_report(tmp_path):
    payload = dict(SMALL, speeds=["cstar", "1.1*cstar", "1.3*cstar"])
    cfg = write_cfg(tmp_path, payload)
    out1, out2 = tmp_path / "t1", tmp_path / "t2"
    assert main(["--config", str(cfg), "--out", str(out1), "wave"]) == 0
    assert main(["--config", str(cfg), "--out", str(out2), "--threads", "3", "wave"]) == 0
    assert ((out1 / "profile_c01.csv").read_bytes()
            == (out2 / "profile_c01.csv").read_bytes())


def test_simulate_and_speed_pipeline(tmp_path):
    cfg = write_cfg(tmp_path, dict(SMALL, time={"T": 3.0, "dt": "auto",
                                                "snapshot_stride": 20}))
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "simulate"]) == 0
    report = storage.read_json(out / "run_report.json")
    assert report["regime"] == "invasion"
    assert (out / "diagnostics.csv").exists()
    assert (out / "front_trace.csv").exists()
    # re-analysis pass over the stored trace
    assert main(["--config", str(cfg), "--out", str(out), "speed"]) == 0
    est = storage.read_json(out / "speed_estimate.json")
    assert est["status"] in ("ok", "no front")
    assert storage.check_run_consistency(out) == {}


def test_simulate_T0_graceful(tmp_path):
    cfg = write_cfg(tmp_path, dict(SMALL, time={"T": 0.0}))
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "simulate"]) == 0
    report = storage.read_json(out / "run_report.json")
    assert report["speed_estimate"]["status"] == "no data"
    assert report["steps"] == 0


def test_speed_without_trace_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    out = tmp_path / "empty"
    assert main(["--config", str(cfg), "--out", str(out), "speed"]) == 2


def test_bump_touching_boundary_exits_2(tmp_path):
    payload = dict(SMALL, initial={"amplitude": 0.02, "r_x": 30.0, "r_y": 1.0})
    cfg = write_cfg(tmp_path, payload)
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "simulate"]) == 2


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("FRONTLAB_THREADS", "2")
    cfg = write_cfg(tmp_path, dict(SMALL, speeds=["cstar", "1.2*cstar"]))
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "wave"]) == 0


def test_threads_env_invalid_exits_2(tmp_path, monkeypatch):
    monkeypatch.setenv("FRONTLAB_THREADS", "lots")
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o"), "wave"]) == 2


def test_verify_filter_runs_subset(tmp_path, capsys):
    out = tmp_path / "verify"
    code = main(["--out", str(out), "--filter", "critical-speed", "verify"])
    assert code == 0
    report = storage.read_json(out / "verification_report.json")
    assert report["n_total"] == 1
    assert report["criteria"][0]["name"] == "critical-speed"
    assert "[criterion 03]" in capsys.readouterr().out


def test_consistency_check_detects_tamper(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--out", str(out), "spectrum"]) == 0
    # tamper: rewrite the CSV with a different hash
    basis_csv = out / "spectral_basis.csv"
    text = basis_csv.read_text().replace("config_hash=", "config_hash=not")
    basis_csv.write_text(text)
    bad = storage.check_run_consistency(out)
    assert "spectral_basis.csv" in bad
