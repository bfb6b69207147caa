"""Command-line surface: exit codes, file outputs, determinism, manifests."""

import json

import numpy as np
import pytest

from hdclt.cli import main
from hdclt.experiments import CSV_COLUMNS, ExperimentConfig
from hdclt.populations import save_matrix
from hdclt.util import sha256_hex


def run_cli(*argv):
    try:
        return main(list(argv))
    except SystemExit as exc:  # argparse-level exits (--version, bad choices)
        return int(exc.code or 0)


def exact_config(tmp_path, **overrides):
    cfg = {
        "experiment": "clt_rate",
        "population": {"p": 1, "seed": 0, "law": "rademacher", "model": "identity"},
        "n_grid": [4, 8, 16, 32],
        "out_path": str(tmp_path / "out"),
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_writes_csv_json_and_manifest(tmp_path):
    cfg_path = exact_config(tmp_path)
    assert run_cli("run", "--config", str(cfg_path)) == 0
    base = tmp_path / "out"
    csv_text = (base.parent / "out.csv").read_text()
    lines = csv_text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 4
    summary = json.loads((base.parent / "out.json").read_text())
    assert summary["config"]["experiment"] == "clt_rate"
    assert summary["fit"]["slope"] < 0

    manifest = json.loads((base.parent / "out.manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["master_seed"] == 0
    assert manifest["error"] is None
    assert manifest["outputs"] == [str(base) + ".csv", str(base) + ".json"]
    cfg = ExperimentConfig.from_json(cfg_path.read_text())
    assert manifest["config_hash"] == sha256_hex(cfg.to_json())


def test_run_results_ignore_thread_count(tmp_path):
    cfg = {
        "experiment": "clt_rate",
        "population": {
            "p": 2,
            "seed": 0,
            "law": "rademacher",
            "model": "equicorrelated",
            "model_params": {"rho_bar": 0.3},
        },
        "n_grid": [4, 8, 16],
        "budget": 50_000,
        "estimator": "monte_carlo",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert run_cli("run", "--config", str(path), "--out", a, "--threads", "1") == 0
    assert run_cli("run", "--config", str(path), "--out", b, "--threads", "4") == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ja = json.loads((tmp_path / "a.json").read_text())
    jb = json.loads((tmp_path / "b.json").read_text())
    ja["config"].pop("out_path")
    jb["config"].pop("out_path")
    assert ja == jb


def test_run_seed_override(tmp_path):
    cfg_path = exact_config(tmp_path)
    assert run_cli("run", "--config", str(cfg_path), "--seed", "5") == 0
    manifest = json.loads((tmp_path / "out.manifest.json").read_text())
    assert manifest["master_seed"] == 5
    summary = json.loads((tmp_path / "out.json").read_text())
    assert summary["config"]["seed"] == 5


def test_run_validation_failures(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("run", "--config", str(bad)) == 2
    assert "error:" in capsys.readouterr().err

    empty_grid = exact_config(tmp_path, n_grid=[])
    assert run_cli("run", "--config", str(empty_grid)) == 2
    manifest_after = json.loads((tmp_path / "out.manifest.json").read_text()) if (
        tmp_path / "out.manifest.json"
    ).exists() else None
    if manifest_after is not None:
        assert manifest_after["status"] in ("running", "failed", "ok")

    assert run_cli("run", "--config", str(tmp_path / "missing.json")) == 2


def test_failed_run_leaves_failed_manifest(tmp_path):
    # config parses but the experiment itself rejects it
    cfg = {
        "experiment": "gaussian_compare",
        "population": {"p": 1, "seed": 0, "law": "standard_normal", "model": "identity"},
        "out_path": str(tmp_path / "gc"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run_cli("run", "--config", str(path)) == 2
    manifest = json.loads((tmp_path / "gc.manifest.json").read_text())
    assert manifest["status"] == "failed"
    assert "p >= 2" in manifest["error"]


def test_check_suite_pass_path(tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert run_cli("check", "--suite", "geometry", "--out", str(report_path)) == 0
    out = capsys.readouterr().out
    assert out.strip()
    for line in out.strip().split("\n"):
        assert line.startswith("PASS geometry.")
    report = json.loads(report_path.read_text())
    assert report["suite"] == "geometry"
    assert report["passed"] is True
    assert all(item["passed"] for item in report["checks"])


@pytest.mark.xfail(
    strict=True,
    reason="the full suite includes the order-3 growth window, which the "
    "honest probe exceeds; see the companion test for the precise failure set",
)
def test_check_all_suites_green():
    assert run_cli("check", "--suite", "all") == 0


def test_check_all_fails_only_on_the_growth_window(tmp_path, capsys):
    report_path = tmp_path / "all.json"
    assert run_cli("check", "--suite", "all", "--out", str(report_path)) == 1
    err = capsys.readouterr().err
    assert "failed checks: smoothing.growth_order_3" in err
    report = json.loads(report_path.read_text())
    failing = [item["id"] for item in report["checks"] if not item["passed"]]
    assert failing == ["smoothing.growth_order_3"]


def test_check_unknown_suite_is_a_usage_error():
    assert run_cli("check", "--suite", "wavelets") == 2


def test_no_subcommand_prints_usage():
    assert run_cli() == 2


def test_version_flag(capsys):
    assert run_cli("--version") == 0
    assert "hdclt" in capsys.readouterr().out


def test_infer_csv_and_binary_agree(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.standard_normal((60, 3))
    csv_path = tmp_path / "d.csv"
    np.savetxt(csv_path, data, delimiter=",")
    bin_path = tmp_path / "d.mat"
    save_matrix(str(bin_path), np.loadtxt(csv_path, delimiter=",", ndmin=2))
    out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
    assert run_cli("infer", str(csv_path), "--out", str(out_a)) == 0
    assert run_cli("infer", str(bin_path), "--out", str(out_b)) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    payload = json.loads(out_a.read_text())
    assert set(payload) == {
        "n", "p", "alpha", "method", "B", "seed",
        "centers", "half_width", "q_hat", "reject",
    }
    assert payload["n"] == 60 and payload["p"] == 3
    assert payload["half_width"] == pytest.approx(payload["q_hat"] / np.sqrt(60))
    assert isinstance(payload["reject"], bool)


def test_infer_detects_an_obvious_shift(tmp_path, capsys):
    rng = np.random.default_rng(1)
    data = rng.standard_normal((80, 2)) + 5.0
    csv_path = tmp_path / "shift.csv"
    np.savetxt(csv_path, data, delimiter=",")
    assert run_cli("infer", str(csv_path)) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["reject"] is True


def test_infer_is_deterministic(tmp_path, capsys):
    rng = np.random.default_rng(2)
    csv_path = tmp_path / "d.csv"
    np.savetxt(csv_path, rng.standard_normal((40, 2)), delimiter=",")
    assert run_cli("infer", str(csv_path), "--seed", "9", "--B", "500") == 0
    first = capsys.readouterr().out
    assert run_cli("infer", str(csv_path), "--seed", "9", "--B", "500") == 0
    assert capsys.readouterr().out == first


def test_infer_input_errors(tmp_path, capsys):
    one_row = tmp_path / "one.csv"
    np.savetxt(one_row, np.ones((1, 3)), delimiter=",")
    assert run_cli("infer", str(one_row)) == 2
    assert run_cli("infer", str(tmp_path / "absent.csv")) == 2
    garbled = tmp_path / "junk.bin"
    garbled.write_bytes(b"\x00\x01hello world not a matrix")
    assert run_cli("infer", str(garbled)) == 2
    capsys.readouterr()


def test_threads_env_validation(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HDCLT_THREADS", "abc")
    cfg_path = exact_config(tmp_path)
    assert run_cli("run", "--config", str(cfg_path)) == 2
    assert "HDCLT_THREADS" in capsys.readouterr().err
    monkeypatch.setenv("HDCLT_THREADS", "2")
    assert run_cli("run", "--config", str(cfg_path)) == 0
