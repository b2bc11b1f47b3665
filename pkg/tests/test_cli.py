"""End-to-end CLI behavior: exit codes, determinism, file formats."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from boundmon import Sample, UncertainLog, Zonotope, read_log, write_log
from boundmon.cli import EXIT_ERROR, EXIT_SAFE, EXIT_UNSAFE, main
from boundmon.configs import shipped_config_path

TOY_CONFIG = {
    "name": "toy-rotor",
    "dynamics": {
        "kind": "discrete",
        "center": [[0.995, -0.06], [0.06, 0.995]],
        "radius": [[1e-5, 1e-5], [1e-5, 1e-5]],
    },
    "initial": {"box": [[1.0, 1.02], [0.0, 0.02]]},
    "unsafe": {"regions": [{"box": [[5.0, 6.0], [5.0, 6.0]]}]},
    "horizon": 60,
    "seed": 7,
    "trace_mode": "per-step",
    "logging": {"p_log": 0.3, "t_delta": 1, "sensor_radius": [0.02, 0.02]},
}


@pytest.fixture
def toy_config(tmp_path):
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(TOY_CONFIG), encoding="utf-8")
    return str(path)


def read_csv_rows(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


# --- top-level behavior -----------------------------------------------------------


def test_backend_info(capsys):
    assert main(["--backend-info"]) == EXIT_SAFE
    out = capsys.readouterr().out
    assert "active kernel backend:" in out
    assert "available backends:" in out


def test_no_command_shows_help(capsys):
    assert main([]) == EXIT_ERROR
    assert "usage: boundmon" in capsys.readouterr().out


def test_missing_files_exit_2(tmp_path, toy_config, capsys):
    assert main(["offline", "--config", "nope.json", "--log", "x.json"]) == EXIT_ERROR
    assert main(["offline", "--config", toy_config, "--log", "missing.json"]) == EXIT_ERROR
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="utf-8")
    assert main(["genlog", "--config", str(bad), "--out", str(tmp_path / "o.json")]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "error:" in err


def test_console_script_is_installed():
    proc = subprocess.run(
        ["boundmon", "--backend-info"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert "active kernel backend" in proc.stdout


# --- genlog -----------------------------------------------------------------------


def test_genlog_is_deterministic(tmp_path, toy_config):
    paths = []
    for tag in ("a", "b"):
        log = tmp_path / f"log-{tag}.json"
        trace = tmp_path / f"trace-{tag}.json"
        code = main(
            ["genlog", "--config", toy_config, "--out", str(log), "--out-trace", str(trace)]
        )
        assert code == EXIT_SAFE
        paths.append((log, trace))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()
    log = read_log(paths[0][0])
    assert log.samples[0].t_lb == 0
    assert log.horizon == 60


def test_genlog_seed_changes_output(tmp_path, toy_config):
    outs = []
    for seed in ("7", "8"):
        out = tmp_path / f"log-{seed}.json"
        assert main(["genlog", "--config", toy_config, "--out", str(out), "--seed", seed]) == 0
        outs.append(out.read_bytes())
    assert outs[0] != outs[1]


def test_genlog_full_density(tmp_path, toy_config):
    out = tmp_path / "dense.json"
    code = main(
        ["genlog", "--config", toy_config, "--out", str(out), "--p-log", "1.0", "--t-delta", "0"]
    )
    assert code == EXIT_SAFE
    log = read_log(out)
    assert len(log) == 61
    assert [s.t_lb for s in log.samples] == list(range(61))
    assert all(s.t_lb == s.t_ub for s in log.samples)


def test_genlog_sample_count_is_binomial(tmp_path):
    # With t_delta = 0 no candidate is discarded, so the count is exactly
    # 1 + Binomial(horizon, p).  Mean 401, sd ~17.9 at p = 0.2 over 2000 steps;
    # a 4-sigma band keeps false alarms around the 1e-4 level.
    out = tmp_path / "acc-log.json"
    code = main(
        [
            "genlog",
            "--config",
            str(shipped_config_path("acc")),
            "--out",
            str(out),
            "--p-log",
            "0.2",
            "--t-delta",
            "0",
            "--seed",
            "123",
        ]
    )
    assert code == EXIT_SAFE
    count = len(read_log(out))
    mean = 1 + 0.2 * 2000
    sd = math.sqrt(2000 * 0.2 * 0.8)
    assert mean - 4 * sd <= count <= mean + 4 * sd


def test_genlog_sensor_radius_override(tmp_path, toy_config):
    out = tmp_path / "wide.json"
    code = main(
        ["genlog", "--config", toy_config, "--out", str(out), "--sensor-radius", "0.5"]
    )
    assert code == EXIT_SAFE
    log = read_log(out)
    z = log.samples[0].set
    np.testing.assert_allclose(np.abs(z.generators).sum(axis=1), [0.5, 0.5])
    assert (
        main(["genlog", "--config", toy_config, "--out", str(out), "--sensor-radius", "a,b"])
        == EXIT_ERROR
    )
    assert (
        main(["genlog", "--config", toy_config, "--out", str(out), "--p-log", "1.5"])
        == EXIT_ERROR
    )


# --- offline ----------------------------------------------------------------------


def test_offline_safe_run_writes_verdict_and_csv(tmp_path, toy_config, capsys):
    log_path = tmp_path / "log.json"
    assert main(["genlog", "--config", toy_config, "--out", str(log_path), "--t-delta", "0"]) == 0
    verdict_path = tmp_path / "verdict.json"
    csv_path = tmp_path / "run.csv"
    code = main(
        [
            "offline",
            "--config",
            toy_config,
            "--log",
            str(log_path),
            "--out",
            str(verdict_path),
            "--out-csv",
            str(csv_path),
        ]
    )
    assert code == EXIT_SAFE
    assert capsys.readouterr().out.strip().endswith("Safe")

    doc = json.loads(verdict_path.read_text(encoding="utf-8"))
    assert doc["outcome"] == "Safe"
    assert doc["witness"] is None
    assert doc["stats"]["refinement_hits"] == 0

    header, rows = read_csv_rows(csv_path)
    assert header == ["kind", "t_lo", "t_hi", "dim", "lb", "ub"]
    kinds = {r[0] for r in rows}
    assert kinds == {"reach", "sample", "unsafe"}

    # Replay containment: each point-timestamped sample hull must sit inside
    # the merged reach hull at its step (repr round-trip keeps this exact).
    reach = {}
    for r in rows:
        if r[0] == "reach":
            reach[(int(r[1]), int(r[3]))] = (float(r[4]), float(r[5]))
    checked = 0
    for r in rows:
        if r[0] != "sample":
            continue
        step, d = int(r[1]), int(r[3])
        lb, ub = float(r[4]), float(r[5])
        assert reach[(step, d)][0] <= lb and ub <= reach[(step, d)][1]
        checked += 1
    assert checked > 10


def test_offline_unsafe_sample_exit_code(tmp_path, toy_config):
    samples = [
        Sample(Zonotope([1.0, 0.0], np.diag([0.02, 0.02])), 0, 0),
        Sample(Zonotope([5.5, 5.5], np.diag([0.02, 0.02])), 10, 11),
    ]
    log_path = tmp_path / "bad-log.json"
    write_log(UncertainLog(samples, horizon=60), log_path)
    verdict_path = tmp_path / "verdict.json"
    code = main(
        [
            "offline",
            "--config",
            toy_config,
            "--log",
            str(log_path),
            "--out",
            str(verdict_path),
        ]
    )
    assert code == EXIT_UNSAFE
    doc = json.loads(verdict_path.read_text(encoding="utf-8"))
    assert doc["outcome"] == "Unsafe"
    assert doc["witness"]["kind"] == "unsafe_sample"
    assert doc["witness"]["sample_index"] == 1


def test_offline_dimension_mismatch_exits_2(tmp_path, toy_config):
    log_path = tmp_path / "one-d.json"
    write_log(UncertainLog([Sample(Zonotope([1.0]), 0, 0)], horizon=5), log_path)
    assert main(["offline", "--config", toy_config, "--log", str(log_path)]) == EXIT_ERROR


def test_offline_workers_do_not_change_outputs(tmp_path, toy_config):
    log_path = tmp_path / "log.json"
    assert main(["genlog", "--config", toy_config, "--out", str(log_path)]) == 0
    outputs = {}
    for workers in ("1", "4"):
        verdict = tmp_path / f"v{workers}.json"
        run_csv = tmp_path / f"r{workers}.csv"
        code = main(
            [
                "offline",
                "--config",
                toy_config,
                "--log",
                str(log_path),
                "--workers",
                workers,
                "--out",
                str(verdict),
                "--out-csv",
                str(run_csv),
            ]
        )
        assert code == EXIT_SAFE
        outputs[workers] = (verdict.read_bytes(), run_csv.read_bytes())
    assert outputs["1"] == outputs["4"]


# --- online -----------------------------------------------------------------------


def test_online_safe_run(tmp_path, toy_config):
    log_path = tmp_path / "log.json"
    trace_path = tmp_path / "trace.json"
    assert (
        main(
            [
                "genlog",
                "--config",
                toy_config,
                "--out",
                str(log_path),
                "--out-trace",
                str(trace_path),
            ]
        )
        == 0
    )
    report_path = tmp_path / "report.json"
    csv_path = tmp_path / "online.csv"
    code = main(
        [
            "online",
            "--config",
            toy_config,
            "--trace",
            str(trace_path),
            "--out",
            str(report_path),
            "--out-csv",
            str(csv_path),
        ]
    )
    assert code == EXIT_SAFE
    doc = json.loads(report_path.read_text(encoding="utf-8"))
    assert doc["outcome"] == "Safe"
    assert doc["triggered_steps"][0] == 0
    assert doc["stats"]["trigger_fraction"] <= 0.5

    header, rows = read_csv_rows(csv_path)
    kinds = {r[0] for r in rows}
    assert "reach" in kinds and "trigger" in kinds and "unsafe" in kinds
    assert "sample" not in kinds


def test_online_trace_shorter_than_horizon_exits_2(tmp_path, toy_config):
    from boundmon import GroundTruthTrace, write_trace

    short = GroundTruthTrace(np.ones((10, 2)), seed=None, mode="per-step")
    trace_path = tmp_path / "short.json"
    write_trace(short, trace_path)
    assert main(["online", "--config", toy_config, "--trace", str(trace_path)]) == EXIT_ERROR


# --- plot -------------------------------------------------------------------------


def make_offline_csv(tmp_path, toy_config):
    log_path = tmp_path / "log.json"
    assert main(["genlog", "--config", toy_config, "--out", str(log_path)]) == 0
    csv_path = tmp_path / "run.csv"
    assert (
        main(
            ["offline", "--config", toy_config, "--log", str(log_path), "--out-csv", str(csv_path)]
        )
        == EXIT_SAFE
    )
    return csv_path


def test_plot_is_deterministic_and_well_formed(tmp_path, toy_config):
    csv_path = make_offline_csv(tmp_path, toy_config)
    outs = []
    for tag in ("1", "2"):
        out = tmp_path / f"plot-{tag}.svg"
        code = main(
            [
                "plot",
                "--csv",
                str(csv_path),
                "--dim",
                "0",
                "--out",
                str(out),
                "--title",
                "toy <run> & friends",
            ]
        )
        assert code == EXIT_SAFE
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    svg = outs[0].decode("utf-8")
    assert svg.startswith("<svg ")
    assert svg.rstrip().endswith("</svg>")
    assert "toy &lt;run&gt; &amp; friends" in svg
    assert "<polygon" in svg or "<line" in svg
    assert "<rect" in svg


def test_plot_empty_csv_still_renders(tmp_path):
    csv_path = tmp_path / "empty.csv"
    csv_path.write_text("kind,t_lo,t_hi,dim,lb,ub\n", encoding="utf-8")
    out = tmp_path / "empty.svg"
    assert main(["plot", "--csv", str(csv_path), "--dim", "0", "--out", str(out)]) == EXIT_SAFE
    assert out.read_text(encoding="utf-8").startswith("<svg ")


def test_plot_rejects_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("wrong,header\n", encoding="utf-8")
    out = tmp_path / "never.svg"
    assert main(["plot", "--csv", str(bad), "--dim", "0", "--out", str(out)]) == EXIT_ERROR
    assert "expected header" in capsys.readouterr().err
    bad.write_text("kind,t_lo,t_hi,dim,lb,ub\nmystery,0,0,0,0.0,1.0\n", encoding="utf-8")
    assert main(["plot", "--csv", str(bad), "--dim", "0", "--out", str(out)]) == EXIT_ERROR
