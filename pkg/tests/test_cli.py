from __future__ import annotations

import json
import subprocess
import sys

import pytest

from georec import cli


def run_cli(argv) -> int:
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = exc.code
    return 0 if code is None else code


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A synthesized corpus shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    code = run_cli([
        "synth", "--seed", "13", "--out-dir", str(root),
        "--n-contexts", "2", "--users", "50", "--sites", "10",
        "--hub-sites", "2", "--events-per-context", "8",
        "--background-events", "4", "--heavy-fraction", "0.6",
        "--contexts-per-user", "2",
    ])
    assert code == 0
    return root


def test_synth_writes_the_corpus(workspace):
    assert (workspace / "events.csv").exists()
    assert (workspace / "contexts.json").exists()
    assert (workspace / "partonomy.json").exists()
    header = (workspace / "events.csv").read_text().splitlines()[0]
    assert header == "user_id,item_id,lat,lon,context_id,timestamp"


def test_missing_subcommand_is_a_usage_error(capsys):
    assert run_cli([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_a_usage_error(workspace, capsys):
    code = run_cli(["recommend", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--user", "u00000", "--context", "city-0", "--flux", "9"])
    assert code == 1


def test_bad_choice_is_a_usage_error(workspace):
    code = run_cli(["recommend", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--user", "u00000", "--context", "city-0",
                    "--scheme", "pagerank"])
    assert code == 1


def test_missing_events_file_is_a_data_error(workspace, capsys, tmp_path):
    code = run_cli(["recommend", "--events", str(tmp_path / "nope.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--user", "u00000", "--context", "city-0"])
    assert code == 2
    err = capsys.readouterr().err
    assert "georec: error:" in err
    assert "nope.csv" in err


def test_unknown_context_is_a_data_error(workspace, capsys):
    code = run_cli(["recommend", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--user", "u00000", "--context", "gotham"])
    assert code == 2
    assert "gotham" in capsys.readouterr().err


def test_recommend_emits_ranked_json(workspace, capsys):
    code = run_cli(["recommend", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--partonomy", str(workspace / "partonomy.json"),
                    "--user", "u00000", "--context", "city-0",
                    "--scheme", "cf-tl", "--n", "5", "--backfill"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["user"] == "u00000"
    assert out["context"] == "city-0"
    assert out["scheme"] == "cf-tl"
    assert 0 < len(out["items"]) <= 5
    for entry in out["items"]:
        assert {"unit", "score", "backfilled"} == set(entry)
    scores = [e["score"] for e in out["items"] if not e["backfilled"]]
    assert scores == sorted(scores, reverse=True)


def test_recommend_item_units(workspace, capsys):
    code = run_cli(["recommend", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--user", "u00001", "--context", "city-1",
                    "--units", "items", "--scheme", "cf", "--n", "4"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert all(isinstance(e["unit"], str) for e in out["items"])


def test_cluster_writes_assignment_json(workspace, tmp_path, capsys):
    out_path = tmp_path / "clusters.json"
    code = run_cli(["cluster", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--context", "city-0", "--radius-km", "1.0",
                    "--min-points", "3", "--out", str(out_path)])
    assert code == 0
    obj = json.loads(out_path.read_text())
    assert obj["context"] == "city-0"
    assert obj["n_clusters"] >= 1
    assert obj["assignment"], "assignment must map item ids to labels"
    assert all(isinstance(k, str) for k in obj["assignment"])
    labels = set(obj["assignment"].values())
    assert labels - {-1}, "expected at least one real cluster"
    assert len(obj["centroids"]) == obj["n_clusters"]
    assert all(c["size"] >= 3 for c in obj["centroids"])


def test_evaluate_writes_report_and_is_deterministic(workspace, tmp_path):
    args = ["evaluate", "--events", str(workspace / "events.csv"),
            "--contexts", str(workspace / "contexts.json"),
            "--partonomy", str(workspace / "partonomy.json"),
            "--context", "city-0", "--scenario", "some",
            "--scheme", "cf", "--n", "10", "--splits", "3", "--seed", "42"]
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "scheme,scenario,split,precision_at_n,recall_at_n"
    assert len(lines) == 1 + 3 + 2


def test_evaluate_leave_all_out_warns_about_split_count(workspace, tmp_path, capsys):
    code = run_cli(["evaluate", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--context", "city-0", "--scenario", "all",
                    "--scheme", "mp", "--splits", "5", "--seed", "1",
                    "--out", str(tmp_path / "r.csv")])
    assert code == 0
    err = capsys.readouterr().err
    assert "forcing" in err
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert len(lines) == 3  # header, split 0, mean; no std row


def test_evaluate_mix_scenario_with_cold_fraction(workspace, tmp_path):
    code = run_cli(["evaluate", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--partonomy", str(workspace / "partonomy.json"),
                    "--context", "city-0", "--scenario", "mix",
                    "--cold-fraction", "0.5", "--scheme", "cf-tl",
                    "--n", "10", "--splits", "2", "--seed", "7",
                    "--out", str(tmp_path / "mix.csv")])
    assert code == 0
    assert (tmp_path / "mix.csv").exists()


def test_evaluate_one_scenario_blanks_precision(workspace, tmp_path):
    code = run_cli(["evaluate", "--events", str(workspace / "events.csv"),
                    "--contexts", str(workspace / "contexts.json"),
                    "--context", "city-0", "--scenario", "one",
                    "--min-items", "2",
                    "--scheme", "mp", "--n", "10", "--splits", "2", "--seed", "3",
                    "--out", str(tmp_path / "one.csv")])
    assert code == 0
    for line in (tmp_path / "one.csv").read_text().splitlines()[1:]:
        assert line.split(",")[3] == ""


def test_help_screens_exit_cleanly():
    for sub in ("cluster", "recommend", "evaluate", "synth", "serve"):
        assert run_cli([sub, "--help"]) == 0


def test_module_entrypoint_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "georec.cli", "--help"],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0
    assert "georec" in proc.stdout
