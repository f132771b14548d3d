import csv
import json
import subprocess
import sys

import pytest

from kineseq.cli import main
from kineseq.pipeline import frame_to_dict
from kineseq.synth import SynthScript, load_poses, render_stream


@pytest.fixture
def files(tmp_path):
    ds = tmp_path / "eval.csv"
    assert main(["build-dataset", "--per-pose", "8", "--jitter", "2", "--seed", "1", "--output", str(ds)]) == 0
    stream = tmp_path / "stream.jsonl"
    script = "N:7,A:6,B:6,C:10,B:6,A:6,N:8,A:5,B:5,C:9,B:5,A:5"
    assert main(["simulate", "--script", script, "--output", str(stream)]) == 0
    moves = tmp_path / "moves.json"
    from importlib import resources

    moves.write_text(resources.files("kineseq").joinpath("data/movements.json").read_text())
    return ds, stream, moves


def test_analyze_prints_report(files, capsys):
    ds, stream, moves = files
    assert main(["analyze", "--dataset", str(ds), "--dictionary", str(moves), "--input", str(stream)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [(h["movement"], h["distance"]) for h in rep["identified"]] == [("X", 0), ("X", 0)]
    assert rep["identified"][0]["total_accuracy"] == 1.0
    assert rep["unmatched"] == []


def test_analyze_reads_stdin_and_streams_events(files, capsys, monkeypatch):
    import io

    ds, stream, moves = files
    monkeypatch.setattr(sys, "stdin", io.StringIO(stream.read_text()))
    assert main(["analyze", "--dataset", str(ds), "--dictionary", str(moves), "--jsonl"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [json.loads(x)["event"] for x in lines] == ["identified", "identified"]


def test_analyze_flags_override_config(files, capsys):
    ds, stream, moves = files
    # the gate is inclusive, so perfect frames survive a 1.0 threshold
    assert main(["analyze", "--dataset", str(ds), "--dictionary", str(moves), "--input", str(stream), "--null-threshold", "1.0", "-k", "3"]) == 0
    assert len(json.loads(capsys.readouterr().out)["identified"]) == 2
    assert main(["analyze", "--dataset", str(ds), "--dictionary", str(moves), "--input", str(stream), "--edit-limit", "0", "--segment-len", "4"]) == 0
    assert len(json.loads(capsys.readouterr().out)["identified"]) == 2


def test_analyze_missing_file(files, capsys):
    _, stream, moves = files
    assert main(["analyze", "--dataset", "nowhere.csv", "--dictionary", str(moves), "--input", str(stream)]) == 1
    assert "nowhere.csv" in capsys.readouterr().err


def test_analyze_bad_stream(files, tmp_path, capsys):
    ds, _, moves = files
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"t": 0, "kp": []}\n')
    assert main(["analyze", "--dataset", str(ds), "--dictionary", str(moves), "--input", str(bad)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_classify_k1(files, tmp_path, capsys):
    ds, _, _ = files
    # jitter 0 build: every row equals the canonical pose
    exact = tmp_path / "exact.csv"
    assert main(["build-dataset", "--per-pose", "2", "--output", str(exact)]) == 0
    frame = tmp_path / "f.json"
    frame.write_text(json.dumps(frame_to_dict(render_stream(SynthScript.parse("B:1"), load_poses())[0])))
    assert main(["classify", "--dataset", str(exact), "--input", str(frame), "-k", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["label"], out["accuracy"]) == ("B", 1.0)
    assert len(out["angles"]) == 12


def test_project(files, capsys):
    ds, _, _ = files
    assert main(["project", "--dataset", str(ds)]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["x", "y", "label"]
    assert len(rows) == 25


def test_gen_variants(capsys):
    assert main(["gen-variants", "--ideal", "A6 B6 C10 B6 A6", "--scales", "0.5", "1.3333333333333333"]) == 0
    assert capsys.readouterr().out.splitlines() == ["A6 B6 C10 B6 A6", "A3 B3 C5 B3 A3", "A8 B8 C13 B8 A8"]


def test_simulate_json_array(tmp_path):
    out = tmp_path / "s.json"
    assert main(["simulate", "--script", "A:2,N:1", "--format", "json", "--period", "100", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [f["t"] for f in doc] == [0, 100, 200]
    assert len(doc[0]["kp"]) == 17


def test_simulate_unknown_label(capsys):
    assert main(["simulate", "--script", "Q:3"]) == 1
    assert "Q" in capsys.readouterr().err


def test_benchmark_small(capsys):
    assert main(["benchmark", "--iterations", "3", "--variants", "40", "--check"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["iterations"] == 3 and out["within_budget"]


def test_usage_errors_exit_2():
    for argv in ([], ["analyze"], ["gen-variants", "--ideal", "A1", "--scales", "x"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kineseq", "gen-variants", "--ideal", "A4", "--scales", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.split() == ["A4", "A8"]
