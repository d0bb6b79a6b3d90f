"""tests/test_cli.py.

Tests the gt_core command line interface


Copyright (C) 2016 Timothy Edmund Crosley

Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
documentation files (the "Software"), to deal in the Software without restriction, including without limitation
the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software, and
to permit persons to whom the Software is furnished to do so, subject to the following conditions:

The above copyright notice and this permission notice shall be included in all copies or
substantial portions of the Software.

THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED
TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF
CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR
OTHER DEALINGS IN THE SOFTWARE.

"""
import csv
import io
import json

import pytest

import gt_core
from gt_core.cli import EXIT_DEGENERATE, EXIT_INVALID, EXIT_OK
from gt_core.exceptions import NumericDegeneracy


def _rows(output):
    return list(csv.DictReader(io.StringIO(output.decode("utf8"))))


def test_bound(capsysbinary):
    """Tests that a bound is evaluated from name=value parameters and written as CSV"""
    assert gt_core.cli.main(["bound", "--formula", "counting", "n=4", "k=1"]) == EXIT_OK
    (row,) = _rows(capsysbinary.readouterr().out)
    assert row["formula"] == "counting"
    assert float(row["value"]) == pytest.approx(2.0)
    assert row["is_upper_bound"] == "false"


def test_bound_invalid(capsysbinary):
    """Tests that malformed or unknown bound parameters exit as invalid input"""
    assert gt_core.cli.main(["-q", "bound", "--formula", "counting", "n4"]) == EXIT_INVALID
    assert gt_core.cli.main(["-q", "bound", "--formula", "counting", "n=4", "k=1", "z=2"]) == EXIT_INVALID
    assert gt_core.cli.main(["-q", "bound", "--formula", "counting", "n=3", "k=4"]) == EXIT_INVALID
    assert capsysbinary.readouterr().out == b""


def test_degenerate_exit(monkeypatch):
    """Tests that numeric degeneracy gets its own exit code"""

    def degenerate(args):
        raise NumericDegeneracy("all zero")

    monkeypatch.setattr(gt_core.cli, "bound", degenerate)
    assert gt_core.cli.main(["-q", "bound", "--formula", "counting"]) == EXIT_DEGENERATE


def test_library_errors_exit_as_invalid(monkeypatch, tmp_path):
    """Tests that value errors raised below the command line and unreadable files exit as invalid input"""

    def domain_error(args):
        raise ValueError("math domain error")

    missing = str(tmp_path / "missing.txt")
    assert gt_core.cli.main(["-q", "decode", "--matrix", missing, "--outcomes", "01"]) == EXIT_INVALID
    monkeypatch.setattr(gt_core.cli, "bound", domain_error)
    assert gt_core.cli.main(["-q", "bound", "--formula", "counting"]) == EXIT_INVALID


def test_decode(tmp_path, capsysbinary):
    """Tests that outcome vectors are decoded against a stored matrix"""
    matrix = tmp_path / "matrix.txt"
    matrix.write_bytes(b"2 3\n0 1\n2\n")
    assert gt_core.cli.main(["decode", "--matrix", str(matrix), "--outcomes", "10"]) == EXIT_OK
    assert capsysbinary.readouterr().out == b"hard_calls=110\n"

    out = tmp_path / "calls.txt"
    arguments = ["decode", "--matrix", str(matrix), "--outcomes", "10", "--decoder", "threshold"]
    assert gt_core.cli.main(arguments + ["--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == b"hard_calls=110\n"

    arguments = ["decode", "--decoder", "repetition", "--members", "2", "--outcomes", "1010"]
    assert gt_core.cli.main(arguments) == EXIT_OK
    assert capsysbinary.readouterr().out == b"hard_calls=10\n"


def test_decode_lbp(tmp_path, capsysbinary):
    """Tests that the lbp decoder writes its posteriors when asked to"""
    matrix = tmp_path / "matrix.txt"
    matrix.write_bytes(b"2 4\n0 1\n2 3\n")
    arguments = ["decode", "--matrix", str(matrix), "--outcomes", "01", "--decoder", "lbp"]
    arguments += ["--q", "0.3", "--p", "0.6", "--families", "2", "--family-size", "2", "--posteriors"]
    assert gt_core.cli.main(arguments) == EXIT_OK
    hard_calls, posteriors = capsysbinary.readouterr().out.decode("utf8").splitlines()
    assert hard_calls == "hard_calls=0011"
    values = [float(value) for value in posteriors.split("=")[1].split(",")]
    assert len(values) == 4
    assert values[0] == pytest.approx(0.0)
    assert values[2] > 0.5


def test_decode_invalid(tmp_path):
    """Tests that decoders missing their inputs exit as invalid input"""
    matrix = tmp_path / "matrix.txt"
    matrix.write_bytes(b"2 4\n0 1\n2 3\n")
    assert gt_core.cli.main(["-q", "decode", "--outcomes", "01"]) == EXIT_INVALID
    assert gt_core.cli.main(["-q", "decode", "--decoder", "repetition", "--outcomes", "01"]) == EXIT_INVALID
    arguments = ["-q", "decode", "--matrix", str(matrix), "--outcomes", "01", "--decoder", "lbp"]
    assert gt_core.cli.main(arguments) == EXIT_INVALID
    assert gt_core.cli.main(arguments + ["--families", "2", "--family-size", "2"]) == EXIT_INVALID
    assert gt_core.cli.main(["-q", "decode", "--matrix", str(matrix), "--outcomes", "012"]) == EXIT_INVALID


def test_design(tmp_path, capsysbinary):
    """Tests that designs are built from their configuration and written as sparse rows"""
    settings = tmp_path / "design.json"
    settings.write_text(json.dumps({"design": "repetition", "families": 1, "familySize": 2, "repetitions": 2}))
    assert gt_core.cli.main(["design", "--config", str(settings)]) == EXIT_OK
    assert capsysbinary.readouterr().out == b"4 2\n0\n1\n0\n1\n"

    settings.write_text(json.dumps({"design": "g1", "familySizes": [2, 3]}))
    out = tmp_path / "g1.txt"
    assert gt_core.cli.main(["design", "--config", str(settings), "--seed", "4", "--out", str(out)]) == EXIT_OK
    design = gt_core.input_format.sparse_rows(out.read_bytes())
    assert design.members == 5
    assert design.tests == 2


def test_simulate(config_file, tmp_path, capsysbinary):
    """Tests that experiments write their metrics and algorithms their individual trials"""
    out = tmp_path / "metrics.csv"
    assert gt_core.cli.main(["-q", "simulate", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    records = gt_core.harness.read_records(str(out))
    assert records
    assert {record.experiment for record in records} == {"avg_tests"}
    assert {record.trials for record in records} == {3}

    arguments = ["-q", "simulate", "--config", str(config_file), "--algorithm", "bsa", "--trials", "4"]
    assert gt_core.cli.main(arguments) == EXIT_OK
    rows = _rows(capsysbinary.readouterr().out)
    assert [int(row["trial"]) for row in rows] == [0, 1, 2, 3]
    assert all(int(row["fn"]) == 0 and int(row["fp"]) == 0 for row in rows)
    assert all(int(row["tests_used"]) >= 0 for row in rows)


def test_simulate_invalid(tmp_path):
    """Tests that broken experiment configurations exit as invalid input"""
    settings = tmp_path / "experiment.json"
    settings.write_text(json.dumps({"experiment": "avg_tests", "families": 2}))
    assert gt_core.cli.main(["-q", "simulate", "--config", str(settings)]) == EXIT_INVALID
    assert gt_core.cli.main(["-q", "simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_INVALID


def test_json_output(config_file, capsysbinary):
    """Tests that bounds and per-trial rows can be written as JSON"""
    assert gt_core.cli.main(["bound", "--formula", "counting", "n=4", "k=1", "--format", "json"]) == EXIT_OK
    report = json.loads(capsysbinary.readouterr().out.decode("utf8"))
    assert report[0]["formula"] == "counting"
    assert report[0]["inputs"] == {"n": 4, "k": 1}
    assert report[0]["is_upper_bound"] is False

    arguments = ["-q", "simulate", "--config", str(config_file), "--algorithm", "two-stage"]
    assert gt_core.cli.main(arguments + ["--format", "json"]) == EXIT_OK
    rows = json.loads(capsysbinary.readouterr().out.decode("utf8"))
    assert [row[0] for row in rows] == [0, 1, 2]
