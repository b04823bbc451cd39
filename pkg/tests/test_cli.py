"""Tests for the lvanish command line interface."""

import csv
import io
import json
from fractions import Fraction

import pytest

from conftest import CONFIG_DIR
from lvanish.cli import (
    EXIT_COMPUTATION,
    EXIT_OK,
    EXIT_VALIDATION,
    main,
    parse_rational,
    render_rational,
)
from lvanish.errors import ValidationError


@pytest.fixture(autouse=True)
def _quiet_env(monkeypatch):
    for name in ("LVANISH_THREADS", "LVANISH_OUTPUT_FORMAT", "LVANISH_MAX_DENOMINATOR", "LVANISH_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def _write_job(tmp_path, **raw):
    path = tmp_path / "job.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


def _level_9_job(**extra):
    raw = {
        "k": 2,
        "N": 9,
        "D0": [13, 5],
        "D": [28, 172],
        "generators": [[[1, 1], [0, 1]], [[4, -1], [9, -2]], [[7, -4], [9, -5]], [[-1, 0], [0, -1]]],
    }
    raw.update(extra)
    return raw


def test_render_and_parse_rational():
    assert render_rational(Fraction(-25, 343)) == "-25/343"
    assert render_rational(Fraction(696, 1)) == "696"
    assert parse_rational("−12/25") == Fraction(-12, 25)
    with pytest.raises(ValidationError):
        parse_rational("12//25")
    with pytest.raises(ValidationError):
        parse_rational(3)


def test_zagier_csv(tmp_path):
    out = tmp_path / "zagier.csv"
    code = main(["--config", str(CONFIG_DIR / "zagier_9_2236.json"), "--format", "csv", "--output", str(out)])
    assert code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "delta,0,1/2,1/3,1/5,1/7,1/9,A,C"
    assert lines[1] == "2236,696,680,2056/3,17272/25,34040/49,696,-6264,696"


def test_table_mode_text_and_csv_agree(tmp_path):
    job = _write_job(tmp_path, **_level_9_job(mode="table", points=["1", "1/2", "4/5", "0"]))
    text_out, csv_out = tmp_path / "t.txt", tmp_path / "t.csv"
    assert main(["--config", str(job), "--output", str(text_out)]) == EXIT_OK
    assert main(["--config", str(job), "--format", "csv", "--output", str(csv_out)]) == EXIT_OK

    rows = list(csv.reader(io.StringIO(csv_out.read_text(encoding="utf-8"))))
    assert rows[0] == ["D", "1", "1/2", "4/5", "0"]
    assert rows[1] == ["28", "0", "12", "96/25", "0"]
    assert rows[2] == ["172", "0", "0", "0", "0"]
    text_rows = [line.split() for line in text_out.read_text(encoding="utf-8").splitlines()]
    assert text_rows[:3] == rows


def test_points_flag_overrides_config(tmp_path):
    job = _write_job(tmp_path, **_level_9_job(mode="table", D=[28]))
    out = tmp_path / "t.csv"
    assert main(["--config", str(job), "--points", "1/2,4/5", "--format", "csv", "--output", str(out)]) == EXIT_OK
    assert out.read_text(encoding="utf-8").splitlines() == ["D,1/2,4/5", "28,12,96/25"]


def test_decide_structured_output(tmp_path):
    job = _write_job(tmp_path, **_level_9_job(D=[28, 172, 5]))
    out = tmp_path / "decide.json"
    assert main(["--config", str(job), "--format", "structured", "--output", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    verdicts = {row["D"]: row["verdict"] for row in report["results"]}
    assert verdicts == {28: "NONVANISHING", 172: "VANISHING"}
    assert [r["D"] for r in report["rejected"]] == [5]
    assert report["l_value_mismatches"] == []


def test_decide_text_columns(tmp_path, capsys):
    job = _write_job(tmp_path, **_level_9_job(D=[28]))
    assert main(["--config", str(job)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["D", "1", "1/2", "4/5", "0", "D0", "verdict"]
    assert lines[1].split() == ["28", "0", "12", "96/25", "0", "13", "NONVANISHING"]


def test_empty_candidate_list_succeeds(tmp_path, capsys):
    job = _write_job(tmp_path, **_level_9_job(D=[]))
    assert main(["--config", str(job)]) == EXIT_OK


def test_validation_failure_exit_code(tmp_path):
    job = _write_job(tmp_path, **_level_9_job(k=1))
    assert main(["--config", str(job)]) == EXIT_VALIDATION
    assert main(["--config", str(tmp_path / "missing.json")]) == EXIT_VALIDATION
    assert main(["--config", str(job), "--points", "1/0"]) == EXIT_VALIDATION


def test_cost_rail_exit_code(tmp_path):
    job = _write_job(tmp_path, **_level_9_job(mode="table", D=[28], points=["4/5"]))
    assert main(["--config", str(job), "--max-denominator", "3"]) == EXIT_COMPUTATION
    assert main(["--config", str(job), "--max-denominator", "3", "--force"]) == EXIT_OK


def test_environment_format_is_used(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LVANISH_OUTPUT_FORMAT", "csv")
    job = _write_job(tmp_path, **_level_9_job(mode="table", D=[28], points=["1/2"]))
    assert main(["--config", str(job)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["D,1/2", "28,12"]
