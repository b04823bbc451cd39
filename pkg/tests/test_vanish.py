"""Tests for the vanishing decision driver."""

from fractions import Fraction

import pytest

from conftest import GENERATORS_9, GENERATORS_25, HECKE_25, F
from lvanish.config import load_fixture
from lvanish.errors import CostLimitError
from lvanish.localpoly import HeckeSpec, LocalPolyParams
from lvanish.vanish import (
    DiscriminantJob,
    P_relative,
    VanishJob,
    Verdict,
    cross_reference,
    decide,
    kronecker_signature,
    select_d0,
    table,
)

POINTS_9 = [F("1"), F("1/2"), F("4/5"), F("0")]

TABLE_9 = {
    28: ["0", "12", "96/25", "0"],
    53: ["0", "-3/2", "-12/25", "0"],
    88: ["0", "-12", "-96/25", "0"],
    152: ["0", "24", "192/25", "0"],
    161: ["0", "21", "168/25", "0"],
    172: ["0", "0", "0", "0"],
}

POINTS_25 = [F(s) for s in ("1", "1/4", "2/7", "4/9", "9/14", "13/18", "16/19")]

TABLE_25 = {
    44: ["0", "25/686", "580/16807", "200/3969", "2475/67228", "565/15876", "400/17689"],
    53: ["0"] * 7,
    56: ["0", "-25/343", "-1160/16807", "-400/3969", "-2475/33614", "-565/7938", "-800/17689"],
    69: ["0"] * 7,
    73: ["0", "125/1372", "1450/16807", "500/3969", "12375/134456", "2825/31752", "1000/17689"],
    77: ["0", "-25/686", "-580/16807", "-200/3969", "-2475/67228", "-565/15876", "-400/17689"],
}


def _job_9(**overrides):
    base = dict(
        k=2,
        N=9,
        d0_choices=(13, 5),
        candidates=tuple(TABLE_9),
        generators=tuple(GENERATORS_9),
        atkin_lehner={"w9": -1},
    )
    base.update(overrides)
    return VanishJob(**base)


def _job_25(**overrides):
    base = dict(
        k=2,
        N=25,
        d0_choices=(21, 8),
        candidates=tuple(TABLE_25),
        hecke=HECKE_25,
        generators=tuple(GENERATORS_25),
        atkin_lehner={"w25": 1},
    )
    base.update(overrides)
    return VanishJob(**base)


def _values(report):
    return {r.D: [pv.value for pv in r.table] for r in report.results}


def test_level_9_table():
    report = table(_job_9(), POINTS_9)
    assert not report.rejected
    assert _values(report) == {D: [F(v) for v in row] for D, row in TABLE_9.items()}
    assert all(r.verdict is None for r in report.results)
    assert {r.D: r.D0 for r in report.results} == {28: 13, 53: 5, 88: 13, 152: 5, 161: 5, 172: 13}


def test_level_9_verdicts():
    report = decide(_job_9(extended_cusp_check=True))
    verdicts = report.verdicts()
    assert verdicts[172] is Verdict.VANISHING
    assert all(v is Verdict.NONVANISHING for D, v in verdicts.items() if D != 172)

    by_D = {r.D: r for r in report.results}
    assert by_D[172].rounds_used == 2
    assert by_D[172].cusp_check_passed is True
    assert by_D[28].rounds_used == 1
    assert by_D[28].cusp_check is None
    assert [pv.point for pv in by_D[28].first_round()] == POINTS_9


def test_verdicts_agree_with_tabulated_l_values():
    report = decide(_job_9())
    fixture = load_fixture("lvalues.json")
    entry = next(t for t in fixture["tables"] if t["N"] == 9)
    assert cross_reference(report, entry) == []


def test_cross_reference_flags_disagreement():
    report = decide(_job_9(candidates=(28,)))
    mismatches = cross_reference(report, {"l_values": {"28": 0.0}})
    assert len(mismatches) == 1 and "D=28" in mismatches[0]


def test_inadmissible_candidates_are_rejected():
    report = decide(_job_9(candidates=(5, 12, -4, 20, 28)))
    assert [r.D for r in report.rejected] == [5, 12, -4, 20]
    assert all(r.reasons for r in report.rejected)
    assert [r.D for r in report.results] == [28]


def test_table_logs_rejected_candidates(caplog):
    caplog.set_level("INFO", logger="lvanish.vanish")
    report = table(_job_9(candidates=(5, 28)), [F("1/2")])
    assert [r.D for r in report.rejected] == [5]
    assert [r.D for r in report.results] == [28]
    assert any(rec.getMessage().startswith("Rejected D=5: ") for rec in caplog.records)


def test_select_d0():
    assert select_d0(2, 9, 28, (13, 5)) == (13, [])
    assert select_d0(2, 9, 53, (13, 5)) == (5, [])
    D0, reasons = select_d0(2, 9, 28, (5,))
    assert D0 == 5 and reasons
    D0, reasons = select_d0(2, 9, 5, (13, 5))
    assert D0 is None and len(reasons) == 2


def test_p_relative_vanishes_at_base_point():
    job = DiscriminantJob(LocalPolyParams(2, 9, 28, 13), HeckeSpec())
    assert P_relative(job, 0) == 0
    assert P_relative(job, Fraction(1, 2)) == 12


def test_cost_limit_is_enforced():
    with pytest.raises(CostLimitError):
        table(_job_9(candidates=(28,), max_denominator=3), [F("4/5")])
    report = table(_job_9(candidates=(28,), max_denominator=5), [F("4/5")])
    assert report.results[0].table[0].value == F("96/25")


def test_results_are_deterministic():
    first = _values(table(_job_9(), POINTS_9))
    second = _values(table(_job_9(), POINTS_9))
    assert first == second


def test_worker_pool_matches_serial_run():
    serial = decide(_job_9(candidates=(28, 53, 172)))
    pooled = decide(_job_9(candidates=(28, 53, 172)), threads=2)
    assert serial.verdicts() == pooled.verdicts()
    assert _values(serial) == _values(pooled)


def test_atkin_lehner_metadata_is_carried():
    assert decide(_job_9(candidates=())).atkin_lehner == {"w9": -1}


def test_kronecker_signature():
    assert kronecker_signature(53, 25) == {5: -1}
    assert kronecker_signature(44, 9) == {3: -1}


@pytest.mark.slow
def test_level_25_hecke_table():
    report = table(_job_25(), POINTS_25)
    assert _values(report) == {D: [F(v) for v in row] for D, row in TABLE_25.items()}
    assert {r.D: r.D0 for r in report.results} == {44: 21, 53: 8, 56: 21, 69: 21, 73: 8, 77: 8}


@pytest.mark.slow
def test_level_25_verdicts():
    report = decide(_job_25())
    verdicts = report.verdicts()
    assert {D for D, v in verdicts.items() if v is Verdict.VANISHING} == {53, 69}
    fixture = load_fixture("lvalues.json")
    entry = next(t for t in fixture["tables"] if t["N"] == 25)
    assert cross_reference(report, entry) == []
