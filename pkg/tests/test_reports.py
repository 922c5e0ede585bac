#! /usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Sat Oct 17 2026

trial records and experiment reports
"""
from csv import DictReader
from io import StringIO

from pytest import approx, raises

from laserinsert.errors import ConfigError
from laserinsert.reports import ExperimentReport, TrialRecord


def record(strategy: str, index: int, trial: int, success: bool,
           raw_success: bool = None, cause: str = "miss") -> TrialRecord:
    return TrialRecord(strategy, index, trial, 100 * index + trial, success,
                       success if raw_success is None else raw_success,
                       margin=1e-5 if success else -2e-5,
                       retries_used=0 if raw_success is None else 1,
                       cause=None if success else cause)


def report() -> ExperimentReport:
    return ExperimentReport("needle", "ab" * 32, 2026, [
        record("proprio_ic1", 0, 0, True),
        record("proprio_ic1", 0, 1, False),
        record("proprio_ic1", 1, 0, False, cause="unreachable"),
        record("proprio_ic1", 1, 1, False),
        record("laser_corrected", 0, 0, True),
        record("laser_corrected", 0, 1, True, raw_success=False),
        record("laser_corrected", 1, 0, True),
        record("laser_corrected", 1, 1, False, cause="registration_failed"),
    ])


def test_record_consistency():
    with raises(AssertionError):
        TrialRecord("proprio_ic1", 0, 0, 1, False, False, cause=None)
    with raises(AssertionError):
        TrialRecord("proprio_ic1", 0, 0, 1, False, True, cause="miss")
    with raises(AssertionError):
        TrialRecord("proprio_ic1", 0, 0, 1, False, False, cause="bad luck")


def test_rates():
    experiment = report()
    assert experiment.strategies == ["proprio_ic1", "laser_corrected"]
    assert experiment.success_rate("proprio_ic1") == approx(0.25)
    assert experiment.success_rate("laser_corrected") == approx(0.75)
    assert experiment.success_rate("laser_corrected", raw=True) \
        == approx(0.5)
    with raises(KeyError):
        experiment.success_rate("proprio_ic2")


def test_conditions():
    conditions = report().conditions()
    assert [(c.strategy, c.initial_index) for c in conditions] == [
        ("proprio_ic1", 0), ("proprio_ic1", 1),
        ("laser_corrected", 0), ("laser_corrected", 1)
    ]
    assert conditions[0].rate == approx(0.5)
    assert conditions[2].rate == approx(1.0)
    assert conditions[2].raw_rate == approx(0.5)


def test_summary():
    lines = report().get_summary().splitlines()
    assert lines[0] == "needle (abababababab, seed 2026, 8 trials)"
    assert lines[1].split() == ["strategy", "#1", "#2", "rate", "raw"]
    assert lines[2].split() == ["proprio_ic1", "1/2", "0/2", "25.0%",
                                "25.0%"]
    assert lines[3].split() == ["laser_corrected", "2/2", "1/2", "75.0%",
                                "50.0%"]


def test_json_reload():
    buffer = StringIO()
    experiment = report()
    experiment.dump_json(buffer)
    buffer.seek(0)
    again = ExperimentReport.from_file(buffer)
    assert again.to_dict() == experiment.to_dict()
    data = experiment.to_dict()
    assert data["strategies"]["laser_corrected"]["raw_success_rate"] \
        == approx(0.5)
    assert len(data["conditions"]) == 4


def test_invalid_report():
    with raises(ConfigError):
        ExperimentReport.from_dict({"scenario": "needle"})
    data = report().to_dict()
    data["records"][0]["cause"] = "bad luck"
    with raises(ConfigError):
        ExperimentReport.from_dict(data)


def test_csv():
    buffer = StringIO()
    report().write_csv(buffer)
    rows = list(DictReader(StringIO(buffer.getvalue())))
    assert len(rows) == 8
    assert rows[0]["strategy"] == "proprio_ic1"
    assert rows[2]["cause"] == "unreachable"
    assert rows[0]["cause"] == ""


def test_rates_per_setting():
    records = [
        TrialRecord("proprio_ic1", 0, 0, 1, True, True),
        TrialRecord("proprio_ic1", 0, 0, 2, False, False, cause="miss",
                    setting=1),
        TrialRecord("proprio_ic1", 0, 1, 3, True, True, setting=1),
        TrialRecord("laser_corrected", 0, 0, 4, True, True, setting=1),
    ]
    experiment = ExperimentReport("needle", "cd" * 32, 1, records,
                                  ["needle 1", "needle 2"])
    assert experiment.settings == [0, 1]
    assert experiment.success_rate("proprio_ic1", setting=0) == approx(1.0)
    assert experiment.success_rate("proprio_ic1", setting=1) == approx(0.5)
    assert experiment.success_rate("proprio_ic1") == approx(2 / 3)
    with raises(KeyError):
        experiment.success_rate("laser_corrected", setting=0)
    conditions = experiment.conditions()
    assert [(c.strategy, c.setting) for c in conditions] == [
        ("proprio_ic1", 0), ("proprio_ic1", 1), ("laser_corrected", 1)
    ]
    data = experiment.to_dict()
    assert [entry["name"] for entry in data["settings"]] \
        == ["needle 1", "needle 2"]
    assert data["settings"][1]["strategies"]["proprio_ic1"][
        "success_rate"] == approx(0.5)
    assert "laser_corrected" not in data["settings"][0]["strategies"]
    assert ExperimentReport.from_dict(data).setting_names \
        == ["needle 1", "needle 2"]
    lines = experiment.get_summary().splitlines()
    assert lines[2].split() == ["proprio_ic1", "2/3", "66.7%", "66.7%"]
    assert lines[4] == "[needle 1]"
    assert lines[5].split() == ["proprio_ic1", "1/1", "100.0%", "100.0%"]
    assert lines[6] == "[needle 2]"
    assert lines[7].split() == ["proprio_ic1", "1/2", "50.0%", "50.0%"]
    assert lines[8].split() == ["laser_corrected", "1/1", "100.0%",
                                "100.0%"]
