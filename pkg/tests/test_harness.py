import csv
import json

import pytest

from yperiod import gamma, harness
from yperiod.errors import ConfigError, IoFailure, SeedExhausted
from yperiod.harness import TrialConfig
from yperiod.report import Report


@pytest.fixture(scope="module")
def small_report():
    return harness.run_trials(TrialConfig(shapes=[(2, 1)], trials=2, seed=5))


def test_one_by_one_all_checks_pass():
    rep = harness.run_trials(TrialConfig(shapes=[(1, 1)], trials=10, checks=harness.KNOWN_CHECKS))
    assert rep.checked > 0 and rep.ok
    assert harness.exit_code(rep) == harness.EXIT_OK
    assert len(rep.trials) == 10 and len(rep.timings) == 10
    for c in rep.counters.values():
        assert c.checked == c.passed + c.failed


def test_reports_are_deterministic(small_report):
    again = harness.run_trials(TrialConfig(shapes=[(2, 1)], trials=2, seed=5))
    assert again.to_dict(timings=False) == small_report.to_dict(timings=False)
    assert [t["seed"] for t in small_report.trials] == ["5/2/1/0", "5/2/1/1"]


def test_worker_count_does_not_change_the_report():
    cfg = dict(shapes=[(2, 1), (1, 2)], trials=3, seed=9, checks=("relations", "flatness", "delta"))
    serial = harness.run_trials(TrialConfig(**cfg))
    pooled = harness.run_trials(TrialConfig(**cfg, workers=2))
    assert serial.to_dict(timings=False) == pooled.to_dict(timings=False)


def test_transposed_shape_is_noted():
    rep = harness.run_trials(TrialConfig(shapes=[(1, 2)], trials=1, checks=("flatness",)))
    assert any("transposed" in n for n in rep.notes)
    assert ("flatness", "(2,1)") in rep.counters


def test_empty_check_set():
    rep = harness.run_trials(TrialConfig(shapes=[(2, 1)], trials=3, checks=()))
    assert rep.counters == {}
    assert harness.exit_code(rep) == harness.EXIT_OK


def test_violation_gives_exit_one():
    rep = Report()
    rep.record("periodicity", "(2,1)", False, where=[0, 1, 1])
    assert harness.exit_code(rep) == harness.EXIT_VIOLATION


def test_seed_exhaustion_is_counted_not_fatal(monkeypatch):
    def exhausted(*a, **kw):
        raise SeedExhausted("forced")

    monkeypatch.setattr(gamma, "generate", exhausted)
    rep = harness.run_trials(TrialConfig(shapes=[(2, 1)], trials=2, checks=("relations", "flatness")))
    assert harness.exhausted_trials(rep) == 2
    assert rep.total("relations").checked > 0
    assert harness.exit_code(rep) == harness.EXIT_EXHAUSTED


def test_json_export_round_trips(tmp_path, small_report):
    path = harness.export(small_report, "json", tmp_path / "r.json")
    back = harness.load_report(path)
    assert back.to_dict() == json.loads(json.dumps(small_report.to_dict()))
    assert back.counters == small_report.counters


def test_csv_export_schema(tmp_path, small_report):
    path = harness.export(small_report, "csv", tmp_path / "r.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["check", "shape", "checked", "passed", "failed"]
    assert len(rows) == len(small_report.counters) + 1
    assert all(int(r[2]) == int(r[3]) + int(r[4]) for r in rows[1:])


def test_export_to_bad_path(tmp_path, small_report):
    with pytest.raises(IoFailure):
        harness.export(small_report, "json", tmp_path / "missing" / "r.json")
    with pytest.raises(ConfigError):
        harness.export(small_report, "xml", tmp_path / "r.xml")


@pytest.mark.parametrize(
    "bad",
    [
        {"trials": 0},
        {"checks": ("nope",)},
        {"shapes": [(0, 1)]},
        {"seed": 2**70},
        {"n_window": 1},
        {"workers": True},
    ],
)
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        TrialConfig(**bad)


def test_config_from_mapping():
    cfg = TrialConfig.from_mapping({"shapes": [[3, 2]], "trials": 2, "checks": ["relations"]})
    assert cfg.shapes == ((3, 2),) and cfg.checks == ("relations",)
    assert TrialConfig.from_mapping(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        TrialConfig.from_mapping({"colour": "red"})


def test_fault_injection_detects_every_corruption():
    rep = harness.run_trials(TrialConfig(shapes=[(3, 2)], trials=5, checks=(harness.FAULT_INJECTION,)))
    for name in ("fault-y", "fault-z", "fault-gamma"):
        c = rep.total(name)
        assert c.checked == 5 and c.failed == 0
