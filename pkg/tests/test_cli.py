"""Configuration, determinism, and process-level behavior of the verifier."""

import json

import pytest

from superkron import cli
from superkron.suites import (
    SUITE_NAMES,
    SuiteReport,
    VerifyConfig,
    replay_sample,
    run_suites,
)

FAST = VerifyConfig(samples=3)
REPORT_KEYS = {"suite", "samples", "max_residual", "worst_inputs", "pass", "seconds"}


def test_suite_name_catalog():
    assert SUITE_NAMES == (
        "theta",
        "kronecker",
        "fay",
        "heat",
        "periodicity",
        "basis",
        "cybe",
        "aybe",
        "degenerations",
    )


def test_config_validation():
    with pytest.raises(ValueError):
        VerifyConfig(tau=0.3 - 1.1j)
    with pytest.raises(ValueError):
        VerifyConfig(samples=0)
    with pytest.raises(ValueError):
        VerifyConfig(tol_relative=1e-17)
    with pytest.raises(ValueError):
        VerifyConfig(n=0)
    with pytest.raises(ValueError):
        VerifyConfig(kind="fancy")
    with pytest.raises(ValueError):
        VerifyConfig(suites=("theta", "nope"))
    with pytest.raises(ValueError):
        VerifyConfig(output="xml")


def test_selected_suites_canonical_order():
    cfg = VerifyConfig(suites=("fay", "theta"))
    assert cfg.selected() == ("theta", "fay")
    assert VerifyConfig(suites=("all",)).selected() == SUITE_NAMES


def test_run_suites_is_deterministic():
    cfg = VerifyConfig(samples=3, suites=("theta", "kronecker", "fay"))
    a = [r.to_dict() for r in run_suites(cfg)]
    b = [r.to_dict() for r in run_suites(cfg)]
    for ra, rb in zip(a, b):
        ra.pop("seconds")
        rb.pop("seconds")
    assert a == b


def test_suite_results_independent_of_selection():
    # each suite draws from its own named stream, so running it alone
    # reproduces the value it gets inside a larger selection
    solo = run_suites(VerifyConfig(samples=3, suites=("heat",)))[0]
    grouped = run_suites(VerifyConfig(samples=3, suites=("fay", "heat", "cybe")))
    match = [r for r in grouped if r.suite == "heat"][0]
    assert solo.max_residual == match.max_residual
    assert solo.worst_inputs == match.worst_inputs


@pytest.mark.parametrize("name", SUITE_NAMES)
def test_replay_reproduces_worst_sample(name):
    cfg = VerifyConfig(samples=3, suites=(name,))
    report = run_suites(cfg)[0]
    again = replay_sample(name, report.worst_inputs, cfg)
    assert again == report.max_residual


def test_report_dict_schema():
    report = run_suites(VerifyConfig(samples=2, suites=("theta",)))[0]
    d = report.to_dict()
    assert set(d) == REPORT_KEYS
    assert d["pass"] is True
    assert isinstance(d["max_residual"], float)
    assert isinstance(d["worst_inputs"], dict)
    json.dumps(d)  # everything must be serializable as-is


def test_structured_output_schema():
    cfg = VerifyConfig(samples=2, suites=("theta", "kronecker"), output="structured")
    reports = run_suites(cfg)
    payload = json.loads(cli.emit_report(reports, fmt="structured", cfg=cfg))
    assert set(payload) == {"config", "reports"}
    assert [r["suite"] for r in payload["reports"]] == ["theta", "kronecker"]
    for r in payload["reports"]:
        assert set(r) == REPORT_KEYS
    assert payload["config"]["samples"] == 2
    assert payload["config"]["tau"] == [0.3, 1.1]
    assert payload["config"]["suites"] == ["theta", "kronecker"]


def test_text_output_mentions_each_suite():
    cfg = VerifyConfig(samples=2, suites=("theta", "fay"))
    text = cli.emit_report(run_suites(cfg), fmt="text", cfg=cfg)
    assert "theta" in text and "fay" in text
    assert "PASS" in text


def test_text_output_reports_worst_inputs_on_failure():
    fail = SuiteReport(
        suite="heat",
        samples=4,
        max_residual=1.0,
        worst_inputs={"hbar": [0.1, 0.2]},
        passed=False,
        seconds=0.5,
    )
    text = cli.emit_report([fail], fmt="text")
    assert "FAIL" in text
    assert "worst inputs for heat" in text


def test_parser_defaults():
    args = cli.build_parser().parse_args(["all"])
    cfg = cli.config_from_args(args)
    assert cfg.tau == 0.3 + 1.1j
    assert cfg.samples == 200
    assert cfg.tol_relative == 1e-9
    assert cfg.selected() == SUITE_NAMES


def test_parser_rejects_unknown_suite():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["frobnicate"])


def test_main_success_exit_code(capsys):
    code = cli.main(["theta", "--samples", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out


def test_main_failure_exit_code(capsys):
    # tight tolerance below the observed floating point noise floor
    code = cli.main(["periodicity", "--samples", "5", "--tol", "1e-15"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out
    assert "worst inputs" in out


def test_main_invalid_config_exit_code(capsys):
    code = cli.main(["theta", "--tau-im", "-1.0"])
    err = capsys.readouterr().err
    assert code == 2
    assert err.strip()
    assert cli.main(["theta", "--tol", "1e-30"]) == 2


def test_main_structured_stdout(capsys):
    code = cli.main(["kronecker", "--samples", "3", "--output", "structured"])
    out = capsys.readouterr().out
    assert code == 0
    payload = json.loads(out)
    assert payload["reports"][0]["suite"] == "kronecker"
    assert payload["reports"][0]["pass"] is True


def test_main_writes_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code = cli.main(
        ["theta", "--samples", "3", "--output", "structured", "--out", str(target)]
    )
    capsys.readouterr()
    assert code == 0
    payload = json.loads(target.read_text())
    assert payload["reports"][0]["suite"] == "theta"


def test_main_accepts_kind_and_truncated(capsys):
    code = cli.main(["fay", "--samples", "3", "--kind", "rational", "--truncated"])
    capsys.readouterr()
    assert code == 0
