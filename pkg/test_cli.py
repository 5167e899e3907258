#!/usr/bin/env python3
"""
Тесты командной строки, наборов проверок и загрузки их описаний
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import csv
import io
import json
import logging

import pytest

import app
from app import main
from src.config import get_settings
from src.config_loader import CheckConfig, SuiteConfig, SuitesConfig, get_suite_config, load_suite_configs
from src.log_manager import LogManager
from src.reports import CheckResult, to_payload
from src.verification import SUITE_RUNNERS, run_suites

SUITES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config", "suites")


@pytest.fixture(autouse=True)
def isolated_run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("DH_SUITES_DIR", SUITES_DIR)
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def test_suite_configs_are_loaded():
    config = load_suite_configs(SUITES_DIR)
    assert sorted(config.names()) == sorted(
        ["causality", "classical", "quantum", "idempotence", "symmetry", "extension"]
    )
    quantum = get_suite_config("quantum", config)
    assert quantum.get_check("lift_roundtrip").threshold == 1e-8
    assert get_suite_config("causality", config).get_check("forest_normalisation").threshold is None
    with pytest.raises(ValueError):
        get_suite_config("unknown", config)


def test_suite_override_is_merged(tmp_path, caplog):
    """
    Повторное описание набора объединяется по проверкам с предупреждением
    """
    (tmp_path / "a.yaml").write_text(
        "suites:\n  - name: extension\n    checks:\n      - name: extension_nonnegative\n        kind: lower\n        threshold: -1.0e-10\n",
        encoding="utf-8",
    )
    (tmp_path / "b.yaml").write_text(
        "suites:\n  - name: extension\n    checks:\n      - name: extension_nonnegative\n        kind: lower\n        threshold: -1.0e-6\n      - name: extension_uniform\n",
        encoding="utf-8",
    )
    with caplog.at_level(logging.WARNING):
        config = load_suite_configs(str(tmp_path))
    suite = get_suite_config("extension", config)
    assert suite.get_check("extension_nonnegative").threshold == -1e-6
    assert len(suite.checks) == 2
    assert any("переопределена" in record.message for record in caplog.records)


def test_suite_loader_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_suite_configs(str(tmp_path / "missing"))
    (tmp_path / "empty.yaml").write_text("other: 1\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_suite_configs(str(tmp_path))


def test_check_result_serialises_pass():
    check = CheckResult.upper("x", 1e-13, 1e-12)
    assert to_payload(check)["pass"] is True
    assert not CheckResult.lower("y", -1.0, 0.0).passed


def test_interference_command(capsys):
    code, payload = run_json(capsys, ["interference", "--dim", "5", "--max-order", "5"])
    assert code == 0
    values = {record["order"]: record["value"] for record in payload["sorkin"]}
    assert values[3] == pytest.approx(36 / 625, abs=1e-12)
    assert values[4] == pytest.approx(24 / 625, abs=1e-12)
    assert values[5] == pytest.approx(0.0, abs=1e-12)
    assert payload["probabilities"][0] == {"size": 1, "value": pytest.approx(1 / 625), "expected": pytest.approx(1 / 625)}


def test_interference_dim_one(capsys):
    code, payload = run_json(capsys, ["interference", "--dim", "1"])
    assert code == 0
    assert len(payload["probabilities"]) == 1
    assert payload["probabilities"][0]["value"] == pytest.approx(1.0)


def test_interference_csv(capsys):
    assert main(["interference", "--dim", "6", "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["dim", "subset_size", "probability", "sorkin_order", "sorkin_value"]
    assert len(rows) == 1 + 6 + 6


def test_output_is_deterministic(tmp_path):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert main(["sorkin", "--dim", "4", "--seed", "3", "--out", str(first)]) == 0
    assert main(["sorkin", "--dim", "4", "--seed", "3", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    terms = json.loads(first.read_text(encoding="utf-8"))["terms"]
    assert terms[3]["lhs"] * 256 == pytest.approx(256)
    assert terms[3]["rhs"] * 256 == pytest.approx(232)


def test_usage_errors():
    assert main(["interference", "--dim", "0"]) == 2
    assert main(["interference", "--dim", "3", "--max-order", "4"]) == 2
    assert main(["interference", "--dim", "9"]) == 2
    assert main(["verify", "--suite", "unknown", "--dim", "2"]) == 2
    assert main(["verify", "--suite", "causality", "--dim", "2", "--tol", "-1"]) == 2
    assert main(["census", "--dim", "2", "--format", "csv"]) == 2
    assert main(["census", "--dim", "5", "--span-samples", "2000"]) == 2
    assert main([]) == 2


def test_verify_quantum(capsys):
    code, payload = run_json(capsys, ["verify", "--suite", "quantum", "--dim", "3", "--trials", "200", "--seed", "7"])
    assert code == 0
    suite = payload["suites"][0]
    checks = {check["name"]: check for check in suite["checks"]}
    assert checks["lift_roundtrip"]["max_error"] <= 1e-8
    assert suite["notes"]["lift_weight_exponent"] == 0.25
    assert suite["notes"]["sqrt_weight_roundtrip_error"] > 1e-3
    assert payload["pass"] is True


def test_verify_extension(capsys):
    code, payload = run_json(capsys, ["verify", "--suite", "extension", "--dim", "4", "--trials", "1000"])
    assert code == 0
    checks = {check["name"]: check for check in payload["suites"][0]["checks"]}
    assert checks["extension_nonnegative"]["min_value"] >= -1e-10


def test_verify_causality_witnesses(capsys):
    code, payload = run_json(capsys, ["verify", "--suite", "causality", "--dim", "2", "--trials", "10"])
    assert code == 0
    witnesses = payload["suites"][0]["notes"]["witnesses"]
    assert [w["value"] for w in witnesses] == pytest.approx([0.5, 0.5])


def test_verify_all(capsys):
    code, payload = run_json(capsys, ["verify", "--dim", "2", "--trials", "5", "--seed", "1"])
    assert code == 0
    assert len(payload["suites"]) == 6


def test_default_tolerance_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DH_DEFAULT_TOL", "1e-6")
    get_settings.cache_clear()
    code, payload = run_json(capsys, ["verify", "--suite", "causality", "--dim", "3", "--trials", "5"])
    assert code == 0
    assert payload["suites"][0]["tol"] == 1e-6


def test_run_suites_dimension_limits():
    with pytest.raises(ValueError):
        run_suites("idempotence", 6, seed=0)
    report = run_suites("all", 1, seed=0, trials=2)
    assert "causality" not in [suite.suite for suite in report.suites]


def test_census_command(capsys):
    code, payload = run_json(capsys, ["census", "--dim", "1"])
    assert code == 0
    assert payload["paper_formula_value"] == payload["census_total"] == payload["orbit_count"] == 1

    code, payload = run_json(capsys, ["census", "--dim", "2", "--span-samples", "200", "--seed", "1"])
    assert code == 0
    assert payload["paper_formula_value"] == 7
    assert payload["span_rank"] == 10
    assert payload["span_samples"] == 200

    code, payload = run_json(capsys, ["census", "--dim", "3"])
    assert payload["burnside_orbit_count"] == 27
    assert payload["span_rank"] is None


def test_log_file_is_written(tmp_path):
    """
    Результаты проверок попадают в файл лога
    """
    assert main(["verify", "--suite", "idempotence", "--dim", "2", "--out", str(tmp_path / "report.json")]) == 0
    manager = LogManager(log_dir=str(tmp_path / "logs"))
    assert manager.get_log_files()
    latest = manager.get_latest_logs(lines=200)
    assert "Проверки набора idempotence" in latest
    assert "[OK] decoh_idempotent" in latest


def test_numeric_error_is_check_failure(capsys, monkeypatch):
    """
    Ошибка вычислений внутри набора - непройденная проверка с кодом 1, отчет все равно пишется
    """
    def broken_suite(*args):
        raise ValueError("Мнимый остаток превышает допуск")

    monkeypatch.setitem(SUITE_RUNNERS, "classical", broken_suite)
    code, payload = run_json(capsys, ["verify", "--suite", "classical", "--dim", "3", "--trials", "3"])
    assert code == 1
    assert payload["pass"] is False
    suite = payload["suites"][0]
    assert suite["checks"] == [
        {"name": "suite_completed", "kind": "upper", "threshold": 0.0, "max_error": None, "min_value": None, "pass": False}
    ]
    assert "Мнимый остаток" in suite["notes"]["error"]


def test_strict_tolerance_fails_checks_not_usage(capsys, monkeypatch):
    monkeypatch.setenv("DH_DEFAULT_TOL", "1e-20")
    get_settings.cache_clear()
    code, payload = run_json(capsys, ["verify", "--suite", "classical", "--dim", "3", "--trials", "3"])
    assert code == 1
    assert payload["pass"] is False


def test_numeric_error_in_interference(monkeypatch):
    def broken_report(*args):
        raise ArithmeticError("деление на ноль")

    monkeypatch.setattr(app, "hierarchy_report", broken_report)
    assert main(["interference", "--dim", "3"]) == 1


def test_usage_is_checked_before_run(tmp_path, monkeypatch):
    assert main(["census", "--dim", "2", "--span-samples", "10"]) == 2

    monkeypatch.setenv("DH_SUITES_DIR", str(tmp_path / "missing"))
    get_settings.cache_clear()
    assert main(["verify", "--suite", "extension", "--dim", "2"]) == 2

    suites_dir = tmp_path / "suites"
    suites_dir.mkdir()
    (suites_dir / "partial.yaml").write_text(
        "suites:\n  - name: extension\n    checks:\n      - name: extension_uniform\n",
        encoding="utf-8",
    )
    monkeypatch.setenv("DH_SUITES_DIR", str(suites_dir))
    get_settings.cache_clear()
    assert main(["verify", "--suite", "extension", "--dim", "2"]) == 2


def test_check_kind_comes_from_suite_description():
    config = SuitesConfig(
        suites=[
            SuiteConfig(
                name="extension",
                checks=[
                    CheckConfig(name="extension_nonnegative", kind="lower", threshold=-1e-10),
                    CheckConfig(name="extension_uniform", kind="lower", threshold=1.0),
                ],
            )
        ]
    )
    report = run_suites("extension", 2, seed=0, trials=5, config=config)
    checks = {check.name: check for check in report.suites[0].checks}
    assert checks["extension_uniform"].kind == "lower"
    assert checks["extension_uniform"].min_value == pytest.approx(0.0, abs=1e-12)
    assert not checks["extension_uniform"].passed
    assert not report.passed


def test_check_descriptions_are_logged(caplog):
    with caplog.at_level(logging.INFO):
        run_suites("causality", 2, seed=0, trials=3, config=load_suite_configs(SUITES_DIR))
    assert any("Лес равен 1 на нормированных состояниях" in record.message for record in caplog.records)


def test_tol_replaces_only_missing_thresholds(capsys):
    code, payload = run_json(capsys, ["verify", "--suite", "causality", "--dim", "2", "--trials", "3", "--tol", "1e-3"])
    assert code == 0
    checks = {check["name"]: check for check in payload["suites"][0]["checks"]}
    assert checks["forest_normalisation"]["threshold"] == 1e-3
    assert checks["tree_on_bridge_witness"]["threshold"] == 0.1
