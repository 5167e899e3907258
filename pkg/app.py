"""
Основной файл приложения
Командная строка для запуска эксперимента с щелями, членов Соркина,
переписи компонент и наборов проверок теории гиперкубов плотности
"""

import argparse
import logging
import sys
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError

from src.census import orbit_census, span_rank
from src.config import default_tol, get_settings
from src.config_loader import load_suite_configs
from src.interference import hierarchy_report, sorkin_report
from src.log_manager import LogManager
from src.logger import log_report
from src.reports import interference_to_csv, sorkin_to_csv, to_json, to_payload, write_output
from src.verification import SUITE_NAMES, run_suites, select_suites

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

REPORT_TOL = 1e-12


class RunConfig(BaseModel):
    """
    Параметры одного запуска
    """
    command: Literal["interference", "sorkin", "census", "verify"]
    dim: int = Field(ge=1)
    max_order: Optional[int] = Field(default=None, ge=1)
    suite: str = "all"
    trials: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    tol: Optional[float] = Field(default=None, gt=0)
    format: Literal["json", "csv"] = "json"
    out: Optional[str] = None
    force_large: bool = False
    span_samples: Optional[int] = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="app.py", description="Гиперкубы плотности: эксперименты и проверки")
    parser.add_argument("--log-level", default=None, help="уровень логирования (по умолчанию LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--dim", type=int, required=True, help="размерность d")
        sub.add_argument("--seed", type=int, default=0, help="зерно прогона")
        sub.add_argument(
            "--tol",
            type=float,
            default=None,
            help="допуск численных предикатов и проверок без порога в описании набора "
            "(по умолчанию DH_DEFAULT_TOL); пороги из YAML не меняются",
        )
        sub.add_argument("--format", choices=["json", "csv"], default="json")
        sub.add_argument("--out", default=None, help="файл отчета (по умолчанию stdout)")
        sub.add_argument("--force-large", action="store_true", help="снять ограничение размерности")

    for name in ("interference", "sorkin"):
        sub = subparsers.add_parser(name)
        add_common(sub)
        sub.add_argument("--max-order", type=int, default=None, help="наибольший порядок (по умолчанию d)")

    census = subparsers.add_parser("census")
    add_common(census)
    census.add_argument("--span-samples", type=int, default=None, help="число состояний для ранга оболочки")

    verify = subparsers.add_parser("verify")
    add_common(verify)
    verify.add_argument("--suite", choices=SUITE_NAMES + ["all"], default="all")
    verify.add_argument("--trials", type=int, default=None, help="число испытаний (по умолчанию из набора)")

    return parser


def _check_dim_guard(config: RunConfig, limit: int) -> None:
    if config.dim > limit and not config.force_large:
        raise ValueError(f"Размерность {config.dim} больше предела {limit}; используйте --force-large")


def validate_run(config: RunConfig) -> None:
    """
    Проверка параметров запуска до начала вычислений

    Args:
        config: параметры запуска

    Raises:
        ValueError: ошибка использования (размерность, формат, порядок, набор)
        FileNotFoundError: нет каталога с описаниями наборов
    """
    settings = get_settings()
    if config.command in ("interference", "sorkin"):
        _check_dim_guard(config, settings.DH_MAX_DIM)
        if config.max_order is not None and config.max_order > config.dim:
            raise ValueError(f"Порядок --max-order={config.max_order} больше размерности {config.dim}")
        return

    if config.format != "json":
        raise ValueError(f"Команда {config.command} выводит только JSON")

    if config.command == "census":
        if config.span_samples is not None:
            _check_dim_guard(config, settings.DH_MAX_CENSUS_DIM)
            if config.span_samples < 2 * config.dim ** 4:
                raise ValueError(f"Нужно не меньше {2 * config.dim ** 4} состояний, получено {config.span_samples}")
        return

    _check_dim_guard(config, settings.DH_MAX_DIM)
    select_suites(config.suite, config.dim, load_suite_configs(settings.DH_SUITES_DIR))


def run_interference(config: RunConfig) -> int:
    """
    Отчет по иерархии интерференции; код 1, если вероятности или члены
    Соркина расходятся с замкнутыми формулами
    """
    report = hierarchy_report(config.dim, config.max_order or config.dim)
    log_report("Интерференция", to_payload(report))

    failures = [
        f"P(#U={r.size})" for r in report.probabilities if abs(r.value - r.expected) > REPORT_TOL
    ] + [f"I_{r.order}" for r in report.sorkin if abs(r.value - r.closed_form) > REPORT_TOL]
    if report.invariance_max_deviation is not None and report.invariance_max_deviation > REPORT_TOL:
        failures.append("invariance")

    text = interference_to_csv(report) if config.format == "csv" else to_json(report)
    write_output(text, config.out)
    if failures:
        logger.error(f"Нарушены соотношения: {failures}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def run_sorkin(config: RunConfig) -> int:
    report = sorkin_report(config.dim, config.max_order or config.dim)
    log_report("Члены Соркина", to_payload(report))

    text = sorkin_to_csv(report) if config.format == "csv" else to_json(report)
    write_output(text, config.out)
    if any(abs(term.value - term.closed_form) > REPORT_TOL for term in report.terms):
        logger.error("Члены Соркина расходятся с замкнутой формулой")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def run_census(config: RunConfig) -> int:
    """
    Перепись компонент; расхождение с формулой - данные отчета, а не ошибка
    """
    census = orbit_census(config.dim)
    if config.span_samples is not None:
        census.span_rank = span_rank(config.dim, config.span_samples, config.seed)
        census.span_samples = config.span_samples
    log_report("Перепись", to_payload(census))
    write_output(to_json(census), config.out)
    return EXIT_OK


def run_verify(config: RunConfig) -> int:
    report = run_suites(config.suite, config.dim, config.seed, config.trials, default_tol(config.tol))
    write_output(to_json(report), config.out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


COMMANDS = {
    "interference": run_interference,
    "sorkin": run_sorkin,
    "census": run_census,
    "verify": run_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа командной строки

    Returns:
        int: 0 - успех, 1 - проверка не пройдена, 2 - ошибка использования
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    settings = get_settings()
    try:
        LogManager(
            log_dir=settings.LOG_DIR,
            max_bytes=settings.LOG_MAX_BYTES,
            backup_count=settings.LOG_BACKUP_COUNT,
            level=args.log_level or settings.LOG_LEVEL,
            to_file=settings.LOG_TO_FILE,
        )
    except ValueError as e:
        print(f"Некорректный уровень логирования: {str(e)}", file=sys.stderr)
        return EXIT_USAGE

    try:
        options = {key: value for key, value in vars(args).items() if key != "log_level"}
        config = RunConfig(**options)
    except ValidationError as e:
        logger.error(f"Некорректные параметры запуска: {str(e)}")
        return EXIT_USAGE

    try:
        validate_run(config)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Некорректный запуск команды {config.command}: {str(e)}")
        return EXIT_USAGE

    # После проверки параметров ошибка вычислений - это непройденная проверка
    try:
        return COMMANDS[config.command](config)
    except (ValueError, ArithmeticError, RuntimeError) as e:
        logger.error(f"Ошибка вычислений в команде {config.command}: {str(e)}")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
