"""
Модуль для логирования отчетов
"""

import logging
import json
from typing import Any, Dict, Iterable, Optional


logger = logging.getLogger(__name__)


def format_log_message(title: str, content: str) -> str:
    """
    Форматирование сообщения лога

    Args:
        title: заголовок секции
        content: содержимое секции

    Returns:
        str: отформатированное сообщение
    """
    return f"\n=== {title} ===\n{content}"


def log_report(title: str, payload: Dict[str, Any]) -> None:
    """
    Логирование отчета целиком

    Args:
        title: заголовок отчета
        payload: данные отчета
    """
    payload_str = json.dumps(payload, ensure_ascii=False, indent=2)
    logger.debug(format_log_message(title, payload_str))


def log_checks(suite: str, checks: Iterable[Any], descriptions: Optional[Dict[str, str]] = None) -> None:
    """
    Логирование результатов проверок, по строке на проверку

    Args:
        suite: имя набора проверок
        checks: результаты проверок (объекты CheckResult)
        descriptions: описания проверок из описания набора
    """
    descriptions = descriptions or {}
    lines = []
    for check in checks:
        status = "OK" if check.passed else "FAIL"
        measured = check.max_error if check.max_error is not None else check.min_value
        line = f"[{status}] {check.name}: {measured!r} (порог {check.threshold!r})"
        if descriptions.get(check.name):
            line += f" - {descriptions[check.name]}"
        lines.append(line)

    logger.info(format_log_message(f"Проверки набора {suite}", "\n".join(lines)))
