"""
Модуль моделей отчетов и их записи в JSON и CSV
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.interference import InterferenceReport, SorkinReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["dim", "subset_size", "probability", "sorkin_order", "sorkin_value"]
SORKIN_CSV_COLUMNS = ["dim", "order", "lhs", "rhs", "value", "closed_form"]


class CheckResult(BaseModel):
    """
    Результат одной проверки

    Для границы upper сравнивается max_error <= threshold, для lower
    сравнивается min_value >= threshold.
    """
    model_config = ConfigDict(populate_by_name=True)

    name: str
    kind: Literal["upper", "lower"]
    threshold: float
    max_error: Optional[float] = None
    min_value: Optional[float] = None
    passed: bool = Field(serialization_alias="pass")

    @classmethod
    def upper(cls, name: str, max_error: float, threshold: float) -> "CheckResult":
        return cls(name=name, kind="upper", threshold=threshold, max_error=max_error, passed=max_error <= threshold)

    @classmethod
    def lower(cls, name: str, min_value: float, threshold: float) -> "CheckResult":
        return cls(name=name, kind="lower", threshold=threshold, min_value=min_value, passed=min_value >= threshold)

    @classmethod
    def failed(cls, name: str, kind: Literal["upper", "lower"], threshold: float) -> "CheckResult":
        """
        Проверка, величину которой не удалось измерить
        """
        return cls(name=name, kind=kind, threshold=threshold, passed=False)


class SuiteReport(BaseModel):
    suite: str
    dim: int
    trials: int
    seed: int
    tol: float
    checks: List[CheckResult]
    notes: Dict[str, Any] = Field(default_factory=dict)
    passed: bool = Field(default=False, serialization_alias="pass")

    @model_validator(mode="after")
    def _collect(self) -> "SuiteReport":
        self.passed = all(check.passed for check in self.checks)
        return self


class VerifyReport(BaseModel):
    dim: int
    seed: int
    suites: List[SuiteReport]
    passed: bool = Field(serialization_alias="pass")


def to_payload(report: BaseModel) -> Dict[str, Any]:
    return report.model_dump(mode="json", by_alias=True)


def to_json(report: BaseModel) -> str:
    """
    Сериализация отчета в JSON

    Порядок полей задается моделью; числа с плавающей точкой записываются
    кратчайшим точным представлением.
    """
    return json.dumps(to_payload(report), indent=2, ensure_ascii=False) + "\n"


def interference_to_csv(report: InterferenceReport) -> str:
    """
    CSV отчета по интерференции: строки вероятностей, затем строки членов Соркина
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in report.probabilities:
        writer.writerow([report.dim, record.size, repr(record.value), "", ""])
    for record in report.sorkin:
        writer.writerow([report.dim, "", "", record.order, repr(record.value)])
    return buffer.getvalue()


def sorkin_to_csv(report: SorkinReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SORKIN_CSV_COLUMNS)
    for term in report.terms:
        writer.writerow([report.dim, term.order, repr(term.lhs), repr(term.rhs), repr(term.value), repr(term.closed_form)])
    return buffer.getvalue()


def write_output(text: str, out: Optional[str] = None) -> None:
    """
    Запись отчета в файл или в стандартный вывод

    Args:
        text: содержимое отчета
        out: путь к файлу; None - стандартный вывод
    """
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Отчет записан в {path}")
