"""
Модуль для загрузки и валидации описаний наборов проверок из YAML файлов
"""

import yaml
import logging
from typing import Dict, List, Literal, Optional
from pathlib import Path
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)


class CheckConfig(BaseModel):
    name: str
    kind: Literal["upper", "lower"] = "upper"
    threshold: Optional[float] = None
    description: str = ""


class SuiteConfig(BaseModel):
    name: str
    trials: int = Field(default=100, ge=1)
    max_dim: Optional[int] = None
    checks: List[CheckConfig]

    def get_check(self, name: str) -> CheckConfig:
        for check in self.checks:
            if check.name == name:
                return check
        raise ValueError(f"Проверка {name} не описана в наборе {self.name}")


class SuitesConfig(BaseModel):
    suites: List[SuiteConfig]

    def names(self) -> List[str]:
        return [suite.name for suite in self.suites]


def load_suite_configs(config_dir: str = "config/suites") -> SuitesConfig:
    """
    Загрузка описаний наборов проверок из всех YAML файлов директории и её подкаталогов

    Args:
        config_dir: путь к директории с описаниями

    Returns:
        SuitesConfig: объединенное описание наборов

    Raises:
        FileNotFoundError: если директория не существует
        ValueError: если не найдено ни одного валидного набора
    """
    config_path = Path(config_dir)
    if not config_path.exists():
        raise FileNotFoundError(f"Директория с наборами проверок не найдена: {config_dir}")

    suites_dict: Dict[str, SuiteConfig] = {}

    for yaml_file in sorted(config_path.rglob("*.yaml")):
        try:
            logger.debug(f"Загрузка наборов проверок из файла: {yaml_file}")
            with open(yaml_file, "r", encoding="utf-8") as f:
                config_data = yaml.safe_load(f)

            if not config_data or "suites" not in config_data:
                logger.warning(f"Файл {yaml_file} не содержит секции suites")
                continue

            for suite in config_data["suites"]:
                try:
                    suite_config = SuiteConfig(**suite)

                    # Объединение с уже загруженным набором
                    if suite_config.name in suites_dict:
                        existing_checks = {c.name: c for c in suites_dict[suite_config.name].checks}
                        for check in suite_config.checks:
                            if check.name in existing_checks:
                                logger.warning(
                                    f"Проверка {check.name} набора {suite_config.name} "
                                    f"переопределена в файле {yaml_file}"
                                )
                            existing_checks[check.name] = check
                        suite_config.checks = list(existing_checks.values())

                    suites_dict[suite_config.name] = suite_config
                except Exception as suite_error:
                    logger.error(f"Ошибка при обработке набора {suite.get('name')}: {str(suite_error)}")
                    continue

        except Exception as e:
            logger.error(f"Ошибка при загрузке файла {yaml_file}: {str(e)}")
            continue

    if not suites_dict:
        raise ValueError("Не найдено ни одного валидного набора проверок")

    return SuitesConfig(suites=list(suites_dict.values()))


def get_suite_config(name: str, config: SuitesConfig) -> SuiteConfig:
    """
    Получение описания набора по имени

    Raises:
        ValueError: если набор не найден
    """
    for suite in config.suites:
        if suite.name == name:
            return suite
    raise ValueError(f"Набор проверок {name} не найден")
