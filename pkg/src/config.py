"""
Модуль конфигурации приложения
Использует pydantic для валидации и загрузки переменных окружения
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """
    Класс настроек приложения
    Загружает и валидирует переменные окружения
    """
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Настройки логирования
    LOG_DIR: str = "logs"
    LOG_MAX_BYTES: int = 10 * 1024 * 1024  # 10 MB
    LOG_BACKUP_COUNT: int = 5
    LOG_LEVEL: str = "INFO"
    LOG_TO_FILE: bool = True

    # Численные настройки
    DH_DEFAULT_TOL: float = 1e-10
    DH_LIFT_CUTOFF: float = 1e-12

    # Ограничения размерности (d^8 элементов у отображений)
    DH_MAX_DIM: int = 8
    DH_MAX_CENSUS_DIM: int = 4

    # Каталог с описаниями наборов проверок
    DH_SUITES_DIR: str = "config/suites"


@lru_cache()
def get_settings() -> Settings:
    """
    Получение настроек приложения с кэшированием

    Returns:
        Settings: объект настроек
    """
    return Settings()


def default_tol(tol: float | None = None) -> float:
    """
    Допуск по умолчанию, если явно не задан

    Args:
        tol: явно заданный допуск или None

    Returns:
        float: допуск
    """
    if tol is not None:
        return tol
    return get_settings().DH_DEFAULT_TOL
