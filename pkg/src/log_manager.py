"""
Модуль для управления логами
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path


LOG_FILE_NAME = "dh.log"


class LogManager:
    """
    Класс для управления логами
    """

    def __init__(
        self,
        log_dir: str = "logs",
        max_bytes: int = 10 * 1024 * 1024,
        backup_count: int = 5,
        level: str = "INFO",
        to_file: bool = True,
    ):
        """
        Инициализация менеджера логов

        Args:
            log_dir: директория для логов
            max_bytes: максимальный размер файла лога в байтах
            backup_count: количество файлов для ротации
            level: уровень логирования корневого логгера
            to_file: писать ли лог в файл помимо консоли
        """
        self.log_dir = Path(log_dir)
        self.max_bytes = max_bytes
        self.backup_count = backup_count
        self.level = level.upper()
        self.to_file = to_file
        self.setup_logging()

    def setup_logging(self) -> None:
        """
        Настройка логирования
        """
        log_format = "%(asctime)s - %(levelname)s - %(message)s"
        formatter = logging.Formatter(log_format)

        # Консоль - это stderr, stdout остается под отчеты
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)

        root_logger = logging.getLogger()
        root_logger.setLevel(self.level)

        # Удаляем существующие хендлеры
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)
            handler.close()

        root_logger.addHandler(console_handler)

        if self.to_file:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(
                filename=self.log_dir / LOG_FILE_NAME,
                maxBytes=self.max_bytes,
                backupCount=self.backup_count,
                encoding="utf-8",
            )
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)

    def get_log_files(self) -> list[Path]:
        """
        Получение списка файлов логов

        Returns:
            list[Path]: список путей к файлам логов, новые первыми
        """
        log_files = []
        main_log = self.log_dir / LOG_FILE_NAME
        if main_log.exists():
            log_files.append(main_log)

        # Файлы ротации
        for i in range(1, self.backup_count + 1):
            backup_log = self.log_dir / f"{LOG_FILE_NAME}.{i}"
            if backup_log.exists():
                log_files.append(backup_log)

        return sorted(log_files, key=lambda x: x.stat().st_mtime, reverse=True)

    def get_latest_logs(self, lines: int = 100) -> str:
        """
        Получение последних строк из всех логов

        Args:
            lines: количество строк для получения из каждого файла

        Returns:
            str: последние строки логов
        """
        all_logs = []

        for log_file in self.get_log_files():
            try:
                with open(log_file, "r", encoding="utf-8") as f:
                    all_logs.extend(f.readlines()[-lines:])
            except OSError as e:
                logging.error(f"Ошибка при чтении файла {log_file}: {str(e)}")

        return "".join(all_logs)
