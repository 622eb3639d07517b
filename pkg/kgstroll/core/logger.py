# kgstroll/core/logger.py
# Logger initialization: stderr sink plus optional run/error log files
# - Supports LOG_LEVEL / LOG_FORMAT / LOG_DIR from settings
# - Records are single-line key=value messages tagged with the run id
# - Fallback: if log files cannot be created, stderr output still works

import sys
from pathlib import Path
from typing import Any

from loguru import logger

from kgstroll.config import settings

TEXT_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> "
    "level=<level>{level}</level> "
    "run=<magenta>{extra[run_id]}</magenta> "
    "<cyan>{module}</cyan>:<cyan>{function}</cyan> "
    "- <level>{message}</level>"
)

FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss} level={level} run={extra[run_id]} "
    "{module}:{function}:{line} - {message}"
)


def setup_logger(
    level: str | None = None,
    log_format: str | None = None,
    log_dir: str | None = None,
) -> Any:
    """
    Initialize the global logger.
    :param level: log level (DEBUG / INFO / WARNING / ERROR)
    :param log_format: text | json
    :param log_dir: directory for file sinks; empty disables them
    """
    logger.remove()

    log_level = (level or settings.LOG_LEVEL).upper()
    use_json = (log_format or settings.LOG_FORMAT).lower() == "json"
    directory = settings.LOG_DIR if log_dir is None else log_dir

    logger.configure(extra={"run_id": "-"})

    if use_json:
        logger.add(sys.stderr, level=log_level, colorize=False, serialize=True)
    else:
        logger.add(sys.stderr, level=log_level, colorize=None, format=TEXT_FORMAT)

    if not directory:
        logger.debug(f"event=logger_ready level={log_level} files=none")
        return logger

    log_path = Path(directory)
    try:
        log_path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"event=log_dir_failed dir={log_path} error={e}")
        return logger

    for name, sink_level in (("run.log", "INFO"), ("error.log", "ERROR")):
        try:
            logger.add(
                log_path / name,
                level=sink_level,
                rotation="5 MB",
                retention=10,
                encoding="utf-8",
                serialize=use_json,
                format=FILE_FORMAT,
            )
        except OSError as e:
            logger.error(f"event=log_file_failed file={name} error={e}")

    logger.debug(f"event=logger_ready level={log_level} files={log_path}")
    return logger
