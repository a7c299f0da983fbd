import os
import logging
from pathlib import Path
from typing import Optional

from pythonjsonlogger import jsonlogger

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def setup_logging(
    log_dir: Optional[str] = None,
    log_file: str = "eos_lab.log",
    level: int = logging.INFO,
    json: bool = False,
) -> logging.Logger:
    """
    Set up logging for an eos-lab run with directory creation and a console fallback.

    Handlers are attached to the ``app`` package logger so every module logger
    (``logging.getLogger(__name__)``) propagates into them.
    """
    logger = logging.getLogger("app")
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)

    log_dir = log_dir or os.getenv("EOS_LAB_LOG_DIR")
    if not log_dir:
        return logger

    try:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)

        log_file_path = log_path / log_file
        file_handler = logging.FileHandler(str(log_file_path))
        if json:
            file_handler.setFormatter(jsonlogger.JsonFormatter(LOG_FORMAT))
        else:
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(file_handler)

        logger.info(f"Logging setup complete. Log file: {log_file_path}")
    except OSError as e:
        logger.warning(f"Using console logging only due to error: {str(e)}")

    return logger
