# Logging for regretbench. config.py builds the one package logger,
# "regretbench", that every module imports; the solvers log progress at DEBUG
# and results at INFO. REGRETBENCH_LOG_FILE adds a rotating file next to the
# console, and REGRETBENCH_LOG_LEVEL sets the starting level (the CLI's
# --verbose overrides it).
import logging
from logging.handlers import RotatingFileHandler

LOG_FORMAT = ('%(asctime)s - %(name)s:%(levelname)s'
              ' - %(message)s - [%(filename)s:%(lineno)d]')
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def create_logger(name, file_path=None, level=logging.DEBUG):
    """
    Set up a regretbench logger: console output, plus a rotating log file
    when file_path is given. A second call with the same name keeps the
    handlers and only updates the level.

    :param name: the name of the logger, "regretbench" for the package one
    :param file_path: the path of the log file, or None for console only
    :param level: a logging level or its name, e.g. "INFO"
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.DEBUG
    logger = logging.getLogger(name)
    logger.setLevel(level)
    if logger.handlers:
        return logger

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.DEBUG)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if file_path:
        file_handler = RotatingFileHandler(file_path,
                                           maxBytes=10*1024*1024,
                                           backupCount=5)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger
