from __future__ import annotations

import logging
import sys
from typing import TYPE_CHECKING, Any

from coloredlogs import DEFAULT_FIELD_STYLES, DEFAULT_LEVEL_STYLES, ColoredFormatter

if TYPE_CHECKING:
    from pathlib import Path


StylesType = dict[str, dict[str, Any]]
CUSTOM_LEVEL_STYLES: StylesType = {
    **DEFAULT_LEVEL_STYLES,
    "debug": {"color": "black", "bright": True},
    "info": {"faint": True},
    "warning": {"color": "yellow", "bold": True},
    "error": {"color": "red", "bold": True},
    "critical": {"color": "magenta", "bold": True, "underline": True},
}
CUSTOM_FIELD_STYLES: StylesType = {**DEFAULT_FIELD_STYLES, "levelname": {"color": "white"}}
CUSTOM_FORMAT = "{asctime:^} [{levelname:^8s}]({name:>20s}+{lineno:>4d}): {message:<s}"


def parse_level(level: int | str) -> int:
    """
    >>> parse_level("DEBUG"), parse_level("debug"), parse_level("30"), parse_level(40)
    (10, 10, 30, 40)
    """
    if isinstance(level, int):
        return level
    if level.isdigit():
        return int(level)
    value = logging.getLevelName(level.upper())
    if not isinstance(value, int):
        raise ValueError(f"Unknown logging level: {level!r}")
    return value


def get_logging_formatter(
    *,
    color=False,
    level_styles_update: StylesType = None,
    field_styles_update: StylesType = None,
) -> logging.Formatter:
    date_fmt = "%Y-%m-%d %H:%M:%S"
    if not color:
        return logging.Formatter(CUSTOM_FORMAT, style="{", datefmt=date_fmt)
    level_styles = {**CUSTOM_LEVEL_STYLES, **(level_styles_update or {})}
    field_styles = {**CUSTOM_FIELD_STYLES, **(field_styles_update or {})}
    return ColoredFormatter(
        CUSTOM_FORMAT,
        style="{",
        datefmt=date_fmt,
        level_styles=level_styles,
        field_styles=field_styles,
    )


# https://stackoverflow.com/a/16993115/2059584
def handle_exception(exc_type, exc_value, exc_traceback):
    if issubclass(exc_type, KeyboardInterrupt):
        sys.__excepthook__(exc_type, exc_value, exc_traceback)
        return

    logging.critical("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))


class FilterWhitelist(logging.Filter):
    def __init__(self, allowed_modules: list[str]) -> None:
        super().__init__()
        self._allowed_modules = [*allowed_modules, "root", "__main__"]

    def filter(self, record: logging.LogRecord) -> bool:  # noqa: A003
        if record.levelno > logging.WARNING:
            return True
        return any(record.name.startswith(module) for module in self._allowed_modules)


class _WarebenchHandlerMixin:
    """Marks handlers installed by `setup_logging` so a later call can replace them"""


class _ConsoleHandler(_WarebenchHandlerMixin, logging.StreamHandler):
    pass


class _FileHandler(_WarebenchHandlerMixin, logging.FileHandler):
    pass


def setup_logging(
    log_file: Path = None,
    print_level: int | str = logging.INFO,
    *,
    append=False,
    level_styles_update: StylesType = None,
    field_styles_update: StylesType = None,
    disable_colors=False,
    log_uncaught_exceptions=True,
    whitelist: list[str] = None,
) -> None:
    """
    Configure console (and optionally file) logging for a benchmark session

    :param log_file: in which file to write the full (DEBUG) log
    :param print_level: Level of logging to the console
    :param append: Append to log file instead of overwriting
    :param disable_colors: Disable colors on the console
    :param log_uncaught_exceptions: Add uncaught exceptions to the log, not guaranteed
    :param whitelist: Only log these modules below ERROR
    """
    formatter = get_logging_formatter()
    colored_formatter = get_logging_formatter(
        color=True,
        level_styles_update=level_styles_update,
        field_styles_update=field_styles_update,
    )

    handlers: list[logging.Handler] = []
    console_handler = _ConsoleHandler()
    console_handler.setFormatter(formatter if disable_colors else colored_formatter)
    console_handler.setLevel(parse_level(print_level))
    handlers.append(console_handler)
    if log_file is not None:
        file_handler = _FileHandler(log_file, mode="a" if append else "w")
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.DEBUG)
        handlers.append(file_handler)

    root_logger = logging.getLogger()
    for handler in [handler for handler in root_logger.handlers if isinstance(handler, _WarebenchHandlerMixin)]:
        root_logger.removeHandler(handler)
        handler.close()
    root_logger.level = 0
    root_logger.handlers.extend(handlers)

    if whitelist:
        for handler in handlers:
            handler.addFilter(FilterWhitelist(whitelist))

    if log_uncaught_exceptions:
        sys.excepthook = handle_exception
