#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
日志设置模块
dimer 根日志器负责输出（标准错误 + 可选滚动文件），各模块的 dimer.* 子日志器向它传播
"""

import logging
import logging.handlers
from pathlib import Path
from typing import Dict, List, Optional

from .config_manager import LoggingConfig, LogLevel


ROOT_LOGGER = 'dimer'

LEVELS = {
    LogLevel.DEBUG: logging.DEBUG,
    LogLevel.INFO: logging.INFO,
    LogLevel.WARNING: logging.WARNING,
    LogLevel.ERROR: logging.ERROR,
    LogLevel.CRITICAL: logging.CRITICAL,
}

# 第三方库日志只保留警告及以上
EXTERNAL_LOGGERS = ('matplotlib', 'matplotlib.font_manager', 'PIL.PngImagePlugin', 'joblib')

_loggers: Dict[str, logging.Logger] = {}


def _build_handlers(config: LoggingConfig) -> List[logging.Handler]:
    handlers: List[logging.Handler] = []
    if config.console_handler:
        # 不写 stdout：CSV 可能输出到标准输出
        handlers.append(logging.StreamHandler())

    if config.file_handler:
        Path(config.log_dir).mkdir(parents=True, exist_ok=True)
        handlers.append(logging.handlers.RotatingFileHandler(
            filename=config.log_file_path,
            maxBytes=config.max_file_size,
            backupCount=config.backup_count,
            encoding=config.encoding,
        ))

    formatter = logging.Formatter(fmt=config.format, datefmt=config.date_format)
    level = LEVELS.get(config.level, logging.INFO)
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
    return handlers


def setup_logger(config: Optional[LoggingConfig] = None, name: str = ROOT_LOGGER) -> logging.Logger:
    """
    设置带处理器的日志器，同名日志器只配置一次

    Args:
        config: 日志配置，默认 LoggingConfig()
        name: 日志器名称

    Returns:
        配置好的日志器
    """
    if name in _loggers:
        return _loggers[name]

    config = config or LoggingConfig()
    logger = logging.getLogger(name)
    logger.setLevel(LEVELS.get(config.level, logging.INFO))
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    for handler in _build_handlers(config):
        logger.addHandler(handler)
    logger.propagate = False

    _loggers[name] = logger
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    模块日志器

    名称不带 dimer. 前缀时自动补上；子日志器不挂处理器，输出交给根日志器
    """
    root = setup_logger()
    if name is None or name == ROOT_LOGGER:
        return root

    if not name.startswith(f'{ROOT_LOGGER}.'):
        name = f'{ROOT_LOGGER}.{name}'
    if name not in _loggers:
        logger = logging.getLogger(name)
        logger.setLevel(logging.NOTSET)
        logger.propagate = True
        _loggers[name] = logger
    return _loggers[name]


def configure_logging(config: LoggingConfig) -> logging.Logger:
    """按配置重建根日志器；命令行入口每次运行调用一次"""
    _loggers.pop(ROOT_LOGGER, None)
    logger = setup_logger(config)
    disable_external_loggers()
    return logger


def disable_external_loggers():
    for name in EXTERNAL_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
