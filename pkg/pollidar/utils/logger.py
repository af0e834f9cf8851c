"""
日志工具模块

该模块提供了用于记录日志的工具函数。
"""

import logging
import sys
from typing import Optional, Union

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _resolve_level(level: Optional[Union[int, str]]) -> int:
    if level is None:
        return logging.INFO
    if isinstance(level, str):
        return getattr(logging, level.upper())
    return level


def get_logger(name: str, level: Optional[Union[int, str]] = None) -> logging.Logger:
    """
    获取配置好的logger实例

    未显式给出级别时不修改logger级别，以便由configure_logging统一控制。

    Args:
        name (str): logger名称
        level (int or str, optional): 日志级别，如logging.INFO或'INFO'

    Returns:
        logging.Logger: 配置好的logger实例
    """
    logger = logging.getLogger(name)
    if level is not None:
        logger.setLevel(_resolve_level(level))

    # 包内logger交给根logger处理；独立使用时才挂控制台处理器
    if not logger.handlers and not name.startswith("pollidar"):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(DEFAULT_FORMAT))
        logger.addHandler(handler)

    return logger


def configure_logging(level: Optional[Union[int, str]] = None,
                      format_str: Optional[str] = None,
                      log_file: Optional[str] = None) -> None:
    """
    配置全局的日志设置

    Args:
        level (int or str, optional): 日志级别，默认为INFO
        format_str (str, optional): 日志格式字符串
        log_file (str, optional): 日志文件路径，如果提供则同时输出到文件
    """
    formatter = logging.Formatter(format_str or DEFAULT_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(_resolve_level(level))

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
