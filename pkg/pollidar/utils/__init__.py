"""
工具模块

包含配置、日志、操作符日志装饰器与运行清单。
"""

from pollidar.utils.config import Config, default_config
from pollidar.utils.logger import get_logger, configure_logging
from pollidar.utils.operator_utils import configure_operator_io, enable_operator_io_logging

__all__ = [
    'Config',
    'default_config',
    'get_logger',
    'configure_logging',
    'configure_operator_io',
    'enable_operator_io_logging',
]
