"""
操作符工具模块

该模块提供了操作符相关的工具函数，如输入输出日志装饰器。
帧中包含大数组，日志只打印每个产物的摘要（类型、形状、数值范围）。
"""

import dataclasses
import functools
import json
from typing import Any, Callable, Dict, Optional

import numpy as np

from pollidar.utils.config import Config
from pollidar.utils.logger import get_logger

# 全局配置实例
_config = Config()
_logger = get_logger("pollidar.operator_io")


def summarize(value: Any) -> Any:
    """
    生成产物的可JSON序列化摘要

    Args:
        value: 任意产物（数组、数据类、字典、标量）

    Returns:
        可序列化的摘要
    """
    if isinstance(value, np.ndarray):
        summary = {"shape": list(value.shape), "dtype": str(value.dtype)}
        if value.size and np.issubdtype(value.dtype, np.number):
            finite = value[np.isfinite(value)] if np.issubdtype(value.dtype, np.floating) else value
            if finite.size:
                summary["min"] = float(np.min(finite))
                summary["max"] = float(np.max(finite))
        return summary
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        fields = {f.name: summarize(getattr(value, f.name)) for f in dataclasses.fields(value)}
        return {"type": type(value).__name__, **fields}
    if isinstance(value, dict):
        return {str(k): summarize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        if len(value) > 8:
            return {"type": type(value).__name__, "len": len(value)}
        return [summarize(v) for v in value]
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return type(value).__name__


def _render(value: Any) -> str:
    indent = _config.get("logging.io_indent", 2)
    truncate_length = _config.get("logging.truncate_length", None)
    text = json.dumps(summarize(value), ensure_ascii=False, indent=indent)
    if truncate_length and len(text) > truncate_length:
        text = text[:truncate_length] + "... (truncated)"
    return text


def log_io(func: Callable) -> Callable:
    """
    装饰器：记录操作符的输入和输出摘要

    根据全局配置决定是否打印。

    Args:
        func: 要装饰的函数，通常是操作符的process方法

    Returns:
        Callable: 装饰后的函数
    """
    @functools.wraps(func)
    def wrapper(self, frame: Dict[str, Any]) -> Dict[str, Any]:
        show_io = _config.get("logging.show_operator_io", False)

        if show_io:
            _logger.info(f"\n[{self.name}] 输入:\n{_render(frame)}")

        result = func(self, frame)

        if show_io:
            _logger.info(f"[{self.name}] 输出:\n{_render(result)}")

        return result

    return wrapper


def enable_operator_io_logging(enable: bool = True) -> None:
    """
    启用或禁用操作符输入输出日志

    Args:
        enable (bool): 是否启用日志，默认为True
    """
    _config.set("logging.show_operator_io", enable)
    _logger.info(f"操作符输入输出日志已{'启用' if enable else '禁用'}")


def set_io_log_truncate_length(length: Optional[int]) -> None:
    """
    设置输入输出日志的截断长度

    Args:
        length (int or None): 截断长度，None表示不截断
    """
    _config.set("logging.truncate_length", length)


def configure_operator_io(config: Config) -> None:
    """
    用已加载配置的logging节覆盖操作符输入输出日志设置

    命令行在读入--config之后调用，使文件与环境变量中的logging.*生效。

    Args:
        config (Config): 已加载的配置
    """
    for key in ("show_operator_io", "io_indent", "truncate_length"):
        _config.set(f"logging.{key}", config.get(f"logging.{key}", _config.get(f"logging.{key}")))
