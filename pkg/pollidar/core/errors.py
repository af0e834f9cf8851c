"""
错误类型模块

该模块定义了pollidar使用的异常层次结构。
"""

from typing import Optional


class PolLidarError(Exception):
    """所有pollidar异常的基类"""


class DomainError(PolLidarError, ValueError):
    """
    物理定义域错误

    例如折射率η ≤ 1、距离d ≤ 0、出射光超过临界角等。
    """


class UndefinedInputError(DomainError):
    """对未定义的输入求DoP/AoP时抛出（例如s0 ≤ 0或非线偏振光）"""


class ConfigurationError(PolLidarError, ValueError):
    """
    配置错误

    包括秩亏的角度调度、维度不匹配、配置文件损坏以及方法与数据不兼容。
    CLI将其映射为退出码2。
    """


class SchemaError(ConfigurationError):
    """
    文件或场景模式错误

    Args:
        message (str): 错误信息
        path (str, optional): 出错的文件路径或JSON路径
        line (int, optional): 出错的行号
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class EmptyMaskError(PolLidarError, ValueError):
    """统计指标的掩码为空时抛出"""
