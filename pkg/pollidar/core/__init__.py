"""
核心模块

包含操作符基类、管道、执行器与错误类型。
"""

from pollidar.core.errors import (
    PolLidarError,
    DomainError,
    UndefinedInputError,
    ConfigurationError,
    SchemaError,
    EmptyMaskError,
)
from pollidar.core.operator import Operator, PhysicsOperator, ReconstructionOperator
from pollidar.core.pipeline import Pipeline
from pollidar.core.executor import Executor, SyncExecutor, MultiThreadExecutor, make_executor

__all__ = [
    'PolLidarError',
    'DomainError',
    'UndefinedInputError',
    'ConfigurationError',
    'SchemaError',
    'EmptyMaskError',
    'Operator',
    'PhysicsOperator',
    'ReconstructionOperator',
    'Pipeline',
    'Executor',
    'SyncExecutor',
    'MultiThreadExecutor',
    'make_executor',
]
