"""
操作符基类模块

该模块定义了所有处理阶段（仿真、预处理、重建、评估）的操作符基类。
操作符处理的数据单元是一个帧（frame）：一个保存命名产物的普通字典，
例如 scene、scene_maps、cube、sliced、movie、recon、materials、metrics。
"""

from typing import Any, Dict, List, Optional, Union

from pollidar.utils.operator_utils import log_io

Frame = Dict[str, Any]


class Operator:
    """
    操作符基类，定义处理帧的接口

    所有操作符都应该继承这个类，并实现process_item方法或process_batch方法。
    """

    #: 操作符需要从帧中读取的键
    requires: tuple = ()

    def __init__(self, name=None, description=None, supports_batch=False):
        """
        初始化操作符

        Args:
            name (str, optional): 操作符名称，如果不提供则使用类名
            description (str, optional): 操作符描述
            supports_batch (bool, optional): 是否支持批处理帧列表，默认False
        """
        self.name = name or self.__class__.__name__
        self.description = description or f"{self.name} operator"
        self.supports_batch = supports_batch

    @log_io
    def process(self, frame: Union[Frame, List[Frame]]):
        """
        处理帧，支持单个帧或帧列表（例如激光功率扫描）

        Args:
            frame (dict or list): 输入帧

        Returns:
            dict or list: 处理后的帧
        """
        if isinstance(frame, list):
            return self.process_batch(frame)
        self._check_requires(frame)
        return self.process_item(frame)

    def process_item(self, frame: Frame) -> Frame:
        """
        处理单个帧，子类需要实现此方法

        Raises:
            NotImplementedError: 子类必须实现此方法或process_batch方法
        """
        raise NotImplementedError("Subclasses must implement process_item() or process_batch()")

    def process_batch(self, frames: List[Frame]) -> List[Frame]:
        """
        处理帧列表，默认逐个处理

        Args:
            frames (list): 输入帧列表

        Returns:
            list: 处理后的帧列表
        """
        if self.supports_batch:
            raise NotImplementedError("Batch-supporting operators must implement process_batch()")
        results = []
        for frame in frames:
            self._check_requires(frame)
            results.append(self.process_item(frame))
        return results

    def _check_requires(self, frame: Frame) -> None:
        from pollidar.core.errors import ConfigurationError

        missing = [key for key in self.requires if frame.get(key) is None]
        if missing:
            raise ConfigurationError(f"[{self.name}] frame is missing required artifacts: {missing}")

    def __call__(self, frame):
        return self.process(frame)


class PhysicsOperator(Operator):
    """
    物理仿真操作符基类

    封装了生成数据的阶段（渲染、加噪）。
    """

    def __init__(self, name=None, description=None, supports_batch=False):
        super().__init__(name, description or "Physics simulation operator", supports_batch)


class ReconstructionOperator(Operator):
    """
    重建操作符基类

    封装了从测量数据估计几何/材质的阶段，持有求解器参数与线程数。
    """

    def __init__(self, name=None, description=None, supports_batch=False,
                 threads: Optional[int] = None, **solver_params):
        """
        初始化重建操作符

        Args:
            name (str, optional): 操作符名称
            description (str, optional): 操作符描述
            supports_batch (bool, optional): 是否支持批处理
            threads (int, optional): 并行行数，None表示单线程
            **solver_params: 求解器参数
        """
        super().__init__(name, description or "Reconstruction operator", supports_batch)
        self.threads = threads
        self.solver_params = solver_params
