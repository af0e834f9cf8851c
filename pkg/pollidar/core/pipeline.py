"""
管道模块

Pipeline把仿真、预处理、重建与评估阶段串成一条链，帧在阶段间按键传递产物。
"""

import time

from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


class Pipeline:
    """
    按顺序运行的阶段链

    帧列表中的每一帧单独流经整条链；每个阶段的耗时记录在帧的"timings"键下。
    """

    def __init__(self, operators=None):
        """
        Args:
            operators (list, optional): 阶段列表，缺省为空链
        """
        self.operators = list(operators or [])

    def add(self, operator):
        """
        在链尾追加一个阶段

        Args:
            operator: 实现了process(frame)的阶段

        Returns:
            Pipeline: self，便于链式追加
        """
        self.operators.append(operator)
        return self

    def process(self, frame):
        """
        运行整条链

        Args:
            frame (dict or list): 单帧或帧列表

        Returns:
            dict or list: 运行后的帧，与输入形态一致
        """
        if isinstance(frame, list):
            return [self._run(item) for item in frame]
        return self._run(frame)

    def _run(self, frame):
        timings = {}
        for stage in self.operators:
            started = time.perf_counter()
            frame = stage.process(frame)
            timings[stage.name] = time.perf_counter() - started
            logger.debug(f"stage {stage.name} took {timings[stage.name]:.3f}s")
        if isinstance(frame, dict):
            frame.setdefault("timings", {}).update(timings)
        return frame

    def __iter__(self):
        return iter(self.operators)

    def __len__(self):
        return len(self.operators)
