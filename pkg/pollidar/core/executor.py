"""
执行器模块

该模块定义了按行并行的执行器。任务是一个可调用对象，执行器负责把
工作单元（通常是图像行）分发给它，并按输入顺序收集结果。
"""

import concurrent.futures
from typing import Any, Callable, Iterable, List, Optional

from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


class Executor:
    """
    执行器基类

    所有执行器都应该继承这个类，并实现execute和execute_all方法。
    """

    def __init__(self, task: Callable[[Any], Any]):
        """
        初始化执行器

        Args:
            task: 处理单个工作单元的可调用对象
        """
        self.task = task

    def execute(self, item):
        """
        执行任务处理单个工作单元

        Args:
            item: 工作单元

        Returns:
            任务结果
        """
        return self.task(item)

    def execute_all(self, items: Iterable[Any]) -> List[Any]:
        """
        批量执行任务

        Args:
            items (iterable): 工作单元序列

        Returns:
            list: 结果列表，与输入顺序一致
        """
        return [self.execute(item) for item in items]


class SyncExecutor(Executor):
    """
    同步执行器

    这个执行器按顺序同步执行任务。
    """
    pass


class MultiThreadExecutor(Executor):
    """
    多线程执行器

    使用线程池并发执行任务；numpy在大数组运算中释放GIL，行级并行有效。
    """

    def __init__(self, task, max_workers: Optional[int] = None):
        """
        初始化多线程执行器

        Args:
            task: 处理单个工作单元的可调用对象
            max_workers (int, optional): 最大工作线程数
        """
        super().__init__(task)
        self.max_workers = max_workers

    def execute_all(self, items):
        """
        使用多线程批量执行任务

        任一工作单元失败时重新抛出其异常，不返回部分结果。

        Returns:
            list: 结果列表，与输入列表顺序一致
        """
        items = list(items)
        results = [None] * len(items)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {
                executor.submit(self.execute, item): i
                for i, item in enumerate(items)
            }
            for future in concurrent.futures.as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception:
                    logger.error(f"Error processing work unit at index {index}")
                    raise
        return results


def make_executor(task, threads: Optional[int] = None) -> Executor:
    """
    根据线程数选择执行器

    Args:
        task: 处理单个工作单元的可调用对象
        threads (int, optional): 线程数，None或≤1时使用同步执行器

    Returns:
        Executor: 执行器实例
    """
    if threads is None or threads <= 1:
        return SyncExecutor(task)
    return MultiThreadExecutor(task, max_workers=threads)
