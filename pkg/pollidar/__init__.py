"""
PolLidar - 偏振波前激光雷达仿真与重建工具包

PolLidar渲染逐偏振态的时间分辨回波立方体，从中恢复逐bin的Mueller矩阵，
并重建距离、表面法线与材质参数。处理步骤以操作符的形式组成管道。
"""

__version__ = "0.1.0"

from pollidar.core import Operator, PhysicsOperator, ReconstructionOperator, Pipeline
from pollidar.core import Executor, SyncExecutor, MultiThreadExecutor, make_executor
from pollidar.utils import Config
