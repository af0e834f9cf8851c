"""
椭偏反演

对每个像素、每个窗口bin求解线性最小二乘 min_h ‖W·h − I‖²，
W是调度的(S, 16)设计矩阵。W的伪逆只在构造时通过SVD计算一次。
"""

import dataclasses
from typing import Any, Dict, Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.executor import make_executor
from pollidar.core.operator import Operator
from pollidar.operators.preprocess.slicing import SlicedCube
from pollidar.operators.simulate.schedule import AngleSchedule
from pollidar.optics.polmath import aop_map, dop_map
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


@dataclasses.dataclass
class MuellerMovie:
    """
    逐像素、逐窗口bin的Mueller矩阵

    Attributes:
        h_meas: (H, W, L, 16) 按行展开的Mueller矩阵
        residual: (H, W) 最小二乘残差范数
        t_peak: (H, W) 窗口中心的绝对bin
        valid: (H, W, L) 窗口bin是否有效
        confidence: (H, W) {0, 1}
        schedule: 采集调度
        sensor: 传感器配置
        meta: 元数据（含adc_gain与laser_power）
    """

    h_meas: np.ndarray
    residual: np.ndarray
    t_peak: np.ndarray
    valid: np.ndarray
    confidence: np.ndarray
    schedule: Optional[AngleSchedule] = None
    sensor: Optional[SensorConfig] = None
    meta: Dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def window(self) -> int:
        return self.h_meas.shape[2]

    @property
    def center(self) -> int:
        return self.window // 2

    @property
    def gain(self) -> float:
        return float(self.meta.get("adc_gain", 1.0)) * float(self.meta.get("laser_power", 1.0))

    def matrices(self) -> np.ndarray:
        """(H, W, L, 4, 4)"""
        return self.h_meas.reshape(self.h_meas.shape[:3] + (4, 4))

    def peak(self) -> np.ndarray:
        """峰值bin的Mueller矩阵，(H, W, 4, 4)"""
        return self.matrices()[:, :, self.center]

    def window_times(self) -> np.ndarray:
        """窗口bin的采样时刻（ns），(H, W, L)"""
        bins = self.t_peak[..., None] + np.arange(self.window) - self.center
        return bins * self.sensor.bin_width_ns


class EllipsometricInverter:
    """
    预先分解的椭偏反演器

    Args:
        schedule: 采集调度

    Raises:
        ConfigurationError: 设计矩阵秩不足16
    """

    def __init__(self, schedule: AngleSchedule):
        self.schedule = schedule
        self.design = schedule.design_matrix()
        u, singular, vt = np.linalg.svd(self.design, full_matrices=False)
        tol = singular[0] * max(self.design.shape) * np.finfo(float).eps if singular.size else 0.0
        rank = int(np.sum(singular > tol))
        if rank < 16:
            raise ConfigurationError(f"schedule design matrix has rank {rank} < 16; "
                                     f"cannot invert ellipsometric measurements")
        self.condition = float(singular[0] / singular[-1])
        self.pinv = (vt.T / singular) @ u.T
        logger.info(f"ellipsometric design matrix: {schedule.size} states, rank 16, "
                    f"condition number {self.condition:.3f}")

    def solve(self, intensities: np.ndarray):
        """
        反演强度

        Args:
            intensities: (..., S)

        Returns:
            tuple: (h (..., 16), residual (...)) 其中residual是每个样本的残差范数
        """
        intensities = np.asarray(intensities, dtype=np.float64)
        h = intensities @ self.pinv.T
        diff = h @ self.design.T - intensities
        return h, np.sqrt(np.sum(diff * diff, axis=-1))


def invert_ellipsometry(sliced: SlicedCube, schedule: Optional[AngleSchedule] = None,
                        threads: Optional[int] = None) -> MuellerMovie:
    """
    逐像素、逐bin恢复Mueller矩阵

    Args:
        sliced: 峰值窗口
        schedule: 采集调度，默认使用sliced中的调度
        threads (int, optional): 按行并行的线程数

    Returns:
        MuellerMovie: Mueller电影，像素残差为窗口内各bin残差的平方和开方

    Raises:
        ConfigurationError: 调度秩不足或与数据的偏振态数不一致
    """
    schedule = schedule or sliced.schedule
    if schedule.size != sliced.data.shape[0]:
        raise ConfigurationError(f"schedule has {schedule.size} states but the data has {sliced.data.shape[0]}")
    inverter = EllipsometricInverter(schedule)
    _, rows, cols, window = sliced.data.shape
    h_meas = np.zeros((rows, cols, window, 16))
    residual = np.zeros((rows, cols))

    def task(row):
        intensities = np.moveaxis(sliced.data[:, row], 0, -1)
        h, res = inverter.solve(intensities)
        h_meas[row] = h
        residual[row] = np.sqrt(np.sum(res * res, axis=-1))
        return None

    make_executor(task, threads).execute_all(range(rows))
    return MuellerMovie(h_meas, residual, sliced.t_peak.copy(), sliced.valid.copy(), sliced.confidence.copy(),
                        schedule, sliced.sensor, dict(sliced.meta))


class EllipsometryOperator(Operator):
    """
    椭偏反演操作符：sliced → movie
    """

    requires = ("sliced",)

    def __init__(self, threads: Optional[int] = None, name=None):
        super().__init__(name, "Recover per-bin Mueller matrices")
        self.threads = threads

    def process_item(self, frame):
        result = dict(frame)
        result["movie"] = invert_ellipsometry(frame["sliced"], threads=self.threads)
        return result


def polarization_diagnostics(movie: MuellerMovie, laser_stokes=None) -> Dict[str, np.ndarray]:
    """
    峰值bin的偏振诊断栅格

    Args:
        movie: Mueller电影
        laser_stokes: 照明Stokes向量，默认取调度中的激光

    Returns:
        dict: s0、dop、aop（弧度），各为(H, W)
    """
    s_in = movie.schedule.laser_stokes if laser_stokes is None else np.asarray(laser_stokes, dtype=float)
    s_out = movie.peak() @ s_in
    return {"s0": s_out[..., 0], "dop": dop_map(s_out), "aop": aop_map(s_out)}
