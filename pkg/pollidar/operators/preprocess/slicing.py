"""
峰值时间分割

在所有偏振态的平均波形上定位峰值，截取以峰值为中心、长度为L的共享窗口，
使各偏振态的bin在逐bin反演时对齐。越界部分补零并在valid中标记。
"""

import dataclasses
from typing import Any, Dict

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.operator import Operator
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.operators.simulate.schedule import AngleSchedule
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


@dataclasses.dataclass
class SlicedCube:
    """
    峰值窗口

    Attributes:
        data: (S, H, W, L) 窗口采样
        t_peak: (H, W) 峰值bin
        d_prior: (S, H, W, 1) 各偏振态自身峰值对应的距离（米）
        valid: (H, W, L) 窗口内的bin是否落在时间轴内
        confidence: (H, W) {0, 1}，全零像素为0
        schedule: 采集调度
        sensor: 传感器配置
        meta: 来自立方体的元数据
    """

    data: np.ndarray
    t_peak: np.ndarray
    d_prior: np.ndarray
    valid: np.ndarray
    confidence: np.ndarray
    schedule: AngleSchedule
    sensor: SensorConfig
    meta: Dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def window(self) -> int:
        return self.data.shape[-1]

    @property
    def center(self) -> int:
        return self.window // 2

    def absolute_bins(self) -> np.ndarray:
        """窗口内各bin的绝对编号，(H, W, L)"""
        return self.t_peak[..., None] + np.arange(self.window) - self.center

    def state_mean(self) -> np.ndarray:
        return self.data.mean(axis=0)


def slice_peaks(cube: WavefrontCube, window: int = 51) -> SlicedCube:
    """
    截取峰值窗口

    Args:
        cube: 波前立方体
        window (int): 窗口长度，必须为奇数

    Returns:
        SlicedCube: 峰值窗口

    Raises:
        ConfigurationError: 窗口长度非法
    """
    if window < 1 or window % 2 == 0:
        raise ConfigurationError(f"window length must be a positive odd integer, got {window}")
    sensor = cube.sensor
    mean = cube.state_mean()
    confident = mean.max(axis=-1) > 0.0
    t_peak = np.where(confident, mean.argmax(axis=-1), 0).astype(np.int64)

    half = window // 2
    index = t_peak[..., None] + np.arange(-half, half + 1)
    valid = (index >= 0) & (index < sensor.bins)
    clipped = np.clip(index, 0, sensor.bins - 1)

    states = cube.schedule.size
    data = np.zeros((states, sensor.rows, sensor.cols, window))
    d_prior = np.zeros((states, sensor.rows, sensor.cols, 1))
    for s in range(states):
        waveform = np.asarray(cube.data[s], dtype=np.float64)
        data[s] = np.where(valid, np.take_along_axis(waveform, clipped, axis=-1), 0.0)
        own_peak = waveform.argmax(axis=-1)
        d_prior[s, ..., 0] = np.where(confident, sensor.bin_to_range(own_peak), 0.0)

    padded = int(np.count_nonzero(~valid.all(axis=-1) & confident))
    if padded:
        logger.info(f"{padded} windows touch the ends of the time axis and are zero-padded")
    return SlicedCube(data, t_peak, d_prior, valid, confident.astype(np.uint8),
                      cube.schedule, sensor, dict(cube.meta))


class SlicePeaksOperator(Operator):
    """
    峰值分割操作符：cube → sliced
    """

    requires = ("cube",)

    def __init__(self, window: int = 51, name=None):
        super().__init__(name, "Locate peaks and slice time windows")
        self.window = window

    def process_item(self, frame):
        result = dict(frame)
        result["sliced"] = slice_peaks(frame["cube"], self.window)
        return result
