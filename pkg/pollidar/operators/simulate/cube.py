"""
波前数据立方体
"""

import dataclasses
from typing import Any, Dict

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.simulate.schedule import AngleSchedule
from pollidar.scene.sensor import SensorConfig


@dataclasses.dataclass
class WavefrontCube:
    """
    原始测量张量

    Attributes:
        data: (S, H, W, T) ADC采样，可以是内存数组或memmap
        schedule: 采集调度
        sensor: 传感器配置
        meta: 元数据（laser_power、adc_gain、noise、seed、saturated_fraction）
    """

    data: np.ndarray
    schedule: AngleSchedule
    sensor: SensorConfig
    meta: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        expected = (self.schedule.size, self.sensor.rows, self.sensor.cols, self.sensor.bins)
        if tuple(self.data.shape) != expected:
            raise ConfigurationError(f"cube data shape {tuple(self.data.shape)} does not match "
                                     f"schedule/sensor dimensions {expected}")
        self.meta.setdefault("laser_power", 1.0)
        self.meta.setdefault("adc_gain", 1.0)

    @property
    def laser_power(self) -> float:
        return float(self.meta.get("laser_power", 1.0))

    @property
    def gain(self) -> float:
        """理想强度到ADC单位的总增益 adc_gain·laser_power"""
        return float(self.meta.get("adc_gain", 1.0)) * self.laser_power

    def state_mean(self) -> np.ndarray:
        """所有偏振态的平均波形，(H, W, T)"""
        return np.mean(self.data, axis=0, dtype=np.float64)
