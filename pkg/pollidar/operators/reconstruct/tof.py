"""
飞行时间测距

在偏振态平均波形上取峰值，可选地用三点对数抛物线插值做亚bin细化
（对高斯脉冲是精确的）。
"""

from typing import Optional, Union

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.operator import ReconstructionOperator
from pollidar.operators.preprocess.slicing import SlicedCube
from pollidar.operators.reconstruct.maps import DistanceEstimate
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

REFINE_MODES = ("none", "parabolic")


def parabolic_offset(left, center, right) -> np.ndarray:
    """
    对数幅度上的三点抛物线顶点偏移

    任一幅度非正或曲率非负时返回0。

    Returns:
        numpy.ndarray: 相对中心bin的偏移，截断到[-0.5, 0.5]
    """
    left, center, right = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (left, center, right)))
    ok = (left > 0) & (center > 0) & (right > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        l0 = np.log(np.where(ok, left, 1.0))
        l1 = np.log(np.where(ok, center, 1.0))
        l2 = np.log(np.where(ok, right, 1.0))
        curvature = l0 - 2.0 * l1 + l2
        delta = 0.5 * (l0 - l2) / curvature
    ok &= curvature < 0
    return np.where(ok, np.clip(delta, -0.5, 0.5), 0.0)


def _waveform_peaks(mean: np.ndarray, valid: Optional[np.ndarray], refine: str):
    peak = mean.argmax(axis=-1)
    confident = mean.max(axis=-1) > 0.0
    if refine == "none":
        return peak.astype(float), confident
    bins = mean.shape[-1]
    inner = (peak > 0) & (peak < bins - 1)
    lo = np.clip(peak - 1, 0, bins - 1)[..., None]
    hi = np.clip(peak + 1, 0, bins - 1)[..., None]
    left = np.take_along_axis(mean, lo, axis=-1)[..., 0]
    center = np.take_along_axis(mean, peak[..., None], axis=-1)[..., 0]
    right = np.take_along_axis(mean, hi, axis=-1)[..., 0]
    if valid is not None:
        inner &= np.take_along_axis(valid, lo, axis=-1)[..., 0] & np.take_along_axis(valid, hi, axis=-1)[..., 0]
    delta = np.where(inner, parabolic_offset(left, center, right), 0.0)
    return peak + delta, confident


def tof_distance(source: Union[WavefrontCube, SlicedCube], refine: str = "parabolic") -> DistanceEstimate:
    """
    从波前立方体或峰值窗口估计距离

    Args:
        source: WavefrontCube或SlicedCube
        refine (str): "none"取整bin峰值，"parabolic"做亚bin细化

    Returns:
        DistanceEstimate: 距离（0 < d ≤ max_range，无信号处为0且置信度为0）

    Raises:
        ConfigurationError: 未知的细化方式
    """
    if refine not in REFINE_MODES:
        raise ConfigurationError(f"unknown peak refinement '{refine}', expected one of {REFINE_MODES}")
    sensor = source.sensor
    if isinstance(source, SlicedCube):
        position, confident = _waveform_peaks(source.state_mean(), source.valid, refine)
        t_peak = source.t_peak + position - source.center
    else:
        position, confident = _waveform_peaks(source.state_mean(), None, refine)
        t_peak = position
    distance = sensor.bin_to_range(t_peak)
    confident &= distance > 0.0
    distance = np.where(confident, np.minimum(distance, sensor.max_range_m), 0.0)
    return DistanceEstimate(distance, np.where(confident, t_peak, 0.0), confident.astype(np.uint8))


class ToFOperator(ReconstructionOperator):
    """
    测距操作符：sliced（或cube）→ distance
    """

    def __init__(self, refine: str = "parabolic", name=None):
        super().__init__(name, "Time-of-flight ranging")
        self.refine = refine

    def process_item(self, frame):
        source = frame.get("sliced")
        if source is None:
            source = frame.get("cube")
        if source is None:
            raise ConfigurationError(f"[{self.name}] frame needs 'sliced' or 'cube'")
        result = dict(frame)
        result["distance"] = tof_distance(source, self.refine)
        return result
