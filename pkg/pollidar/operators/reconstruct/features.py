"""
特征张量导出

逐像素拼接 x = Ĩ ⊕ d ⊕ H_meas ⊕ V，供外部学习框架使用。
"""

from typing import Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.preprocess.ellipsometry import MuellerMovie
from pollidar.operators.preprocess.slicing import SlicedCube

FEATURE_MODES = ("full", "no_polarization", "no_mueller", "window1")


def feature_channels(states: int, window: int, mode: str = "full") -> int:
    """特征通道数C"""
    if mode == "window1":
        window = 1
    mueller = 0 if mode == "no_mueller" else window * 16
    return states * window + states + mueller + 3


def export_features(sliced: SlicedCube, movie: Optional[MuellerMovie], mode: str = "full",
                    view: Optional[np.ndarray] = None) -> np.ndarray:
    """
    生成特征张量

    Args:
        sliced: 峰值窗口
        movie: Mueller电影，no_mueller模式下可以为None
        mode (str): full、no_polarization（各偏振态替换为平均波形）、
            no_mueller（去掉H_meas）、window1（只保留窗口中心bin）
        view: (H, W, 3) 视线方向

    Returns:
        numpy.ndarray: (H, W, C) float32

    Raises:
        ConfigurationError: 未知模式或缺少Mueller电影
    """
    if mode not in FEATURE_MODES:
        raise ConfigurationError(f"unknown feature mode '{mode}', expected one of {FEATURE_MODES}")
    if movie is None and mode != "no_mueller":
        raise ConfigurationError(f"feature mode '{mode}' needs the Mueller movie")
    view = sliced.sensor.view_directions() if view is None else view
    data = sliced.data
    h_meas = movie.h_meas if movie is not None else None
    if mode == "window1":
        center = sliced.center
        data = data[..., center:center + 1]
        h_meas = h_meas[:, :, center:center + 1]
    if mode == "no_polarization":
        data = np.broadcast_to(data.mean(axis=0, keepdims=True), data.shape)

    states, rows, cols, window = data.shape
    parts = [
        np.moveaxis(data, 0, 2).reshape(rows, cols, states * window),
        np.moveaxis(sliced.d_prior[..., 0], 0, -1),
    ]
    if mode != "no_mueller":
        parts.append(h_meas.reshape(rows, cols, -1))
    parts.append(view)
    features = np.concatenate(parts, axis=-1).astype(np.float32)
    return features
