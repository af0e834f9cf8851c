"""
重建结果栅格
"""

import dataclasses
from typing import Dict, Optional

import numpy as np


@dataclasses.dataclass
class DistanceEstimate:
    """
    飞行时间距离估计

    Attributes:
        distance: (H, W) 米，低置信度处为0
        t_peak: (H, W) 峰值位置（bin，可为小数）
        confidence: (H, W) {0, 1}
    """

    distance: np.ndarray
    t_peak: np.ndarray
    confidence: np.ndarray


@dataclasses.dataclass
class NormalEstimate:
    """
    法线估计

    Attributes:
        normal: (H, W, 3) 朝向传感器的单位法线，无效处为0
        confidence: (H, W) {0, 1}
        flags: 命名的布尔栅格，例如 clamped、low_dop、degenerate、sparse
    """

    normal: np.ndarray
    confidence: np.ndarray
    flags: Dict[str, np.ndarray] = dataclasses.field(default_factory=dict)

    def flag(self, name: str) -> np.ndarray:
        """未设置的标记视为全False"""
        if name in self.flags:
            return self.flags[name]
        return np.zeros(self.confidence.shape, dtype=bool)


@dataclasses.dataclass
class ReconMaps:
    """
    逐像素的重建结果

    Attributes:
        distance: (H, W) 米
        normal: (H, W, 3)
        materials: 字段名到(H, W)栅格的映射（eta、roughness等），可以为空
        residual: (H, W) 拟合残差
        confidence: (H, W) {0, 1}
        flags: 命名的布尔栅格
        method: 产生法线的方法名
    """

    distance: np.ndarray
    normal: np.ndarray
    materials: Dict[str, np.ndarray] = dataclasses.field(default_factory=dict)
    residual: Optional[np.ndarray] = None
    confidence: Optional[np.ndarray] = None
    flags: Dict[str, np.ndarray] = dataclasses.field(default_factory=dict)
    method: str = ""

    def __post_init__(self):
        if self.residual is None:
            self.residual = np.zeros(self.distance.shape)
        if self.confidence is None:
            self.confidence = (self.distance > 0).astype(np.uint8)

    @classmethod
    def from_estimates(cls, distance: DistanceEstimate, normals: NormalEstimate, method: str,
                       materials=None, residual=None) -> "ReconMaps":
        confidence = (distance.confidence.astype(bool) & normals.confidence.astype(bool)).astype(np.uint8)
        return cls(distance.distance, normals.normal, dict(materials or {}), residual, confidence,
                   dict(normals.flags), method)
