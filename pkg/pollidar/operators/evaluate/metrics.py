"""
评估指标

角度误差统计、精度阈值与距离误差，按置信度掩码计算。
求和使用math.fsum，与像素顺序无关；中位数取精确的下中位数（不插值）。
"""

import dataclasses
import math
from typing import Any, Dict, Optional, Sequence

import numpy as np

from pollidar.core.errors import ConfigurationError, EmptyMaskError
from pollidar.core.operator import Operator
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

ACCURACY_THRESHOLDS = (3.0, 5.0, 10.0)

#: 指标JSON与CSV的键顺序
REPORT_KEYS = (
    "angular_mean_deg", "angular_median_deg", "angular_rmse_deg",
    "accuracy_3deg_pct", "accuracy_5deg_pct", "accuracy_10deg_pct",
    "distance_mae_m", "distance_medae_m", "distance_rmse_m",
    "normal_pixels", "distance_pixels", "mask_coverage",
)


def _mean(values: np.ndarray) -> float:
    return math.fsum(values.tolist()) / values.size


def exact_median(values: np.ndarray) -> float:
    """下中位数：排序后第(n−1)//2个元素"""
    values = np.asarray(values, dtype=float).ravel()
    k = (values.size - 1) // 2
    return float(np.partition(values, k)[k])


def _masked(mask: Optional[np.ndarray], shape) -> np.ndarray:
    if mask is None:
        return np.ones(shape, dtype=bool)
    mask = np.asarray(mask).astype(bool)
    if mask.shape != tuple(shape):
        raise ConfigurationError(f"mask shape {mask.shape} does not match data shape {tuple(shape)}")
    return mask


def angular_errors(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """acos(clamp(n̂·n, −1, 1))，单位为度"""
    dot = np.clip(np.sum(np.asarray(pred, dtype=float) * np.asarray(gt, dtype=float), axis=-1), -1.0, 1.0)
    return np.rad2deg(np.arccos(dot))


def angular_metrics(pred: np.ndarray, gt: np.ndarray, mask: Optional[np.ndarray] = None,
                    thresholds: Sequence[float] = ACCURACY_THRESHOLDS) -> Dict[str, float]:
    """
    角度误差统计

    Args:
        pred: (..., 3) 预测法线
        gt: (..., 3) 真值法线
        mask: (...) 掩码
        thresholds: 精度阈值（度）

    Returns:
        dict: angular_mean_deg、angular_median_deg、angular_rmse_deg、accuracy_{x}deg_pct、normal_pixels

    Raises:
        ConfigurationError: 形状不一致
        EmptyMaskError: 掩码为空
    """
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape or pred.shape[-1] != 3:
        raise ConfigurationError(f"normal maps differ in shape: {pred.shape} vs {gt.shape}")
    mask = _masked(mask, pred.shape[:-1])
    if not mask.any():
        raise EmptyMaskError("angular metrics need at least one masked pixel")
    errors = angular_errors(pred[mask], gt[mask])
    report = {
        "angular_mean_deg": _mean(errors),
        "angular_median_deg": exact_median(errors),
        "angular_rmse_deg": math.sqrt(_mean(errors * errors)),
    }
    for threshold in thresholds:
        report[f"accuracy_{threshold:g}deg_pct"] = 100.0 * np.count_nonzero(errors <= threshold) / errors.size
    report["normal_pixels"] = int(errors.size)
    return report


def distance_metrics(pred: np.ndarray, gt: np.ndarray, mask: Optional[np.ndarray] = None) -> Dict[str, float]:
    """
    距离误差统计

    Returns:
        dict: distance_mae_m、distance_medae_m、distance_rmse_m、distance_pixels

    Raises:
        ConfigurationError: 形状不一致
        EmptyMaskError: 掩码为空
    """
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise ConfigurationError(f"distance maps differ in shape: {pred.shape} vs {gt.shape}")
    mask = _masked(mask, pred.shape)
    if not mask.any():
        raise EmptyMaskError("distance metrics need at least one masked pixel")
    errors = np.abs(pred[mask] - gt[mask])
    return {
        "distance_mae_m": _mean(errors),
        "distance_medae_m": exact_median(errors),
        "distance_rmse_m": math.sqrt(_mean(errors * errors)),
        "distance_pixels": int(errors.size),
    }


@dataclasses.dataclass
class MetricsReport:
    """
    评估报告，缺失的部分为None
    """

    angular_mean_deg: Optional[float] = None
    angular_median_deg: Optional[float] = None
    angular_rmse_deg: Optional[float] = None
    accuracy_3deg_pct: Optional[float] = None
    accuracy_5deg_pct: Optional[float] = None
    accuracy_10deg_pct: Optional[float] = None
    distance_mae_m: Optional[float] = None
    distance_medae_m: Optional[float] = None
    distance_rmse_m: Optional[float] = None
    normal_pixels: int = 0
    distance_pixels: int = 0
    mask_coverage: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in REPORT_KEYS}

    def csv_header(self) -> str:
        return ",".join(REPORT_KEYS)

    def csv_row(self) -> str:
        return ",".join("" if getattr(self, key) is None else f"{getattr(self, key):.6g}" for key in REPORT_KEYS)


def evaluate(pred_normal=None, gt_normal=None, pred_distance=None, gt_distance=None,
             mask: Optional[np.ndarray] = None) -> MetricsReport:
    """
    计算完整报告；只给出法线或只给出距离时只计算对应部分

    Raises:
        ConfigurationError: 既无法线也无距离
    """
    if (pred_normal is None or gt_normal is None) and (pred_distance is None or gt_distance is None):
        raise ConfigurationError("evaluation needs a normal pair or a distance pair")
    values: Dict[str, Any] = {}
    shape = None
    if pred_normal is not None and gt_normal is not None:
        values.update(angular_metrics(pred_normal, gt_normal, mask))
        shape = np.asarray(gt_normal).shape[:-1]
    if pred_distance is not None and gt_distance is not None:
        values.update(distance_metrics(pred_distance, gt_distance, mask))
        shape = np.asarray(gt_distance).shape
    covered = max(values.get("normal_pixels", 0), values.get("distance_pixels", 0))
    values["mask_coverage"] = covered / float(np.prod(shape))
    return MetricsReport(**values)


class MetricsOperator(Operator):
    """
    评估操作符：recon + scene_maps → metrics
    """

    requires = ("recon", "scene_maps")

    def __init__(self, name=None):
        super().__init__(name, "Evaluate reconstruction against ground truth")

    def process_item(self, frame):
        recon = frame["recon"]
        truth = frame["scene_maps"]
        mask = truth.confidence.astype(bool) & recon.confidence.astype(bool)
        result = dict(frame)
        result["metrics"] = evaluate(recon.normal, truth.normal, recon.distance, truth.distance, mask)
        return result
