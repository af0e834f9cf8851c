"""
单站光线投射

对每个像素的子光线求最近交点，得到逐子光线的命中记录与逐像素的真值栅格。
"""

import dataclasses
from typing import Optional, Tuple

import numpy as np

from pollidar.core.executor import make_executor
from pollidar.scene.primitives import Scene
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


@dataclasses.dataclass
class HitRecords:
    """
    逐子光线的命中记录

    Attributes:
        directions: (H, W, n, 3) 子光线方向
        distance: (H, W, n) 单程距离，未命中为inf
        normal: (H, W, n, 3) 命中点法线（朝向传感器）
        material_id: (H, W, n) 材质编号，未命中为-1
    """

    directions: np.ndarray
    distance: np.ndarray
    normal: np.ndarray
    material_id: np.ndarray

    @property
    def hit(self) -> np.ndarray:
        return np.isfinite(self.distance)


@dataclasses.dataclass
class SceneMaps:
    """
    逐像素真值栅格

    Attributes:
        distance: (H, W) 米，0表示无命中
        normal: (H, W, 3) 单位法线，无命中处为0
        material_id: (H, W) 整数，无命中为-1
        cos_phi: (H, W) 余弦着色项
        confidence: (H, W) {0, 1}
    """

    distance: np.ndarray
    normal: np.ndarray
    material_id: np.ndarray
    cos_phi: np.ndarray
    confidence: np.ndarray

    @property
    def shape(self):
        return self.distance.shape


def intersect_scene(scene: Scene, origins, directions) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    求射线与整个场景的最近交点

    Args:
        scene: 场景
        origins: (N, 3)
        directions: (N, 3)

    Returns:
        tuple: (t (N,), normal (N, 3), material_id (N,))
    """
    n = len(directions)
    best_t = np.full(n, np.inf)
    best_n = np.zeros((n, 3))
    best_m = np.full(n, -1, dtype=np.int64)
    for primitive in scene.primitives:
        t, normal = primitive.intersect(origins, directions)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_n[closer] = normal[closer]
        best_m[closer] = primitive.material_id
    return best_t, best_n, best_m


def _cast_row(scene: Scene, sensor: SensorConfig, directions: np.ndarray):
    flat = directions.reshape(-1, 3)
    t, normal, material = intersect_scene(scene, np.zeros_like(flat), flat)
    # 超出量程的回波不可测
    t = np.where(t <= sensor.max_range_m, t, np.inf)
    material = np.where(np.isfinite(t), material, -1)
    shape = directions.shape[:-1]
    return t.reshape(shape), normal.reshape(shape + (3,)), material.reshape(shape)


def _mode(material_id: np.ndarray, hit: np.ndarray) -> np.ndarray:
    ids = np.unique(material_id[hit])
    result = np.full(material_id.shape[:-1], -1, dtype=np.int64)
    if ids.size == 0:
        return result
    counts = np.stack([np.sum((material_id == k) & hit, axis=-1) for k in ids], axis=-1)
    best = counts.argmax(axis=-1)
    return np.where(counts.max(axis=-1) > 0, ids[best], -1)


def cast_rays(scene: Scene, sensor: SensorConfig, threads: Optional[int] = None) -> Tuple[SceneMaps, HitRecords]:
    """
    对扫描网格投射光线

    一个像素至少一半子光线命中时置信度为1；距离、法线与cosφ是命中子光线的平均，
    材质取出现最多的编号。

    Args:
        scene: 场景
        sensor: 传感器配置
        threads (int, optional): 按行并行的线程数

    Returns:
        tuple: (SceneMaps, HitRecords)
    """
    directions = sensor.subray_directions()
    executor = make_executor(lambda row: _cast_row(scene, sensor, directions[row]), threads)
    rows = executor.execute_all(range(sensor.rows))
    distance = np.stack([r[0] for r in rows])
    normal = np.stack([r[1] for r in rows])
    material = np.stack([r[2] for r in rows])
    records = HitRecords(directions, distance, normal, material)

    hit = records.hit
    count = hit.sum(axis=-1)
    confident = count * 2 >= hit.shape[-1]
    confident &= count > 0
    safe = np.maximum(count, 1)

    mean_d = np.where(hit, distance, 0.0).sum(axis=-1) / safe
    mean_n = np.where(hit[..., None], normal, 0.0).sum(axis=-2)
    norm = np.linalg.norm(mean_n, axis=-1, keepdims=True)
    mean_n = np.divide(mean_n, norm, out=np.zeros_like(mean_n), where=norm > 0)
    cos_sub = np.maximum(-np.sum(normal * directions, axis=-1), 0.0)
    mean_cos = np.where(hit, cos_sub, 0.0).sum(axis=-1) / safe

    maps = SceneMaps(
        distance=np.where(confident, mean_d, 0.0),
        normal=np.where(confident[..., None], mean_n, 0.0),
        material_id=np.where(confident, _mode(material, hit), -1),
        cos_phi=np.where(confident, mean_cos, 0.0),
        confidence=confident.astype(np.uint8),
    )
    logger.info(f"cast {directions.shape[0] * directions.shape[1]} pixels x {directions.shape[2]} subrays, "
                f"confident pixels: {int(confident.sum())}")
    return maps, records
