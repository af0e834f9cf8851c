"""
点云PCA法线

把距离图沿像素视线反投影为点云，对每个点取k近邻（半径上限r_max），
以邻域协方差最小特征值的特征向量作为法线，并翻转为朝向传感器。
"""

import dataclasses
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from pollidar.core.errors import ConfigurationError
from pollidar.core.operator import ReconstructionOperator
from pollidar.operators.reconstruct.maps import DistanceEstimate, NormalEstimate
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

#: λ_mid/λ_max低于此值时邻域视为共线
COLLINEAR_RATIO = 1e-6


@dataclasses.dataclass
class PointCloud:
    """
    Attributes:
        points: (N, 3) 相机坐标系下的点
        pixels: (N, 2) 每个点的(row, col)
        shape: 图像尺寸(H, W)
    """

    points: np.ndarray
    pixels: np.ndarray
    shape: tuple

    def __len__(self):
        return len(self.points)


def unproject(distance: np.ndarray, sensor: SensorConfig, confidence: Optional[np.ndarray] = None,
              view: Optional[np.ndarray] = None) -> PointCloud:
    """
    p = d·ω

    Args:
        distance: (H, W) 距离图
        sensor: 传感器配置
        confidence: (H, W) 置信度，默认取distance > 0
        view: (H, W, 3) 视线方向，默认取像素中心方向

    Returns:
        PointCloud: 点云
    """
    distance = np.asarray(distance, dtype=float)
    view = sensor.view_directions() if view is None else view
    mask = distance > 0 if confidence is None else (np.asarray(confidence).astype(bool) & (distance > 0))
    rows, cols = np.nonzero(mask)
    points = distance[rows, cols, None] * view[rows, cols]
    return PointCloud(points, np.stack([rows, cols], axis=-1), tuple(distance.shape))


def pca_normals(cloud: PointCloud, k: int = 16, r_max: float = 2.0,
                view: Optional[np.ndarray] = None, sensor: Optional[SensorConfig] = None) -> NormalEstimate:
    """
    PCA法线估计

    Args:
        cloud: 点云
        k (int): 近邻数（包含点自身）
        r_max (float): 近邻搜索半径上限（米）
        view: (H, W, 3) 视线方向
        sensor: 未提供view时用于计算视线方向

    Returns:
        NormalEstimate: 法线；邻居不足k个的像素标记为sparse且置信度为0（法线仍可作先验），
        共线邻域标记为degenerate并返回−view

    Raises:
        ConfigurationError: k < 3或r_max ≤ 0
    """
    if k < 3:
        raise ConfigurationError(f"pca needs k >= 3 neighbours, got {k}")
    if r_max <= 0:
        raise ConfigurationError(f"r_max must be positive, got {r_max}")
    if view is None:
        if sensor is None:
            raise ConfigurationError("pca_normals needs view directions or a sensor")
        view = sensor.view_directions()
    height, width = cloud.shape
    normal = np.zeros((height, width, 3))
    confidence = np.zeros((height, width), dtype=np.uint8)
    sparse = np.zeros((height, width), dtype=bool)
    degenerate = np.zeros((height, width), dtype=bool)
    count = len(cloud)
    if count == 0:
        return NormalEstimate(normal, confidence, {"sparse": sparse, "degenerate": degenerate})

    tree = cKDTree(cloud.points)
    k_query = min(k, count)
    dist, index = tree.query(cloud.points, k=k_query, distance_upper_bound=r_max)
    dist = dist.reshape(count, k_query)
    index = index.reshape(count, k_query)
    found = np.isfinite(dist)
    index = np.where(found, index, np.arange(count)[:, None])
    weight = found.astype(float)
    neighbours = weight.sum(axis=1)

    nbr = cloud.points[index]
    centroid = np.einsum("nk,nkc->nc", weight, nbr) / neighbours[:, None]
    diff = (nbr - centroid[:, None, :]) * weight[..., None]
    cov = np.einsum("nki,nkj->nij", diff, diff) / neighbours[:, None, None]
    evals, evecs = np.linalg.eigh(cov)
    n = evecs[:, :, 0]

    rows, cols = cloud.pixels[:, 0], cloud.pixels[:, 1]
    omega = view[rows, cols]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(evals[:, 2] > 0, evals[:, 1] / evals[:, 2], 0.0)
    collinear = ratio < COLLINEAR_RATIO
    n = np.where(collinear[:, None], -omega, n)
    facing = np.sum(n * omega, axis=-1) > 0
    n = np.where(facing[:, None], -n, n)

    normal[rows, cols] = n
    sparse[rows, cols] = neighbours < k
    confidence[rows, cols] = neighbours >= k
    degenerate[rows, cols] = collinear
    if np.any(collinear):
        logger.info(f"{int(collinear.sum())} pixels have collinear neighbourhoods")
    return NormalEstimate(normal, confidence, {"sparse": sparse, "degenerate": degenerate})


def pca_from_distance(distance: DistanceEstimate, sensor: SensorConfig, k: int = 16,
                      r_max: float = 2.0) -> NormalEstimate:
    """从测距结果直接估计PCA法线"""
    view = sensor.view_directions()
    cloud = unproject(distance.distance, sensor, distance.confidence, view)
    return pca_normals(cloud, k, r_max, view)


class PCAOperator(ReconstructionOperator):
    """
    PCA法线操作符：distance → normals
    """

    requires = ("distance", "sensor")

    def __init__(self, k: int = 16, r_max: float = 2.0, key: str = "normals", name=None):
        """
        Args:
            k (int): 近邻数
            r_max (float): 搜索半径上限
            key (str): 结果写入帧的键，作为先验时用prior_normals
            name (str, optional): 操作符名称
        """
        super().__init__(name, "Point-cloud PCA normals", k=k, r_max=r_max)
        self.key = key

    def process_item(self, frame):
        result = dict(frame)
        result[self.key] = pca_from_distance(frame["distance"], frame["sensor"],
                                             self.solver_params["k"], self.solver_params["r_max"])
        return result
