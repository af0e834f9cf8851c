"""
基于漫反射偏振度的形状恢复（SfP）

用峰值bin的Mueller矩阵作用于照明Stokes向量得到出射光，按漫反射偏振度曲线
ρ(θ, η)反解天顶角，用线偏振角确定方位角。
"""

from typing import Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.operator import ReconstructionOperator
from pollidar.operators.preprocess.ellipsometry import MuellerMovie
from pollidar.operators.reconstruct.geometry import normal_from_angles, resolve_branch
from pollidar.operators.reconstruct.maps import NormalEstimate
from pollidar.optics.pbrdf import ray_basis
from pollidar.optics.polmath import aop_map, diffuse_dop_curve, dop_map
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

ILLUMINATIONS = ("laser", "unpolarized")
MAX_ZENITH = np.deg2rad(89.0)


def invert_dop(rho, eta, iterations: int = 60):
    """
    在[0, 89°]上二分求解 ρ(θ, η) = rho

    ρ在该区间内单调递增。超出ρ(89°)的值截断到89°。

    Returns:
        tuple: (zenith, clamped)
    """
    rho = np.asarray(rho, dtype=float)
    ceiling = diffuse_dop_curve(MAX_ZENITH, eta)
    clamped = rho > ceiling
    target = np.clip(rho, 0.0, ceiling)
    lo = np.zeros_like(target)
    hi = np.full_like(target, MAX_ZENITH)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = diffuse_dop_curve(mid, eta) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi), clamped


def sfp_dop_normals(movie: MuellerMovie, eta_assumed: float = 1.5, view: Optional[np.ndarray] = None,
                    dop_floor: float = 0.01, illumination: str = "laser",
                    prior: Optional[np.ndarray] = None) -> NormalEstimate:
    """
    SfP法线估计

    Args:
        movie: Mueller电影
        eta_assumed (float): 假设的折射率
        view: (H, W, 3) 视线方向，默认取像素中心方向
        dop_floor (float): 低于该偏振度时返回−view并标记low_dop
        illumination (str): "laser"使用调度的激光Stokes，"unpolarized"使用(1,0,0,0)
        prior: (H, W, 3) 用于方位角分支选择的先验法线

    Returns:
        NormalEstimate: 法线，标记clamped与low_dop

    Raises:
        ConfigurationError: eta ≤ 1或未知的照明方式
    """
    if eta_assumed <= 1.0:
        raise ConfigurationError(f"eta_assumed must be > 1, got {eta_assumed}")
    if illumination not in ILLUMINATIONS:
        raise ConfigurationError(f"unknown illumination '{illumination}', expected one of {ILLUMINATIONS}")
    view = movie.sensor.view_directions() if view is None else view
    if illumination == "laser":
        s_in = np.asarray(movie.schedule.laser_stokes, dtype=float)
    else:
        s_in = np.array([1.0, 0.0, 0.0, 0.0])
    s_out = movie.peak() @ s_in
    rho = dop_map(s_out)
    azimuth = aop_map(s_out)
    zenith, clamped = invert_dop(rho, eta_assumed)

    e1, e2 = ray_basis(view)
    n = normal_from_angles(zenith, azimuth, view, e1, e2)
    n = resolve_branch(n, view, prior)
    confident = movie.confidence.astype(bool) & (s_out[..., 0] > 0)
    low_dop = confident & (rho < dop_floor)
    n = np.where(low_dop[..., None], -view, n)
    n = np.where(confident[..., None], n, 0.0)
    if np.any(clamped & confident):
        logger.info(f"{int(np.sum(clamped & confident))} pixels exceed the maximum diffuse DoP and are clamped to 89 deg")
    return NormalEstimate(n, confident.astype(np.uint8),
                          {"clamped": clamped & confident, "low_dop": low_dop})


class SfPOperator(ReconstructionOperator):
    """
    SfP法线操作符：movie → normals
    """

    requires = ("movie",)

    def __init__(self, eta_assumed: float = 1.5, dop_floor: float = 0.01, illumination: str = "laser", name=None):
        super().__init__(name, "Shape from diffuse polarization", eta_assumed=eta_assumed,
                         dop_floor=dop_floor, illumination=illumination)

    def process_item(self, frame):
        result = dict(frame)
        prior = frame.get("prior_normals")
        result["normals"] = sfp_dop_normals(frame["movie"], prior=None if prior is None else prior.normal,
                                            **self.solver_params)
        return result
