"""
射线坐标系下的法线参数化

法线由相对−ω的天顶角θ与在(e1, e2)横向基中的方位角α表示：

    n = cosθ·(−ω) + sinθ·(cosα·e1 + sinα·e2)

单站Mueller响应只依赖2ψ，α与α+π给出完全相同的测量，
因此需要外部先验（点云法线）或n·(−ẑ)来选择分支。
"""

from typing import Optional

import numpy as np


def normal_from_angles(zenith, azimuth, omega, e1, e2):
    """
    Args:
        zenith, azimuth: (...) 弧度，可为复数
        omega, e1, e2: (..., 3)

    Returns:
        (..., 3) 单位法线
    """
    sin_z = np.sin(zenith)[..., None]
    return (np.cos(zenith)[..., None] * (-omega)
            + sin_z * (np.cos(azimuth)[..., None] * e1 + np.sin(azimuth)[..., None] * e2))


def angles_from_normal(n, omega, e1, e2):
    """normal_from_angles的逆，返回(zenith, azimuth)，方位角在[0, 2π)"""
    cos_z = np.clip(-np.sum(n * omega, axis=-1), -1.0, 1.0)
    azimuth = np.arctan2(np.sum(n * e2, axis=-1), np.sum(n * e1, axis=-1))
    return np.arccos(cos_z), np.mod(azimuth, 2.0 * np.pi)


def flip_azimuth(n, omega):
    """返回方位角加π后的另一分支"""
    along = -np.sum(n * omega, axis=-1)[..., None]
    return 2.0 * along * (-omega) - n


def resolve_branch(n, omega, prior: Optional[np.ndarray] = None):
    """
    在n与其方位角翻转分支之间选择

    有先验法线时选与先验夹角较小者，否则选n·(−ẑ)较大者。

    Args:
        n: (..., 3) 候选法线
        omega: (..., 3) 视线方向
        prior: (..., 3) 可选的先验法线，全零向量处回退到n·(−ẑ)

    Returns:
        numpy.ndarray: (..., 3)
    """
    other = flip_azimuth(n, omega)
    keep = -n[..., 2] >= -other[..., 2]
    if prior is not None:
        has_prior = np.sum(prior * prior, axis=-1) > 0
        score = np.sum(n * prior, axis=-1) - np.sum(other * prior, axis=-1)
        keep = np.where(has_prior & (score != 0), score > 0, keep)
    return np.where(keep[..., None], n, other)
