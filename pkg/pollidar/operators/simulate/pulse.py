"""
激光脉冲的时间形状

镜面回波是单位面积高斯脉冲g；漫反射回波是g与指数核的解析卷积，
即指数修正高斯（EMG）。两者都支持复数时间参数，用于复步求导。
"""

import numpy as np
from scipy.special import erfc, erfcx

_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


def gaussian_pulse(t, sigma):
    """
    单位面积高斯脉冲

    Args:
        t: 相对到达时刻的时间（ns）
        sigma: 标准差（ns）

    Returns:
        脉冲值（1/ns）
    """
    t = np.asarray(t)
    return np.exp(-t * t / (2.0 * sigma * sigma)) / (sigma * _SQRT2PI)


def emg_pulse(t, sigma, tau):
    """
    高斯脉冲与 exp(−τ/τ_d)/τ_d 的卷积（单位面积）

    z ≥ 0时用erfcx形式避免exp溢出，z < 0时直接用erfc形式。

    Args:
        t: 相对到达时刻的时间（ns）
        sigma: 高斯标准差（ns）
        tau: 指数时间常数（ns）

    Returns:
        脉冲值（1/ns）
    """
    t, sigma, tau = np.broadcast_arrays(np.asarray(t), np.asarray(sigma), np.asarray(tau))
    z = (sigma / tau - t / sigma) / _SQRT2
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        scaled = np.exp(-t * t / (2.0 * sigma * sigma)) * erfcx(z)
        direct = np.exp(sigma * sigma / (2.0 * tau * tau) - t / tau) * erfc(z)
    return np.where(np.real(z) >= 0.0, scaled, direct) / (2.0 * tau)
