"""
Stokes–Mueller代数模块

提供理想光学元件的Mueller矩阵、Fresnel界面矩阵、坐标旋转以及DoP/AoP。
所有矩阵函数都对前导维度广播，返回形状为(..., 4, 4)的数组。

约定：
    - 旋转矩阵在(s1, s2)上的2×2块为[cos2θ, sin2θ; −sin2θ, cos2θ]
    - 元件矩阵 M(θ) = R(−θ)·M0·R(θ)
    - 波片在θ=0时快轴水平，QWP0把(0,0,1,0)映射为(0,0,0,−1)
    - 反射的p分量采用正入射时r_p = r_s的符号约定，正入射反射矩阵因此是标量矩阵

内部的Fresnel实现以cosθ为自变量并只使用乘法与sqrt，可以直接传入复数做复步求导。
"""

from dataclasses import dataclass

import numpy as np

from pollidar.core.errors import DomainError, UndefinedInputError

#: 物理有效性检查的绝对松弛量
PHYSICAL_SLACK = 1e-9


def stokes(s0, s1, s2, s3) -> np.ndarray:
    """
    由四个分量构造Stokes向量，分量可以是同形状数组

    Returns:
        numpy.ndarray: 形状为(..., 4)的Stokes向量
    """
    return np.stack(np.broadcast_arrays(s0, s1, s2, s3), axis=-1).astype(float)


def is_physical(s, slack: float = PHYSICAL_SLACK) -> np.ndarray:
    """
    检查Stokes向量是否物理可实现：s0 ≥ 0 且 s0² ≥ s1² + s2² + s3²

    Args:
        s: 形状为(..., 4)的Stokes向量
        slack (float): 舍入误差的绝对松弛量

    Returns:
        numpy.ndarray: 布尔数组
    """
    s = np.asarray(s, dtype=float)
    pol2 = np.sum(s[..., 1:] ** 2, axis=-1)
    return (s[..., 0] >= -slack) & (s[..., 0] ** 2 + slack >= pol2)


@dataclass(frozen=True)
class OpticAngles:
    """
    一个偏振态对应的四个元件旋转角（弧度），均归一化到[0, π)

    Attributes:
        theta1: 发射端HWP
        theta2: 发射端QWP
        theta3: 接收端QWP
        theta4: 接收端LP
    """

    theta1: float = 0.0
    theta2: float = 0.0
    theta3: float = 0.0
    theta4: float = 0.0

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3", "theta4"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise DomainError(f"optic angle {name} must be finite, got {value}")
            normalized = value % np.pi
            # 浮点取模可能恰好落在π上
            if normalized >= np.pi:
                normalized = 0.0
            object.__setattr__(self, name, normalized)

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3, self.theta4])

    @classmethod
    def from_degrees(cls, t1, t2, t3, t4) -> "OpticAngles":
        return cls(*np.deg2rad([t1, t2, t3, t4]))


def _zeros(shape, *values) -> np.ndarray:
    dtype = np.result_type(float, *[np.asarray(v) for v in values])
    return np.zeros(tuple(shape) + (4, 4), dtype=dtype)


def rotator_cs(cos2, sin2) -> np.ndarray:
    """
    由cos2θ、sin2θ直接构造旋转矩阵

    在入射面角度只以(cos2ψ, sin2ψ)形式可得时使用，避免arctan2。

    Args:
        cos2: cos2θ，可广播数组
        sin2: sin2θ，可广播数组

    Returns:
        numpy.ndarray: 形状为(..., 4, 4)的Mueller矩阵
    """
    cos2, sin2 = np.broadcast_arrays(np.asarray(cos2), np.asarray(sin2))
    m = _zeros(cos2.shape, cos2, sin2)
    m[..., 0, 0] = 1.0
    m[..., 3, 3] = 1.0
    m[..., 1, 1] = cos2
    m[..., 1, 2] = sin2
    m[..., 2, 1] = -sin2
    m[..., 2, 2] = cos2
    return m


def rotator(theta) -> np.ndarray:
    """
    坐标系旋转Mueller矩阵

    Args:
        theta: 旋转角（弧度），可广播数组

    Returns:
        numpy.ndarray: 形状为(..., 4, 4)的Mueller矩阵
    """
    theta = np.asarray(theta)
    return rotator_cs(np.cos(2 * theta), np.sin(2 * theta))


def _rotate_element(m0: np.ndarray, theta) -> np.ndarray:
    return rotator(-np.asarray(theta)) @ m0 @ rotator(theta)


def linear_polarizer(theta) -> np.ndarray:
    """
    透光轴在theta处的理想线偏振片

    Args:
        theta: 透光轴角度（弧度）

    Returns:
        numpy.ndarray: Mueller矩阵
    """
    lp0 = np.zeros((4, 4))
    lp0[:2, :2] = 0.5
    return _rotate_element(lp0, theta)


def waveplate(theta, retardance) -> np.ndarray:
    """
    快轴在theta处、相位延迟为retardance的理想线性延迟器

    Args:
        theta: 快轴角度（弧度）
        retardance: 相位延迟（弧度），π为半波片，π/2为四分之一波片

    Returns:
        numpy.ndarray: Mueller矩阵
    """
    retardance = np.asarray(retardance)
    c, s = np.cos(retardance), np.sin(retardance)
    m0 = _zeros(retardance.shape, c)
    m0[..., 0, 0] = 1.0
    m0[..., 1, 1] = 1.0
    m0[..., 2, 2] = c
    m0[..., 2, 3] = s
    m0[..., 3, 2] = -s
    m0[..., 3, 3] = c
    return _rotate_element(m0, theta)


def half_waveplate(theta) -> np.ndarray:
    return waveplate(theta, np.pi)


def quarter_waveplate(theta) -> np.ndarray:
    return waveplate(theta, np.pi / 2)


def depolarizer(amplitude) -> np.ndarray:
    """部分退偏器 diag(1, a, a, a)"""
    amplitude = np.asarray(amplitude)
    m = _zeros(amplitude.shape, amplitude)
    m[..., 0, 0] = 1.0
    for i in (1, 2, 3):
        m[..., i, i] = amplitude
    return m


def interface_matrix(a, b, c, s=0.0) -> np.ndarray:
    """
    界面相互作用的块对角Mueller矩阵 [[A,B,0,0],[B,A,0,0],[0,0,C,S],[0,0,−S,C]]
    """
    a, b, c, s = np.broadcast_arrays(*[np.asarray(v) for v in (a, b, c, s)])
    m = _zeros(a.shape, a, b, c, s)
    m[..., 0, 0] = a
    m[..., 1, 1] = a
    m[..., 0, 1] = b
    m[..., 1, 0] = b
    m[..., 2, 2] = c
    m[..., 3, 3] = c
    m[..., 2, 3] = s
    m[..., 3, 2] = -s
    return m


def fresnel_amplitudes(cos_i, n_rel):
    """
    Fresnel振幅系数

    Args:
        cos_i: 入射角余弦
        n_rel: 相对折射率 n_t / n_i

    Returns:
        tuple: (r_s, r_p, t_s, t_p, cos_t)，r_p采用正入射时等于r_s的约定
    """
    cos_i = np.asarray(cos_i)
    sin2_t = (1.0 - cos_i * cos_i) / (n_rel * n_rel)
    cos_t = np.sqrt(1.0 - sin2_t)
    denom_s = cos_i + n_rel * cos_t
    denom_p = cos_t + n_rel * cos_i
    r_s = (cos_i - n_rel * cos_t) / denom_s
    r_p = (cos_t - n_rel * cos_i) / denom_p
    t_s = 2.0 * cos_i / denom_s
    t_p = 2.0 * cos_i / denom_p
    return r_s, r_p, t_s, t_p, cos_t


def fresnel_reflection_cos(cos_i, eta) -> np.ndarray:
    """以入射角余弦为自变量的Fresnel反射矩阵，不做定义域检查"""
    r_s, r_p, _, _, _ = fresnel_amplitudes(cos_i, eta)
    rs2 = r_s * r_s
    rp2 = r_p * r_p
    return interface_matrix(0.5 * (rs2 + rp2), 0.5 * (rs2 - rp2), r_s * r_p)


def fresnel_transmission_cos(cos_i, n_rel) -> np.ndarray:
    """以入射角余弦为自变量的Fresnel透射矩阵，n_rel为相对折射率，不做定义域检查"""
    _, _, t_s, t_p, cos_t = fresnel_amplitudes(cos_i, n_rel)
    throughput = n_rel * cos_t / cos_i
    ts2 = throughput * t_s * t_s
    tp2 = throughput * t_p * t_p
    return interface_matrix(0.5 * (ts2 + tp2), 0.5 * (ts2 - tp2), throughput * t_s * t_p)


def _check_eta(eta) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if np.any(~np.isfinite(eta)) or np.any(eta <= 1.0):
        raise DomainError(f"refractive index must be a finite dielectric value > 1, got {eta}")
    return eta


def _check_angle(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(theta)) or np.any(theta < 0.0) or np.any(theta >= np.pi / 2):
        raise DomainError(f"incidence angle must lie in [0, pi/2), got {theta}")
    return theta


def fresnel_reflection(theta_d, eta) -> np.ndarray:
    """
    介质表面的Fresnel反射Mueller矩阵

    Args:
        theta_d: 入射角（弧度），[0, π/2)
        eta: 折射率，> 1

    Returns:
        numpy.ndarray: Mueller矩阵

    Raises:
        DomainError: eta ≤ 1或角度越界
    """
    eta = _check_eta(eta)
    theta_d = _check_angle(theta_d)
    return fresnel_reflection_cos(np.cos(theta_d), eta)


def fresnel_transmission(theta, eta, entering: bool = True) -> np.ndarray:
    """
    Fresnel透射Mueller矩阵，包含立体角与折射率的通量因子

    Args:
        theta: 入射角（弧度）。entering=False时为介质内部的角度
        eta: 介质折射率，> 1
        entering (bool): True表示从空气进入介质，False表示从介质射出

    Returns:
        numpy.ndarray: Mueller矩阵

    Raises:
        DomainError: 射出时超过临界角（全内反射）或eta ≤ 1
    """
    eta = _check_eta(eta)
    theta = _check_angle(theta)
    if entering:
        return fresnel_transmission_cos(np.cos(theta), eta)
    if np.any(eta * np.sin(theta) >= 1.0):
        raise DomainError(f"exiting ray at {theta} rad exceeds the critical angle for eta={eta}")
    return fresnel_transmission_cos(np.cos(theta), 1.0 / eta)


def diffuse_dop_curve(theta, eta) -> np.ndarray:
    """
    漫反射偏振度的闭式曲线 ρ(θ, η)

    Args:
        theta: 出射天顶角（弧度）
        eta: 折射率

    Returns:
        numpy.ndarray: 偏振度
    """
    theta = np.asarray(theta)
    sin2 = np.sin(theta) ** 2
    num = (eta - 1.0 / eta) ** 2 * sin2
    den = (2.0 + 2.0 * eta ** 2 - (eta + 1.0 / eta) ** 2 * sin2
           + 4.0 * np.cos(theta) * np.sqrt(eta ** 2 - sin2))
    return num / den


def dop(s) -> np.ndarray:
    """
    偏振度 √(s1²+s2²+s3²)/s0

    Args:
        s: 形状为(..., 4)的Stokes向量

    Returns:
        numpy.ndarray: 偏振度

    Raises:
        UndefinedInputError: 任一s0 ≤ 0
    """
    s = np.asarray(s, dtype=float)
    if np.any(s[..., 0] <= 0.0):
        raise UndefinedInputError("degree of polarization is undefined for s0 <= 0")
    return np.sqrt(np.sum(s[..., 1:] ** 2, axis=-1)) / s[..., 0]


def aop(s) -> np.ndarray:
    """
    线偏振角 ½·atan2(s2, s1)，归一化到[0, π)

    Raises:
        UndefinedInputError: s1² + s2² = 0（非偏振或圆偏振光）
    """
    s = np.asarray(s, dtype=float)
    if np.any(s[..., 1] ** 2 + s[..., 2] ** 2 <= 0.0):
        raise UndefinedInputError("angle of polarization is undefined without linear polarization")
    return np.mod(0.5 * np.arctan2(s[..., 2], s[..., 1]), np.pi)


def dop_map(s) -> np.ndarray:
    """逐像素的偏振度，s0 ≤ 0处为0，不抛出异常"""
    s = np.asarray(s, dtype=float)
    s0 = s[..., 0]
    pol = np.sqrt(np.sum(s[..., 1:] ** 2, axis=-1))
    out = np.zeros_like(s0)
    np.divide(pol, s0, out=out, where=s0 > 0)
    return out


def aop_map(s) -> np.ndarray:
    """逐像素的线偏振角，未定义处为0，不抛出异常"""
    s = np.asarray(s, dtype=float)
    return np.mod(0.5 * np.arctan2(s[..., 2], s[..., 1]), np.pi)
