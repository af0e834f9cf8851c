"""
时间-偏振反射模型（单站近似）

H(τ) = (cosφ / d²)·[M_s·δ(τ) + M_d·k_τd(τ)]，其中

    M_s = D·G / (4cos²θ) · specular_albedo · diag(1,a_s,a_s,a_s) · F_R(θ)
    M_d = F_T^o · diffuse_albedo·diag(1,a_d,a_d,a_d) · F_T^i
    k_τd(τ) = exp(−τ/τ_d)/τ_d · step(τ)

两部分都在入射面坐标系中构造，再用同一个旋转ψ共轭回射线的Stokes坐标系
（e1 = normalize(ŷ × ω)，e2 = ω × e1）。单站时半角向量h = −ω，θ_h = θ_i = θ_o。

所有函数可以接收逐交点数组，也可以接收复数参数用于复步求导。
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from pollidar.core.errors import DomainError
from pollidar.optics import polmath
from pollidar.optics.materials import Material

_TINY = 1e-24


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _normalize(v):
    return v / np.sqrt(_dot(v, v))[..., None]


@dataclass
class SurfaceInteraction:
    """
    单站表面相互作用

    Attributes:
        n: 单位法向量，(..., 3)
        omega: 单位观察/照明方向（从传感器指向表面），(..., 3)
        d: 单程距离（米），(...)
    """

    n: np.ndarray
    omega: np.ndarray
    d: np.ndarray

    @property
    def cos_theta(self) -> np.ndarray:
        """n·(−ω)，可能为负"""
        return -_dot(self.n, self.omega)

    @property
    def cos_phi(self) -> np.ndarray:
        """余弦着色项 max(n·(−ω), 0)"""
        cos = self.cos_theta
        return np.where(np.real(cos) > 0.0, cos, 0.0)

    def validate(self, atol: float = 1e-9) -> "SurfaceInteraction":
        """
        检查单位长度与距离

        Raises:
            DomainError: 非单位向量或d ≤ 0
        """
        for name in ("n", "omega"):
            norm = np.linalg.norm(np.real(getattr(self, name)), axis=-1)
            if np.any(np.abs(norm - 1.0) > atol):
                raise DomainError(f"{name} must be unit length to {atol}")
        if np.any(np.real(self.d) <= 0.0):
            raise DomainError("range d must be positive")
        return self

    @classmethod
    def from_geometry(cls, n, omega, d) -> "SurfaceInteraction":
        """构造并检查相互作用"""
        return cls(np.asarray(n, dtype=float), np.asarray(omega, dtype=float),
                   np.asarray(d, dtype=float)).validate()


@dataclass
class TemporalMueller:
    """
    时间参数化的Mueller响应

    Attributes:
        specular_part: τ=0处的瞬时镜面项，(..., 4, 4)
        diffuse_part: 漫反射波瓣的幅度，(..., 4, 4)
        diffuse_kernel_tau: 漫反射时间常数（ns），(...)
    """

    specular_part: np.ndarray
    diffuse_part: np.ndarray
    diffuse_kernel_tau: np.ndarray

    @property
    def total(self) -> np.ndarray:
        """时间积分后的总响应"""
        return self.specular_part + self.diffuse_part


def ray_basis(omega) -> Tuple[np.ndarray, np.ndarray]:
    """
    射线的横向Stokes基

    Args:
        omega: 射线方向，(..., 3)

    Returns:
        tuple: (e1, e2)，光轴上e1 = x̂（水平），e2 = ŷ（向下）
    """
    omega = np.asarray(omega)
    y_hat = np.zeros(omega.shape[:-1] + (3,), dtype=float)
    y_hat[..., 1] = 1.0
    e1 = np.cross(y_hat, omega)
    norm2 = np.real(_dot(e1, e1))
    # 只有沿±ŷ的射线会退化，视场内不会出现
    fallback = norm2 < _TINY
    if np.any(fallback):
        e1 = np.where(fallback[..., None], np.array([1.0, 0.0, 0.0]), e1)
    e1 = _normalize(e1)
    e2 = np.cross(omega, e1)
    return e1, e2


def incidence_frame(n, omega, e1=None, e2=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    入射面s方向相对射线基的方位角ψ，以(cos2ψ, sin2ψ)返回

    正入射时入射面不确定，取ψ = 0。

    Returns:
        tuple: (cos2ψ, sin2ψ)
    """
    if e1 is None or e2 is None:
        e1, e2 = ray_basis(np.real(omega))
    s_hat = np.cross(omega, n)
    u1 = _dot(s_hat, e1)
    u2 = _dot(s_hat, e2)
    norm2 = u1 * u1 + u2 * u2
    head_on = np.real(norm2) < _TINY
    safe = np.where(head_on, 1.0, norm2)
    cos2 = np.where(head_on, 1.0, (u1 * u1 - u2 * u2) / safe)
    sin2 = np.where(head_on, 0.0, 2.0 * u1 * u2 / safe)
    return cos2, sin2


def _to_ray_frame(m_local, cos2, sin2):
    return polmath.rotator_cs(cos2, -sin2) @ m_local @ polmath.rotator_cs(cos2, sin2)


def ggx_distribution(cos_h, alpha):
    """
    GGX法线分布 D(θ_h; α)

    Args:
        cos_h: 半角向量与法线夹角的余弦
        alpha: 粗糙度

    Returns:
        分布值
    """
    cos2 = cos_h * cos_h
    tan2 = (1.0 - cos2) / cos2
    a2 = alpha * alpha
    return a2 / (np.pi * cos2 * cos2 * (a2 + tan2) ** 2)


def smith_lambda(cos_v, alpha):
    cos2 = cos_v * cos_v
    tan2 = (1.0 - cos2) / cos2
    return 0.5 * (-1.0 + np.sqrt(1.0 + alpha * alpha * tan2))


def smith_g(cos_i, cos_o, alpha):
    """高度相关的Smith遮蔽-阴影函数"""
    return 1.0 / (1.0 + smith_lambda(cos_i, alpha) + smith_lambda(cos_o, alpha))


def _front(si: SurfaceInteraction):
    cos = si.cos_theta
    front = np.real(cos) > 0.0
    return front, np.where(front, cos, 1.0)


def specular_mueller(si: SurfaceInteraction, mat: Material, frame=None) -> np.ndarray:
    """
    单站镜面反射Mueller矩阵

    Args:
        si: 表面相互作用
        mat: 材质（标量或逐交点数组）
        frame (tuple, optional): 预先计算的(cos2ψ, sin2ψ)

    Returns:
        numpy.ndarray: (..., 4, 4)，背向表面为零矩阵
    """
    front, cos = _front(si)
    alpha = mat.roughness
    scale = ggx_distribution(cos, alpha) * smith_g(cos, cos, alpha) / (4.0 * cos * cos)
    scale = scale * mat.specular_albedo
    m_local = polmath.depolarizer(mat.spec_depol) @ polmath.fresnel_reflection_cos(cos, mat.eta)
    m_local = np.asarray(scale)[..., None, None] * m_local
    cos2, sin2 = frame if frame is not None else incidence_frame(si.n, si.omega)
    m = _to_ray_frame(m_local, cos2, sin2)
    return np.where(front[..., None, None], m, 0.0)


def diffuse_mueller(si: SurfaceInteraction, mat: Material, frame=None) -> np.ndarray:
    """
    单站漫反射Mueller矩阵（时间积分后的幅度）

    Args:
        si: 表面相互作用
        mat: 材质
        frame (tuple, optional): 预先计算的(cos2ψ, sin2ψ)

    Returns:
        numpy.ndarray: (..., 4, 4)，背向表面为零矩阵
    """
    front, cos = _front(si)
    eta = mat.eta
    transmit_in = polmath.fresnel_transmission_cos(cos, eta)
    _, _, _, _, cos_inside = polmath.fresnel_amplitudes(cos, eta)
    transmit_out = polmath.fresnel_transmission_cos(cos_inside, 1.0 / eta)
    body = np.asarray(mat.diffuse_albedo)[..., None, None] * polmath.depolarizer(mat.diff_depol)
    m_local = transmit_out @ body @ transmit_in
    cos2, sin2 = frame if frame is not None else incidence_frame(si.n, si.omega)
    m = _to_ray_frame(m_local, cos2, sin2)
    return np.where(front[..., None, None], m, 0.0)


def reflectance(si: SurfaceInteraction, mat: Material) -> TemporalMueller:
    """
    完整的时间-偏振响应 H = (cosφ/d²)·(M_s δ(τ) + M_d k_τd(τ))

    Args:
        si: 表面相互作用
        mat: 材质

    Returns:
        TemporalMueller: 镜面与漫反射两部分

    Raises:
        DomainError: d ≤ 0
    """
    d = np.asarray(si.d)
    if np.any(np.real(d) <= 0.0):
        raise DomainError("range d must be positive")
    frame = incidence_frame(si.n, si.omega)
    shading = (si.cos_phi / (d * d))[..., None, None]
    return TemporalMueller(
        specular_part=shading * specular_mueller(si, mat, frame),
        diffuse_part=shading * diffuse_mueller(si, mat, frame),
        diffuse_kernel_tau=np.broadcast_to(np.asarray(mat.diff_tau, dtype=float), d.shape).copy(),
    )


def diffuse_temporal_kernel(tau_d: float, dt: float, span: float = 20.0) -> np.ndarray:
    """
    按时间步积分的漫反射指数核

    第k个元素是 exp(−τ/τ_d)/τ_d 在[kΔt, (k+1)Δt)上的积分，覆盖[0, span·τ_d]。

    Args:
        tau_d (float): 时间常数（ns）
        dt (float): 时间步（ns）
        span (float): 覆盖的时间常数个数

    Returns:
        numpy.ndarray: 核权重
    """
    if tau_d <= 0 or dt <= 0:
        raise DomainError("tau_d and dt must be positive")
    n = max(1, int(np.ceil(span * tau_d / dt)))
    edges = np.minimum(np.arange(n + 1) * dt, span * tau_d)
    return np.exp(-edges[:-1] / tau_d) - np.exp(-edges[1:] / tau_d)
