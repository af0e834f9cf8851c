"""
单像素正向模型与最小二乘问题

PixelModel按给定法线、材质参数、漫反射时间常数与时间偏移渲染一个像素在拟合窗口内的
Mueller电影（已乘以增益）。temporal_split按时间形状把测量分成瞬时的镜面脉冲与
带指数拖尾的漫反射脉冲，为拟合提供τ_d与Δt的初值。

PixelFit把PixelModel包装成带边界的最小二乘问题，雅可比矩阵用复步法计算：所有扰动在一次批量正向调用中求值。
"""

import dataclasses
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from pollidar.operators.simulate.render import pulse_weights
from pollidar.optics.materials import Material
from pollidar.optics.pbrdf import SurfaceInteraction, ray_basis, reflectance
from pollidar.scene.sensor import LIGHT_SPEED

COMPLEX_STEP = 1e-20


class PixelModel:
    """
    单像素渲染器

    Args:
        omega: (3,) 视线方向
        distance (float): 距离估计d̂（米），决定1/d²与到达时刻
        times: (L,) 窗口bin的采样时刻（ns）
        sigma (float): 脉冲标准差（ns）
        gain (float): adc_gain·laser_power
        t0 (float): 时间原点偏移（ns）
        specular_albedo (float): 固定的镜面反射率
        diff_tau (float): fields中没有diff_tau时使用的漫反射时间常数（ns）
    """

    def __init__(self, omega, distance: float, times, sigma: float, gain: float, t0: float = 0.0,
                 specular_albedo: float = 1.0, diff_tau: float = 0.05):
        self.omega = np.asarray(omega, dtype=float)
        self.e1, self.e2 = ray_basis(self.omega)
        self.distance = float(distance)
        self.times = np.asarray(times, dtype=float)
        self.sigma = float(sigma)
        self.gain = float(gain)
        self.arrival = 2.0 * self.distance / LIGHT_SPEED + t0
        self.specular_albedo = specular_albedo
        self.diff_tau = diff_tau

    def render(self, normal, fields: Dict[str, np.ndarray], dt=0.0) -> Tuple[np.ndarray, np.ndarray]:
        """
        Args:
            normal: (..., 3) 法线，可为复数
            fields: eta、roughness、spec_depol、diff_depol、diffuse_albedo，可选diff_tau，形状(...)
            dt: (...) 相对d̂的到达时间修正（ns）

        Returns:
            tuple: (镜面部分, 漫反射部分)，各为(..., L, 16)
        """
        normal = np.asarray(normal)
        batch = normal.shape[:-1]
        omega = np.broadcast_to(self.omega, batch + (3,))
        si = SurfaceInteraction(normal, omega, np.full(batch, self.distance))
        mat = Material(eta=fields["eta"], roughness=fields["roughness"], spec_depol=fields["spec_depol"],
                       diff_depol=fields["diff_depol"], diff_tau=self.diff_tau,
                       diffuse_albedo=fields["diffuse_albedo"], specular_albedo=self.specular_albedo)
        tm = reflectance(si, mat)
        t_rel = self.times - self.arrival - np.asarray(dt)[..., None]
        tau = np.asarray(fields.get("diff_tau", self.diff_tau))
        g, e = pulse_weights(t_rel, self.sigma, tau[..., None])
        spec = self.gain * g[..., None] * tm.specular_part.reshape(batch + (1, 16))
        diff = self.gain * e[..., None] * tm.diffuse_part.reshape(batch + (1, 16))
        return spec, diff


class PixelFit:
    """
    带边界的单像素最小二乘问题

    残差由两项拼接：λ_s·(H_meas − H_s − H_d) 与 λ_d·(H_meas − H_d)，
    均除以窗口内的max|H_meas|。λ_d = 0时只保留第一项。
    子类实现names、bounds与unpack；free指定参与优化的参数下标，其余取base中的值。

    Args:
        model: 单像素渲染器
        h_meas: (L, 16) 测得的Mueller电影
        valid: (L,) 有效bin
        weights (tuple): (λ_d, λ_s)
        base: 完整参数向量的初值
        free: 参与优化的参数下标，默认全部
    """

    names: Tuple[str, ...] = ()

    def __init__(self, model: PixelModel, h_meas, valid=None, weights=(0.0, 1.0),
                 base=None, free: Optional[Sequence[int]] = None):
        self.model = model
        self.h_meas = np.asarray(h_meas, dtype=float)
        mask = np.ones(self.h_meas.shape[0], dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
        self.mask = mask[:, None].astype(float)
        peak = np.max(np.abs(self.h_meas)) if self.h_meas.size else 0.0
        self.scale = float(peak) if peak > 0 else 1.0
        self.lambda_d, self.lambda_s = (float(w) for w in weights)
        self.base = np.asarray(base if base is not None else self.default(), dtype=float)
        self.free = np.arange(len(self.names)) if free is None else np.asarray(free, dtype=int)

    def default(self) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def unpack(self, x):
        """完整参数 (..., P) → (normal, fields, dt)"""
        raise NotImplementedError

    def expand(self, x_free) -> np.ndarray:
        x_free = np.asarray(x_free)
        full = np.broadcast_to(self.base, x_free.shape[:-1] + self.base.shape).astype(x_free.dtype)
        full[..., self.free] = x_free
        return full

    def free_bounds(self):
        lower, upper = self.bounds()
        return lower[self.free], upper[self.free]

    def render(self, x_full):
        normal, fields, dt = self.unpack(x_full)
        return self.model.render(normal, fields, dt)

    def residuals(self, x_free) -> np.ndarray:
        """(..., M) 归一化残差"""
        spec, diff = self.render(self.expand(x_free))
        total = self.lambda_s * (self.h_meas - spec - diff) * self.mask
        batch = total.shape[:-2]
        parts = [total.reshape(batch + (-1,))]
        if self.lambda_d > 0:
            parts.append((self.lambda_d * (self.h_meas - diff) * self.mask).reshape(batch + (-1,)))
        return np.concatenate(parts, axis=-1) / self.scale

    def jacobian(self, x_free) -> np.ndarray:
        """复步法雅可比矩阵，(M, P_free)"""
        x_free = np.asarray(x_free, dtype=float)
        stepped = x_free[None, :] + 1j * COMPLEX_STEP * np.eye(x_free.size)
        return (np.imag(self.residuals(stepped)) / COMPLEX_STEP).T

    def objective(self, x_free) -> np.ndarray:
        """L1目标 Σ|r|"""
        return np.sum(np.abs(self.residuals(x_free)), axis=-1)

    def solve(self, x0, max_nfev: int = 200, f_scale: float = 0.01, loss: str = "soft_l1"):
        """
        用trf求解，初值截断到边界内

        Returns:
            scipy.optimize.OptimizeResult: 结果，x为自由参数
        """
        lower, upper = self.free_bounds()
        x0 = np.clip(np.asarray(x0, dtype=float), lower, upper)
        return least_squares(self.residuals, x0, jac=self.jacobian, bounds=(lower, upper), method="trf",
                             loss=loss, f_scale=f_scale, max_nfev=max_nfev, x_scale="jac")


def bound_pairs(bounds_config: Dict[str, Sequence[float]], names: Sequence[str]):
    """从配置的bounds节取出各参数的上下界"""
    lower = np.array([bounds_config[name][0] for name in names], dtype=float)
    upper = np.array([bounds_config[name][1] for name in names], dtype=float)
    return lower, upper


@dataclasses.dataclass
class TemporalSplit:
    """
    单像素的镜面/漫反射时间分离

    Attributes:
        tau: 漫反射时间常数τ_d（ns）
        dt: 相对d̂的到达时间修正（ns）
        specular: (16,) 瞬时脉冲g的Mueller幅值
        diffuse: (16,) 指数拖尾脉冲g ⊛ k_τd的Mueller幅值
        residual: 两基函数拟合的残差平方和
    """

    tau: float
    dt: float
    specular: np.ndarray
    diffuse: np.ndarray
    residual: float


def temporal_split(h_meas, valid, times, arrival: float, sigma: float,
                   taus: Sequence[float], shifts: Sequence[float]) -> TemporalSplit:
    """
    按时间形状分离镜面与漫反射分量

    镜面分量是瞬时的高斯脉冲g，漫反射分量是带指数拖尾的g ⊛ k_τd。
    对(τ_d, Δt)网格上的每一组，16个通道各自对[g, g ⊛ k_τd]两个基函数做线性最小二乘，
    取残差最小的一组。

    Args:
        h_meas: (L, 16) 测得的Mueller电影
        valid: (L,) 有效bin，None表示全部有效
        times: (L,) 采样时刻（ns）
        arrival (float): 由d̂给出的到达时刻（ns）
        sigma (float): 脉冲标准差（ns）
        taus: τ_d候选值（ns）
        shifts: Δt候选值（ns）

    Returns:
        TemporalSplit: 残差最小的分离结果
    """
    h_meas = np.asarray(h_meas, dtype=float)
    mask = np.ones(h_meas.shape[0]) if valid is None else np.asarray(valid, dtype=float)
    h = h_meas * mask[:, None]
    tau_grid, dt_grid = (g.ravel() for g in np.meshgrid(np.asarray(taus, dtype=float),
                                                        np.asarray(shifts, dtype=float), indexing="ij"))
    t_rel = np.asarray(times, dtype=float)[None, :] - arrival - dt_grid[:, None]
    g, e = pulse_weights(t_rel, sigma, tau_grid[:, None])
    basis = np.stack([g, e], axis=-1) * mask[None, :, None]
    coef = np.linalg.pinv(basis) @ h
    residual = np.sum((basis @ coef - h) ** 2, axis=(-2, -1))
    best = int(np.argmin(residual))
    return TemporalSplit(float(tau_grid[best]), float(dt_grid[best]), coef[best, 0], coef[best, 1],
                         float(residual[best]))


def split_grid(tau_bounds: Sequence[float], dt_limit: float, tau_steps: int = 25, dt_steps: int = 81):
    """temporal_split使用的对数τ_d网格与线性Δt网格"""
    taus = np.geomspace(float(tau_bounds[0]), float(tau_bounds[1]), tau_steps)
    shifts = np.linspace(-dt_limit, dt_limit, dt_steps)
    return taus, shifts
