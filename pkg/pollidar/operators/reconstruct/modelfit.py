"""
基于模型拟合的法线与材质估计

对每个像素联合优化 [天顶角, 方位角, η, m, |D^s|, |D^d|, 漫反射率, Δt, τ_d]，
使渲染的Mueller电影与测得的一致。τ_d与Δt的初值来自镜面/漫反射的时间分离。
天顶角×方位角网格上的每个种子都做带边界的trf细化（soft_l1损失），取目标最小的解；
refine_top可以只细化批量筛选后目标最小的若干个种子。
"""

import dataclasses
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.executor import make_executor
from pollidar.core.operator import ReconstructionOperator
from pollidar.operators.preprocess.ellipsometry import MuellerMovie
from pollidar.operators.reconstruct.forward import PixelFit, PixelModel, split_grid, temporal_split
from pollidar.operators.reconstruct.geometry import (
    normal_from_angles, resolve_branch,
)
from pollidar.operators.reconstruct.maps import DistanceEstimate, ReconMaps
from pollidar.operators.reconstruct.pca import pca_from_distance
from pollidar.scene.sensor import LIGHT_SPEED
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

MODEL_PARAMS = (
    "zenith", "azimuth", "eta", "roughness", "spec_depol", "diff_depol", "diffuse_albedo", "dt", "diff_tau",
)
MATERIAL_MAPS = ("eta", "roughness", "spec_depol", "diff_depol", "diffuse_albedo")
OUTPUT_MAPS = MATERIAL_MAPS + ("diff_tau",)
MAX_ZENITH = np.deg2rad(89.9)
#: 到达时间修正的范围（ns）
DT_LIMIT = 2.0


@dataclasses.dataclass
class ModelFitSettings:
    """
    模型拟合参数，对应配置中的reconstruct.modelfit节与bounds节
    """

    max_iters: int = 200
    fit_bins: int = 11
    refine_top: Optional[int] = None
    azimuth_seeds: int = 8
    zenith_seeds_deg: Sequence[float] = (10.0, 40.0, 70.0)
    specular_albedo: float = 1.0
    diff_tau_ns: float = 0.05
    f_scale: float = 0.01
    eta_bounds: Tuple[float, float] = (1.1, 2.5)
    roughness_bounds: Tuple[float, float] = (0.01, 1.0)
    diff_tau_bounds: Tuple[float, float] = (0.005, 2.0)
    initial: Dict[str, float] = dataclasses.field(default_factory=lambda: {
        "eta": 1.5, "roughness": 0.3, "spec_depol": 0.5, "diff_depol": 0.5, "diffuse_albedo": 0.5,
    })

    def validate(self) -> "ModelFitSettings":
        if self.fit_bins < 1 or self.fit_bins % 2 == 0:
            raise ConfigurationError(f"fit_bins must be a positive odd integer, got {self.fit_bins}")
        if self.azimuth_seeds < 1 or not self.zenith_seeds_deg:
            raise ConfigurationError("modelfit needs at least one seed")
        if self.refine_top is not None and self.refine_top < 1:
            raise ConfigurationError(f"refine_top must be positive or None, got {self.refine_top}")
        lo, hi = self.diff_tau_bounds
        if not 0.0 < lo <= self.diff_tau_ns <= hi:
            raise ConfigurationError(f"diff_tau_ns {self.diff_tau_ns} must lie in diff_tau bounds [{lo}, {hi}]")
        if self.max_iters < 1:
            raise ConfigurationError(f"max_iters must be positive, got {self.max_iters}")
        return self

    @classmethod
    def from_config(cls, config) -> "ModelFitSettings":
        section: Mapping[str, Any] = config.section("reconstruct.modelfit")
        bounds = config.section("bounds")
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {k: v for k, v in section.items() if k in known}
        if "eta" in bounds:
            kwargs["eta_bounds"] = tuple(bounds["eta"])
        if "roughness" in bounds:
            kwargs["roughness_bounds"] = tuple(bounds["roughness"])
        if "diff_tau" in bounds:
            kwargs["diff_tau_bounds"] = tuple(bounds["diff_tau"])
        return cls(**kwargs).validate()


class NormalMaterialFit(PixelFit):
    """法线、材质、漫反射时间常数与时间偏移的联合拟合问题"""

    names = MODEL_PARAMS

    def __init__(self, model: PixelModel, h_meas, valid, settings: ModelFitSettings):
        self.settings = settings
        super().__init__(model, h_meas, valid, weights=(0.0, 1.0))

    def default(self):
        init = self.settings.initial
        return np.array([0.0, 0.0] + [init[name] for name in MATERIAL_MAPS] + [0.0, self.settings.diff_tau_ns])

    def bounds(self):
        s = self.settings
        lower = np.array([0.0, -np.inf, s.eta_bounds[0], s.roughness_bounds[0], 0.0, 0.0, 0.0, -DT_LIMIT,
                          s.diff_tau_bounds[0]])
        upper = np.array([MAX_ZENITH, np.inf, s.eta_bounds[1], s.roughness_bounds[1], 1.0, 1.0, 1.0, DT_LIMIT,
                          s.diff_tau_bounds[1]])
        return lower, upper

    def unpack(self, x):
        model = self.model
        omega = np.broadcast_to(model.omega, x.shape[:-1] + (3,))
        normal = normal_from_angles(x[..., 0], x[..., 1], omega, model.e1, model.e2)
        fields = {name: x[..., 2 + i] for i, name in enumerate(MATERIAL_MAPS)}
        fields["diff_tau"] = x[..., 8]
        return normal, fields, x[..., 7]

    def seeds(self) -> np.ndarray:
        """
        天顶角×方位角种子网格

        τ_d与Δt取自temporal_split，漫反射率按每个种子的线性最小二乘初始化。

        Returns:
            numpy.ndarray: (K, 9)
        """
        s = self.settings
        model = self.model
        split = temporal_split(self.h_meas, self.mask[:, 0], model.times, model.arrival, model.sigma,
                               *split_grid(s.diff_tau_bounds, DT_LIMIT))
        zenith = np.deg2rad(np.asarray(s.zenith_seeds_deg, dtype=float))
        azimuth = np.arange(s.azimuth_seeds) * 2.0 * np.pi / s.azimuth_seeds
        grid = np.stack(np.meshgrid(zenith, azimuth, indexing="ij"), axis=-1).reshape(-1, 2)
        x = np.tile(self.default(), (len(grid), 1))
        x[:, :2] = grid
        x[:, 7] = split.dt
        x[:, 8] = split.tau
        unit = x.copy()
        unit[:, 6] = 1.0
        spec, diff = self.render(unit)
        target = (self.h_meas - spec) * self.mask
        diff = diff * self.mask
        num = np.sum(diff * target, axis=(-2, -1))
        den = np.sum(diff * diff, axis=(-2, -1))
        x[:, 6] = np.clip(np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0), 0.0, 1.0)
        return x

    def fit(self):
        """
        Returns:
            tuple: (最优参数, L1目标, 是否收敛)
        """
        seeds = self.seeds()
        scores = self.objective(seeds)
        order = np.argsort(scores)[: self.settings.refine_top]
        best = (seeds[order[0]], float(scores[order[0]]), False)
        for index in order:
            result = self.solve(seeds[index], self.settings.max_iters, self.settings.f_scale)
            score = float(self.objective(result.x))
            if score < best[1] or (score == best[1] and result.status > 0):
                best = (result.x, score, result.status > 0)
        return best


def _fit_window(movie: MuellerMovie, fit_bins: int):
    if fit_bins > movie.window:
        raise ConfigurationError(f"fit_bins {fit_bins} exceeds the slice window {movie.window}")
    half = fit_bins // 2
    return slice(movie.center - half, movie.center + half + 1)


def modelfit_normals(movie: MuellerMovie, distance: DistanceEstimate,
                     settings: Optional[ModelFitSettings] = None, prior: Optional[np.ndarray] = None,
                     view: Optional[np.ndarray] = None, threads: Optional[int] = None) -> ReconMaps:
    """
    逐像素模型拟合

    Args:
        movie: Mueller电影
        distance: 飞行时间距离估计d̂
        settings: 拟合参数
        prior: (H, W, 3) 用于方位角分支选择的先验法线，默认用d̂的PCA法线
        view: (H, W, 3) 视线方向
        threads (int, optional): 按行并行的线程数

    Returns:
        ReconMaps: 法线、材质栅格、L1残差与修正后的距离 d̂ + Δt·c/2；
        未收敛的像素标记为nonconverged
    """
    settings = (settings or ModelFitSettings()).validate()
    sensor = movie.sensor
    window = _fit_window(movie, settings.fit_bins)
    view = sensor.view_directions() if view is None else view
    if prior is None:
        prior = pca_from_distance(distance, sensor).normal
    times = movie.window_times()[..., window]
    valid = movie.valid[..., window]
    h_window = movie.h_meas[:, :, window]
    active = movie.confidence.astype(bool) & distance.confidence.astype(bool)

    rows, cols = sensor.shape
    normal = np.zeros((rows, cols, 3))
    materials = {name: np.zeros((rows, cols)) for name in OUTPUT_MAPS}
    residual = np.zeros((rows, cols))
    refined = np.zeros((rows, cols))
    nonconverged = np.zeros((rows, cols), dtype=bool)
    gain = movie.gain

    def task(row):
        for col in np.nonzero(active[row])[0]:
            model = PixelModel(view[row, col], distance.distance[row, col], times[row, col],
                               sensor.pulse_sigma_ns, gain, sensor.t0_offset_ns,
                               settings.specular_albedo, settings.diff_tau_ns)
            problem = NormalMaterialFit(model, h_window[row, col], valid[row, col], settings)
            x, score, converged = problem.fit()
            n = np.real(problem.unpack(x[None])[0][0])
            normal[row, col] = resolve_branch(n, model.omega, prior[row, col])
            for i, name in enumerate(MATERIAL_MAPS):
                materials[name][row, col] = x[2 + i]
            materials["diff_tau"][row, col] = x[8]
            residual[row, col] = score
            refined[row, col] = model.distance + x[7] * LIGHT_SPEED / 2.0
            nonconverged[row, col] = not converged
        return int(active[row].sum())

    fitted = sum(make_executor(task, threads).execute_all(range(rows)))
    logger.info(f"model fit finished for {fitted} pixels, {int(nonconverged.sum())} did not converge")
    confidence = active & (refined > 0)
    return ReconMaps(np.where(confidence, refined, 0.0), normal, materials, residual,
                     confidence.astype(np.uint8), {"nonconverged": nonconverged}, "modelfit")


class ModelFitOperator(ReconstructionOperator):
    """
    模型拟合操作符：movie + distance → recon
    """

    requires = ("movie", "distance")

    def __init__(self, settings: Optional[ModelFitSettings] = None, threads: Optional[int] = None, name=None):
        super().__init__(name, "Per-pixel model fitting", threads=threads)
        self.settings = settings or ModelFitSettings()

    def process_item(self, frame):
        result = dict(frame)
        prior = frame.get("prior_normals")
        result["recon"] = modelfit_normals(frame["movie"], frame["distance"], self.settings,
                                           prior=None if prior is None else prior.normal, threads=self.threads)
        return result
