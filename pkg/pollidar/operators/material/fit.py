"""
固定法线下的材质估计

两阶段加权拟合：

    λ_d·|c_dop ⊙ (H_meas − H_d)|₁ + λ_s·|H_meas − H_d − H_s|₁

两阶段都从temporal_split给出的τ_d与Δt出发：漫反射分量由其指数拖尾与瞬时的镜面脉冲区分。
第一阶段（λ_d = 1, λ_s = 0）只在高漫反射偏振度的像素上拟合η、|D^d|、漫反射率、τ_d与Δt；
第二阶段（λ_d = 0.1, λ_s = 1）以粗糙度的多个种子拟合全部参数。
c_dop取测得的峰值Mueller矩阵在非偏振输入下的偏振度。
"""

import dataclasses
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.executor import make_executor
from pollidar.core.operator import ReconstructionOperator
from pollidar.operators.preprocess.ellipsometry import MuellerMovie
from pollidar.operators.reconstruct.forward import PixelFit, PixelModel, bound_pairs, split_grid, temporal_split
from pollidar.optics.materials import FIT_FIELDS, Material
from pollidar.optics.pbrdf import SurfaceInteraction, specular_mueller
from pollidar.optics.polmath import dop_map
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

FIT_PARAMS = FIT_FIELDS + ("dt", "diff_tau")
OUTPUT_FIELDS = FIT_FIELDS + ("diff_tau",)
PHASE1_FREE = tuple(FIT_PARAMS.index(name) for name in ("eta", "diff_depol", "diffuse_albedo", "dt", "diff_tau"))
MATERIAL_MODES = ("pixel", "segment")
DT_LIMIT = 2.0


@dataclasses.dataclass
class MaterialFitConfig:
    """
    材质拟合参数

    Attributes:
        lambda_d_phase1, lambda_s_phase1: 第一阶段的损失权重
        lambda_d_phase2, lambda_s_phase2: 第二阶段的损失权重
        dop_threshold: c_dop掩码的偏振度阈值，(0, 1)
        phase1_iters, phase2_iters: 每阶段的最大函数求值次数
        fit_bins: 拟合窗口长度（奇数）
        specular_albedo: 固定的镜面反射率
        diff_tau_ns: 不可辨识像素输出的漫反射时间常数，也是τ_d的默认初值
        roughness_seeds: 第二阶段的粗糙度种子
        spec_gain_floor: 镜面增益低于该值且不在c_dop内的像素视为不可辨识
        f_scale: soft_l1损失的尺度
        initial: 初始材质猜测
        bounds: 各材质字段的上下界
    """

    lambda_d_phase1: float = 1.0
    lambda_s_phase1: float = 0.0
    lambda_d_phase2: float = 0.1
    lambda_s_phase2: float = 1.0
    dop_threshold: float = 0.1
    phase1_iters: int = 100
    phase2_iters: int = 200
    fit_bins: int = 11
    specular_albedo: float = 1.0
    diff_tau_ns: float = 0.05
    roughness_seeds: Sequence[float] = (0.1, 0.5, 0.9)
    spec_gain_floor: float = 1.0e-6
    f_scale: float = 0.01
    initial: Dict[str, float] = dataclasses.field(default_factory=lambda: {
        "eta": 1.5, "roughness": 0.3, "spec_depol": 0.5, "diff_depol": 0.5, "diffuse_albedo": 0.5,
    })
    bounds: Dict[str, Tuple[float, float]] = dataclasses.field(default_factory=lambda: {
        "eta": (1.1, 2.5), "roughness": (0.01, 1.0), "spec_depol": (0.0, 1.0),
        "diff_depol": (0.0, 1.0), "diffuse_albedo": (0.0, 1.0), "diff_tau": (0.005, 2.0),
    })

    def validate(self) -> "MaterialFitConfig":
        """
        Raises:
            ConfigurationError: 权重为负、阈值越界或迭代次数非法
        """
        weights = (self.lambda_d_phase1, self.lambda_s_phase1, self.lambda_d_phase2, self.lambda_s_phase2)
        if any(w < 0 for w in weights):
            raise ConfigurationError(f"material loss weights must be >= 0, got {weights}")
        if not 0.0 < self.dop_threshold < 1.0:
            raise ConfigurationError(f"dop_threshold must lie in (0, 1), got {self.dop_threshold}")
        if self.phase1_iters < 1 or self.phase2_iters < 1:
            raise ConfigurationError("phase iteration limits must be positive")
        if self.fit_bins < 1 or self.fit_bins % 2 == 0:
            raise ConfigurationError(f"fit_bins must be a positive odd integer, got {self.fit_bins}")
        if not self.roughness_seeds:
            raise ConfigurationError("at least one roughness seed is required")
        for name in OUTPUT_FIELDS:
            lo, hi = self.bounds[name]
            if lo >= hi:
                raise ConfigurationError(f"invalid bounds for {name}: [{lo}, {hi}]")
        return self

    @classmethod
    def from_config(cls, config) -> "MaterialFitConfig":
        section: Mapping[str, Any] = config.section("material")
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {k: v for k, v in section.items() if k in known}
        bounds = config.section("bounds")
        if bounds:
            defaults = cls().bounds
            defaults.update({k: tuple(v) for k, v in bounds.items() if k in defaults})
            kwargs["bounds"] = defaults
        return cls(**kwargs).validate()


class FixedNormalFit(PixelFit):
    """法线已知时的材质、漫反射时间常数与时间偏移拟合"""

    names = FIT_PARAMS

    def __init__(self, model: PixelModel, normal, h_meas, valid, cfg: MaterialFitConfig,
                 weights=(0.0, 1.0), base=None, free=None):
        self.cfg = cfg
        self.normal = np.asarray(normal, dtype=float)
        super().__init__(model, h_meas, valid, weights, base, free)

    def default(self):
        return initial_vector(self.cfg)

    def bounds(self):
        lower, upper = bound_pairs(self.cfg.bounds, FIT_FIELDS)
        tau_lo, tau_hi = self.cfg.bounds["diff_tau"]
        return np.append(lower, [-DT_LIMIT, tau_lo]), np.append(upper, [DT_LIMIT, tau_hi])

    def unpack(self, x):
        normal = np.broadcast_to(self.normal, x.shape[:-1] + (3,))
        fields = {name: x[..., i] for i, name in enumerate(FIT_FIELDS)}
        fields["diff_tau"] = x[..., len(FIT_FIELDS) + 1]
        return normal, fields, x[..., len(FIT_FIELDS)]

    def with_phase(self, weights, base, free=None) -> "FixedNormalFit":
        return FixedNormalFit(self.model, self.normal, self.h_meas, self.mask[:, 0] > 0, self.cfg,
                              weights, base, free)

    def global_objective(self, x_full) -> float:
        """λ_d = 0, λ_s = 1 时的L1目标"""
        return float(self.with_phase((0.0, 1.0), x_full).objective(x_full))

    def split_start(self, x_full) -> np.ndarray:
        """
        以temporal_split给出的τ_d与Δt替换起点，再初始化漫反射率

        Args:
            x_full: 完整参数向量

        Returns:
            numpy.ndarray: 新的起点
        """
        x = np.array(x_full, dtype=float)
        model = self.model
        split = temporal_split(self.h_meas, self.mask[:, 0], model.times, model.arrival, model.sigma,
                               *split_grid(self.cfg.bounds["diff_tau"], DT_LIMIT))
        x[FIT_PARAMS.index("dt")] = split.dt
        x[FIT_PARAMS.index("diff_tau")] = split.tau
        return self.albedo_guess(x)

    def albedo_guess(self, x_full) -> np.ndarray:
        """按线性最小二乘初始化漫反射率"""
        x = np.array(x_full, dtype=float)
        i = FIT_FIELDS.index("diffuse_albedo")
        unit = x.copy()
        unit[i] = 1.0
        spec, diff = self.render(unit)
        diff = diff * self.mask
        target = (self.h_meas - spec) * self.mask
        den = float(np.sum(diff * diff))
        if den > 0:
            lo, hi = self.cfg.bounds["diffuse_albedo"]
            x[i] = np.clip(np.sum(diff * target) / den, lo, hi)
        return x


@dataclasses.dataclass
class MaterialMaps:
    """
    材质估计结果

    Attributes:
        fields: 材质字段名到(H, W)栅格的映射
        residual: (H, W) 全局L1目标
        unidentifiable: (H, W) 不可辨识标记
        c_dop: (H, W) 第一阶段掩码
        fitted: (H, W) 参与拟合的像素
        summary: 按材质分割的统计 {segment: {field: {"mean", "std"}, "pixels": n}}
        mode: pixel或segment
    """

    fields: Dict[str, np.ndarray]
    residual: np.ndarray
    unidentifiable: np.ndarray
    c_dop: np.ndarray
    fitted: np.ndarray
    summary: Dict[str, Any] = dataclasses.field(default_factory=dict)
    mode: str = "pixel"

    def material_at(self, row: int, col: int) -> Material:
        return Material(**{name: float(self.fields[name][row, col]) for name in self.fields})


def measured_diffuse_dop(movie: MuellerMovie) -> np.ndarray:
    """峰值Mueller矩阵在非偏振输入下的偏振度，(H, W)"""
    return dop_map(movie.peak()[..., :, 0])


def initial_vector(cfg: MaterialFitConfig) -> np.ndarray:
    """初始材质猜测、Δt = 0与默认τ_d组成的完整参数向量"""
    return np.array([cfg.initial[name] for name in FIT_FIELDS] + [0.0, cfg.diff_tau_ns])


def specular_gain(normal, omega, cfg: MaterialFitConfig) -> np.ndarray:
    """初始材质猜测下的cosφ·[M_s]₀₀"""
    normal = np.asarray(normal, dtype=float)
    si = SurfaceInteraction(normal, np.asarray(omega, dtype=float), np.ones(normal.shape[:-1]))
    mat = Material(**cfg.initial, diff_tau=cfg.diff_tau_ns, specular_albedo=cfg.specular_albedo)
    return si.cos_phi * specular_mueller(si, mat)[..., 0, 0]


def fit_pixel(problem: FixedNormalFit, in_mask: bool):
    """
    单像素两阶段拟合

    Returns:
        tuple: (完整参数, 全局目标)
    """
    cfg = problem.cfg
    x = problem.split_start(problem.base)
    if in_mask:
        phase1 = problem.with_phase((cfg.lambda_d_phase1, cfg.lambda_s_phase1), x, PHASE1_FREE)
        result = phase1.solve(x[list(PHASE1_FREE)], cfg.phase1_iters, cfg.f_scale)
        x = phase1.expand(result.x)
    phase2 = problem.with_phase((cfg.lambda_d_phase2, cfg.lambda_s_phase2), x)
    best_x, best_score = x, problem.global_objective(x)
    r_index = FIT_FIELDS.index("roughness")
    for seed in cfg.roughness_seeds:
        start = x.copy()
        start[r_index] = seed
        start = problem.albedo_guess(start)
        result = phase2.solve(start, cfg.phase2_iters, cfg.f_scale)
        score = problem.global_objective(result.x)
        if score < best_score:
            best_x, best_score = result.x, score
    return best_x, best_score


def _segment_summary(fields: Dict[str, np.ndarray], segments: np.ndarray, usable: np.ndarray):
    summary = {}
    for segment in np.unique(segments[usable]):
        mask = usable & (segments == segment)
        entry: Dict[str, Any] = {"pixels": int(mask.sum())}
        for name, values in fields.items():
            entry[name] = {"mean": float(np.mean(values[mask])), "std": float(np.std(values[mask]))}
        summary[str(int(segment))] = entry
    return summary


def estimate_materials(movie: MuellerMovie, normals: np.ndarray, distance: np.ndarray,
                       cfg: Optional[MaterialFitConfig] = None, view: Optional[np.ndarray] = None,
                       mask: Optional[np.ndarray] = None, segments: Optional[np.ndarray] = None,
                       mode: str = "pixel", threads: Optional[int] = None) -> MaterialMaps:
    """
    逐像素材质估计

    Args:
        movie: Mueller电影
        normals: (H, W, 3) 固定的单位法线
        distance: (H, W) 距离（米）
        cfg: 拟合参数
        view: (H, W, 3) 视线方向
        mask: (H, W) 参与拟合的像素，默认取movie置信度与distance > 0
        segments: (H, W) 材质分割（例如真值material_id），用于统计与segment模式
        mode (str): pixel逐像素输出；segment把每个分割内的均值赋给该分割的全部像素
        threads (int, optional): 按行并行的线程数

    Returns:
        MaterialMaps: 材质栅格、残差与标记

    Raises:
        ConfigurationError: 未知模式、segment模式缺少分割或法线非单位长度
    """
    cfg = (cfg or MaterialFitConfig()).validate()
    if mode not in MATERIAL_MODES:
        raise ConfigurationError(f"unknown material mode '{mode}', expected one of {MATERIAL_MODES}")
    if mode == "segment" and segments is None:
        raise ConfigurationError("segment mode needs a segmentation map")
    if cfg.fit_bins > movie.window:
        raise ConfigurationError(f"fit_bins {cfg.fit_bins} exceeds the slice window {movie.window}")
    sensor = movie.sensor
    view = sensor.view_directions() if view is None else view
    normals = np.asarray(normals, dtype=float)
    distance = np.asarray(distance, dtype=float)
    active = movie.confidence.astype(bool) & (distance > 0)
    if mask is not None:
        active &= np.asarray(mask).astype(bool)
    lengths = np.linalg.norm(normals[active], axis=-1)
    if lengths.size and np.any(np.abs(lengths - 1.0) > 1e-6):
        raise ConfigurationError("normals supplied to the material fit must be unit length")

    rho = measured_diffuse_dop(movie)
    c_dop = active & (rho > cfg.dop_threshold)
    gain_s = np.where(active, specular_gain(np.where(active[..., None], normals, -view), view, cfg), 0.0)
    unidentifiable = active & ~c_dop & (gain_s < cfg.spec_gain_floor)

    half = cfg.fit_bins // 2
    window = slice(movie.center - half, movie.center + half + 1)
    times = movie.window_times()[..., window]
    valid = movie.valid[..., window]
    h_window = movie.h_meas[:, :, window]
    rows, cols = sensor.shape
    fields = {name: np.zeros((rows, cols)) for name in OUTPUT_FIELDS}
    residual = np.zeros((rows, cols))
    default = initial_vector(cfg)

    def task(row):
        for col in np.nonzero(active[row])[0]:
            model = PixelModel(view[row, col], distance[row, col], times[row, col], sensor.pulse_sigma_ns,
                               movie.gain, sensor.t0_offset_ns, cfg.specular_albedo, cfg.diff_tau_ns)
            problem = FixedNormalFit(model, normals[row, col], h_window[row, col], valid[row, col], cfg)
            if unidentifiable[row, col]:
                x, score = default, problem.global_objective(default)
            else:
                x, score = fit_pixel(problem, bool(c_dop[row, col]))
            for name in OUTPUT_FIELDS:
                fields[name][row, col] = x[FIT_PARAMS.index(name)]
            residual[row, col] = score
        return int(active[row].sum())

    fitted = sum(make_executor(task, threads).execute_all(range(rows)))
    logger.info(f"material fit finished for {fitted} pixels: {int(c_dop.sum())} in the diffuse mask, "
                f"{int(unidentifiable.sum())} unidentifiable")

    summary = {}
    if segments is not None:
        segments = np.asarray(segments)
        usable = active & ~unidentifiable
        summary = _segment_summary(fields, segments, usable)
        if mode == "segment":
            for key, entry in summary.items():
                members = active & (segments == int(key))
                for name in OUTPUT_FIELDS:
                    fields[name][members] = entry[name]["mean"]
    return MaterialMaps(fields, residual, unidentifiable, c_dop, active, summary, mode)


def perturb_normals(normals: np.ndarray, view: np.ndarray, angle_deg: float, seed: int = 0) -> np.ndarray:
    """
    把每条法线绕随机的垂直轴旋转固定角度，并保持朝向传感器

    Args:
        normals: (H, W, 3)
        view: (H, W, 3)
        angle_deg (float): 旋转角度
        seed (int): 随机种子

    Returns:
        numpy.ndarray: 扰动后的单位法线
    """
    rng = np.random.default_rng(seed)
    normals = np.asarray(normals, dtype=float)
    tangent = rng.normal(size=normals.shape)
    tangent -= np.sum(tangent * normals, axis=-1, keepdims=True) * normals
    tangent /= np.maximum(np.linalg.norm(tangent, axis=-1, keepdims=True), 1e-12)
    angle = np.deg2rad(angle_deg)
    out = np.cos(angle) * normals + np.sin(angle) * tangent
    facing = np.sum(out * view, axis=-1) > 0
    out = np.where(facing[..., None], out - 2.0 * np.sum(out * view, axis=-1, keepdims=True) * view, out)
    return out / np.maximum(np.linalg.norm(out, axis=-1, keepdims=True), 1e-12)


def normal_noise_sweep(movie: MuellerMovie, normals: np.ndarray, distance: np.ndarray, eta_true: np.ndarray,
                       levels_deg: Sequence[float], cfg: Optional[MaterialFitConfig] = None,
                       mask: Optional[np.ndarray] = None, seed: int = 0,
                       threads: Optional[int] = None) -> List[Dict[str, float]]:
    """
    法线误差对η估计的影响

    Returns:
        list: 每个扰动角度一行 {"normal_noise_deg", "eta_mae", "pixels"}
    """
    view = movie.sensor.view_directions()
    rows = []
    for level in levels_deg:
        noisy = perturb_normals(normals, view, level, seed) if level > 0 else normals
        result = estimate_materials(movie, noisy, distance, cfg, view, mask, threads=threads)
        usable = result.fitted & ~result.unidentifiable
        errors = np.abs(result.fields["eta"][usable] - np.asarray(eta_true)[usable])
        rows.append({"normal_noise_deg": float(level),
                     "eta_mae": float(np.mean(errors)) if errors.size else float("nan"),
                     "pixels": int(usable.sum())})
        logger.info(f"normal noise {level} deg: eta MAE {rows[-1]['eta_mae']:.4f}")
    return rows


class MaterialFitOperator(ReconstructionOperator):
    """
    材质估计操作符：movie + recon（或真值法线）→ materials
    """

    requires = ("movie",)

    def __init__(self, cfg: Optional[MaterialFitConfig] = None, mode: str = "pixel",
                 threads: Optional[int] = None, name=None):
        super().__init__(name, "Two-phase material estimation", threads=threads)
        self.cfg = cfg or MaterialFitConfig()
        self.mode = mode

    def process_item(self, frame):
        normals = frame.get("normal_map")
        distance = frame.get("distance_map")
        if normals is None or distance is None:
            raise ConfigurationError(f"[{self.name}] frame needs 'normal_map' and 'distance_map'")
        result = dict(frame)
        result["materials"] = estimate_materials(frame["movie"], normals, distance, self.cfg,
                                                 segments=frame.get("segments"), mode=self.mode,
                                                 threads=self.threads)
        return result
