"""
传感器模块

定义扫描网格、时间轴与脉冲参数。像素采用等角网格：

    α_c = ((c + ½)/W − ½)·hfov,  β_r = (½ − (r + ½)/H)·vfov
    ω = (cosβ·sinα, −sinβ, cosβ·cosα)

相机坐标系x向右、y向下、z向前。
"""

import dataclasses
from typing import Any, Dict, Mapping, Optional

import numpy as np

from pollidar.core.errors import ConfigurationError

#: 光速（米/纳秒）
LIGHT_SPEED = 0.299792458

#: FWHM与高斯σ之比 2√(2 ln 2)
FWHM_TO_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


@dataclasses.dataclass
class SensorConfig:
    """
    传感器参数

    Attributes:
        rows: 行数H
        cols: 列数W
        vfov_deg: 垂直视场（度）
        hfov_deg: 水平视场（度）
        bins: 时间bin数T
        bin_width_ns: bin宽度（ns）
        max_range_m: 最大量程（米）
        pulse_fwhm_ns: 高斯脉冲半高宽（ns）
        beam_subrays: 每像素子光线网格的边长（4表示4×4）
        t0_offset_ns: 触发延迟（ns）
        jitter_seed: 子光线抖动的随机种子
    """

    rows: int = 150
    cols: int = 236
    vfov_deg: float = 23.95
    hfov_deg: float = 31.53
    bins: int = 1488
    bin_width_ns: float = 1.0
    max_range_m: float = 223.2
    pulse_fwhm_ns: float = 3.0
    beam_subrays: int = 4
    t0_offset_ns: float = 0.0
    jitter_seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> "SensorConfig":
        """
        检查参数

        Raises:
            ConfigurationError: 参数非正，或T·bin_width·c/2与max_range相差超过0.1%
        """
        for name in ("rows", "cols", "bins", "beam_subrays"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"sensor.{name} must be a positive integer")
        for name in ("vfov_deg", "hfov_deg", "bin_width_ns", "max_range_m", "pulse_fwhm_ns"):
            if not float(getattr(self, name)) > 0.0:
                raise ConfigurationError(f"sensor.{name} must be positive")
        if self.t0_offset_ns < 0.0:
            raise ConfigurationError("sensor.t0_offset_ns must be non-negative")
        span = self.bins * self.bin_width_ns * LIGHT_SPEED / 2.0
        if abs(span - self.max_range_m) > 1e-3 * self.max_range_m:
            raise ConfigurationError(
                f"sensor time axis covers {span:.2f} m but max_range_m is {self.max_range_m}")
        return self

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def pulse_sigma_ns(self) -> float:
        return self.pulse_fwhm_ns / FWHM_TO_SIGMA

    @property
    def subray_count(self) -> int:
        return self.beam_subrays * self.beam_subrays

    def time_axis(self) -> np.ndarray:
        """各bin的采样时刻 t_k = k·bin_width（ns）"""
        return np.arange(self.bins) * self.bin_width_ns

    def bin_to_range(self, t_bin) -> np.ndarray:
        """(bin·bin_width − t0)·c/2"""
        return (np.asarray(t_bin) * self.bin_width_ns - self.t0_offset_ns) * LIGHT_SPEED / 2.0

    def range_to_bin(self, distance) -> np.ndarray:
        """返回（非整数）bin位置"""
        return (2.0 * np.asarray(distance) / LIGHT_SPEED + self.t0_offset_ns) / self.bin_width_ns

    def pixel_angles(self):
        """
        像素中心的方位角与俯仰角（弧度）

        Returns:
            tuple: (alpha (W,), beta (H,))
        """
        hfov = np.deg2rad(self.hfov_deg)
        vfov = np.deg2rad(self.vfov_deg)
        alpha = ((np.arange(self.cols) + 0.5) / self.cols - 0.5) * hfov
        beta = (0.5 - (np.arange(self.rows) + 0.5) / self.rows) * vfov
        return alpha, beta

    def view_directions(self) -> np.ndarray:
        """像素中心的射线方向V，(H, W, 3)"""
        alpha, beta = self.pixel_angles()
        return directions_from_angles(alpha[None, :], beta[:, None])

    def subray_directions(self) -> np.ndarray:
        """
        每个像素内的抖动子光线方向

        子光线网格为n×n分层采样，每层内均匀抖动；n = 1时取像素中心。

        Returns:
            numpy.ndarray: (H, W, n², 3)
        """
        n = self.beam_subrays
        alpha, beta = self.pixel_angles()
        if n == 1:
            return self.view_directions()[:, :, None, :]
        pitch_a = np.deg2rad(self.hfov_deg) / self.cols
        pitch_b = np.deg2rad(self.vfov_deg) / self.rows
        rng = np.random.default_rng(self.jitter_seed)
        jitter = rng.uniform(-0.5, 0.5, size=(self.rows, self.cols, n, n, 2)) / n
        cells = (np.arange(n) + 0.5) / n - 0.5
        du = cells[None, None, None, :] + jitter[..., 0]
        dv = cells[None, None, :, None] + jitter[..., 1]
        a = alpha[None, :, None, None] + du * pitch_a
        b = beta[:, None, None, None] - dv * pitch_b
        dirs = directions_from_angles(a, b)
        return dirs.reshape(self.rows, self.cols, n * n, 3)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Mapping[str, Any]] = None, **overrides) -> "SensorConfig":
        """
        从字典构建，未知字段会报错

        Raises:
            ConfigurationError: 未知字段或取值非法
        """
        data = dict(data or {})
        data.update(overrides)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown sensor fields {sorted(unknown)}")
        values = {}
        for f in dataclasses.fields(cls):
            if f.name in data:
                caster = int if f.default.__class__ is int else float
                try:
                    values[f.name] = caster(data[f.name])
                except (TypeError, ValueError) as e:
                    raise ConfigurationError(f"sensor.{f.name}: {e}") from e
        return cls(**values)

    @classmethod
    def from_config(cls, config, **overrides) -> "SensorConfig":
        """从Config的sensor节构建"""
        return cls.from_dict(config.section("sensor"), **overrides)


def directions_from_angles(alpha, beta) -> np.ndarray:
    """由方位角α与俯仰角β得到单位射线方向"""
    alpha, beta = np.broadcast_arrays(alpha, beta)
    cb = np.cos(beta)
    return np.stack([cb * np.sin(alpha), -np.sin(beta), cb * np.cos(alpha)], axis=-1)
