"""
传感器噪声模型

每个采样：Poisson(x·photons_per_unit·laser_power)/photons_per_unit + N(0, read_sigma²) + dark_offset，
再截断到[0, adc_saturation]。于是均值为x·P + dark_offset，方差为x·P/photons_per_unit + read_sigma²。

随机数按（偏振态，行）计数派生：SeedSequence(seed, spawn_key=(state, row))，
结果与线程数无关。
"""

import dataclasses
from typing import Any, Dict, Mapping, Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.executor import make_executor
from pollidar.core.operator import PhysicsOperator
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


@dataclasses.dataclass
class NoiseParams:
    """
    噪声参数

    Attributes:
        photons_per_unit: 单位ADC强度对应的期望光子数
        read_sigma: 读出噪声标准差（ADC）
        adc_saturation: ADC最大值
        dark_offset: 暗电平（ADC）
    """

    photons_per_unit: float = 1.0e4
    read_sigma: float = 2.0
    adc_saturation: float = 4095.0
    dark_offset: float = 0.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = float(getattr(self, f.name))
            if not np.isfinite(value) or value < 0:
                raise ConfigurationError(f"noise.{f.name} must be finite and non-negative, got {value}")
            setattr(self, f.name, value)
        if self.adc_saturation <= 0:
            raise ConfigurationError("noise.adc_saturation must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NoiseParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown noise fields {sorted(unknown)}")
        return cls(**data)


#: 命名噪声档位，相对默认参数的覆盖
NOISE_PROFILES = {
    "off": None,
    "default": {},
    "low": {"photons_per_unit": 1.0e5, "read_sigma": 0.5},
    "high": {"photons_per_unit": 1.0e2, "read_sigma": 8.0},
}


def noise_from_profile(profile: str, config=None) -> Optional[NoiseParams]:
    """
    按档位名构建噪声参数

    Args:
        profile (str): off | default | low | high
        config (Config, optional): 提供noise节作为基础参数

    Returns:
        NoiseParams or None: off时为None

    Raises:
        ConfigurationError: 未知档位
    """
    if profile not in NOISE_PROFILES:
        raise ConfigurationError(f"unknown noise profile {profile!r}, expected one of {sorted(NOISE_PROFILES)}")
    overrides = NOISE_PROFILES[profile]
    if overrides is None:
        return None
    base = config.section("noise") if config is not None else {}
    base.update(overrides)
    return NoiseParams.from_dict(base)


def row_rng(seed: int, state: int, row: int) -> np.random.Generator:
    """（偏振态，行）对应的独立随机数生成器"""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(state), int(row))))


def _noisy_block(ideal: np.ndarray, params: NoiseParams, laser_power: float,
                 rng: np.random.Generator) -> np.ndarray:
    mean = np.maximum(np.asarray(ideal, dtype=np.float64), 0.0) * laser_power
    if params.photons_per_unit > 0:
        signal = rng.poisson(mean * params.photons_per_unit) / params.photons_per_unit
    else:
        signal = np.zeros_like(mean)
    if params.read_sigma > 0:
        signal = signal + rng.normal(0.0, params.read_sigma, size=mean.shape)
    signal = signal + params.dark_offset
    return np.clip(signal, 0.0, params.adc_saturation)


def apply_noise(cube: WavefrontCube, params: NoiseParams, seed: int, laser_power: Optional[float] = None,
                out: Optional[np.ndarray] = None, threads: Optional[int] = None) -> WavefrontCube:
    """
    对无噪声立方体施加散粒噪声、读出噪声与饱和截断

    Args:
        cube: 无噪声立方体（单位激光功率）
        params: 噪声参数
        seed (int): 随机种子
        laser_power (float, optional): 激光功率，默认取cube.meta中的值
        out (numpy.ndarray, optional): 输出缓冲，可以就是cube.data（原地处理）
        threads (int, optional): 线程数

    Returns:
        WavefrontCube: 含噪立方体
    """
    power = cube.laser_power if laser_power is None else float(laser_power)
    if out is None:
        out = np.empty(cube.data.shape)
    elif out.shape != cube.data.shape:
        raise ConfigurationError(f"output buffer shape {out.shape} does not match cube {cube.data.shape}")

    states, rows = cube.data.shape[:2]

    def task(unit):
        state, row = unit
        block = _noisy_block(cube.data[state, row], params, power, row_rng(seed, state, row))
        out[state, row] = block
        return int(np.count_nonzero(block >= params.adc_saturation))

    units = [(s, r) for s in range(states) for r in range(rows)]
    saturated = sum(make_executor(task, threads).execute_all(units))
    fraction = saturated / float(out.size) if out.size else 0.0
    if fraction > 0:
        logger.warning(f"{fraction:.4%} of samples saturated at ADC {params.adc_saturation:g}")

    meta = dict(cube.meta)
    meta.update({"laser_power": power, "noise": params.to_dict(), "seed": int(seed),
                 "saturated_fraction": fraction})
    return WavefrontCube(out, cube.schedule, cube.sensor, meta)


class NoiseOperator(PhysicsOperator):
    """
    加噪操作符

    读取帧中的cube，替换为含噪立方体。params为None时只记录激光功率。
    """

    requires = ("cube",)

    def __init__(self, params: Optional[NoiseParams], seed: int = 0, laser_power: float = 1.0,
                 threads: Optional[int] = None, in_place: bool = False, name=None):
        super().__init__(name, "Apply shot/read noise and ADC saturation")
        self.params = params
        self.seed = seed
        self.laser_power = laser_power
        self.threads = threads
        self.in_place = in_place

    def process_item(self, frame):
        cube = frame["cube"]
        result = dict(frame)
        if self.params is None:
            if self.laser_power != 1.0:
                data = np.multiply(cube.data, self.laser_power, out=cube.data if self.in_place else None)
            else:
                data = cube.data
            meta = dict(cube.meta, laser_power=self.laser_power, seed=int(self.seed))
            result["cube"] = WavefrontCube(data, cube.schedule, cube.sensor, meta)
            return result
        out = cube.data if self.in_place else None
        result["cube"] = apply_noise(cube, self.params, self.seed, self.laser_power, out=out, threads=self.threads)
        return result
