"""
无噪声波前渲染

对每个像素、每个偏振态i：

    a_s = [A_i·H_s·P_i·s_laser]_0,  a_d = [A_i·H_d·P_i·s_laser]_0
    I_i(t) = adc_gain · Σ_j (1/n) [a_s g(t − t_j) + a_d (g ⊛ k_τd)(t − t_j)]

其中t_j = 2d_j/c + t0是第j条子光线的到达时刻，采样时刻为t_k = k·bin_width。
每个命中只在到达时刻附近的有限支撑上累加。
"""

from typing import Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.core.executor import make_executor
from pollidar.core.operator import PhysicsOperator
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.operators.simulate.pulse import emg_pulse, gaussian_pulse
from pollidar.operators.simulate.schedule import AngleSchedule
from pollidar.optics.materials import MaterialDB
from pollidar.optics.pbrdf import SurfaceInteraction, TemporalMueller, reflectance
from pollidar.scene.raycast import HitRecords, cast_rays
from pollidar.scene.sensor import LIGHT_SPEED, SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)


def pulse_weights(t_rel, sigma, tau):
    """
    镜面与漫反射的时间权重

    Args:
        t_rel: 相对到达时刻的时间（ns）
        sigma: 脉冲标准差（ns）
        tau: 漫反射时间常数（ns）

    Returns:
        tuple: (g, g ⊛ k_τd)
    """
    return gaussian_pulse(t_rel, sigma), emg_pulse(t_rel, sigma, tau)


def temporal_mueller_at(tm: TemporalMueller, t_rel, sigma):
    """
    在相对时刻t_rel处的脉冲加权Mueller矩阵 H_s·g + H_d·(g ⊛ k)

    Args:
        tm: 时间响应，(..., 4, 4)
        t_rel: 相对时刻，可与tm的前导维度广播并追加时间维，形状(..., L)
        sigma: 脉冲标准差

    Returns:
        numpy.ndarray: (..., L, 4, 4)
    """
    tau = np.asarray(tm.diffuse_kernel_tau)[..., None]
    g, e = pulse_weights(t_rel, sigma, tau)
    return (g[..., None, None] * tm.specular_part[..., None, :, :]
            + e[..., None, None] * tm.diffuse_part[..., None, :, :])


def _support(sensor: SensorConfig, tau_max: float, sigmas: float, taus: float):
    bw = sensor.bin_width_ns
    sigma = sensor.pulse_sigma_ns
    left = int(np.ceil(sigmas * sigma / bw)) + 1
    right = int(np.ceil((sigmas * sigma + taus * tau_max) / bw)) + 2
    return np.arange(-left, right + 1)


def _render_row(row: int, records: HitRecords, materials: MaterialDB, schedule: AngleSchedule,
                sensor: SensorConfig, adc_gain: float, out: np.ndarray, sigmas: float, taus: float,
                laser_stokes) -> int:
    hit = records.hit[row]
    out[:, row] = 0.0
    if not np.any(hit):
        return 0
    n_sub = hit.shape[-1]
    col, _ = np.nonzero(hit)
    si = SurfaceInteraction(records.normal[row][hit], records.directions[row][hit], records.distance[row][hit])
    mat = materials.gather(records.material_id[row][hit])
    tm = reflectance(si, mat)

    arow = schedule.analyzer_rows()
    ill = schedule.illumination(laser_stokes)
    a_s = np.einsum("si,nij,sj->sn", arow, tm.specular_part, ill)
    a_d = np.einsum("si,nij,sj->sn", arow, tm.diffuse_part, ill)

    bw = sensor.bin_width_ns
    arrival = 2.0 * si.d / LIGHT_SPEED + sensor.t0_offset_ns
    offsets = _support(sensor, float(np.max(mat.diff_tau)), sigmas, taus)
    bins = np.floor(arrival / bw).astype(np.int64)[:, None] + offsets[None, :]
    valid = (bins >= 0) & (bins < sensor.bins)
    t_rel = bins * bw - arrival[:, None]
    g, e = pulse_weights(t_rel, sensor.pulse_sigma_ns, mat.diff_tau[:, None])

    scale = adc_gain / n_sub
    signal = scale * (a_s[:, :, None] * g[None] + a_d[:, :, None] * e[None])
    hit_index, k_index = np.nonzero(valid)
    buffer = np.zeros((schedule.size, sensor.cols, sensor.bins))
    np.add.at(buffer, (slice(None), col[hit_index], bins[hit_index, k_index]), signal[:, hit_index, k_index])
    out[:, row] = buffer
    return int(hit.sum())


def render_ideal(records: HitRecords, materials: MaterialDB, schedule: AngleSchedule, sensor: SensorConfig,
                 adc_gain: float = 1.0e7, laser_stokes=None, out: Optional[np.ndarray] = None,
                 threads: Optional[int] = None, support_sigmas: float = 7.0,
                 support_taus: float = 25.0) -> WavefrontCube:
    """
    渲染无噪声波前立方体（单位激光功率）

    Args:
        records: 逐子光线命中记录
        materials: 材质库
        schedule: 采集调度
        sensor: 传感器配置
        adc_gain (float): 理想强度到ADC单位的增益
        laser_stokes: 覆盖调度中的激光Stokes向量
        out (numpy.ndarray, optional): (S, H, W, T) 输出缓冲，例如文件memmap
        threads (int, optional): 按行并行的线程数
        support_sigmas (float): 脉冲支撑的σ倍数
        support_taus (float): 漫反射尾部支撑的τ倍数

    Returns:
        WavefrontCube: 无噪声立方体

    Raises:
        ConfigurationError: 命中记录、调度或输出缓冲的维度与传感器不一致
    """
    expected = (schedule.size, sensor.rows, sensor.cols, sensor.bins)
    if records.distance.shape[:2] != sensor.shape:
        raise ConfigurationError(f"hit records cover {records.distance.shape[:2]} pixels, "
                                 f"sensor expects {sensor.shape}")
    if out is None:
        out = np.zeros(expected)
    elif tuple(out.shape) != expected:
        raise ConfigurationError(f"output buffer shape {tuple(out.shape)} does not match {expected}")

    executor = make_executor(
        lambda row: _render_row(row, records, materials, schedule, sensor, adc_gain, out,
                                support_sigmas, support_taus, laser_stokes), threads)
    hits = sum(executor.execute_all(range(sensor.rows)))
    logger.info(f"rendered {schedule.size} states x {sensor.rows}x{sensor.cols} pixels, {hits} subray hits")

    if laser_stokes is not None:
        schedule = AngleSchedule(schedule.entries, np.asarray(laser_stokes, dtype=float))
    return WavefrontCube(out, schedule, sensor, {"laser_power": 1.0, "adc_gain": float(adc_gain),
                                                 "noise": None, "seed": None})


class RenderOperator(PhysicsOperator):
    """
    渲染操作符

    读取帧中的scene，写入scene_maps、hit_records与无噪声cube。
    """

    requires = ("scene",)

    def __init__(self, schedule: AngleSchedule, sensor: Optional[SensorConfig] = None, adc_gain: float = 1.0e7,
                 threads: Optional[int] = None, out_factory=None, name=None):
        """
        初始化渲染操作符

        Args:
            schedule: 采集调度
            sensor: 传感器配置，None时使用场景中的传感器
            adc_gain (float): ADC增益
            threads (int, optional): 线程数
            out_factory (callable, optional): (shape, sensor, schedule) → 输出缓冲
            name (str, optional): 操作符名称
        """
        super().__init__(name, "Render noise-free polarimetric wavefronts")
        self.schedule = schedule
        self.sensor = sensor
        self.adc_gain = adc_gain
        self.threads = threads
        self.out_factory = out_factory

    def process_item(self, frame):
        scene = frame["scene"]
        sensor = self.sensor or scene.sensor or SensorConfig()
        maps, records = cast_rays(scene, sensor, self.threads)
        out = None
        if self.out_factory is not None:
            out = self.out_factory((self.schedule.size, sensor.rows, sensor.cols, sensor.bins), sensor, self.schedule)
        cube = render_ideal(records, scene.materials, self.schedule, sensor, self.adc_gain,
                            out=out, threads=self.threads)
        result = dict(frame)
        result.update({"sensor": sensor, "scene_maps": maps, "hit_records": records, "cube": cube})
        return result
