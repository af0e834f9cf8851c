"""
仿真操作符

采集调度、脉冲形状、无噪声渲染与噪声模型。
"""

from pollidar.operators.simulate.schedule import AngleSchedule, default_schedule, schedule_from_config
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.operators.simulate.pulse import gaussian_pulse, emg_pulse
from pollidar.operators.simulate.render import render_ideal, temporal_mueller_at, RenderOperator
from pollidar.operators.simulate.noise import (
    NoiseParams, NOISE_PROFILES, noise_from_profile, apply_noise, NoiseOperator,
)

__all__ = [
    'AngleSchedule',
    'default_schedule',
    'schedule_from_config',
    'WavefrontCube',
    'gaussian_pulse',
    'emg_pulse',
    'render_ideal',
    'temporal_mueller_at',
    'RenderOperator',
    'NoiseParams',
    'NOISE_PROFILES',
    'noise_from_profile',
    'apply_noise',
    'NoiseOperator',
]
