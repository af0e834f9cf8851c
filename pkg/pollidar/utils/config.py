"""
配置工具模块

该模块提供了用于管理配置的工具类。所有物理常数都在这里给出默认值，
命令行只传递种子、路径和方法开关。
"""

import copy
import json
import os
from typing import Any, Dict, Optional

ENV_PREFIX = "POLLIDAR_"


def default_config() -> Dict[str, Any]:
    """
    返回默认配置的深拷贝

    Returns:
        dict: 默认配置
    """
    return copy.deepcopy(_DEFAULTS)


_DEFAULTS: Dict[str, Any] = {
    "log_level": "INFO",
    "logging": {
        "show_operator_io": False,  # 是否显示操作符输入输出的摘要
        "io_indent": 2,
        "truncate_length": 1000,
    },
    "threads": 1,
    "sensor": {
        "rows": 150,
        "cols": 236,
        "vfov_deg": 23.95,
        "hfov_deg": 31.53,
        "bins": 1488,
        "bin_width_ns": 1.0,
        "max_range_m": 223.2,
        "pulse_fwhm_ns": 3.0,
        "beam_subrays": 4,  # 每个像素 4×4 条子光线
        "t0_offset_ns": 0.0,
        "jitter_seed": 0,
    },
    "render": {
        "adc_gain": 1.0e7,  # 单位激光功率下理想强度到ADC单位的增益
        "support_sigmas": 7.0,
        "support_taus": 25.0,
    },
    "noise": {
        "photons_per_unit": 1.0e4,
        "read_sigma": 2.0,
        "adc_saturation": 4095.0,
        "dark_offset": 0.0,
    },
    "schedule": {
        "states": 36,
        "hwp_deg": 0.0,
        "qwp_emit_step_deg": 5.0,
        "qwp_recv_step_deg": 25.0,
        "lp_deg": 0.0,
        "laser_stokes": [1.0, 1.0, 0.0, 0.0],
    },
    "preprocess": {
        "window": 51,
    },
    "reconstruct": {
        "eta_assumed": 1.5,
        "dop_floor": 0.01,
        "illumination": "laser",
        "pca_k": 16,
        "pca_r_max": 2.0,
        "modelfit": {
            "max_iters": 200,
            "fit_bins": 11,
            "refine_top": None,
            "azimuth_seeds": 8,
            "zenith_seeds_deg": [10.0, 40.0, 70.0],
            "specular_albedo": 1.0,
            "diff_tau_ns": 0.05,
            "f_scale": 0.01,
        },
    },
    "material": {
        "lambda_d_phase1": 1.0,
        "lambda_s_phase1": 0.0,
        "lambda_d_phase2": 0.1,
        "lambda_s_phase2": 1.0,
        "dop_threshold": 0.1,
        "phase1_iters": 100,
        "phase2_iters": 200,
        "fit_bins": 11,
        "specular_albedo": 1.0,
        "diff_tau_ns": 0.05,
        "roughness_seeds": [0.1, 0.5, 0.9],
        "spec_gain_floor": 1.0e-6,
    },
    "bounds": {
        "eta": [1.1, 2.5],
        "roughness": [0.01, 1.0],
        "spec_depol": [0.0, 1.0],
        "diff_depol": [0.0, 1.0],
        "diffuse_albedo": [0.0, 1.0],
        "diff_tau": [0.005, 2.0],
    },
    "scene": {
        "mesh_support": True,
    },
}


class Config:
    """
    配置管理类

    用于加载和管理配置信息：默认配置 → 配置文件 → 环境变量，后者覆盖前者。
    """

    def __init__(self, config_file: Optional[str] = None, use_env: bool = True):
        """
        初始化配置

        Args:
            config_file (str, optional): JSON配置文件路径
            use_env (bool, optional): 是否读取POLLIDAR_环境变量，默认True

        Raises:
            ConfigurationError: 配置文件无法读取或不是合法JSON
        """
        self.config = default_config()

        if config_file:
            self._load_config_file(config_file)

        if use_env:
            self._load_env_vars()

    def _load_config_file(self, config_file: str) -> None:
        from pollidar.core.errors import ConfigurationError

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                file_config = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{config_file}:{e.lineno}: invalid config JSON: {e.msg}") from e
        except OSError as e:
            raise ConfigurationError(f"cannot read config file {config_file}: {e}") from e
        if not isinstance(file_config, dict):
            raise ConfigurationError(f"{config_file}: config root must be a JSON object")
        self._merge_config(file_config)

    def _load_env_vars(self) -> None:
        """
        从环境变量加载配置

        环境变量格式为POLLIDAR_[SECTION]__[KEY]，双下划线表示嵌套，
        例如POLLIDAR_NOISE__READ_SIGMA=1.5、POLLIDAR_THREADS=4
        """
        for key, value in os.environ.items():
            if key.startswith(ENV_PREFIX):
                parts = key[len(ENV_PREFIX):].lower().split('__')
                if all(parts):
                    self._set_config_by_path(parts, value)

    @staticmethod
    def _coerce(value: str) -> Any:
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
        if value.lower() in ('true', 'yes'):
            return True
        if value.lower() in ('false', 'no'):
            return False
        return value

    def _set_config_by_path(self, path: list, value: str) -> None:
        config = self.config
        for part in path[:-1]:
            if not isinstance(config.get(part), dict):
                config[part] = {}
            config = config[part]
        config[path[-1]] = self._coerce(value)

    def _merge_config(self, new_config: Dict[str, Any], base_config: Optional[Dict[str, Any]] = None) -> None:
        """
        递归合并配置

        Args:
            new_config (dict): 新配置
            base_config (dict, optional): 基础配置，如果为None则使用self.config
        """
        if base_config is None:
            base_config = self.config

        for key, value in new_config.items():
            if key in base_config and isinstance(base_config[key], dict) and isinstance(value, dict):
                self._merge_config(value, base_config[key])
            else:
                base_config[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值

        Args:
            key (str): 配置键，支持点号分隔的路径，如'noise.read_sigma'
            default (Any, optional): 配置不存在时返回的默认值

        Returns:
            Any: 配置值或默认值
        """
        config = self.config
        for part in key.split('.'):
            if not isinstance(config, dict) or part not in config:
                return default
            config = config[part]
        return config

    def set(self, key: str, value: Any) -> None:
        """
        设置配置值

        Args:
            key (str): 配置键，支持点号分隔的路径
            value (Any): 配置值
        """
        parts = key.split('.')
        config = self.config
        for part in parts[:-1]:
            if not isinstance(config.get(part), dict):
                config[part] = {}
            config = config[part]
        config[parts[-1]] = value

    def section(self, name: str) -> Dict[str, Any]:
        """
        获取一个配置节的副本

        Args:
            name (str): 节名，支持点号路径，如'reconstruct.modelfit'

        Returns:
            dict: 配置节（不存在时为空字典）
        """
        value = self.get(name, {})
        return copy.deepcopy(value) if isinstance(value, dict) else {}

    def to_dict(self) -> Dict[str, Any]:
        """
        将配置转换为字典

        Returns:
            dict: 配置字典的深拷贝
        """
        return copy.deepcopy(self.config)

    def save(self, config_file: str) -> None:
        """
        保存配置到文件

        Args:
            config_file (str): 配置文件路径
        """
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump(self.config, f, indent=2, sort_keys=True)
