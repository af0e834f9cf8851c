"""
结果保存模块

二进制格式均为小端序：

    PWF1  波前立方体：头部 + (S, H, W, T) float32，附带<file>.json侧车
    PMM1  Mueller电影：头部 + (H, W, L, 16) float32 + (H, W) float32残差
    PFX1  特征张量：头部 + (H, W, C) float32
    PFM   浮点栅格：PF（3通道）/ Pf（1通道），比例因子−1.0，行自下而上，附带<file>.json侧车
"""

import json
import os
import struct
from typing import Any, Dict, Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.operators.simulate.schedule import AngleSchedule
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

CUBE_MAGIC = b"PWF1"
MUELLER_MAGIC = b"PMM1"
FEATURE_MAGIC = b"PFX1"
FORMAT_VERSION = 1

CUBE_HEADER = struct.Struct("<4sIIIIIdd")
MUELLER_HEADER = struct.Struct("<4sIIII")
FEATURE_HEADER = struct.Struct("<4sIII")


def sidecar_path(path: str) -> str:
    return f"{path}.json"


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(path: str, data: Dict[str, Any]) -> None:
    """以稳定的键顺序写入JSON"""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True, default=_jsonable)
        f.write('\n')


def cube_header_size(states: int) -> int:
    return CUBE_HEADER.size + 8 * 4 * states + 8 * 4


def _cube_header(schedule: AngleSchedule, sensor: SensorConfig) -> bytes:
    header = CUBE_HEADER.pack(CUBE_MAGIC, FORMAT_VERSION, schedule.size, sensor.rows, sensor.cols, sensor.bins,
                              sensor.bin_width_ns, sensor.t0_offset_ns)
    angles = np.ascontiguousarray(schedule.angles(), dtype='<f8').tobytes()
    laser = np.ascontiguousarray(schedule.laser_stokes, dtype='<f8').tobytes()
    return header + angles + laser


def _cube_sidecar(sensor: SensorConfig, meta: Dict[str, Any]) -> Dict[str, Any]:
    return {"format": "PWF1", "sensor": sensor.to_dict(), "meta": dict(meta),
            "adc_gain": meta.get("adc_gain", 1.0)}


def create_cube_file(path: str, schedule: AngleSchedule, sensor: SensorConfig) -> np.memmap:
    """
    写入PWF1头部并返回可写的数据memmap，渲染可以直接写入文件

    Args:
        path (str): 输出路径
        schedule: 采集调度
        sensor: 传感器配置

    Returns:
        numpy.memmap: (S, H, W, T) float32
    """
    header = _cube_header(schedule, sensor)
    shape = (schedule.size, sensor.rows, sensor.cols, sensor.bins)
    with open(path, 'wb') as f:
        f.write(header)
        f.truncate(len(header) + int(np.prod(shape)) * 4)
    return np.memmap(path, dtype='<f4', mode='r+', offset=len(header), shape=shape)


def finish_cube_file(path: str, cube: WavefrontCube) -> None:
    """刷新memmap并写入侧车"""
    if isinstance(cube.data, np.memmap):
        cube.data.flush()
    write_json(sidecar_path(path), _cube_sidecar(cube.sensor, cube.meta))


def save_cube(cube: WavefrontCube, path: str) -> None:
    """
    保存波前立方体

    Args:
        cube: 波前立方体
        path (str): 输出路径
    """
    with open(path, 'wb') as f:
        f.write(_cube_header(cube.schedule, cube.sensor))
        for s in range(cube.schedule.size):
            f.write(np.ascontiguousarray(cube.data[s], dtype='<f4').tobytes())
    write_json(sidecar_path(path), _cube_sidecar(cube.sensor, cube.meta))
    logger.info(f"saved wavefront cube {tuple(cube.data.shape)} to {path}")


def save_mueller(movie, path: str) -> None:
    """保存Mueller电影（PMM1）"""
    rows, cols, window, _ = movie.h_meas.shape
    with open(path, 'wb') as f:
        f.write(MUELLER_HEADER.pack(MUELLER_MAGIC, FORMAT_VERSION, rows, cols, window))
        f.write(np.ascontiguousarray(movie.h_meas, dtype='<f4').tobytes())
        f.write(np.ascontiguousarray(movie.residual, dtype='<f4').tobytes())


def save_features(features: np.ndarray, path: str) -> None:
    """保存特征张量（PFX1），通道数写在头部"""
    rows, cols, channels = features.shape
    with open(path, 'wb') as f:
        f.write(FEATURE_HEADER.pack(FEATURE_MAGIC, rows, cols, channels))
        f.write(np.ascontiguousarray(features, dtype='<f4').tobytes())


def save_raster(path: str, raster: np.ndarray, sidecar: Optional[Dict[str, Any]] = None) -> None:
    """
    保存PFM栅格

    Args:
        path (str): 输出路径
        raster: (H, W) 或 (H, W, 3)
        sidecar (dict, optional): 写入<file>.json的附加信息
    """
    raster = np.asarray(raster, dtype=np.float64)
    color = raster.ndim == 3
    if color and raster.shape[2] != 3:
        raise ConfigurationError(f"PFM rasters hold 1 or 3 channels, got {raster.shape[2]}")
    rows, cols = raster.shape[:2]
    with open(path, 'wb') as f:
        f.write(f"{'PF' if color else 'Pf'}\n{cols} {rows}\n-1.0\n".encode('ascii'))
        f.write(np.ascontiguousarray(raster[::-1], dtype='<f4').tobytes())
    if sidecar is not None:
        write_json(sidecar_path(path), sidecar)


def _stats(mask: np.ndarray) -> Dict[str, Any]:
    confident = int(np.count_nonzero(mask))
    return {"pixels": int(mask.size), "confident": confident,
            "coverage": confident / float(mask.size) if mask.size else 0.0}


def save_scene_maps(maps, out_dir: str) -> Dict[str, str]:
    """
    保存真值栅格

    Returns:
        dict: 名称到文件路径的映射
    """
    os.makedirs(out_dir, exist_ok=True)
    mask = maps.confidence.astype(bool)
    paths = {}
    for name in ("distance", "normal", "material_id", "cos_phi", "confidence"):
        path = os.path.join(out_dir, f"{name}.pfm")
        save_raster(path, getattr(maps, name), {"source": "ground_truth", "field": name, **_stats(mask)})
        paths[name] = path
    return paths


def save_recon(recon, out_dir: str, parameters: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """
    保存重建栅格：distance、normal、confidence、residual、各标记与材质字段

    Returns:
        dict: 名称到文件路径的映射
    """
    os.makedirs(out_dir, exist_ok=True)
    mask = recon.confidence.astype(bool)
    base = {"method": recon.method, "parameters": dict(parameters or {}), **_stats(mask)}
    rasters = {"distance": recon.distance, "normal": recon.normal, "confidence": recon.confidence,
               "residual": recon.residual}
    rasters.update({f"flag_{k}": v for k, v in recon.flags.items()})
    rasters.update({f"material_{k}": v for k, v in recon.materials.items()})
    paths = {}
    for name, raster in rasters.items():
        path = os.path.join(out_dir, f"{name}.pfm")
        save_raster(path, raster, {**base, "field": name})
        paths[name] = path
    return paths


def save_material_maps(result, out_dir: str, parameters: Optional[Dict[str, Any]] = None) -> Dict[str, str]:
    """
    保存材质栅格与summary.json（按分割的均值/标准差）

    Returns:
        dict: 名称到文件路径的映射
    """
    os.makedirs(out_dir, exist_ok=True)
    mask = result.fitted
    paths = {}
    rasters = dict(result.fields)
    rasters.update({"residual": result.residual, "unidentifiable": result.unidentifiable, "c_dop": result.c_dop})
    for name, raster in rasters.items():
        path = os.path.join(out_dir, f"{name}.pfm")
        save_raster(path, raster, {"field": name, "mode": result.mode, **_stats(mask)})
        paths[name] = path
    summary_path = os.path.join(out_dir, "summary.json")
    write_json(summary_path, {"mode": result.mode, "parameters": dict(parameters or {}),
                              "fitted_pixels": int(mask.sum()),
                              "unidentifiable_pixels": int(result.unidentifiable.sum()),
                              "segments": result.summary})
    paths["summary"] = summary_path
    return paths


def save_metrics(report, path: str, csv_path: Optional[str] = None) -> None:
    """保存指标JSON，可选追加CSV行（文件不存在时先写表头）"""
    write_json(path, report.to_dict())
    if csv_path:
        fresh = not os.path.exists(csv_path)
        with open(csv_path, 'a', encoding='utf-8') as f:
            if fresh:
                f.write(report.csv_header() + '\n')
            f.write(report.csv_row() + '\n')


def save_scene(scene, path: str) -> None:
    write_json(path, scene.to_dict())
