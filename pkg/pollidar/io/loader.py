"""
数据加载模块

读取场景JSON与saver模块写出的二进制格式。场景中的模式错误带有文件路径与行号。
"""

import json
import os
import re
from typing import Any, Dict, Optional, Tuple

import numpy as np

from pollidar.core.errors import ConfigurationError, SchemaError
from pollidar.io.saver import (
    CUBE_HEADER, CUBE_MAGIC, FEATURE_HEADER, FEATURE_MAGIC, MUELLER_HEADER, MUELLER_MAGIC,
    cube_header_size, sidecar_path,
)
from pollidar.operators.reconstruct.maps import ReconMaps
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.operators.simulate.schedule import AngleSchedule
from pollidar.scene.primitives import Scene
from pollidar.scene.raycast import SceneMaps
from pollidar.scene.sensor import SensorConfig
from pollidar.utils.logger import get_logger

logger = get_logger(__name__)

_PRIMITIVE_PATH = re.compile(r"^primitives\[(\d+)\]")


def _line_of(text: str, position: int) -> int:
    return text.count('\n', 0, position) + 1


def _primitive_line(text: str, index: int) -> Optional[int]:
    """定位primitives数组第index个元素在文本中的行号"""
    match = re.search(r'"primitives"\s*:\s*\[', text)
    if match is None:
        return None
    decoder = json.JSONDecoder()
    position = match.end()
    for i in range(index + 1):
        while position < len(text) and text[position] in " \t\r\n,":
            position += 1
        if i == index:
            return _line_of(text, position)
        try:
            _, position = decoder.raw_decode(text, position)
        except json.JSONDecodeError:
            return None
    return None


def load_scene(path: str, mesh_support: bool = True) -> Scene:
    """
    加载场景JSON

    Args:
        path (str): 场景文件路径
        mesh_support (bool): 是否允许网格图元

    Returns:
        Scene: 校验后的场景

    Raises:
        SchemaError: JSON非法或模式不符，消息包含路径与行号
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise SchemaError(f"cannot read scene: {e}", path) from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", path, e.lineno) from e
    try:
        return Scene.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)), mesh_support=mesh_support)
    except SchemaError as e:
        message = str(e)
        match = _PRIMITIVE_PATH.match(message)
        line = _primitive_line(text, int(match.group(1))) if match else None
        raise SchemaError(message, path, line) from e


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", path, e.lineno) from e
    except OSError as e:
        raise SchemaError(f"cannot read file: {e}", path) from e


def _check_magic(path: str, found: bytes, expected: bytes) -> None:
    if found != expected:
        raise SchemaError(f"bad magic {found!r}, expected {expected!r}", path)


def load_cube(path: str, mmap: bool = True) -> WavefrontCube:
    """
    加载PWF1波前立方体

    Args:
        path (str): 立方体文件路径
        mmap (bool): 以只读memmap打开数据

    Returns:
        WavefrontCube: 立方体，传感器与元数据来自侧车

    Raises:
        SchemaError: 头部非法或文件长度不符
    """
    with open(path, 'rb') as f:
        head = f.read(CUBE_HEADER.size)
        if len(head) < CUBE_HEADER.size:
            raise SchemaError("truncated cube header", path)
        magic, version, states, rows, cols, bins, bin_width, t0 = CUBE_HEADER.unpack(head)
        _check_magic(path, magic, CUBE_MAGIC)
        if version != 1:
            raise SchemaError(f"unsupported cube version {version}", path)
        angles = np.frombuffer(f.read(8 * 4 * states), dtype='<f8').reshape(states, 4)
        laser = np.frombuffer(f.read(8 * 4), dtype='<f8')
    offset = cube_header_size(states)
    shape = (states, rows, cols, bins)
    expected = offset + int(np.prod(shape)) * 4
    if os.path.getsize(path) != expected:
        raise SchemaError(f"cube file has {os.path.getsize(path)} bytes, expected {expected}", path)

    sidecar = read_json(sidecar_path(path)) if os.path.exists(sidecar_path(path)) else {}
    sensor_fields = dict(sidecar.get("sensor", {}))
    sensor_fields.update(rows=rows, cols=cols, bins=bins, bin_width_ns=bin_width, t0_offset_ns=t0)
    sensor = SensorConfig.from_dict(sensor_fields)
    schedule = AngleSchedule.from_array(angles, laser)
    meta = dict(sidecar.get("meta", {}))
    meta.setdefault("adc_gain", sidecar.get("adc_gain", 1.0))
    if mmap:
        data = np.memmap(path, dtype='<f4', mode='r', offset=offset, shape=shape)
    else:
        data = np.fromfile(path, dtype='<f4', offset=offset).reshape(shape)
    return WavefrontCube(data, schedule, sensor, meta)


def load_mueller(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    加载PMM1

    Returns:
        tuple: (h_meas (H, W, L, 16), residual (H, W))
    """
    with open(path, 'rb') as f:
        magic, version, rows, cols, window = MUELLER_HEADER.unpack(f.read(MUELLER_HEADER.size))
        _check_magic(path, magic, MUELLER_MAGIC)
        h_meas = np.frombuffer(f.read(rows * cols * window * 16 * 4), dtype='<f4')
        residual = np.frombuffer(f.read(rows * cols * 4), dtype='<f4')
    if h_meas.size != rows * cols * window * 16 or residual.size != rows * cols:
        raise SchemaError("truncated Mueller movie", path)
    return (h_meas.reshape(rows, cols, window, 16).astype(np.float64),
            residual.reshape(rows, cols).astype(np.float64))


def load_features(path: str) -> np.ndarray:
    """加载PFX1，返回(H, W, C) float32"""
    with open(path, 'rb') as f:
        magic, rows, cols, channels = FEATURE_HEADER.unpack(f.read(FEATURE_HEADER.size))
        _check_magic(path, magic, FEATURE_MAGIC)
        data = np.frombuffer(f.read(), dtype='<f4')
    if data.size != rows * cols * channels:
        raise SchemaError("truncated feature tensor", path)
    return data.reshape(rows, cols, channels)


def load_raster(path: str) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    加载PFM栅格及其侧车

    Returns:
        tuple: (栅格 (H, W) 或 (H, W, 3), 侧车字典)
    """
    with open(path, 'rb') as f:
        kind = f.readline().strip()
        dims = f.readline().split()
        scale = float(f.readline())
        payload = f.read()
    if kind not in (b"PF", b"Pf") or len(dims) != 2:
        raise SchemaError("not a PFM raster", path)
    cols, rows = int(dims[0]), int(dims[1])
    channels = 3 if kind == b"PF" else 1
    dtype = '<f4' if scale < 0 else '>f4'
    data = np.frombuffer(payload, dtype=dtype)
    if data.size != rows * cols * channels:
        raise SchemaError("truncated PFM raster", path)
    shape = (rows, cols, 3) if channels == 3 else (rows, cols)
    raster = data.reshape(shape)[::-1].astype(np.float64)
    sidecar = read_json(sidecar_path(path)) if os.path.exists(sidecar_path(path)) else {}
    return raster, sidecar


def _raster(directory: str, name: str, required: bool = True) -> Optional[np.ndarray]:
    path = os.path.join(directory, f"{name}.pfm")
    if not os.path.exists(path):
        if required:
            raise ConfigurationError(f"missing raster {path}")
        return None
    return load_raster(path)[0]


def load_scene_maps(directory: str) -> SceneMaps:
    """加载save_scene_maps写出的真值目录"""
    return SceneMaps(_raster(directory, "distance"), _raster(directory, "normal"),
                     _raster(directory, "material_id").astype(np.int64), _raster(directory, "cos_phi"),
                     _raster(directory, "confidence").astype(np.uint8))


def load_recon(directory: str) -> ReconMaps:
    """加载save_recon写出的重建目录"""
    distance = _raster(directory, "distance")
    normal = _raster(directory, "normal")
    confidence = _raster(directory, "confidence", required=False)
    residual = _raster(directory, "residual", required=False)
    sidecar = {}
    path = os.path.join(directory, "distance.pfm")
    if os.path.exists(sidecar_path(path)):
        sidecar = read_json(sidecar_path(path))
    return ReconMaps(distance, normal, {}, residual,
                     None if confidence is None else confidence.astype(np.uint8),
                     {}, sidecar.get("method", ""))
