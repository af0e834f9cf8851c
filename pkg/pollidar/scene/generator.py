"""
程序化场景生成

模板：
    road      地面 + 1–10个车辆/障碍物（长方体或球）+ 一根细杆
    lot       地面 + 停放车辆 + 远处正对传感器的混凝土墙 + 细杆
    lostcargo 地面 + 50米处路面上的0.5米货箱 + 细杆 + 远处少量球体

同一种子生成逐位相同的场景。
"""

from typing import Callable, Dict, List, Optional

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.optics.materials import MaterialDB
from pollidar.scene.primitives import Pose, Scene, ScenePrimitive
from pollidar.scene.sensor import SensorConfig

#: 传感器离地高度（米），地面在相机坐标系y = +SENSOR_HEIGHT处
SENSOR_HEIGHT = 1.8
POLE_WIDTH = 0.04
POLE_HEIGHT = 6.0
CARGO_SIZE = 0.5
CARGO_RANGE = 50.0

TEMPLATES = ("road", "lot", "lostcargo")


def _material(db: MaterialDB, name: str, fallback: int) -> int:
    try:
        return db.by_name(name).material_id
    except KeyError:
        return fallback if fallback in db else db.ids()[0]


def _ground(db: MaterialDB) -> ScenePrimitive:
    return ScenePrimitive("plane", Pose((0.0, SENSOR_HEIGHT, 0.0), (90.0, 0.0, 0.0)),
                          np.array([0.0, 0.0]), _material(db, "asphalt", 1))


def _box_on_ground(x, z, size, yaw_deg, material_id) -> ScenePrimitive:
    sx, sy, sz = size
    return ScenePrimitive("box", Pose((x, SENSOR_HEIGHT - sy / 2.0, z), (0.0, yaw_deg, 0.0)),
                          np.array([sx, sy, sz], dtype=float), material_id)


def _sphere_on_ground(x, z, radius, material_id) -> ScenePrimitive:
    return ScenePrimitive("sphere", Pose((x, SENSOR_HEIGHT - radius, z)), np.array([radius]), material_id)


def _lateral(rng, z, half_fov) -> float:
    return float(rng.uniform(-0.7, 0.7) * z * np.tan(half_fov))


def _pole(rng, db, half_fov) -> ScenePrimitive:
    z = float(rng.uniform(15.0, 30.0))
    x = float(rng.uniform(0.3, 0.6) * z * np.tan(half_fov))
    return _box_on_ground(x, z, (POLE_WIDTH, POLE_HEIGHT, POLE_WIDTH), 0.0, _material(db, "painted_metal", 2))


def _obstacle(rng, db, object_ids, half_fov, z_range=(5.0, 100.0)) -> ScenePrimitive:
    z = float(rng.uniform(*z_range))
    x = _lateral(rng, z, half_fov)
    material_id = int(rng.choice(object_ids))
    if rng.random() < 0.7:
        size = (rng.uniform(1.6, 2.0), rng.uniform(1.4, 1.8), rng.uniform(3.8, 4.8))
        return _box_on_ground(x, z, size, float(rng.uniform(-20.0, 20.0)), material_id)
    return _sphere_on_ground(x, z, float(rng.uniform(0.3, 1.0)), material_id)


def _road(rng, db, object_ids, half_fov) -> List[ScenePrimitive]:
    count = int(rng.integers(1, 11))
    objects = [_obstacle(rng, db, object_ids, half_fov) for _ in range(count)]
    return objects + [_pole(rng, db, half_fov)]


def _lot(rng, db, object_ids, half_fov) -> List[ScenePrimitive]:
    count = int(rng.integers(1, 10))
    objects = []
    for i in range(count):
        z = 10.0 + 6.0 * (i // 3) + float(rng.uniform(-0.5, 0.5))
        x = (i % 3 - 1) * 2.6
        size = (rng.uniform(1.6, 2.0), rng.uniform(1.4, 1.8), rng.uniform(3.8, 4.8))
        objects.append(_box_on_ground(x, z, size, float(rng.uniform(-5.0, 5.0)), int(rng.choice(object_ids))))
    wall_z = float(rng.uniform(70.0, 100.0))
    wall = ScenePrimitive("plane", Pose((0.0, SENSOR_HEIGHT - 5.0, wall_z)), np.array([80.0, 10.0]),
                          _material(db, "concrete", 5))
    return objects + [wall, _pole(rng, db, half_fov)]


def _lostcargo(rng, db, object_ids, half_fov) -> List[ScenePrimitive]:
    cargo = _box_on_ground(0.0, CARGO_RANGE, (CARGO_SIZE,) * 3, 0.0, int(rng.choice(object_ids)))
    spheres = [_sphere_on_ground(_lateral(rng, z, half_fov), z, float(rng.uniform(0.3, 1.0)),
                                 int(rng.choice(object_ids)))
               for z in rng.uniform(70.0, 100.0, size=int(rng.integers(0, 3)))]
    return [cargo, _pole(rng, db, half_fov)] + spheres


_BUILDERS: Dict[str, Callable] = {"road": _road, "lot": _lot, "lostcargo": _lostcargo}


def generate_scene(seed: int, template: str = "road", materials: Optional[MaterialDB] = None,
                   sensor: Optional[SensorConfig] = None) -> Scene:
    """
    生成确定性的伪随机场景

    Args:
        seed (int): 随机种子
        template (str): road | lot | lostcargo
        materials (MaterialDB, optional): 材质库，默认使用随包材质
        sensor (SensorConfig, optional): 写入场景的传感器配置

    Returns:
        Scene: 场景（第一个图元总是地面）

    Raises:
        ConfigurationError: 未知模板
    """
    if template not in _BUILDERS:
        raise ConfigurationError(f"unknown scene template {template!r}, expected one of {TEMPLATES}")
    db = materials or MaterialDB.default()
    sensor = sensor or SensorConfig()
    rng = np.random.default_rng(seed)
    half_fov = np.deg2rad(sensor.hfov_deg) / 2.0
    ground_id = _material(db, "asphalt", 1)
    object_ids = [k for k in db.ids() if k != ground_id] or [ground_id]
    primitives = [_ground(db)] + _BUILDERS[template](rng, db, object_ids, half_fov)
    return Scene(primitives, db, sensor).validate()
