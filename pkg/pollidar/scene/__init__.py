"""
场景模块

包含传感器网格、场景图元、光线投射与程序化场景生成。
"""

from pollidar.scene.sensor import SensorConfig, LIGHT_SPEED
from pollidar.scene.primitives import Pose, ScenePrimitive, Scene
from pollidar.scene.raycast import SceneMaps, HitRecords, cast_rays, intersect_scene
from pollidar.scene.generator import generate_scene, TEMPLATES

__all__ = [
    'SensorConfig',
    'LIGHT_SPEED',
    'Pose',
    'ScenePrimitive',
    'Scene',
    'SceneMaps',
    'HitRecords',
    'cast_rays',
    'intersect_scene',
    'generate_scene',
    'TEMPLATES',
]
