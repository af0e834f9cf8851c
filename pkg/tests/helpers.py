"""
测试用的小型传感器与场景
"""

import numpy as np

from pollidar.optics.materials import Material, MaterialDB
from pollidar.scene.primitives import Pose, Scene, ScenePrimitive
from pollidar.scene.sensor import LIGHT_SPEED, SensorConfig

#: 400个1 ns的bin覆盖约60米
SMALL_BINS = 400
SMALL_RANGE = SMALL_BINS * LIGHT_SPEED / 2.0


def small_sensor(rows=5, cols=5, fov_deg=2.0, subrays=1, **overrides) -> SensorConfig:
    """视场很小、每像素一条光线的传感器"""
    fields = dict(rows=rows, cols=cols, vfov_deg=fov_deg * rows / cols, hfov_deg=fov_deg, bins=SMALL_BINS,
                  max_range_m=SMALL_RANGE, beam_subrays=subrays)
    fields.update(overrides)
    return SensorConfig(**fields)


def make_materials(**fields) -> MaterialDB:
    """只含编号1的材质库"""
    values = dict(eta=1.5, roughness=0.3, spec_depol=0.8, diff_depol=0.6, diff_tau=0.05,
                  diffuse_albedo=0.5, specular_albedo=1.0)
    values.update(fields)
    return MaterialDB({1: Material(material_id=1, name="test", **values).validate()})


def plane_scene(distance=30.0, tilt_deg=0.0, materials=None, sensor=None) -> Scene:
    """光轴上距离distance处、绕y轴倾斜tilt_deg的平面"""
    plane = ScenePrimitive("plane", Pose((0.0, 0.0, distance), (0.0, tilt_deg, 0.0)), np.array([0.0, 0.0]), 1)
    return Scene([plane], materials or make_materials(), sensor).validate()


def sphere_scene(distance=20.0, radius=1.0, materials=None, sensor=None) -> Scene:
    sphere = ScenePrimitive("sphere", Pose((0.0, 0.0, distance)), np.array([radius]), 1)
    return Scene([sphere], materials or make_materials(), sensor).validate()


def tilted_normal(tilt_deg: float) -> np.ndarray:
    """plane_scene中倾斜平面的朝向传感器的法线"""
    t = np.deg2rad(tilt_deg)
    return np.array([-np.sin(t), 0.0, -np.cos(t)])


def render_scene(scene: Scene, sensor: SensorConfig, schedule=None, adc_gain: float = 1.0e7, threads=None):
    """无噪声渲染，返回(cube, scene_maps)"""
    from pollidar.operators.simulate.render import RenderOperator
    from pollidar.operators.simulate.schedule import default_schedule

    frame = RenderOperator(schedule or default_schedule(), sensor, adc_gain, threads).process({"scene": scene})
    return frame["cube"], frame["scene_maps"]


def mixed_scene():
    """
    平面与小球的混合场景

    18米处半径0.3米的小球（τ_d = 0.02 ns）占据3×6传感器的左三列，
    右三列看到22米处倾斜40°的平面（τ_d = 0.3 ns）。

    Returns:
        tuple: (Scene, SensorConfig)
    """
    sensor = small_sensor(rows=3, cols=6, fov_deg=3.0)
    materials = MaterialDB({
        1: Material(material_id=1, name="plane", eta=1.5, roughness=0.3, spec_depol=0.8, diff_depol=0.6,
                    diff_tau=0.3, diffuse_albedo=0.5, specular_albedo=1.0).validate(),
        2: Material(material_id=2, name="sphere", eta=1.45, roughness=0.4, spec_depol=0.7, diff_depol=0.5,
                    diff_tau=0.02, diffuse_albedo=0.55, specular_albedo=1.0).validate(),
    })
    plane = ScenePrimitive("plane", Pose((0.0, 0.0, 22.0), (0.0, 40.0, 0.0)), np.array([0.0, 0.0]), 1)
    sphere = ScenePrimitive("sphere", Pose((-0.236, 0.0, 18.0)), np.array([0.3]), 2)
    return Scene([plane, sphere], materials, sensor).validate(), sensor
