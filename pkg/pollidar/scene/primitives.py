"""
场景图元模块

支持平面、球、长方体与三角网格。每个图元带一个刚体位姿（平移 + xyz外旋欧拉角），
相交计算在图元局部坐标系中完成。平面与网格是双面的，法线总是翻向来光方向。
"""

import dataclasses
import os
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from pollidar.core.errors import ConfigurationError, SchemaError
from pollidar.optics.materials import MaterialDB
from pollidar.scene.sensor import SensorConfig

KINDS = ("plane", "sphere", "box", "mesh")

#: 相交的最小正距离（米）
T_EPSILON = 1e-9


@dataclasses.dataclass
class Pose:
    """
    刚体变换 p_world = R·p_local + t

    Attributes:
        translation: 平移（米）
        rotation_deg: xyz外旋欧拉角（度）
    """

    translation: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation_deg: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        self.translation = tuple(float(v) for v in self.translation)
        self.rotation_deg = tuple(float(v) for v in self.rotation_deg)
        self._matrix = Rotation.from_euler("xyz", self.rotation_deg, degrees=True).as_matrix()

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.translation)

    def to_local(self, origins, directions):
        o = (np.asarray(origins) - self.t) @ self._matrix
        d = np.asarray(directions) @ self._matrix
        return o, d

    def to_world_vector(self, v) -> np.ndarray:
        return np.asarray(v) @ self._matrix.T

    def to_dict(self) -> Dict[str, Any]:
        return {"translation": list(self.translation), "rotation_deg": list(self.rotation_deg)}


def _flip_toward(normals, directions):
    facing = np.sum(normals * directions, axis=-1) > 0.0
    return np.where(facing[..., None], -normals, normals)


@dataclasses.dataclass
class ScenePrimitive:
    """
    场景图元

    Attributes:
        kind: plane | sphere | box | mesh
        pose: 位姿
        extent: plane为[宽, 高]（0表示无限），sphere为[半径]，box为[sx, sy, sz]全尺寸，mesh不使用
        material_id: 材质编号
        vertices: mesh的局部顶点 (V, 3)
        faces: mesh的三角面索引 (F, 3)
    """

    kind: str
    pose: Pose
    extent: np.ndarray
    material_id: int
    vertices: Optional[np.ndarray] = None
    faces: Optional[np.ndarray] = None

    def validate(self, where: str = "primitive") -> "ScenePrimitive":
        """
        检查图元是否有限且非退化

        Raises:
            SchemaError: 种类未知或尺寸非法
        """
        if self.kind not in KINDS:
            raise SchemaError(f"{where}: unknown primitive kind {self.kind!r}")
        extent = np.asarray(self.extent, dtype=float)
        if not np.all(np.isfinite(extent)) or not np.all(np.isfinite(self.pose.t)):
            raise SchemaError(f"{where}: extent and pose must be finite")
        if self.kind == "plane" and (extent.shape != (2,) or np.any(extent < 0)):
            raise SchemaError(f"{where}: plane extent must be [width, height] >= 0")
        if self.kind == "sphere" and (extent.size != 1 or extent.ravel()[0] <= 0):
            raise SchemaError(f"{where}: sphere extent must be a positive radius")
        if self.kind == "box" and (extent.shape != (3,) or np.any(extent <= 0)):
            raise SchemaError(f"{where}: box extent must be three positive sizes")
        if self.kind == "mesh":
            if self.vertices is None or self.faces is None or len(self.faces) == 0:
                raise SchemaError(f"{where}: mesh needs vertices and faces")
            v = np.asarray(self.vertices, dtype=float)
            f = np.asarray(self.faces, dtype=int)
            if v.ndim != 2 or v.shape[1] != 3 or f.ndim != 2 or f.shape[1] != 3:
                raise SchemaError(f"{where}: mesh vertices/faces must be (N, 3) arrays")
            if f.min() < 0 or f.max() >= len(v):
                raise SchemaError(f"{where}: mesh face index out of range")
            area = np.linalg.norm(np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]]), axis=1)
            if np.any(area <= 0):
                raise SchemaError(f"{where}: mesh has degenerate triangles")
        self.extent = extent
        return self

    def intersect(self, origins, directions) -> Tuple[np.ndarray, np.ndarray]:
        """
        射线与图元求交

        Args:
            origins: 射线起点 (N, 3)
            directions: 单位射线方向 (N, 3)

        Returns:
            tuple: (t (N,), normal (N, 3))，未命中处t = inf
        """
        return getattr(self, f"_intersect_{self.kind}")(np.asarray(origins, dtype=float),
                                                        np.asarray(directions, dtype=float))

    def _intersect_plane(self, origins, directions):
        o, d = self.pose.to_local(origins, directions)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -o[:, 2] / d[:, 2]
        hit = np.isfinite(t) & (t > T_EPSILON)
        width, height = self.extent
        p = o + t[:, None] * d
        if width > 0:
            hit &= np.abs(p[:, 0]) <= width / 2
        if height > 0:
            hit &= np.abs(p[:, 1]) <= height / 2
        normal = np.broadcast_to(self.pose.to_world_vector([0.0, 0.0, 1.0]), directions.shape)
        return np.where(hit, t, np.inf), _flip_toward(normal, directions)

    def _intersect_sphere(self, origins, directions):
        radius = float(self.extent.ravel()[0])
        oc = origins - self.pose.t
        b = np.sum(oc * directions, axis=1)
        c = np.sum(oc * oc, axis=1) - radius * radius
        disc = b * b - c
        root = np.sqrt(np.maximum(disc, 0.0))
        near = -b - root
        t = np.where(near > T_EPSILON, near, -b + root)
        hit = (disc >= 0.0) & (t > T_EPSILON)
        t = np.where(hit, t, np.inf)
        p = origins + np.where(hit, t, 0.0)[:, None] * directions
        return t, (p - self.pose.t) / radius

    def _intersect_box(self, origins, directions):
        o, d = self.pose.to_local(origins, directions)
        half = self.extent / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-half - o) / d
            t2 = (half - o) / d
        # 平行于某轴且恰在板面上的射线得到nan，该轴不构成约束
        t_near = np.where(np.isnan(t1), -np.inf, np.minimum(t1, t2))
        t_far = np.where(np.isnan(t1), np.inf, np.maximum(t1, t2))
        t_enter = t_near.max(axis=1)
        t_exit = t_far.min(axis=1)
        hit = (t_exit >= np.maximum(t_enter, T_EPSILON))
        entering = t_enter > T_EPSILON
        t = np.where(hit, np.where(entering, t_enter, t_exit), np.inf)
        axis = np.where(entering, t_near.argmax(axis=1), t_far.argmin(axis=1))
        local_normal = np.zeros_like(o)
        rows = np.arange(len(o))
        local_normal[rows, axis] = -np.sign(d[rows, axis])
        return t, _flip_toward(self.pose.to_world_vector(local_normal), directions)

    def _intersect_mesh(self, origins, directions):
        o, d = self.pose.to_local(origins, directions)
        v = np.asarray(self.vertices, dtype=float)
        best_t = np.full(len(o), np.inf)
        best_n = np.zeros_like(o)
        for face in np.asarray(self.faces, dtype=int):
            v0, v1, v2 = v[face]
            edge1, edge2 = v1 - v0, v2 - v0
            pvec = np.cross(d, edge2)
            det = pvec @ edge1
            valid = np.abs(det) > 1e-15
            inv_det = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
            tvec = o - v0
            u = np.sum(tvec * pvec, axis=1) * inv_det
            qvec = np.cross(tvec, edge1)
            w = np.sum(qvec * d, axis=1) * inv_det
            t = (qvec @ edge2) * inv_det
            hit = valid & (u >= 0) & (w >= 0) & (u + w <= 1) & (t > T_EPSILON) & (t < best_t)
            best_t = np.where(hit, t, best_t)
            normal = np.cross(edge1, edge2)
            best_n[hit] = normal / np.linalg.norm(normal)
        world_n = self.pose.to_world_vector(best_n)
        return best_t, _flip_toward(world_n, directions)

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind, "pose": self.pose.to_dict(),
                "extent": np.asarray(self.extent).tolist(), "material_id": int(self.material_id)}
        if self.kind == "mesh":
            data["vertices"] = np.asarray(self.vertices).tolist()
            data["faces"] = np.asarray(self.faces).tolist()
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], where: str = "primitive") -> "ScenePrimitive":
        if not isinstance(data, Mapping):
            raise SchemaError(f"{where}: primitive must be a JSON object")
        for key in ("kind", "material_id"):
            if key not in data:
                raise SchemaError(f"{where}: missing field {key!r}")
        pose_data = data.get("pose", {})
        try:
            pose = Pose(translation=pose_data.get("translation", (0.0, 0.0, 0.0)),
                        rotation_deg=pose_data.get("rotation_deg", (0.0, 0.0, 0.0)))
            extent = np.atleast_1d(np.asarray(data.get("extent", [0.0, 0.0]), dtype=float))
            primitive = cls(kind=str(data["kind"]), pose=pose, extent=extent,
                            material_id=int(data["material_id"]),
                            vertices=None if data.get("vertices") is None else np.asarray(data["vertices"], float),
                            faces=None if data.get("faces") is None else np.asarray(data["faces"], int))
        except (TypeError, ValueError, AttributeError) as e:
            raise SchemaError(f"{where}: {e}") from e
        return primitive.validate(where)


@dataclasses.dataclass
class Scene:
    """
    场景：图元列表 + 材质库 + 可选的传感器配置
    """

    primitives: List[ScenePrimitive]
    materials: MaterialDB
    sensor: Optional[SensorConfig] = None
    schema: int = 1

    def validate(self, mesh_support: bool = True) -> "Scene":
        """
        检查图元与材质引用

        Raises:
            SchemaError: 图元非法、引用了不存在的材质或未启用网格支持
        """
        for i, primitive in enumerate(self.primitives):
            where = f"primitives[{i}] ({primitive.kind})"
            primitive.validate(where)
            if primitive.kind == "mesh" and not mesh_support:
                raise SchemaError(f"{where}: mesh primitives are disabled (scene.mesh_support=false)")
            if primitive.material_id not in self.materials:
                raise SchemaError(f"{where} references unknown material_id {primitive.material_id}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = {"schema": self.schema}
        if self.sensor is not None:
            data["sensor"] = self.sensor.to_dict()
        data["materials"] = self.materials.to_dict()["materials"]
        data["primitives"] = [p.to_dict() for p in self.primitives]
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str = ".",
                  mesh_support: bool = True) -> "Scene":
        """
        从场景JSON字典构建

        Args:
            data: 场景字典，必须含"schema": 1
            base_dir (str): materials为路径时的相对目录
            mesh_support (bool): 是否允许网格图元

        Raises:
            SchemaError: 模式不符
        """
        if not isinstance(data, Mapping):
            raise SchemaError("scene root must be a JSON object")
        if data.get("schema") != 1:
            raise SchemaError(f"unsupported scene schema {data.get('schema')!r}, expected 1")
        materials_block = data.get("materials")
        if materials_block is None:
            materials = MaterialDB.default()
        elif isinstance(materials_block, str):
            materials = MaterialDB.from_file(os.path.join(base_dir, materials_block))
        else:
            materials = MaterialDB.from_dict(materials_block, where="materials")
        sensor = None
        if data.get("sensor") is not None:
            try:
                sensor = SensorConfig.from_dict(data["sensor"])
            except ConfigurationError as e:
                raise SchemaError(f"sensor: {e}") from e
        raw = data.get("primitives", [])
        if not isinstance(raw, list):
            raise SchemaError("primitives must be a list")
        primitives = [ScenePrimitive.from_dict(p, f"primitives[{i}]") for i, p in enumerate(raw)]
        return cls(primitives, materials, sensor).validate(mesh_support)
