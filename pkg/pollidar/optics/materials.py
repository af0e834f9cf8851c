"""
材质模块

定义Material与MaterialDB。MaterialDB可以从JSON文件、内联字典或随包默认数据加载。
"""

import dataclasses
import json
import os
from typing import Any, Dict, Iterator, Mapping, Optional

import numpy as np

from pollidar.core.errors import SchemaError

DEFAULT_MATERIALS_PATH = os.path.join(os.path.dirname(__file__), "data", "default_materials.json")

#: 可拟合的材质参数及其在参数向量中的顺序
FIT_FIELDS = ("eta", "roughness", "spec_depol", "diff_depol", "diffuse_albedo")


@dataclasses.dataclass
class Material:
    """
    时间-偏振反射模型的材质参数

    字段也可以是逐交点的numpy数组（见MaterialDB.gather），此时不做范围检查，
    pbrdf中的函数对两种形式都适用。

    Attributes:
        eta: 折射率，> 1
        roughness: 微表面粗糙度m，(0, 1]
        spec_depol: 镜面退偏幅度|D^s|，[0, 1]
        diff_depol: 漫反射退偏幅度|D^d|，[0, 1]
        diff_tau: 漫反射时间常数（ns），> 0
        diffuse_albedo: 漫反射率，[0, 1]
        specular_albedo: 镜面反射率，[0, 1]
        material_id: 材质编号
        name: 可读名称
    """

    eta: Any = 1.5
    roughness: Any = 0.3
    spec_depol: Any = 1.0
    diff_depol: Any = 0.0
    diff_tau: Any = 0.05
    diffuse_albedo: Any = 0.5
    specular_albedo: Any = 1.0
    material_id: int = 0
    name: str = ""

    def validate(self, where: Optional[str] = None) -> "Material":
        """
        检查参数范围

        Args:
            where (str, optional): 出错时报告的位置

        Returns:
            Material: self

        Raises:
            SchemaError: 任一参数越界
        """
        checks = [
            ("eta", self.eta > 1.0, "> 1"),
            ("roughness", 0.0 < self.roughness <= 1.0, "in (0, 1]"),
            ("spec_depol", 0.0 <= self.spec_depol <= 1.0, "in [0, 1]"),
            ("diff_depol", 0.0 <= self.diff_depol <= 1.0, "in [0, 1]"),
            ("diff_tau", self.diff_tau > 0.0, "> 0"),
            ("diffuse_albedo", 0.0 <= self.diffuse_albedo <= 1.0, "in [0, 1]"),
            ("specular_albedo", 0.0 <= self.specular_albedo <= 1.0, "in [0, 1]"),
        ]
        for field, ok, rule in checks:
            if not ok:
                raise SchemaError(f"material {self.material_id} field {field}={getattr(self, field)} must be {rule}",
                                  path=where)
        return self

    def replace(self, **changes) -> "Material":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data.pop("material_id")
        return data

    @classmethod
    def from_dict(cls, material_id: int, data: Mapping[str, Any], where: Optional[str] = None) -> "Material":
        known = {f.name for f in dataclasses.fields(cls)} - {"material_id"}
        unknown = set(data) - known
        if unknown:
            raise SchemaError(f"material {material_id} has unknown fields {sorted(unknown)}", path=where)
        try:
            values = {k: (v if k == "name" else float(v)) for k, v in data.items()}
        except (TypeError, ValueError) as e:
            raise SchemaError(f"material {material_id}: {e}", path=where) from e
        return cls(material_id=int(material_id), **values).validate(where)


class MaterialDB:
    """
    材质库：material_id → Material

    支持以下加载方式::

        db = MaterialDB.default()
        db = MaterialDB.from_file("materials.json")
        db = MaterialDB.from_dict({"1": {"eta": 1.5, ...}})
    """

    def __init__(self, materials: Optional[Mapping[int, Material]] = None):
        self._materials: Dict[int, Material] = {}
        for material in (materials or {}).values():
            self.add(material)

    def add(self, material: Material) -> "MaterialDB":
        """
        添加材质

        Raises:
            SchemaError: material_id重复
        """
        if material.material_id in self._materials:
            raise SchemaError(f"duplicate material_id {material.material_id}")
        self._materials[material.material_id] = material
        return self

    def __getitem__(self, material_id: int) -> Material:
        return self._materials[int(material_id)]

    def __contains__(self, material_id) -> bool:
        return int(material_id) in self._materials

    def __iter__(self) -> Iterator[Material]:
        return iter(self._materials[k] for k in sorted(self._materials))

    def __len__(self) -> int:
        return len(self._materials)

    def ids(self):
        return sorted(self._materials)

    def by_name(self, name: str) -> Material:
        for material in self:
            if material.name == name:
                return material
        raise KeyError(name)

    def gather(self, material_ids) -> Material:
        """
        按编号数组收集逐元素参数，返回字段为数组的Material

        Args:
            material_ids: 整数数组

        Returns:
            Material: 每个字段与material_ids同形状
        """
        material_ids = np.asarray(material_ids, dtype=int)
        ids = np.array(self.ids(), dtype=int)
        if ids.size == 0:
            raise SchemaError("material database is empty")
        index = np.clip(np.searchsorted(ids, material_ids), 0, ids.size - 1)
        unknown = material_ids[ids[index] != material_ids]
        if unknown.size:
            raise SchemaError(f"unknown material_id {int(unknown.flat[0])}")
        columns = {}
        for field in ("eta", "roughness", "spec_depol", "diff_depol", "diff_tau",
                      "diffuse_albedo", "specular_albedo"):
            table = np.array([getattr(self._materials[k], field) for k in ids], dtype=float)
            columns[field] = table[index]
        return Material(material_id=-1, name="gathered", **columns)

    def to_dict(self) -> Dict[str, Any]:
        return {"schema": 1, "materials": {str(m.material_id): m.to_dict() for m in self}}

    def save(self, path: str) -> None:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], where: Optional[str] = None) -> "MaterialDB":
        """
        从字典构建材质库，接受{"materials": {...}}或直接的编号映射
        """
        if not isinstance(data, Mapping):
            raise SchemaError("materials block must be a JSON object", path=where)
        if "materials" in data:
            table = data["materials"]
        else:
            table = {k: v for k, v in data.items() if k != "schema"}
        if not isinstance(table, Mapping):
            raise SchemaError("materials must map material_id to fields", path=where)
        db = cls()
        for key, fields in table.items():
            try:
                material_id = int(key)
            except ValueError as e:
                raise SchemaError(f"material_id must be an integer, got {key!r}", path=where) from e
            if not isinstance(fields, Mapping):
                raise SchemaError(f"material {key} must be a JSON object", path=where)
            db.add(Material.from_dict(material_id, fields, where))
        return db

    @classmethod
    def from_file(cls, path: str) -> "MaterialDB":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from e
        except OSError as e:
            raise SchemaError(f"cannot read material database: {e}", path=path) from e
        return cls.from_dict(data, where=path)

    @classmethod
    def default(cls) -> "MaterialDB":
        """随包提供的默认材质：沥青、喷漆金属、玻璃、植被、混凝土"""
        return cls.from_file(DEFAULT_MATERIALS_PATH)
