"""
材质库测试模块
"""

import json
import os
import tempfile
import unittest

import numpy as np

from pollidar.core.errors import SchemaError
from pollidar.optics.materials import Material, MaterialDB


class TestMaterialDB(unittest.TestCase):
    """MaterialDB类的测试类"""

    def test_default(self):
        """测试随包材质"""
        db = MaterialDB.default()
        self.assertEqual(db.ids(), [1, 2, 3, 4, 5])
        self.assertEqual(db.by_name("glass").material_id, 3)
        for material in db:
            self.assertGreater(material.eta, 1.0)

    def test_from_dict(self):
        """测试两种字典写法"""
        flat = MaterialDB.from_dict({"7": {"eta": 1.4, "name": "test"}})
        nested = MaterialDB.from_dict({"schema": 1, "materials": {"7": {"eta": 1.4, "name": "test"}}})
        self.assertEqual(flat[7].eta, 1.4)
        self.assertEqual(nested[7].name, "test")

    def test_invalid(self):
        """测试模式错误"""
        with self.assertRaises(SchemaError):
            MaterialDB.from_dict({"1": {"eta": 0.9}})
        with self.assertRaises(SchemaError):
            MaterialDB.from_dict({"1": {"colour": "red"}})
        with self.assertRaises(SchemaError):
            MaterialDB.from_dict({"one": {"eta": 1.5}})
        db = MaterialDB.from_dict({"1": {}})
        with self.assertRaises(SchemaError):
            db.add(Material(material_id=1))

    def test_gather(self):
        """测试按编号数组收集参数"""
        db = MaterialDB.default()
        ids = np.array([[1, 3], [5, 1]])
        gathered = db.gather(ids)
        self.assertEqual(gathered.eta.shape, (2, 2))
        self.assertEqual(gathered.eta[0, 1], db[3].eta)
        self.assertEqual(gathered.diff_tau[1, 0], db[5].diff_tau)
        with self.assertRaises(SchemaError):
            db.gather(np.array([9]))

    def test_file_round_trip(self):
        """测试保存后重新加载"""
        db = MaterialDB.default()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "materials.json")
            db.save(path)
            loaded = MaterialDB.from_file(path)
            self.assertEqual(loaded.to_dict(), db.to_dict())
            with open(path, 'w', encoding='utf-8') as f:
                f.write('{"materials": {\n  "1": {"eta": }\n}}')
            with self.assertRaises(SchemaError) as ctx:
                MaterialDB.from_file(path)
            self.assertEqual(ctx.exception.line, 2)


if __name__ == "__main__":
    unittest.main()
