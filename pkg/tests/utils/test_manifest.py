"""
运行清单测试模块
"""

import json
import os
import tempfile
import unittest

import pollidar
from pollidar.utils.manifest import MANIFEST_NAME, RunManifest, file_digest, verify_manifest


class TestRunManifest(unittest.TestCase):
    """RunManifest的测试类"""

    def test_finish(self):
        """测试清单内容与哈希校验"""
        with tempfile.TemporaryDirectory() as tmp:
            os.makedirs(os.path.join(tmp, "gt"))
            out = os.path.join(tmp, "gt", "distance.pfm")
            with open(out, 'wb') as f:
                f.write(b"payload")
            manifest = RunManifest.start("simulate", [None, "config.json"], {"noise": 3})
            manifest.add_output(out, tmp)
            path = manifest.finish(tmp)
            self.assertEqual(os.path.basename(path), MANIFEST_NAME)
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
            self.assertEqual(data["command"], "simulate")
            self.assertEqual(data["config_paths"], ["config.json"])
            self.assertEqual(data["seeds"], {"noise": 3})
            self.assertEqual(data["tool_version"], pollidar.__version__)
            self.assertEqual(data["outputs"], {"gt/distance.pfm": file_digest(out)})
            self.assertEqual(verify_manifest(tmp), {"gt/distance.pfm": True})

            with open(out, 'ab') as f:
                f.write(b"!")
            self.assertEqual(verify_manifest(tmp), {"gt/distance.pfm": False})


if __name__ == "__main__":
    unittest.main()
