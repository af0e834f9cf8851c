"""
操作符日志工具测试模块
"""

import dataclasses
import json
import os
import tempfile
import unittest

import numpy as np

from pollidar.core import Operator
from pollidar.utils import operator_utils
from pollidar.utils.config import Config
from pollidar.utils.operator_utils import configure_operator_io, enable_operator_io_logging, summarize


@dataclasses.dataclass
class Artifact:
    data: np.ndarray
    method: str


class EchoOperator(Operator):
    def process_item(self, frame):
        return dict(frame, echoed=True)


class TestOperatorUtils(unittest.TestCase):
    """log_io与summarize的测试类"""

    def tearDown(self):
        enable_operator_io_logging(False)

    def test_summarize_array(self):
        """测试数组只输出形状与数值范围"""
        summary = summarize(np.array([[1.0, np.nan], [3.0, -2.0]]))
        self.assertEqual(summary["shape"], [2, 2])
        self.assertEqual(summary["min"], -2.0)
        self.assertEqual(summary["max"], 3.0)

    def test_summarize_nested(self):
        """测试数据类与字典"""
        summary = summarize({"a": Artifact(np.zeros(3), "pca"), "n": 3, "items": list(range(20))})
        self.assertEqual(summary["a"]["type"], "Artifact")
        self.assertEqual(summary["a"]["method"], "pca")
        self.assertEqual(summary["a"]["data"]["shape"], [3])
        self.assertEqual(summary["items"], {"type": "list", "len": 20})

    def test_io_logging(self):
        """测试开启后记录输入与输出"""
        enable_operator_io_logging(True)
        with self.assertLogs("pollidar.operator_io", level="INFO") as logs:
            result = EchoOperator().process({"cube": np.ones((2, 2))})
        self.assertTrue(result["echoed"])
        self.assertTrue(any("EchoOperator" in line and "echoed" in line for line in logs.output))

    def test_truncate(self):
        """测试截断长度"""
        operator_utils.set_io_log_truncate_length(20)
        try:
            text = operator_utils._render({"key": "x" * 100})
        finally:
            operator_utils.set_io_log_truncate_length(1000)
        self.assertTrue(text.endswith("... (truncated)"))

    def test_configure_from_file(self):
        """测试从配置文件读取logging节"""
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, "config.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"logging": {"show_operator_io": True, "truncate_length": 50}}, f)
            configure_operator_io(Config(path, use_env=False))
        try:
            with self.assertLogs("pollidar.operator_io", level="INFO") as logs:
                EchoOperator().process({"cube": np.ones((2, 2))})
            self.assertTrue(all(len(line) < 200 for line in logs.output))
            self.assertTrue(any(line.endswith("... (truncated)") for line in logs.output))
        finally:
            operator_utils.set_io_log_truncate_length(1000)
        configure_operator_io(Config(use_env=False))
        self.assertFalse(operator_utils._config.get("logging.show_operator_io"))


if __name__ == "__main__":
    unittest.main()
