"""
操作符测试模块

该模块包含对Operator基类及其子类的单元测试。
"""

import unittest

from pollidar.core import ConfigurationError, Operator, PhysicsOperator, ReconstructionOperator


class TestOperator(unittest.TestCase):
    """Operator基类的测试类"""

    def test_init(self):
        """测试Operator初始化"""
        # 使用默认值
        op = StampOperator()
        self.assertEqual(op.name, "StampOperator")
        self.assertEqual(op.description, "StampOperator operator")

        # 指定名称和描述
        op = StampOperator(name="Stamp", description="stamps frames")
        self.assertEqual(op.name, "Stamp")
        self.assertEqual(op.description, "stamps frames")

    def test_call(self):
        """测试__call__方法"""
        op = StampOperator()
        result = op({"cube": 1})
        self.assertEqual(result, {"cube": 1, "processed": True})

    def test_process_not_implemented(self):
        """测试未实现process_item方法的情况"""
        op = Operator()
        with self.assertRaises(NotImplementedError):
            op.process({"cube": 1})

    def test_requires(self):
        """测试缺少必需产物时报配置错误"""
        op = StampOperator()
        with self.assertRaises(ConfigurationError) as ctx:
            op.process({"scene": 1})
        self.assertIn("cube", str(ctx.exception))
        # None视为缺失
        with self.assertRaises(ConfigurationError):
            op.process({"cube": None})

    def test_batch(self):
        """测试帧列表逐个处理"""
        op = StampOperator()
        results = op.process([{"cube": 1}, {"cube": 2}])
        self.assertEqual([r["cube"] for r in results], [1, 2])
        self.assertTrue(all(r["processed"] for r in results))


class TestOperatorKinds(unittest.TestCase):
    """操作符分类基类的测试类"""

    def test_physics(self):
        """测试PhysicsOperator默认描述"""
        op = PhysicsOperator()
        self.assertEqual(op.name, "PhysicsOperator")
        self.assertEqual(op.description, "Physics simulation operator")

    def test_reconstruction(self):
        """测试ReconstructionOperator保存线程数与求解器参数"""
        op = ReconstructionOperator(name="Fit", threads=4, max_iters=10)
        self.assertEqual(op.name, "Fit")
        self.assertEqual(op.threads, 4)
        self.assertEqual(op.solver_params, {"max_iters": 10})


class StampOperator(Operator):
    """给帧加上processed标记"""

    requires = ("cube",)

    def process_item(self, frame):
        """添加processed字段"""
        result = dict(frame)
        result["processed"] = True
        return result


if __name__ == "__main__":
    unittest.main()
