"""
评估指标测试模块
"""

import unittest

import numpy as np
from scipy.spatial.transform import Rotation

from pollidar.core.errors import ConfigurationError, EmptyMaskError
from pollidar.operators.evaluate.metrics import (
    REPORT_KEYS, MetricsOperator, angular_metrics, distance_metrics, evaluate, exact_median,
)
from pollidar.operators.reconstruct.maps import ReconMaps
from pollidar.scene.raycast import SceneMaps


def random_normals(rng, shape):
    v = rng.normal(size=shape + (3,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class TestMetrics(unittest.TestCase):
    """角度与距离指标的测试类"""

    def setUp(self):
        self.rng = np.random.default_rng(4)
        self.normals = random_normals(self.rng, (20, 30))

    def rotated(self, degrees):
        """把每条法线绕一条垂直轴旋转固定角度"""
        axis = np.cross(self.normals, random_normals(self.rng, (20, 30)))
        axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
        rotation = Rotation.from_rotvec(np.deg2rad(degrees) * axis.reshape(-1, 3))
        return rotation.apply(self.normals.reshape(-1, 3)).reshape(self.normals.shape)

    def test_identical(self):
        """测试预测等于真值"""
        report = angular_metrics(self.normals, self.normals)
        self.assertAlmostEqual(report["angular_mean_deg"], 0.0, places=5)
        self.assertEqual(report["accuracy_3deg_pct"], 100.0)
        self.assertEqual(report["normal_pixels"], 600)

    def test_fixed_rotation(self):
        """测试固定角度的旋转"""
        report = angular_metrics(self.rotated(5.0), self.normals)
        self.assertAlmostEqual(report["angular_mean_deg"], 5.0, places=6)
        self.assertAlmostEqual(report["angular_median_deg"], 5.0, places=6)
        self.assertAlmostEqual(report["angular_rmse_deg"], 5.0, places=6)
        self.assertEqual(report["accuracy_3deg_pct"], 0.0)
        self.assertEqual(report["accuracy_10deg_pct"], 100.0)
        self.assertEqual(angular_metrics(self.rotated(4.99), self.normals)["accuracy_5deg_pct"], 100.0)

    def test_random_pairs(self):
        """测试独立随机法线的平均误差约为90°"""
        pred = random_normals(self.rng, (200, 100))
        gt = random_normals(self.rng, (200, 100))
        self.assertAlmostEqual(angular_metrics(pred, gt)["angular_mean_deg"], 90.0, delta=1.5)

    def test_distance_offset(self):
        """测试常数距离偏移"""
        gt = self.rng.uniform(5.0, 50.0, (20, 30))
        report = distance_metrics(gt + 0.15, gt)
        self.assertAlmostEqual(report["distance_mae_m"], 0.15, places=9)
        self.assertAlmostEqual(report["distance_medae_m"], 0.15, places=9)
        self.assertAlmostEqual(report["distance_rmse_m"], 0.15, places=9)

    def test_mask(self):
        """测试掩码与空掩码"""
        mask = np.zeros((20, 30), dtype=bool)
        mask[:2] = True
        pred = self.normals.copy()
        pred[2:] = -pred[2:]
        report = angular_metrics(pred, self.normals, mask)
        self.assertEqual(report["normal_pixels"], 60)
        self.assertAlmostEqual(report["angular_mean_deg"], 0.0, places=5)
        with self.assertRaises(EmptyMaskError):
            angular_metrics(pred, self.normals, np.zeros((20, 30)))
        with self.assertRaises(EmptyMaskError):
            distance_metrics(np.ones((2, 2)), np.ones((2, 2)), np.zeros((2, 2)))

    def test_shape_mismatch(self):
        """测试形状不一致"""
        with self.assertRaises(ConfigurationError):
            angular_metrics(self.normals, self.normals[:10])
        with self.assertRaises(ConfigurationError):
            distance_metrics(np.ones((2, 2)), np.ones((2, 3)))
        with self.assertRaises(ConfigurationError):
            angular_metrics(self.normals, self.normals, np.ones((3, 3)))

    def test_lower_median(self):
        """测试偶数个元素时取下中位数"""
        self.assertEqual(exact_median(np.array([4.0, 1.0, 3.0, 2.0])), 2.0)
        self.assertEqual(exact_median(np.array([5.0, 1.0, 3.0])), 3.0)

    def test_order_independent(self):
        """测试统计量与像素顺序无关"""
        errors = self.rng.uniform(0, 1, 1000)
        gt = np.zeros(1000)
        first = distance_metrics(errors, gt)
        permutation = self.rng.permutation(1000)
        second = distance_metrics(errors[permutation], gt)
        self.assertEqual(first, second)


class TestReport(unittest.TestCase):
    """MetricsReport与evaluate的测试类"""

    def test_evaluate(self):
        """测试完整报告与覆盖率"""
        normals = np.tile([0.0, 0.0, -1.0], (4, 5, 1))
        distance = np.full((4, 5), 10.0)
        mask = np.ones((4, 5), dtype=bool)
        mask[0] = False
        report = evaluate(normals, normals, distance + 0.1, distance, mask)
        self.assertAlmostEqual(report.mask_coverage, 0.75)
        self.assertAlmostEqual(report.distance_mae_m, 0.1)
        self.assertEqual(list(report.to_dict()), list(REPORT_KEYS))

    def test_partial(self):
        """测试只有距离时法线部分为空"""
        report = evaluate(pred_distance=np.ones((2, 2)), gt_distance=np.ones((2, 2)))
        self.assertIsNone(report.angular_mean_deg)
        self.assertEqual(report.csv_row().split(",")[0], "")
        self.assertEqual(len(report.csv_row().split(",")), len(REPORT_KEYS))
        self.assertEqual(report.csv_header().split(","), list(REPORT_KEYS))
        with self.assertRaises(ConfigurationError):
            evaluate()

    def test_operator(self):
        """测试评估操作符使用两者置信度的交集"""
        normals = np.tile([0.0, 0.0, -1.0], (3, 3, 1))
        distance = np.full((3, 3), 10.0)
        confidence = np.ones((3, 3), dtype=np.uint8)
        confidence[0, 0] = 0
        truth = SceneMaps(distance, normals, np.ones((3, 3), dtype=np.int64), np.ones((3, 3)), confidence)
        recon = ReconMaps(distance, normals, method="pca")
        frame = MetricsOperator().process({"recon": recon, "scene_maps": truth})
        self.assertEqual(frame["metrics"].normal_pixels, 8)
        self.assertEqual(frame["metrics"].angular_mean_deg, 0.0)


if __name__ == '__main__':
    unittest.main()
