"""
飞行时间测距测试模块
"""

import unittest

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.preprocess.slicing import slice_peaks
from pollidar.operators.reconstruct.tof import ToFOperator, parabolic_offset, tof_distance
from pollidar.operators.simulate.cube import WavefrontCube
from pollidar.operators.simulate.schedule import default_schedule
from tests.helpers import plane_scene, render_scene, small_sensor


class TestParabolicOffset(unittest.TestCase):
    """parabolic_offset的测试类"""

    def test_gaussian_exact(self):
        """测试对高斯采样的插值是精确的"""
        for shift in (-0.4, -0.1, 0.0, 0.25, 0.45):
            k = np.array([-1.0, 0.0, 1.0])
            values = np.exp(-(k - shift) ** 2 / (2.0 * 1.3 ** 2))
            self.assertAlmostEqual(float(parabolic_offset(*values)), shift, places=12)

    def test_degenerate(self):
        """测试非正幅度与非负曲率返回0"""
        self.assertEqual(float(parabolic_offset(0.0, 1.0, 0.5)), 0.0)
        self.assertEqual(float(parabolic_offset(1.0, 1.0, 1.0)), 0.0)
        self.assertEqual(float(parabolic_offset(2.0, 1.0, 2.0)), 0.0)

    def test_clipped(self):
        """测试偏移截断到半个bin"""
        self.assertEqual(float(parabolic_offset(2.0, 1.0, 0.1)), -0.5)
        self.assertEqual(float(parabolic_offset(0.1, 1.0, 2.0)), 0.5)


class TestToF(unittest.TestCase):
    """tof_distance的测试类"""

    @classmethod
    def setUpClass(cls):
        cls.sensor = small_sensor(rows=3, cols=3)
        cls.schedule = default_schedule(states=16, verify=False)

    def render(self, distance):
        cube, _ = render_scene(plane_scene(distance), self.sensor, self.schedule)
        return cube

    def test_argmax_exact_bin(self):
        """测试整bin处的argmax测距"""
        expected = float(self.sensor.bin_to_range(200))
        cube = self.render(expected)
        estimate = tof_distance(cube, "none")
        self.assertAlmostEqual(float(estimate.distance[1, 1]), expected, places=9)
        self.assertEqual(float(estimate.t_peak[1, 1]), 200.0)
        np.testing.assert_array_equal(estimate.confidence, 1)

    def test_half_bin(self):
        """测试半bin处argmax误差约半个bin，抛物线插值明显更准"""
        truth = float(self.sensor.bin_to_range(200.5))
        cube = self.render(truth)
        sliced = slice_peaks(cube, 11)
        coarse = tof_distance(sliced, "none")
        fine = tof_distance(sliced, "parabolic")
        half_bin = 0.5 * self.sensor.bin_width_ns * 0.299792458 / 2.0
        self.assertAlmostEqual(abs(float(coarse.distance[1, 1]) - truth), half_bin, delta=1e-3)
        self.assertLess(abs(float(fine.distance[1, 1]) - truth), 0.02)
        np.testing.assert_allclose(tof_distance(cube, "parabolic").distance, fine.distance)

    def test_empty_pixels(self):
        """测试无信号像素距离为0且置信度为0"""
        data = np.zeros((self.schedule.size, 3, 3, self.sensor.bins))
        data[:, 0, 0, 100] = 1.0
        estimate = tof_distance(WavefrontCube(data, self.schedule, self.sensor), "parabolic")
        self.assertEqual(int(estimate.confidence.sum()), 1)
        self.assertAlmostEqual(float(estimate.distance[0, 0]), float(self.sensor.bin_to_range(100)))
        self.assertEqual(float(estimate.distance[2, 2]), 0.0)

    def test_unknown_refine(self):
        """测试未知的细化方式"""
        cube = WavefrontCube(np.zeros((self.schedule.size, 3, 3, self.sensor.bins)), self.schedule, self.sensor)
        with self.assertRaises(ConfigurationError):
            tof_distance(cube, "cubic")

    def test_operator(self):
        """测试操作符优先读取sliced，缺少输入时报错"""
        cube = self.render(25.0)
        frame = ToFOperator("none").process({"cube": cube})
        self.assertIn("distance", frame)
        frame = ToFOperator().process({"cube": cube, "sliced": slice_peaks(cube, 11)})
        self.assertAlmostEqual(float(frame["distance"].distance[1, 1]), 25.0, delta=0.02)
        with self.assertRaises(ConfigurationError):
            ToFOperator().process({})


if __name__ == '__main__':
    unittest.main()
