"""
传感器配置测试模块
"""

import unittest

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.scene.sensor import LIGHT_SPEED, SensorConfig
from pollidar.utils.config import Config
from tests.helpers import small_sensor


class TestSensorConfig(unittest.TestCase):
    """SensorConfig类的测试类"""

    def test_defaults(self):
        """测试默认网格与时间轴"""
        sensor = SensorConfig()
        self.assertEqual(sensor.shape, (150, 236))
        self.assertAlmostEqual(sensor.bins * sensor.bin_width_ns * LIGHT_SPEED / 2.0, 223.2, delta=0.2)
        self.assertAlmostEqual(sensor.pulse_sigma_ns, 3.0 / 2.3548200450309493, places=9)

    def test_range_bin_conversion(self):
        """测试距离与bin的互相转换"""
        sensor = small_sensor(t0_offset_ns=4.0)
        self.assertAlmostEqual(float(sensor.bin_to_range(sensor.range_to_bin(31.7))), 31.7, places=9)
        self.assertAlmostEqual(float(sensor.bin_to_range(4.0)), 0.0)
        self.assertAlmostEqual(float(sensor.bin_to_range(204.0)), 100 * LIGHT_SPEED, places=9)

    def test_validation(self):
        """测试非法参数"""
        with self.assertRaises(ConfigurationError):
            SensorConfig(max_range_m=100.0)
        with self.assertRaises(ConfigurationError):
            SensorConfig(rows=0)
        with self.assertRaises(ConfigurationError):
            SensorConfig.from_dict({"pixels": 3})

    def test_view_directions(self):
        """测试像素中心方向"""
        sensor = small_sensor(rows=5, cols=5)
        view = sensor.view_directions()
        self.assertEqual(view.shape, (5, 5, 3))
        np.testing.assert_allclose(np.linalg.norm(view, axis=-1), 1.0, atol=1e-12)
        np.testing.assert_allclose(view[2, 2], [0.0, 0.0, 1.0], atol=1e-12)
        # x向右、y向下
        self.assertGreater(view[2, 4, 0], 0.0)
        self.assertLess(view[0, 2, 1], 0.0)

    def test_subrays(self):
        """测试子光线的确定性与单光线退化"""
        sensor = small_sensor(subrays=3, jitter_seed=5)
        first = sensor.subray_directions()
        self.assertEqual(first.shape, (5, 5, 9, 3))
        np.testing.assert_array_equal(first, sensor.subray_directions())
        single = small_sensor(subrays=1).subray_directions()
        np.testing.assert_array_equal(single[:, :, 0], small_sensor().view_directions())

    def test_round_trip(self):
        """测试字典转换"""
        sensor = small_sensor(jitter_seed=3)
        self.assertEqual(SensorConfig.from_dict(sensor.to_dict()), sensor)

    def test_from_config(self):
        """测试从配置构建"""
        config = Config(use_env=False)
        config.set("sensor.rows", 10)
        sensor = SensorConfig.from_config(config, cols=12)
        self.assertEqual(sensor.shape, (10, 12))


if __name__ == "__main__":
    unittest.main()
