"""
采集调度测试模块
"""

import unittest

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.simulate.schedule import AngleSchedule, default_schedule, schedule_from_config
from pollidar.utils.config import Config


class TestAngleSchedule(unittest.TestCase):
    """AngleSchedule的测试类"""

    def test_default(self):
        """测试默认36态调度满秩且条件良好"""
        schedule = default_schedule()
        self.assertEqual(schedule.size, 36)
        np.testing.assert_array_equal(schedule.angles()[0], np.zeros(4))
        rank, cond = schedule.conditioning()
        self.assertEqual(rank, 16)
        self.assertLess(cond, 100.0)
        self.assertAlmostEqual(cond, 13.05, delta=0.1)

    def test_truncated(self):
        """测试截断的调度要么满秩要么报错"""
        for states in (16, 20):
            try:
                schedule = default_schedule(states=states)
            except ConfigurationError:
                continue
            self.assertEqual(schedule.conditioning()[0], 16)

    def test_rank_deficient(self):
        """测试偏振态过少"""
        with self.assertRaises(ConfigurationError):
            default_schedule(states=8)
        schedule = default_schedule(states=8, verify=False)
        rank, cond = schedule.conditioning()
        self.assertLessEqual(rank, 8)
        self.assertEqual(cond, float("inf"))

    def test_design_matches_forward(self):
        """测试设计矩阵与正向模型一致"""
        schedule = default_schedule()
        h = np.random.default_rng(0).normal(size=(4, 4))
        np.testing.assert_allclose(schedule.design_matrix() @ h.reshape(16), schedule.measure(h), atol=1e-12)

    def test_explicit_chain(self):
        """测试测量等于显式的元件链"""
        from pollidar.optics import polmath

        schedule = default_schedule()
        h = np.diag([1.0, 0.5, -0.2, 0.1])
        theta = schedule.angles()[7]
        chain = (polmath.linear_polarizer(theta[3]) @ polmath.quarter_waveplate(theta[2]) @ h
                 @ polmath.quarter_waveplate(theta[1]) @ polmath.half_waveplate(theta[0]))
        expected = (chain @ schedule.laser_stokes)[0]
        self.assertAlmostEqual(schedule.measure(h)[7], expected, places=12)

    def test_laser(self):
        """测试非物理的激光Stokes向量"""
        with self.assertRaises(ConfigurationError):
            AngleSchedule([], [1.0, 2.0, 0.0, 0.0])

    def test_array_round_trip(self):
        """测试从角度数组重建"""
        schedule = default_schedule()
        again = AngleSchedule.from_array(schedule.angles(), schedule.laser_stokes)
        np.testing.assert_allclose(again.design_matrix(), schedule.design_matrix(), atol=1e-14)

    def test_from_config(self):
        """测试从配置构建"""
        config = Config(use_env=False)
        config.set("schedule.qwp_recv_step_deg", 30.0)
        schedule = schedule_from_config(config, states=24)
        self.assertEqual(schedule.size, 24)
        self.assertAlmostEqual(np.rad2deg(schedule.angles()[1, 2]), 30.0)


if __name__ == "__main__":
    unittest.main()
