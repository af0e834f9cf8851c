"""
射线坐标系法线参数化测试模块
"""

import unittest

import numpy as np

from pollidar.operators.reconstruct.geometry import (
    angles_from_normal, flip_azimuth, normal_from_angles, resolve_branch,
)
from pollidar.optics.pbrdf import ray_basis


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class TestGeometry(unittest.TestCase):
    """法线参数化的测试类"""

    def setUp(self):
        self.omega = unit([0.05, -0.02, 1.0])
        self.e1, self.e2 = ray_basis(self.omega)

    def test_angles_round_trip(self):
        """测试天顶角与方位角的往返"""
        zenith = np.array([0.1, 0.6, 1.2])
        azimuth = np.array([0.3, 2.5, 5.9])
        n = normal_from_angles(zenith, azimuth, self.omega, self.e1, self.e2)
        np.testing.assert_allclose(np.linalg.norm(n, axis=-1), 1.0)
        z, a = angles_from_normal(n, self.omega, self.e1, self.e2)
        np.testing.assert_allclose(z, zenith, atol=1e-12)
        np.testing.assert_allclose(a, azimuth, atol=1e-12)

    def test_flip(self):
        """测试方位角翻转保持天顶角，两次翻转回到原处"""
        n = normal_from_angles(0.5, 1.0, self.omega, self.e1, self.e2)
        other = flip_azimuth(n, self.omega)
        z0, a0 = angles_from_normal(n, self.omega, self.e1, self.e2)
        z1, a1 = angles_from_normal(other, self.omega, self.e1, self.e2)
        self.assertAlmostEqual(float(z0), float(z1))
        self.assertAlmostEqual(float(np.mod(a1 - a0, 2.0 * np.pi)), np.pi)
        np.testing.assert_allclose(flip_azimuth(other, self.omega), n, atol=1e-12)

    def test_resolve_with_prior(self):
        """测试有先验时选择与先验更接近的分支"""
        n = normal_from_angles(0.5, 1.0, self.omega, self.e1, self.e2)
        other = flip_azimuth(n, self.omega)
        np.testing.assert_allclose(resolve_branch(n, self.omega, other), other)
        np.testing.assert_allclose(resolve_branch(other, self.omega, n), n)

    def test_resolve_without_prior(self):
        """测试无先验或先验为零向量时选择n·(−ẑ)较大的分支"""
        n = normal_from_angles(0.7, 0.0, self.omega, self.e1, self.e2)
        other = flip_azimuth(n, self.omega)
        expected = n if -n[2] >= -other[2] else other
        np.testing.assert_allclose(resolve_branch(n, self.omega), expected)
        np.testing.assert_allclose(resolve_branch(other, self.omega, np.zeros(3)), expected)


if __name__ == '__main__':
    unittest.main()
