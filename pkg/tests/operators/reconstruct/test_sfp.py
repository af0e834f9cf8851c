"""
SfP法线测试模块
"""

import unittest

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.preprocess.ellipsometry import MuellerMovie
from pollidar.operators.reconstruct.geometry import flip_azimuth, normal_from_angles
from pollidar.operators.reconstruct.sfp import SfPOperator, invert_dop, sfp_dop_normals
from pollidar.operators.simulate.schedule import default_schedule
from pollidar.optics.materials import Material
from pollidar.optics.pbrdf import SurfaceInteraction, diffuse_mueller, ray_basis
from pollidar.optics.polmath import diffuse_dop_curve
from tests.helpers import small_sensor


def angle_deg(a, b):
    cos = np.clip(np.sum(a * b, axis=-1), -1.0, 1.0)
    return np.degrees(np.arccos(cos))


class TestInvertDoP(unittest.TestCase):
    """invert_dop的测试类"""

    def test_round_trip(self):
        """测试偏振度曲线的反解"""
        theta = np.deg2rad(np.array([0.0, 5.0, 30.0, 60.0, 85.0]))
        zenith, clamped = invert_dop(diffuse_dop_curve(theta, 1.5), 1.5)
        np.testing.assert_allclose(zenith, theta, atol=1e-8)
        self.assertFalse(clamped.any())

    def test_clamped(self):
        """测试超出曲线上限的偏振度截断到89°"""
        zenith, clamped = invert_dop(np.array([0.99]), 1.5)
        self.assertTrue(clamped[0])
        self.assertAlmostEqual(float(zenith[0]), np.deg2rad(89.0), places=8)


class TestSfP(unittest.TestCase):
    """sfp_dop_normals的测试类"""

    @classmethod
    def setUpClass(cls):
        cls.sensor = small_sensor(rows=3, cols=4, fov_deg=8.0)
        cls.schedule = default_schedule()
        cls.view = cls.sensor.view_directions()
        e1, e2 = ray_basis(cls.view)
        rng = np.random.default_rng(11)
        zenith = rng.uniform(np.deg2rad(30.0), np.deg2rad(70.0), cls.sensor.shape)
        azimuth = rng.uniform(0.0, 2.0 * np.pi, cls.sensor.shape)
        cls.truth = normal_from_angles(zenith, azimuth, cls.view, e1, e2)

    def movie_from(self, peak):
        rows, cols = self.sensor.shape
        return MuellerMovie(peak.reshape(rows, cols, 1, 16), np.zeros((rows, cols)), np.zeros((rows, cols), dtype=int),
                            np.ones((rows, cols, 1), dtype=bool), np.ones((rows, cols), dtype=np.uint8),
                            self.schedule, self.sensor)

    def diffuse_movie(self):
        mat = Material(eta=1.5, roughness=0.3, spec_depol=1.0, diff_depol=0.0, diff_tau=0.05,
                       diffuse_albedo=1.0, specular_albedo=0.0)
        si = SurfaceInteraction(self.truth, self.view, np.ones(self.sensor.shape))
        return self.movie_from(diffuse_mueller(si, mat))

    def test_diffuse_normals(self):
        """测试纯漫反射下的法线恢复（只差方位角分支）"""
        estimate = sfp_dop_normals(self.diffuse_movie(), 1.5, illumination="unpolarized")
        error = np.minimum(angle_deg(estimate.normal, self.truth),
                           angle_deg(flip_azimuth(estimate.normal, self.view), self.truth))
        self.assertLess(float(error.max()), 0.5)
        np.testing.assert_array_equal(estimate.confidence, 1)
        self.assertFalse(estimate.flag("low_dop").any())

    def test_prior_selects_branch(self):
        """测试先验法线消除方位角歧义"""
        estimate = sfp_dop_normals(self.diffuse_movie(), 1.5, illumination="unpolarized", prior=self.truth)
        self.assertLess(float(angle_deg(estimate.normal, self.truth).max()), 0.5)

    def test_low_dop(self):
        """测试完全退偏的像素返回−view"""
        peak = np.tile(np.eye(4), self.sensor.shape + (1, 1))
        estimate = sfp_dop_normals(self.movie_from(peak), illumination="unpolarized")
        np.testing.assert_allclose(estimate.normal, -self.view)
        self.assertTrue(estimate.flag("low_dop").all())

    def test_invalid_arguments(self):
        """测试非法的折射率与照明方式"""
        movie = self.diffuse_movie()
        with self.assertRaises(ConfigurationError):
            sfp_dop_normals(movie, eta_assumed=1.0)
        with self.assertRaises(ConfigurationError):
            sfp_dop_normals(movie, illumination="sunlight")

    def test_operator(self):
        """测试操作符读取prior_normals"""
        from pollidar.operators.reconstruct.maps import NormalEstimate

        prior = NormalEstimate(self.truth, np.ones(self.sensor.shape, dtype=np.uint8))
        frame = SfPOperator(illumination="unpolarized").process({"movie": self.diffuse_movie(),
                                                                  "prior_normals": prior})
        self.assertLess(float(angle_deg(frame["normals"].normal, self.truth).max()), 0.5)


if __name__ == '__main__':
    unittest.main()
