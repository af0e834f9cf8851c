"""
含噪场景上各法线方法的相对优劣
"""

import dataclasses
import unittest

import numpy as np

from pollidar.operators.evaluate.metrics import angular_errors
from pollidar.operators.preprocess.ellipsometry import invert_ellipsometry
from pollidar.operators.preprocess.slicing import slice_peaks
from pollidar.operators.reconstruct.modelfit import ModelFitSettings, modelfit_normals
from pollidar.operators.reconstruct.pca import pca_from_distance
from pollidar.operators.reconstruct.sfp import sfp_dop_normals
from pollidar.operators.reconstruct.tof import tof_distance
from pollidar.operators.simulate.noise import apply_noise, noise_from_profile
from tests.helpers import mixed_scene, plane_scene, render_scene, small_sensor


def noisy_measurements(scene, sensor, seed):
    """默认噪声档位下的分割立方体"""
    cube, maps = render_scene(scene, sensor)
    noisy = apply_noise(cube, noise_from_profile("default"), seed)
    return slice_peaks(noisy, 21), maps


class TestOrdering(unittest.TestCase):
    """法线方法排序的测试类"""

    def test_pca_beats_sfp_head_on(self):
        """测试近正对的低偏振度平面上PCA优于SfP"""
        sensor = small_sensor(rows=8, cols=8, fov_deg=10.0)
        sliced, maps = noisy_measurements(plane_scene(30.0, 20.0), sensor, seed=3)
        distance = tof_distance(sliced, "parabolic")
        pca = pca_from_distance(distance, sensor, k=16, r_max=3.0)
        sfp = sfp_dop_normals(invert_ellipsometry(sliced), prior=pca.normal)
        mask = pca.confidence.astype(bool) & sfp.confidence.astype(bool)
        self.assertGreater(int(mask.sum()), 10)
        pca_error = float(angular_errors(pca.normal[mask], maps.normal[mask]).mean())
        sfp_error = float(angular_errors(sfp.normal[mask], maps.normal[mask]).mean())
        self.assertLess(pca_error, sfp_error)

    def test_modelfit_beats_pca_on_thin_structure(self):
        """测试只占几个像素的小球上模型拟合优于PCA"""
        scene, sensor = mixed_scene()
        sliced, maps = noisy_measurements(scene, sensor, seed=4)
        sphere = maps.material_id == 2
        distance = tof_distance(sliced, "parabolic")
        pca = pca_from_distance(distance, sensor)
        self.assertTrue(pca.flag("sparse")[sphere].all())
        movie = invert_ellipsometry(sliced)
        movie = dataclasses.replace(movie, confidence=movie.confidence * sphere)
        # 方位角分支由真值法线选择，比较只针对法线的恢复精度
        recon = modelfit_normals(movie, distance, ModelFitSettings(max_iters=60), prior=maps.normal, threads=2)
        modelfit_error = float(angular_errors(recon.normal[sphere], maps.normal[sphere]).mean())
        pca_error = float(angular_errors(pca.normal[sphere], maps.normal[sphere]).mean())
        self.assertLess(modelfit_error, pca_error)


if __name__ == '__main__':
    unittest.main()
