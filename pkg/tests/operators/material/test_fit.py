"""
固定法线材质估计测试模块
"""

import unittest

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.material.fit import (
    FIT_PARAMS, OUTPUT_FIELDS, FixedNormalFit, MaterialFitConfig, MaterialFitOperator, estimate_materials,
    measured_diffuse_dop, normal_noise_sweep, perturb_normals,
)
from pollidar.operators.preprocess.ellipsometry import MuellerMovie, invert_ellipsometry
from pollidar.operators.preprocess.slicing import slice_peaks
from pollidar.operators.reconstruct.forward import PixelModel
from pollidar.operators.simulate.schedule import default_schedule
from pollidar.utils.config import Config
from tests.helpers import make_materials, plane_scene, render_scene, small_sensor

TRUE_MATERIAL = {"eta": 1.5, "roughness": 0.3, "spec_depol": 0.8, "diff_depol": 0.6, "diffuse_albedo": 0.5}


def pixel_fit(movie, maps, row, col, cfg):
    """按estimate_materials的方式为单个像素构建固定法线拟合问题"""
    sensor = movie.sensor
    half = cfg.fit_bins // 2
    window = slice(movie.center - half, movie.center + half + 1)
    model = PixelModel(sensor.view_directions()[row, col], maps.distance[row, col],
                       movie.window_times()[row, col, window], sensor.pulse_sigma_ns, movie.gain,
                       sensor.t0_offset_ns, cfg.specular_albedo, cfg.diff_tau_ns)
    return FixedNormalFit(model, maps.normal[row, col], movie.h_meas[row, col, window],
                          movie.valid[row, col, window], cfg)


def truth_vector(diff_tau):
    return np.array([TRUE_MATERIAL[name] for name in FIT_PARAMS[:-2]] + [0.0, diff_tau])


class TestMaterialFitConfig(unittest.TestCase):
    """MaterialFitConfig的测试类"""

    def test_from_config(self):
        """测试从配置构建"""
        cfg = MaterialFitConfig.from_config(Config(use_env=False))
        self.assertEqual(cfg.lambda_d_phase2, 0.1)
        self.assertEqual(cfg.bounds["eta"], (1.1, 2.5))
        self.assertEqual(cfg.bounds["diff_tau"], (0.005, 2.0))
        self.assertEqual(list(cfg.roughness_seeds), [0.1, 0.5, 0.9])

    def test_invalid(self):
        """测试非法参数"""
        with self.assertRaises(ConfigurationError):
            MaterialFitConfig(dop_threshold=1.0).validate()
        with self.assertRaises(ConfigurationError):
            MaterialFitConfig(lambda_s_phase2=-1.0).validate()
        with self.assertRaises(ConfigurationError):
            MaterialFitConfig(roughness_seeds=()).validate()
        bounds = MaterialFitConfig().bounds
        bounds["eta"] = (2.0, 1.5)
        with self.assertRaises(ConfigurationError):
            MaterialFitConfig(bounds=bounds).validate()
        bounds = MaterialFitConfig().bounds
        bounds["diff_tau"] = (1.0, 0.5)
        with self.assertRaises(ConfigurationError):
            MaterialFitConfig(bounds=bounds).validate()


class TestMaterialFit(unittest.TestCase):
    """estimate_materials的测试类"""

    @classmethod
    def setUpClass(cls):
        cls.sensor = small_sensor(rows=2, cols=2)
        cube, maps = render_scene(plane_scene(20.0, 65.0), cls.sensor)
        cls.maps = maps
        cls.movie = invert_ellipsometry(slice_peaks(cube, 21))
        cls.result = estimate_materials(cls.movie, maps.normal, maps.distance, segments=maps.material_id)

    def test_round_trip(self):
        """测试已知法线下无噪声回波的四个材质参数都在5%以内"""
        np.testing.assert_array_equal(self.result.c_dop, True)
        self.assertFalse(self.result.unidentifiable.any())
        for name in ("eta", "roughness", "spec_depol", "diff_depol"):
            relative = np.abs(self.result.fields[name] - TRUE_MATERIAL[name]) / TRUE_MATERIAL[name]
            self.assertLess(float(relative.max()), 0.05, name)
        self.assertEqual(set(self.result.fields), set(OUTPUT_FIELDS))
        self.assertEqual(self.result.summary["1"]["pixels"], 4)
        self.assertAlmostEqual(self.result.summary["1"]["eta"]["mean"], float(self.result.fields["eta"].mean()))

    def test_objective_at_truth(self):
        """测试真值处的全局目标为0"""
        cfg = MaterialFitConfig()
        for row, col in np.ndindex(*self.sensor.shape):
            problem = pixel_fit(self.movie, self.maps, row, col, cfg)
            self.assertLess(problem.global_objective(truth_vector(0.05)), 1e-9)
            self.assertGreater(problem.global_objective(truth_vector(0.3)), 1e-6)

    def test_gradient_random_points(self):
        """测试100个随机点上第二阶段残差的复步雅可比与中心差分一致"""
        cfg = MaterialFitConfig()
        problem = pixel_fit(self.movie, self.maps, 0, 1, cfg)
        problem = problem.with_phase((cfg.lambda_d_phase2, cfg.lambda_s_phase2), problem.base)
        rng = np.random.default_rng(17)
        points = np.stack([rng.uniform(1.2, 2.0, 100)] + [rng.uniform(0.1, 0.9, 100) for _ in range(4)]
                          + [rng.uniform(-0.5, 0.5, 100), rng.uniform(0.02, 0.5, 100)], axis=-1)
        step = 1e-6
        offsets = step * np.eye(len(FIT_PARAMS))
        for x in points:
            jac = problem.jacobian(x)
            fd = ((problem.residuals(x[None, :] + offsets) - problem.residuals(x[None, :] - offsets))
                  / (2.0 * step)).T
            np.testing.assert_allclose(jac, fd, rtol=1e-4, atol=1e-6 * np.abs(jac).max())

    def test_split_start(self):
        """测试起点的τ_d与Δt取自时间分离"""
        problem = pixel_fit(self.movie, self.maps, 1, 1, MaterialFitConfig())
        start = problem.split_start(problem.base)
        self.assertLess(abs(start[FIT_PARAMS.index("dt")]), 0.5)
        self.assertTrue(0.005 <= start[FIT_PARAMS.index("diff_tau")] <= 2.0)
        self.assertTrue(0.0 <= start[FIT_PARAMS.index("diffuse_albedo")] <= 1.0)

    def test_measured_dop(self):
        """测试c_dop使用的偏振度高于阈值"""
        rho = measured_diffuse_dop(self.movie)
        self.assertTrue(np.all(rho > 0.1))
        self.assertTrue(np.all(rho < 1.0))

    def test_segment_mode(self):
        """测试segment模式把分割均值赋给全部像素"""
        cfg = MaterialFitConfig(phase1_iters=20, phase2_iters=20, roughness_seeds=(0.3,))
        result = estimate_materials(self.movie, self.maps.normal, self.maps.distance, cfg,
                                    segments=self.maps.material_id, mode="segment")
        for values in result.fields.values():
            np.testing.assert_allclose(values, values[0, 0])
        with self.assertRaises(ConfigurationError):
            estimate_materials(self.movie, self.maps.normal, self.maps.distance, cfg, mode="segment")

    def test_invalid_inputs(self):
        """测试非单位法线与未知模式"""
        with self.assertRaises(ConfigurationError):
            estimate_materials(self.movie, 2.0 * self.maps.normal, self.maps.distance)
        with self.assertRaises(ConfigurationError):
            estimate_materials(self.movie, self.maps.normal, self.maps.distance, mode="scene")
        with self.assertRaises(ConfigurationError):
            estimate_materials(self.movie, self.maps.normal, self.maps.distance, MaterialFitConfig(fit_bins=31))

    def test_unidentifiable(self):
        """测试无偏振信息且无镜面信号的像素保留初始猜测"""
        rows, cols = self.sensor.shape
        h_meas = np.tile(np.eye(4).reshape(16), (rows, cols, 11, 1))
        movie = MuellerMovie(h_meas, np.zeros((rows, cols)), np.full((rows, cols), 100),
                             np.ones((rows, cols, 11), dtype=bool), np.ones((rows, cols), dtype=np.uint8),
                             default_schedule(), self.sensor, {"adc_gain": 1.0})
        away = self.sensor.view_directions()
        cfg = MaterialFitConfig()
        result = estimate_materials(movie, away, np.full((rows, cols), 10.0), cfg)
        self.assertTrue(result.unidentifiable.all())
        self.assertFalse(result.c_dop.any())
        for name, value in cfg.initial.items():
            np.testing.assert_array_equal(result.fields[name], value)
        np.testing.assert_array_equal(result.fields["diff_tau"], cfg.diff_tau_ns)

    def test_mask(self):
        """测试掩码外的像素不参与拟合"""
        mask = np.zeros(self.sensor.shape, dtype=bool)
        mask[0, 0] = True
        cfg = MaterialFitConfig(phase1_iters=10, phase2_iters=10, roughness_seeds=(0.3,))
        result = estimate_materials(self.movie, self.maps.normal, self.maps.distance, cfg, mask=mask)
        self.assertEqual(int(result.fitted.sum()), 1)
        self.assertEqual(float(result.fields["eta"][1, 1]), 0.0)

    def test_operator(self):
        """测试操作符需要normal_map与distance_map"""
        cfg = MaterialFitConfig(phase1_iters=10, phase2_iters=10, roughness_seeds=(0.3,))
        frame = MaterialFitOperator(cfg).process({"movie": self.movie, "normal_map": self.maps.normal,
                                                  "distance_map": self.maps.distance})
        self.assertEqual(frame["materials"].mode, "pixel")
        with self.assertRaises(ConfigurationError):
            MaterialFitOperator(cfg).process({"movie": self.movie})



class TestLongTailMaterial(unittest.TestCase):
    """漫反射时间常数远离默认值时的材质拟合"""

    def test_round_trip(self):
        """测试τ_d = 0.3 ns的平面上折射率与时间常数的恢复"""
        sensor = small_sensor(rows=1, cols=2)
        cube, maps = render_scene(plane_scene(20.0, 65.0, make_materials(diff_tau=0.3)), sensor)
        movie = invert_ellipsometry(slice_peaks(cube, 21))
        result = estimate_materials(movie, maps.normal, maps.distance)
        self.assertLess(float(np.max(np.abs(result.fields["eta"] - 1.5) / 1.5)), 0.05)
        self.assertLess(float(np.max(np.abs(result.fields["diff_depol"] - 0.6) / 0.6)), 0.05)
        self.assertLess(float(np.max(np.abs(result.fields["diff_tau"] - 0.3) / 0.3)), 0.2)
        problem = pixel_fit(movie, maps, 0, 0, MaterialFitConfig())
        self.assertLess(problem.global_objective(truth_vector(0.3)), 1e-9)

class TestNormalNoise(unittest.TestCase):
    """法线扰动的测试类"""

    def test_perturb_angle(self):
        """测试扰动后的法线偏离固定角度且朝向传感器"""
        sensor = small_sensor(rows=4, cols=4)
        view = sensor.view_directions()
        normals = -view
        noisy = perturb_normals(normals, view, 5.0, seed=2)
        np.testing.assert_allclose(np.linalg.norm(noisy, axis=-1), 1.0)
        angle = np.degrees(np.arccos(np.clip(np.sum(noisy * normals, axis=-1), -1.0, 1.0)))
        np.testing.assert_allclose(angle, 5.0, atol=1e-6)
        self.assertTrue(np.all(np.sum(noisy * view, axis=-1) < 0))
        np.testing.assert_array_equal(noisy, perturb_normals(normals, view, 5.0, seed=2))

    def test_sweep(self):
        """测试扫描为每个扰动角度输出一行"""
        sensor = small_sensor(rows=1, cols=2)
        cube, maps = render_scene(plane_scene(20.0, 65.0), sensor)
        movie = invert_ellipsometry(slice_peaks(cube, 21))
        cfg = MaterialFitConfig(phase1_iters=30, phase2_iters=30, roughness_seeds=(0.3,))
        rows = normal_noise_sweep(movie, maps.normal, maps.distance, np.full(sensor.shape, 1.5), [0.0, 5.0], cfg)
        self.assertEqual([row["normal_noise_deg"] for row in rows], [0.0, 5.0])
        self.assertEqual(rows[0]["pixels"], 2)
        self.assertTrue(all(np.isfinite(row["eta_mae"]) for row in rows))


if __name__ == '__main__':
    unittest.main()
