"""
特征张量测试模块
"""

import unittest

import numpy as np

from pollidar.core.errors import ConfigurationError
from pollidar.operators.preprocess.ellipsometry import invert_ellipsometry
from pollidar.operators.preprocess.slicing import slice_peaks
from pollidar.operators.reconstruct.features import FEATURE_MODES, export_features, feature_channels
from tests.helpers import plane_scene, render_scene, small_sensor


class TestFeatures(unittest.TestCase):
    """export_features的测试类"""

    @classmethod
    def setUpClass(cls):
        cls.sensor = small_sensor(rows=2, cols=3)
        cube, _ = render_scene(plane_scene(15.0, 20.0), cls.sensor)
        cls.sliced = slice_peaks(cube, 5)
        cls.movie = invert_ellipsometry(cls.sliced)

    def test_channel_counts(self):
        """测试各模式的通道数"""
        states = self.sliced.data.shape[0]
        for mode in FEATURE_MODES:
            features = export_features(self.sliced, self.movie, mode)
            self.assertEqual(features.shape, (2, 3, feature_channels(states, 5, mode)))
            self.assertEqual(features.dtype, np.float32)
        self.assertEqual(feature_channels(36, 51), 36 * 51 + 36 + 16 * 51 + 3)
        self.assertEqual(feature_channels(36, 51, "window1"), 36 + 36 + 16 + 3)
        self.assertEqual(feature_channels(36, 51, "no_mueller"), 36 * 51 + 36 + 3)

    def test_layout(self):
        """测试通道排列 Ĩ ⊕ d ⊕ H ⊕ V"""
        features = export_features(self.sliced, self.movie)
        states = self.sliced.data.shape[0]
        np.testing.assert_allclose(features[1, 2, :5], self.sliced.data[0, 1, 2], rtol=1e-6)
        np.testing.assert_allclose(features[1, 2, 5 * states:6 * states], self.sliced.d_prior[:, 1, 2, 0], rtol=1e-6)
        np.testing.assert_allclose(features[..., -3:], self.sensor.view_directions(), rtol=1e-6)

    def test_no_polarization(self):
        """测试去掉偏振信息后各偏振态的波形相同"""
        features = export_features(self.sliced, self.movie, "no_polarization")
        waveforms = features[..., :5 * self.sliced.data.shape[0]].reshape(2, 3, -1, 5)
        np.testing.assert_allclose(waveforms, np.broadcast_to(waveforms[:, :, :1], waveforms.shape), rtol=1e-6)

    def test_no_mueller_without_movie(self):
        """测试no_mueller模式不需要Mueller电影，其他模式需要"""
        features = export_features(self.sliced, None, "no_mueller")
        self.assertEqual(features.shape[-1], feature_channels(self.sliced.data.shape[0], 5, "no_mueller"))
        with self.assertRaises(ConfigurationError):
            export_features(self.sliced, None, "window1")
        with self.assertRaises(ConfigurationError):
            export_features(self.sliced, self.movie, "raw")


if __name__ == '__main__':
    unittest.main()
