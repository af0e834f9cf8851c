"""
脉冲形状测试模块
"""

import unittest

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

from pollidar.operators.simulate.pulse import emg_pulse, gaussian_pulse


class TestPulse(unittest.TestCase):
    """脉冲形状的测试类"""

    def setUp(self):
        self.t = np.linspace(-30.0, 60.0, 90001)

    def test_gaussian_area(self):
        """测试高斯脉冲单位面积"""
        self.assertAlmostEqual(trapezoid(gaussian_pulse(self.t, 1.27), self.t), 1.0, places=9)

    def test_emg_moments(self):
        """测试EMG单位面积，均值右移τ"""
        for tau in (0.02, 0.3, 2.0):
            y = emg_pulse(self.t, 1.27, tau)
            self.assertTrue(np.all(np.isfinite(y)))
            self.assertAlmostEqual(trapezoid(y, self.t), 1.0, places=6)
            self.assertAlmostEqual(trapezoid(self.t * y, self.t), tau, places=5)

    def test_emg_limit(self):
        """测试τ很小时接近高斯脉冲"""
        np.testing.assert_allclose(emg_pulse(self.t, 1.27, 1e-4), gaussian_pulse(self.t, 1.27), atol=1e-4)

    def test_emg_matches_convolution(self):
        """测试与数值卷积一致"""
        dt = self.t[1] - self.t[0]
        tau = 0.5
        kernel_t = np.arange(0.0, 20 * tau, dt)
        kernel = np.exp(-kernel_t / tau) / tau * dt
        numeric = fftconvolve(gaussian_pulse(self.t, 1.27), kernel)[:self.t.size]
        np.testing.assert_allclose(emg_pulse(self.t, 1.27, tau), numeric, atol=2e-3)

    def test_complex_step(self):
        """测试复数时间参数给出导数"""
        h = 1e-20
        t0 = 0.7
        derivative = np.imag(emg_pulse(t0 + 1j * h, 1.27, 0.3)) / h
        numeric = (emg_pulse(t0 + 1e-6, 1.27, 0.3) - emg_pulse(t0 - 1e-6, 1.27, 0.3)) / 2e-6
        self.assertAlmostEqual(float(derivative), float(numeric), places=6)


if __name__ == "__main__":
    unittest.main()
