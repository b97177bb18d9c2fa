import numpy as np

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.asymptotics.fits import fit_exponential, fit_rate
from toeplitz_lab.exceptions import RateFitError


class TestFitRate(TestCase):
    def test_power_laws(self):
        """Test 1/k and 5/k² give slopes −1 and −2."""
        ks = np.arange(4, 41, 2)
        self.assertAllClose(fit_rate(ks, 1.0 / ks).slope, -1.0, atol=1e-10)
        fit = fit_rate(ks, 5.0 / ks ** 2)
        self.assertAllClose(fit.slope, -2.0, atol=1e-10)
        self.assertAllClose(fit.constant, 5.0, rtol=1e-10)
        self.assertAllClose(fit.r_squared, 1.0)

    def test_exponential(self):
        """Test 3e^{−0.2k} gives decay rate 0.2."""
        ks = np.arange(5, 41, 5)
        fit = fit_exponential(ks, 3.0 * np.exp(-0.2 * ks))
        self.assertAllClose(-fit.slope, 0.2, atol=1e-12)
        self.assertAllClose(fit.r_squared, 1.0)

    def test_invalid_series(self):
        """Test nonpositive entries and short series raise RateFitError."""
        with self.assertRaises(RateFitError):
            fit_rate([1, 2, 3, 4], [1.0, 0.5, 0.0, 0.25])
        with self.assertRaises(RateFitError):
            fit_rate([1, 2, 3], [1.0, 0.5, 0.3])
        with self.assertRaises(RateFitError):
            fit_exponential([1, 2, 3, 4], [1.0, np.nan, 0.3, 0.1])
