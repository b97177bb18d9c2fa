import numpy as np

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.asymptotics.sweeps import SweepReport, counting_column, default_ks, sweep
from toeplitz_lab.apps.geometry.catalog import perturbation_limit
from toeplitz_lab.apps.geometry.factories import (
    GeometryFactory, NegativeGeometryFactory, PerturbedGeometryFactory, ProductGeometryFactory,
)
from toeplitz_lab.exceptions import NumericalError


class TestSweep(TestCase):
    def setUp(self):
        super().setUp()
        self.geom = GeometryFactory()

    def test_fubini_study_sweep(self):
        """Test dimensions, the 1/k Bergman rate and the localization fit on FS."""
        report = sweep(self.geom, 0, ks=(4, 6, 8, 10), delta=0.5)
        self.assertEqual(report.column('dim').tolist(), [5, 7, 9, 11])
        self.assertEqual(report.column('dim').tolist(), report.column('dim_oracle').tolist())
        self.assertAllClose(report.column('l1_error'), 1.0 / np.array([4, 6, 8, 10]), rtol=1e-8)
        self.assertAllClose(report.fits['l1_error'].slope, -1.0, atol=0.05)
        self.assertGreater(-report.fits['offdiag'].slope, 0.0)
        self.assertGreaterEqual(report.fits['offdiag'].r_squared, 0.99)
        for gamma in report.gammas:
            self.assertIn(counting_column(gamma), report.columns)

    def test_counting_convergence(self):
        """Test the hemisphere median count is off by exactly 1/(2k) for odd k."""
        report = sweep(self.geom, 0, ks=(5, 11))
        errors = report.counting_convergence()
        self.assertEqual(set(errors), {(k, gamma) for k in (5, 11) for gamma in report.gammas})
        self.assertAllClose([errors[5, 0.5], errors[11, 0.5]], [0.1, 0.5 / 11], atol=1e-12)

    def test_product_sweep(self):
        """Test the CP¹×CP¹ sweep matches Künneth and reports every spectral column."""
        report = sweep(ProductGeometryFactory(), 1, ks=(2, 3, 4, 5))
        self.assertEqual(report.column('dim').tolist(), [9, 16, 25, 36])
        self.assertEqual(report.column('dim').tolist(), report.column('dim_oracle').tolist())
        for name in ('l1_error', 'trace_error', 'ks', 'levy', 'pushforward_distance'):
            self.assertTrue(np.all(np.isfinite(report.column(name))))
        self.assertTrue(np.all(np.diff(report.column('l1_error')) < 0))
        self.assertIn('l1_error', report.fits)

    def test_perturbed_sweep(self):
        """Test a small bump keeps the 1/k Bergman rate on the perturbed sphere."""
        geom = PerturbedGeometryFactory(params={'d': 1, 't': 0.02 * perturbation_limit(1)})
        report = sweep(geom, 0, ks=(8, 16, 24, 32, 40))
        self.assertEqual(report.column('dim').tolist(), [9, 17, 25, 33, 41])
        self.assertTrue(np.all(np.diff(report.column('l1_error')) < 0))
        self.assertAllClose(report.fits['l1_error'].slope, -1.0, rtol=0.0, atol=0.1)

    def test_perturbed_limit_sweep(self):
        """Test the sweep completes at t_max, where the bump flattens the curvature to zero."""
        report = sweep(PerturbedGeometryFactory(), 0, ks=(8, 16, 24))
        self.assertEqual(report.column('dim').tolist(), report.column('dim_oracle').tolist())
        self.assertTrue(np.all(np.diff(report.column('l1_error')) < 0))

    def test_thread_count_independence(self):
        """Test one and two threads give the same rows in the same order."""
        single = sweep(self.geom, 0, ks=(3, 5, 7), threads=1)
        double = sweep(self.geom, 0, ks=(3, 5, 7), threads=2)
        self.assertEqual(single.columns, double.columns)
        for name in single.columns:
            self.assertAllClose(single.column(name), double.column(name), rtol=0.0, atol=1e-12)

    def test_empty_space_row(self):
        """Test NEG at k = 1 yields a short row and the sweep still validates."""
        report = sweep(NegativeGeometryFactory(), 1, ks=(1, 2, 3))
        first, second = report.rows[0], report.rows[1]
        self.assertEqual(first['dim'], 0)
        self.assertNotIn('trace_error', first)
        self.assertIn('trace_error', second)
        self.assertEqual(report.column('trace_error').shape, (2,))
        self.assertNotIn('l1_error', report.fits)

    def test_default_ks(self):
        """Test curves and the product sweep their own ranges."""
        self.assertEqual(default_ks(self.geom)[-1], 40)
        self.assertEqual(default_ks(ProductGeometryFactory())[-1], 12)

    def test_validate_rejects_bad_rows(self):
        """Test a negative diagnostic or a dimension mismatch raises NumericalError."""
        rows = [{'k': 2, 'dim': 3, 'dim_oracle': 3, 'l1_error': -1.0}]
        with self.assertRaises(NumericalError):
            SweepReport('FS_CP1(d=1)', 0, (2,), (), rows, {}).validate()
        rows = [{'k': 2, 'dim': 3, 'dim_oracle': 4, 'l1_error': 0.5}]
        with self.assertRaises(NumericalError):
            SweepReport('FS_CP1(d=1)', 0, (2,), (), rows, {}).validate()
