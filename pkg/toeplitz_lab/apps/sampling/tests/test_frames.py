import dataclasses

import numpy as np
from scipy import stats

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.geometry.factories import GeometryFactory, GridFactory, NegativeGeometryFactory
from toeplitz_lab.apps.geometry.points import sample_uniform
from toeplitz_lab.apps.sampling.factories import CapDeficientFamilyFactory, PointFamilyFactory, QuadratureFamilyFactory
from toeplitz_lab.apps.sampling.families import SamplingSet, fibonacci_cap, generate
from toeplitz_lab.apps.sampling.frames import (
    density_report, frame_bounds, lattice_density_condition, necessary_condition_experiment,
)
from toeplitz_lab.apps.spaces.factories import SpaceFactory
from toeplitz_lab.apps.superform.symbols import ScalarField
from toeplitz_lab.exceptions import CatalogError


class TestFrameBounds(TestCase):
    def test_rank_deficiency(self):
        """Test dim − 1 points give λ_min ≤ 1e−12 and A = ∞."""
        space = SpaceFactory(k=10)
        family = PointFamilyFactory()
        sampling_set = SamplingSet(family, 10, fibonacci_cap(space.dim - 1), np.ones(space.dim - 1))
        bounds = frame_bounds(space, sampling_set)
        self.assertTrue(bounds.undersampled)
        self.assertLessEqual(bounds.lam_min, 1e-12)
        self.assertEqual(bounds.A, np.inf)

    def test_quadrature_nodes(self):
        """Test the weighted quadrature nodes reproduce the identity."""
        family = QuadratureFamilyFactory()
        for k in (10, 20, 40):
            bounds = frame_bounds(SpaceFactory(k=k), generate(family, k))
            self.assertLessEqual(bounds.lam_max / bounds.lam_min, 1.0 + 1e-6)
            self.assertLessEqual(bounds.A, 2.0)

    def test_fibonacci_finite(self):
        """Test FIBONACCI_UNIFORM(1.5) samples at k = 20."""
        bounds = frame_bounds(SpaceFactory(k=20), generate(PointFamilyFactory(), 20))
        self.assertTrue(np.isfinite(bounds.A))
        self.assertGreater(bounds.lam_min, 0.0)

    def test_unitary_recombination(self):
        """Test frame bounds do not depend on the choice of orthonormal basis."""
        space = SpaceFactory(k=12)
        sampling_set = generate(PointFamilyFactory(), 12)
        u = stats.unitary_group.rvs(space.dim, random_state=self.rng)
        rotated = dataclasses.replace(space, factor_onb=(space.factor_onb[0] @ u,))
        first, second = frame_bounds(space, sampling_set), frame_bounds(rotated, sampling_set)
        self.assertAllClose([first.lam_min, first.lam_max], [second.lam_min, second.lam_max], rtol=0.0, atol=1e-10)

    def test_adding_points(self):
        """Test λ_min never decreases when a point is added."""
        space = SpaceFactory(k=8)
        sampling_set = generate(PointFamilyFactory(c=0.8), 8)
        previous = frame_bounds(space, sampling_set).lam_min
        for _ in range(20):
            sampling_set = sampling_set.with_points(sample_uniform(self.rng, 1))
            current = frame_bounds(space, sampling_set).lam_min
            self.assertGreaterEqual(current, previous - 1e-13)
            previous = current

    def test_cap_deficient_degrades(self):
        """Test λ_min of CAP_DEFICIENT(2.0, hemisphere) shrinks tenfold from k = 10 to k = 40."""
        family = CapDeficientFamilyFactory()
        small = frame_bounds(SpaceFactory(k=10), generate(family, 10)).lam_min
        large = frame_bounds(SpaceFactory(k=40), generate(family, 40)).lam_min
        self.assertLessEqual(large, small / 10.0)


class TestDensityReport(TestCase):
    def setUp(self):
        super().setUp()
        self.geom = GeometryFactory()
        self.grid = GridFactory(geometry=self.geom)

    def test_fibonacci_hemisphere(self):
        """Test density 0.75 against mass 0.5 on the hemisphere, and 1.5 against 1 on X."""
        rows = density_report(PointFamilyFactory(), self.geom, [ScalarField.hemisphere(), ScalarField.constant(1.0)],
                              (20,), self.grid)
        hemisphere, whole = rows
        self.assertAllClose(hemisphere['density'], 0.75)
        self.assertAllClose(hemisphere['mass'], 0.5, atol=1e-8)
        self.assertAllClose(hemisphere['margin'], 0.25, atol=1e-8)
        self.assertAllClose(whole['density'], 1.5)
        self.assertAllClose(whole['mass'], 1.0, atol=1e-8)
        self.assertFalse(hemisphere['clipped'])

    def test_cap_deficient_margin(self):
        """Test the removed cap has density 0 and margin −1/2."""
        rows = density_report(CapDeficientFamilyFactory(), self.geom, [ScalarField.hemisphere()], (10, 20), self.grid)
        for row in rows:
            self.assertEqual(row['density'], 0.0)
            self.assertAllClose(row['margin'], -0.5, atol=1e-8)

    def test_degenerate_region_clipped(self):
        """Test regions on a flat bundle are clipped to the empty X(0)."""
        flat = GeometryFactory(params={'d': 0})
        grid = GridFactory(geometry=flat, resolution=(8, 16))
        row, = density_report(PointFamilyFactory(geom=flat), flat, [ScalarField.hemisphere()], (10,), grid)
        self.assertTrue(row['clipped'])
        self.assertEqual(row['density'], 0.0)
        self.assertEqual(row['mass'], 0.0)


class TestNecessaryCondition(TestCase):
    def test_experiment(self):
        """Test deficient families degrade and quadrature nodes stay bounded."""
        geom = GeometryFactory()
        families = [CapDeficientFamilyFactory(), QuadratureFamilyFactory(), PointFamilyFactory()]
        report = necessary_condition_experiment(geom, families, (10, 20, 30, 40))
        self.assertTrue(report.passed)
        deficient = report.verdicts[families[0].label]
        self.assertTrue(deficient['deficient'])
        self.assertEqual(deficient['verdict'], 'degrading')
        self.assertGreaterEqual(deficient['lam_min_ratio'], 10.0)
        quadrature = [row for row in report.rows if row['family'] == families[1].label]
        self.assertTrue(all(row['A'] <= 2.0 for row in quadrature))
        self.assertEqual(report.verdicts[families[1].label]['verdict'], 'bounded')
        cap_rows = [row for row in report.rows if row['family'] == families[0].label]
        self.assertTrue(all(row['concentration_dim'] > 0 for row in cap_rows))

    def test_rejects_negative_geometry(self):
        """Test NEG_CP1 is refused."""
        with self.assertRaises(CatalogError):
            necessary_condition_experiment(NegativeGeometryFactory(), [], (10,))


class TestLatticeCondition(TestCase):
    def test_fock_lattice(self):
        """Test a₁a₂ ≤ π decides the one-dimensional lattice condition."""
        self.assertTrue(lattice_density_condition([1.5, 2.0])['satisfied'])
        self.assertFalse(lattice_density_condition([2.0, 2.0])['satisfied'])
        result = lattice_density_condition([1.0, 1.0, 1.0, 1.0])
        self.assertEqual(result['n'], 2)
        self.assertAllClose(result['bound'], np.pi ** 2)

    def test_invalid_spacings(self):
        """Test odd or nonpositive spacings raise ValueError."""
        with self.assertRaises(ValueError):
            lattice_density_condition([1.0, 2.0, 3.0])
        with self.assertRaises(ValueError):
            lattice_density_condition([1.0, -2.0])
