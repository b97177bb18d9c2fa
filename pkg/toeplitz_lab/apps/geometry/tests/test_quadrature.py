import numpy as np

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.geometry.catalog import perturbation_limit
from toeplitz_lab.apps.geometry.factories import (
    GeometryFactory, GridFactory, PerturbedGeometryFactory, ProductGeometryFactory,
)
from toeplitz_lab.apps.geometry.quadrature import build_grid, partition
from toeplitz_lab.exceptions import ResolutionError


class TestPartition(TestCase):
    def test_partition_of_unity(self):
        """Test ρ(s) + ρ(−s) = 1 with ρ = 1 inside |ζ| ≤ 1/2 and 0 beyond |ζ| ≥ 2."""
        s = np.linspace(-2.0, 2.0, 401)
        self.assertAllClose(partition(s) + partition(-s), 1.0, atol=1e-15)
        self.assertAllClose(partition(s[s <= -np.log(2.0)]), 1.0)
        self.assertAllClose(partition(s[s >= np.log(2.0)]), 0.0)


class TestBuildGrid(TestCase):
    def test_weights_positive(self):
        """Test every node carries a positive weight."""
        for geom in (GeometryFactory(), PerturbedGeometryFactory()):
            grid = GridFactory(geometry=geom)
            self.assertTrue(np.all(grid.factors[0].weight > 0))

    def test_curve_area(self):
        """Test Σ w = π on CP¹ at the default resolution."""
        grid = GridFactory()
        self.assertLess(abs(grid.total_volume() - np.pi) / np.pi, 1e-10)
        self.assertLess(abs(GridFactory(geometry=PerturbedGeometryFactory()).total_volume() - np.pi), 1e-10)

    def test_product_area(self):
        """Test the product grid integrates 1 to π²."""
        grid = GridFactory(geometry=ProductGeometryFactory())
        self.assertEqual(grid.weights.shape, grid.shape)
        self.assertLess(abs(grid.integrate(1.0) - np.pi ** 2) / np.pi ** 2, 1e-10)

    def test_beta_integrals(self):
        """Test radial integrands against beta-function values."""
        grid = GridFactory()
        t = grid.factors[0].points.modulus_squared
        # ∫ |z|²(1+|z|²)^{-3} ω = π∫ t(1+t)^{-5} dt = π/12
        self.assertLess(abs(grid.integrate(t / (1 + t) ** 3) - np.pi / 12) / (np.pi / 12), 1e-10)
        # height u/(1+u) has mean 1/2 over the sphere
        self.assertLess(abs(grid.integrate(t / (1 + t)) - np.pi / 2), 1e-10)

    def test_hemisphere_is_exact(self):
        """Test the |z| = 1 breakpoint integrates the hemisphere indicator exactly."""
        grid = GridFactory()
        t = grid.factors[0].points.modulus_squared
        self.assertAlmostEqual(grid.integrate(t <= 1.0), np.pi / 2, places=12)

    def test_chart_counts(self):
        """Test both charts carry nodes, PERTURBED adds bump segments and t_max adds the degenerate annulus."""
        plain = GridFactory(resolution=(8, 16))
        self.assertEqual(plain.factors[0].counts, (3 * 8 * 16, 3 * 8 * 16))
        moderate = PerturbedGeometryFactory(params={'d': 1, 't': 0.5 * perturbation_limit(1)})
        bumped = GridFactory(geometry=moderate, resolution=(8, 16))
        self.assertEqual(bumped.factors[0].counts, (5 * 8 * 16, 5 * 8 * 16))
        limit = GridFactory(geometry=PerturbedGeometryFactory(), resolution=(8, 16))
        self.assertEqual(limit.factors[0].counts, (7 * 8 * 16, 7 * 8 * 16))

    def test_resolution_minimum(self):
        """Test a resolution below the minimum raises ResolutionError."""
        with self.assertRaises(ResolutionError):
            build_grid(GeometryFactory(), (2, 8))
        with self.assertRaises(ResolutionError):
            build_grid(GeometryFactory(), (8, 4))
        with self.assertRaises(ResolutionError):
            build_grid(GeometryFactory(), (8,))
