import numpy as np
from scipy import special

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.geometry.curvature import classify
from toeplitz_lab.apps.geometry.factories import GeometryFactory, GridFactory, ProductGeometryFactory
from toeplitz_lab.apps.spaces.factories import SpaceFactory
from toeplitz_lab.apps.superform.symbols import ScalarField
from toeplitz_lab.apps.toeplitz.factories import ToeplitzMatrixFactory
from toeplitz_lab.apps.toeplitz.measures import DiscreteMeasure, ks_distance, levy_distance, pushforward_cdf
from toeplitz_lab.apps.toeplitz.spectra import SpectralMeasure, spectrum
from toeplitz_lab.exceptions import NumericalError


def hemisphere_spectrum(k):
    j = np.arange(k + 1)
    return SpectralMeasure(eigs=np.sort(special.betainc(j + 1, k - j + 1, 0.5)), k=k, n=1)


class TestPushforward(TestCase):
    def test_grid_shaped_samples(self):
        """Test product-shaped values and masses collapse to atoms, dropping massless samples."""
        values = np.array([[0.1, 0.2], [0.2, 0.3]])
        measure = DiscreteMeasure.from_samples(values, np.array([[1.0, 2.0], [3.0, 0.0]]))
        self.assertAllClose(measure.support, [0.1, 0.2])
        self.assertAllClose(measure.mass, [1.0, 5.0])
        measure = DiscreteMeasure.from_samples(values, 0.5)
        self.assertAllClose(measure.mass, [0.5, 1.0, 0.5])

    def test_constant(self):
        """Test f ≡ c pushes the FS curvature measure to a unit atom at c."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom)
        measure = pushforward_cdf(geom, grid, 0.3, q=0)
        self.assertAllClose(measure.support, [0.3])
        self.assertAllClose(measure.total_mass, 1.0, rtol=1e-10)

    def test_hemisphere(self):
        """Test the hemisphere indicator gives mass 1/2 at 0 and at 1."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom)
        measure = pushforward_cdf(geom, grid, ScalarField.hemisphere().sample(grid), q=0)
        self.assertAllClose(measure.support, [0.0, 1.0])
        self.assertAllClose(measure.mass, [0.5, 0.5], rtol=1e-10)
        self.assertAllClose(measure.cdf([-1.0, 0.0, 0.5, 1.0]), [0.0, 0.5, 0.5, 1.0])
        self.assertAllClose(measure.cdf_left([0.0, 1.0]), [0.0, 0.5])
        self.assertAllClose(measure.mass_above(0.5), 0.5, rtol=1e-10)

    def test_product(self):
        """Test a constant f_χ on the product puts the whole X(1) mass on one atom."""
        geom = ProductGeometryFactory()
        grid = GridFactory(geometry=geom, resolution=(8, 16))
        measure = pushforward_cdf(geom, grid, 0.25 + 0.5, q=1)
        self.assertAllClose(measure.support, [0.75])
        self.assertAllClose(measure.total_mass, classify(geom, grid).masses[1], rtol=1e-12)
        self.assertAllClose(measure.total_mass, 1.0, rtol=1e-3)

    def test_wrong_stratum(self):
        """Test X(1) of FS carries no mass."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom, resolution=(8, 16))
        measure = pushforward_cdf(geom, grid, 1.0, q=1)
        self.assertEqual(measure.total_mass, 0.0)
        with self.assertRaises(NumericalError):
            measure.cdf(0.0)


class TestDistances(TestCase):
    def test_identical(self):
        """Test identical laws are at distance zero."""
        first = DiscreteMeasure.from_samples([0.1, 0.4, 0.4, 0.9], 1.0)
        second = DiscreteMeasure.from_samples([0.9, 0.4, 0.1], [2.0, 4.0, 2.0])
        self.assertEqual(ks_distance(first, second), 0.0)
        self.assertEqual(levy_distance(first, second), 0.0)

    def test_point_masses(self):
        """Test δ₀ against δ_a: Kolmogorov distance 1, Lévy distance a."""
        zero = SpectralMeasure(eigs=np.zeros(3), k=3, n=1)
        for a in (0.05, 0.3, 0.8):
            shifted = DiscreteMeasure.from_samples([a], 1.0)
            self.assertEqual(ks_distance(zero, shifted), 1.0)
            self.assertAllClose(levy_distance(zero, shifted), a, atol=1e-10)

    def test_unit_symbol(self):
        """Test the spectrum of T_1 matches the pushforward of f ≡ 1."""
        space = SpaceFactory(k=8)
        grid = GridFactory(geometry=space.geom)
        sm = spectrum(ToeplitzMatrixFactory(space=space, symbol=ScalarField.constant(1.0)))
        limit = pushforward_cdf(space.geom, grid, 1.0, q=0)
        # eigenvalues sit within roundoff of 1, not on the atom itself
        self.assertLessEqual(levy_distance(sm, limit), 1e-9)

    def test_hemisphere_atoms(self):
        """Test Kolmogorov sees the atoms while the Lévy distance is small at k = 40."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom)
        limit = pushforward_cdf(geom, grid, ScalarField.hemisphere().sample(grid), q=0)
        sm = hemisphere_spectrum(40)
        self.assertGreaterEqual(ks_distance(sm, limit), 0.5 - 1e-10)
        self.assertLessEqual(levy_distance(sm, limit), 0.15)
        self.assertLess(levy_distance(sm, limit), levy_distance(hemisphere_spectrum(10), limit))

    def test_smooth_law(self):
        """Test the Kolmogorov distance for the height symbol decreases in k."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom)
        height = ScalarField.height()
        limit = pushforward_cdf(geom, grid, height.sample(grid), q=0)
        distances = [ks_distance(spectrum(ToeplitzMatrixFactory(space=SpaceFactory(k=k), symbol=height)), limit)
                     for k in (5, 10, 20)]
        self.assertTrue(np.all(np.diff(distances) < 0))
        self.assertLessEqual(distances[-1], 0.15)
