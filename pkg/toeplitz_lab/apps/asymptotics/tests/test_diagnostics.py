import numpy as np

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.asymptotics import diagnostics
from toeplitz_lab.apps.asymptotics.fits import fit_exponential
from toeplitz_lab.apps.geometry.curvature import curvature_field
from toeplitz_lab.apps.geometry.factories import (
    GeometryFactory, GridFactory, NegativeGeometryFactory, PerturbedGeometryFactory, ProductGeometryFactory,
)
from toeplitz_lab.apps.spaces.factories import NegativeSpaceFactory, ProductSpaceFactory, SpaceFactory
from toeplitz_lab.apps.spaces.sections import build_space
from toeplitz_lab.apps.superform.factories import SuperSymbolFactory
from toeplitz_lab.apps.superform.symbols import ScalarField, SuperSymbol
from toeplitz_lab.apps.toeplitz.spectra import spectrum
from toeplitz_lab.apps.toeplitz.factories import ToeplitzMatrixFactory


def setup(space):
    grid = GridFactory(geometry=space.geom, resolution=space.resolution)
    return grid, curvature_field(space.geom, grid)


def scalar(n, f):
    return SuperSymbol.scalar(n, f)


class TestBergmanError(TestCase):
    def test_exact_curves(self):
        """Test the L¹ error is exactly 1/k on FS and on NEG."""
        for factory in (SpaceFactory, NegativeSpaceFactory):
            for k in (4, 10, 40):
                space = factory(k=k)
                grid, field = setup(space)
                self.assertAllClose(diagnostics.l1_bergman_error(space, grid, field), 1.0 / k, rtol=1e-8)

    def test_perturbed_decreasing(self):
        """Test the L¹ error decreases over a sweep on PERTURBED."""
        geom = PerturbedGeometryFactory()
        grid = GridFactory(geometry=geom)
        field = curvature_field(geom, grid)
        errors = [diagnostics.l1_bergman_error(build_space(geom, k, 0, grid), grid, field) for k in (4, 8, 16, 32)]
        self.assertTrue(np.all(np.diff(errors) < 0))

    def test_dimension_error(self):
        """Test k^{−n}dim matches the X(q) mass within 3/k."""
        for space in (SpaceFactory(k=10), NegativeSpaceFactory(k=10), ProductSpaceFactory(k=6),
                      SpaceFactory(geom=PerturbedGeometryFactory(), k=10)):
            grid, field = setup(space)
            self.assertLessEqual(diagnostics.dimension_error(space, grid, field), 3.0 / space.k)


class TestTraceDiagnostics(TestCase):
    def test_trace_error(self):
        """Test |k^{−n}Tr T_f − limit| ≤ 3/k for the height on every catalog geometry."""
        for space in (SpaceFactory(k=12), NegativeSpaceFactory(k=12), ProductSpaceFactory(k=6),
                      SpaceFactory(geom=PerturbedGeometryFactory(), k=12)):
            grid, field = setup(space)
            symbol = scalar(space.n, ScalarField.height())
            self.assertLessEqual(diagnostics.trace_error(space, grid, symbol, field), 3.0 / space.k)

    def test_constant_symbols_commute(self):
        """Test the product trace defect vanishes for constant symbols."""
        space = SpaceFactory(k=9)
        grid, field = setup(space)
        f, g = scalar(1, ScalarField.constant(2.0)), scalar(1, ScalarField.constant(-0.5))
        self.assertLessEqual(diagnostics.product_trace_defect(space, grid, f, g, field), 1e-10)

    def test_product_trace_defect_decreasing(self):
        """Test the height defect on FS shrinks over k."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom)
        field = curvature_field(geom, grid)
        height = scalar(1, ScalarField.height())
        defects = [diagnostics.product_trace_defect(build_space(geom, k, 0, grid), grid, height, height, field)
                   for k in (5, 10, 20, 40)]
        self.assertTrue(np.all(np.diff(defects) < 0))
        self.assertLessEqual(defects[-1] * 40, defects[0] * 5 * 2)

    def test_invisible_block(self):
        """Test the c₂E₂ block changes no trace diagnostic on the product."""
        space = ProductSpaceFactory(k=4)
        grid, field = setup(space)
        g = scalar(2, ScalarField.height(0))
        with_block, without = SuperSymbolFactory(c2=5.0), SuperSymbolFactory(c2=0.0)
        for diagnostic in (diagnostics.product_trace_defect, diagnostics.kernel_pairing_error):
            self.assertAllClose(diagnostic(space, grid, with_block, g, field),
                                diagnostic(space, grid, without, g, field), rtol=0.0, atol=1e-10)

    def test_kernel_pairing(self):
        """Test k^{−n}Tr(T_fT_g) approaches π^{−n}∫f_χg_χ|det|."""
        geom = NegativeGeometryFactory()
        grid = GridFactory(geometry=geom)
        field = curvature_field(geom, grid)
        f, g = scalar(1, ScalarField.height()), scalar(1, ScalarField.hemisphere())
        errors = [diagnostics.kernel_pairing_error(build_space(geom, k, 1, grid), grid, f, g, field)
                  for k in (5, 10, 20, 40)]
        self.assertLess(errors[-1], errors[0])
        self.assertLessEqual(errors[-1], 3.0 / 40)


class TestCountingAndLaws(TestCase):
    def test_hemisphere_counting(self):
        """Test counting errors within 1/k at γ = 1/2 and k^{−1/2} at γ = 1/4, 3/4."""
        geom = GeometryFactory()
        grid = GridFactory(geometry=geom)
        field = curvature_field(geom, grid)
        symbol = scalar(1, ScalarField.hemisphere())
        limit = diagnostics.limit_law(geom, 0, grid, symbol, field)
        for k in (11, 21, 41):
            sm = diagnostics.symbol_spectrum(build_space(geom, k, 0, grid), grid, symbol)
            errors = diagnostics.counting_errors(sm, limit, (0.25, 0.5, 0.75))
            self.assertLessEqual(errors[0.5], 1.0 / k)
            self.assertLessEqual(errors[0.25], k ** -0.5)
            self.assertLessEqual(errors[0.75], k ** -0.5)

    def test_constant_above_level(self):
        """Test f ≡ c with γ > c counts nothing on either side."""
        space = SpaceFactory(k=6)
        grid, field = setup(space)
        symbol = scalar(1, ScalarField.constant(0.3))
        limit = diagnostics.limit_law(space.geom, 0, grid, symbol, field)
        sm = diagnostics.symbol_spectrum(space, grid, symbol)
        self.assertEqual(diagnostics.counting_errors(sm, limit, (0.5,)), {0.5: 0.0})

    def test_perturbed_counts_regular_stratum(self):
        """Test the PERTURBED limit law carries only the X(0) mass."""
        geom = PerturbedGeometryFactory()
        grid = GridFactory(geometry=geom)
        field = curvature_field(geom, grid)
        limit = diagnostics.limit_law(geom, 0, grid, scalar(1, ScalarField.constant(1.0)), field)
        self.assertAllClose(limit.total_mass, diagnostics.stratum_mass(grid, field, 0), rtol=1e-12)
        empty = diagnostics.limit_law(geom, 1, grid, scalar(1, ScalarField.constant(1.0)), field)
        self.assertEqual(empty.total_mass, 0.0)

    def test_constant_pushforward(self):
        """Test f ≡ c has zero band distance at every k."""
        for space in (SpaceFactory(k=5), ProductSpaceFactory(k=3)):
            grid, field = setup(space)
            symbol = scalar(space.n, ScalarField.constant(0.7))
            limit = diagnostics.limit_law(space.geom, space.q, grid, symbol, field)
            result = diagnostics.spectral_pushforward_test(diagnostics.symbol_spectrum(space, grid, symbol), limit)
            self.assertTrue(result.has_atoms)
            self.assertLessEqual(result.band_distance, 1e-9)

    def test_product_pushforward(self):
        """Test the product band distance is independent of c₂ and shrinks with k."""
        geom = ProductGeometryFactory()
        grid = GridFactory(geometry=geom)
        field = curvature_field(geom, grid)
        symbol = SuperSymbol(2, {(): ScalarField.height(0), (0,): ScalarField.height(1, 0.5)})
        shifted = SuperSymbol(2, {**symbol.components, (1,): ScalarField.hemisphere(0, 3.0)})
        limit = diagnostics.limit_law(geom, 1, grid, symbol, field)
        self.assertAllClose(diagnostics.limit_law(geom, 1, grid, shifted, field).mass, limit.mass, rtol=0.0, atol=0.0)
        distances = []
        for k in (4, 8, 12):
            space = build_space(geom, k, 1, grid)
            first = diagnostics.spectral_pushforward_test(diagnostics.symbol_spectrum(space, grid, symbol), limit)
            second = diagnostics.spectral_pushforward_test(diagnostics.symbol_spectrum(space, grid, shifted), limit)
            self.assertAllClose(first.ks, second.ks, atol=1e-12)
            distances.append(first.band_distance)
        self.assertTrue(np.all(np.diff(distances) < 0))
        self.assertLessEqual(distances[-1], 0.15)


class TestOffdiagonal(TestCase):
    def test_fubini_study_closed_form(self):
        """Test the FS fraction equals cos^{2(k+1)}(δ/2)."""
        for k in (5, 20):
            space = SpaceFactory(k=k)
            self.assertAllClose(diagnostics.offdiagonal_mass(space, 0.5), np.cos(0.25) ** (2 * k + 2), rtol=1e-8)

    def test_limits_in_radius(self):
        """Test δ = 0 keeps all mass and δ = π keeps none."""
        space = SpaceFactory(k=6)
        self.assertAllClose(diagnostics.offdiagonal_mass(space, 0.0), 1.0)
        self.assertLessEqual(diagnostics.offdiagonal_mass(space, np.pi), 1e-10)

    def test_exponential_localization(self):
        """Test the FS fraction decays like e^{−ck} with c > 0."""
        ks = np.arange(5, 41, 5)
        series = [diagnostics.offdiagonal_mass(SpaceFactory(k=int(k)), 0.5) for k in ks]
        fit = fit_exponential(ks, series)
        self.assertGreater(-fit.slope, 0.0)
        self.assertGreaterEqual(fit.r_squared, 0.99)

    def test_product_localization(self):
        """Test the product fraction shrinks with k."""
        series = [diagnostics.offdiagonal_mass(ProductSpaceFactory(k=k), 0.5) for k in (2, 4, 8)]
        self.assertTrue(np.all(np.diff(series) < 0))
        self.assertTrue(np.all((np.array(series) > 0) & (np.array(series) < 1)))


class TestConcentration(TestCase):
    def test_hemisphere(self):
        """Test the concentration subspace is large and concentrated on the hemisphere."""
        for k in (10, 20):
            space = SpaceFactory(k=k)
            grid, _ = setup(space)
            sub = diagnostics.concentration_subspace(space, grid, ScalarField.hemisphere(), eps=0.1)
            self.assertGreaterEqual(sub.dim, (0.5 - 2.0 / k) * k)
            self.assertTrue(np.all(sub.eigs >= 0.9))
            coefficients = self.random_complex(sub.dim, 50)
            coefficients /= np.linalg.norm(coefficients, axis=0)
            self.assertTrue(np.all(sub.region_norm(coefficients) >= 0.9 - 1e-8))

    def test_matches_spectrum(self):
        """Test the kept eigenvalues are those of T_{1_Ω} above 1−ε."""
        space = SpaceFactory(k=12)
        grid, _ = setup(space)
        sub = diagnostics.concentration_subspace(space, grid, ScalarField.hemisphere(), eps=0.2)
        eigs = spectrum(ToeplitzMatrixFactory(space=space)).eigs
        self.assertAllClose(sub.eigs, eigs[eigs >= 0.8], atol=1e-12)
