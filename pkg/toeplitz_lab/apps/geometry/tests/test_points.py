import numpy as np

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.geometry.points import (
    ChartPoints, geodesic_distance, isometry_image, pairwise_distance, sample_uniform,
)
from toeplitz_lab.exceptions import ChartError


class TestChartPoints(TestCase):
    def test_chart_choice(self):
        """Test affine input picks the chart with |coordinate| ≤ 1 and maps ∞ to the chart-1 origin."""
        points = ChartPoints.from_affine([0.5, 2.0, np.inf])
        self.assertEqual(points.chart.tolist(), [0, 1, 1])
        self.assertAllClose(points.coord, [0.5, 0.5, 0.0])
        self.assertAllClose(points.modulus_squared[:2], [0.25, 4.0])

    def test_invalid_points(self):
        """Test non-finite coordinates and unknown charts raise ChartError."""
        with self.assertRaises(ChartError):
            ChartPoints([0], [np.nan])
        with self.assertRaises(ChartError):
            ChartPoints([2], [0.0])
        with self.assertRaises(ChartError):
            ChartPoints([0, 1], [0.0])

    def test_sphere_coordinates(self):
        """Test z = 0 is the south pole and sphere points come back to themselves."""
        self.assertAllClose(ChartPoints([0], [0.0]).sphere, [[0.0, 0.0, -1.0]], atol=1e-15)
        self.assertAllClose(ChartPoints([1], [0.0]).sphere, [[0.0, 0.0, 1.0]], atol=1e-15)
        xyz = self.rng.standard_normal((50, 3))
        xyz /= np.linalg.norm(xyz, axis=1, keepdims=True)
        self.assertAllClose(ChartPoints.from_sphere(xyz).sphere, xyz, atol=1e-13)

    def test_in_chart(self):
        """Test coordinates in the other chart are reciprocal."""
        points = ChartPoints([0, 1], [0.5 + 0.5j, 0.25j])
        self.assertAllClose(points.in_chart(0) * points.in_chart(1), 1.0, atol=1e-14)


class TestDistance(TestCase):
    def test_distance_from_origin(self):
        """Test d(0, z) = 2·arctan|z| and antipodal points sit at distance π."""
        origin = ChartPoints([0, 0, 0], [0.0, 0.0, 0.0])
        other = ChartPoints.from_affine([0.3, 1.0 + 1.0j, np.inf])
        self.assertAllClose(geodesic_distance(origin, other),
                            [2 * np.arctan(0.3), 2 * np.arctan(np.sqrt(2.0)), np.pi], atol=1e-14)

    def test_product_distance(self):
        """Test the product distance combines factor distances in quadrature."""
        x = (ChartPoints([0], [0.0]), ChartPoints([0], [0.0]))
        y = (ChartPoints([0], [1.0]), ChartPoints([1], [0.0]))
        self.assertAllClose(geodesic_distance(x, y), [np.hypot(np.pi / 2, np.pi)], atol=1e-14)

    def test_isometry_preserves_distance(self):
        """Test moving points to a new centre keeps their pairwise distances."""
        local = sample_uniform(self.rng, 30)
        center = ChartPoints.from_affine([1.7 - 0.4j])
        moved = isometry_image(center, local)
        self.assertAllClose(pairwise_distance(moved), pairwise_distance(local), atol=1e-12)
        origin_image = isometry_image(center, ChartPoints([0], [0.0]))
        self.assertAllClose(geodesic_distance(origin_image, center), [0.0], atol=1e-12)
