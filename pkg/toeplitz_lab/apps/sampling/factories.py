import factory

from toeplitz_lab.apps.geometry.factories import GeometryFactory
from toeplitz_lab.apps.sampling.families import FamilyKind, PointFamily


class PointFamilyFactory(factory.Factory):
    """FIBONACCI_UNIFORM(1.5) on FS_CP1(1)."""

    class Meta:
        model = PointFamily

    kind = FamilyKind.FIBONACCI_UNIFORM
    geom = factory.SubFactory(GeometryFactory)
    c = 1.5


class CapDeficientFamilyFactory(PointFamilyFactory):
    """Twice the critical density, with nothing in the hemisphere |z| ≤ 1."""

    kind = FamilyKind.CAP_DEFICIENT
    c = 2.0


class QuadratureFamilyFactory(PointFamilyFactory):
    kind = FamilyKind.QUADRATURE_NODES
