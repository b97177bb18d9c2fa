import factory

from toeplitz_lab.apps.geometry.factories import GeometryFactory, NegativeGeometryFactory, ProductGeometryFactory
from toeplitz_lab.apps.spaces.sections import HarmonicSpace, build_space


class SpaceFactory(factory.Factory):
    """H⁰ of FS_CP1(1) at k = 4 on the default grid."""

    class Meta:
        model = HarmonicSpace

    geom = factory.SubFactory(GeometryFactory)
    k = 4
    q = 0
    grid = None

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        return build_space(kwargs['geom'], kwargs['k'], kwargs['q'], kwargs['grid'])


class NegativeSpaceFactory(SpaceFactory):
    geom = factory.SubFactory(NegativeGeometryFactory)
    q = 1


class ProductSpaceFactory(SpaceFactory):
    geom = factory.SubFactory(ProductGeometryFactory)
    k = 3
    q = 1
