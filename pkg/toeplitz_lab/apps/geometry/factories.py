import factory

from toeplitz_lab.apps.geometry.catalog import CatalogName, ModelGeometry, build_geometry, perturbation_limit
from toeplitz_lab.apps.geometry.quadrature import QuadratureGrid, build_grid


class GeometryFactory(factory.Factory):
    """Factory for catalog geometries, built through the catalog validator."""

    class Meta:
        model = ModelGeometry

    name = CatalogName.FS_CP1
    params = factory.LazyFunction(lambda: {'d': 1})

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        return build_geometry(kwargs['name'], kwargs['params'])


class PerturbedGeometryFactory(GeometryFactory):
    """Bump amplitude at the semi-positivity limit unless `params` is given."""

    name = CatalogName.PERTURBED_CP1
    params = factory.LazyFunction(lambda: {'d': 1, 't': perturbation_limit(1)})


class NegativeGeometryFactory(GeometryFactory):
    name = CatalogName.NEG_CP1
    params = factory.LazyFunction(lambda: {'m': 1})


class ProductGeometryFactory(GeometryFactory):
    name = CatalogName.PRODUCT_CP1xCP1
    params = factory.LazyFunction(lambda: {'a': 1, 'b': 1})


class GridFactory(factory.Factory):
    """Quadrature grid for a geometry; default resolution unless given."""

    class Meta:
        model = QuadratureGrid

    geometry = factory.SubFactory(GeometryFactory)
    resolution = None

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        return build_grid(kwargs['geometry'], kwargs['resolution'])
