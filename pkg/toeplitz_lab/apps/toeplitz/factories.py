import factory

from toeplitz_lab.apps.geometry.quadrature import build_grid
from toeplitz_lab.apps.spaces.factories import SpaceFactory
from toeplitz_lab.apps.superform.factories import ScalarFieldFactory
from toeplitz_lab.apps.toeplitz.operators import ToeplitzMatrix, assemble


class ToeplitzMatrixFactory(factory.Factory):
    """T_f for a scalar field, assembled on the grid the space was orthonormalized on."""

    class Meta:
        model = ToeplitzMatrix

    space = factory.SubFactory(SpaceFactory)
    symbol = factory.SubFactory(ScalarFieldFactory)
    symbol_id = 'f'

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        space = kwargs['space']
        grid = build_grid(space.geom, space.resolution)
        return assemble(space, kwargs['symbol'].sample(grid), grid, kwargs['symbol_id'])
