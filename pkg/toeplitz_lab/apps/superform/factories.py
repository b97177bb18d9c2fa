import factory

from toeplitz_lab.apps.superform.symbols import ScalarField, SuperSymbol


class ScalarFieldFactory(factory.Factory):
    """Hemisphere indicator |z| ≤ 1 on the first factor by default."""

    class Meta:
        model = ScalarField

    terms = factory.LazyFunction(lambda: ScalarField.hemisphere().terms)


class HeightFieldFactory(ScalarFieldFactory):
    terms = factory.LazyFunction(lambda: ScalarField.height().terms)


class SuperSymbolFactory(factory.Factory):
    """Diagonal symbol c₀ + c₁E₁ + c₂E₂ + c₁₂E₁₂ on a surface with constant blocks."""

    class Meta:
        model = SuperSymbol

    n = 2
    c0 = 0.25
    c1 = 0.5
    c2 = 2.0
    c12 = -1.0

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        n = kwargs.pop('n')
        values = {(): kwargs.pop('c0'), (0,): kwargs.pop('c1'), (1,): kwargs.pop('c2'), (0, 1): kwargs.pop('c12')}
        components = {J: ScalarField.constant(v) for J, v in values.items() if max(J, default=-1) < n}
        return model_class(n, components)
