import factory

from toeplitz_lab.apps.experiments.config import ExperimentConfig, validate_config


class ExperimentDataFactory(factory.DictFactory):
    """Raw config mapping: a small bergman run on FS_CP1(1)."""

    geometry = factory.LazyFunction(lambda: {'name': 'FS_CP1', 'params': {'d': 1}})
    q = 0
    ks = factory.LazyFunction(lambda: [2, 4, 6, 8])
    experiments = factory.LazyFunction(lambda: ['bergman'])


class ExperimentConfigFactory(factory.Factory):
    """Validated ExperimentConfig built from the same defaults."""

    class Meta:
        model = ExperimentConfig

    geometry = factory.LazyFunction(lambda: {'name': 'FS_CP1', 'params': {'d': 1}})
    q = 0
    ks = factory.LazyFunction(lambda: [2, 4, 6, 8])
    experiments = factory.LazyFunction(lambda: ['bergman'])

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        return validate_config(kwargs)
