class ToeplitzLabError(Exception):
    """Base class for every error raised by the lab."""


class CatalogError(ToeplitzLabError):
    """Unknown geometry, parameters out of range or unsupported (geometry, q, k)."""


class ChartError(ToeplitzLabError):
    """A point lies outside the validity region of every chart."""


class ResolutionError(ToeplitzLabError):
    """Quadrature resolution below the documented minimum."""


class FormAlgebraError(ToeplitzLabError):
    """Invalid operation in the graded form algebra."""


class DegenerateCurvatureError(ToeplitzLabError):
    """The curvature is degenerate where a direction form is required."""


class SpaceError(ToeplitzLabError):
    pass


class SingularGramError(SpaceError):
    """Basis elements are numerically indistinguishable."""


class NoExtremalError(SpaceError):
    """B_θ(x) vanishes, so no extremal section exists."""


class NumericalError(ToeplitzLabError):
    pass


class NonFiniteError(NumericalError):
    pass


class NonHermitianError(NumericalError):
    pass


class RateFitError(NumericalError):
    pass


class ConfigError(ToeplitzLabError):
    """Experiment configuration failed validation."""

    def __init__(self, errors):
        self.errors = errors
        super().__init__(f'Invalid experiment configuration: {errors}')
