import numpy as np
from django.conf import settings
from django.test import SimpleTestCase as BaseTestCase


class TestCaseMixin:

    def setUp(self):
        super().setUp()

        self.rng = np.random.default_rng(settings.SEED)

    def assertAllClose(self, actual, desired, rtol=1e-12, atol=1e-13, msg=None):
        """Elementwise closeness with numpy's tolerance semantics."""
        actual = np.asarray(actual)
        desired = np.asarray(desired)
        if not np.allclose(actual, desired, rtol=rtol, atol=atol):
            err = np.max(np.abs(actual - desired))
            self.fail(msg or f'arrays differ: max abs error {err:.3e} (rtol={rtol}, atol={atol})')

    def random_complex(self, *shape):
        return self.rng.standard_normal(shape) + 1j * self.rng.standard_normal(shape)


class TestCase(TestCaseMixin, BaseTestCase): ...
