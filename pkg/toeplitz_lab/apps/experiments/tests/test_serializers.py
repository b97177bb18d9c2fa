import tempfile
from pathlib import Path

import numpy as np

from toeplitz_lab.test import TestCase
from toeplitz_lab.apps.experiments.config import emit_config, load_config, parse_config, validate_config
from toeplitz_lab.apps.experiments.factories import ExperimentConfigFactory, ExperimentDataFactory
from toeplitz_lab.apps.experiments.serializers import ExperimentConfigSerializer
from toeplitz_lab.apps.geometry.catalog import perturbation_limit
from toeplitz_lab.apps.sampling.families import FamilyKind
from toeplitz_lab.exceptions import ConfigError


class TestExperimentConfigSerializer(TestCase):
    def assertInvalid(self, data, *path):
        """Validation fails with an error under the given key path."""
        serializer = ExperimentConfigSerializer(data=data)
        self.assertFalse(serializer.is_valid())
        errors = serializer.errors
        for key in path:
            self.assertIn(key, errors)
            errors = errors[key]

    def test_defaults(self):
        """Test omitted fields take their documented defaults."""
        config = validate_config(ExperimentDataFactory())
        self.assertEqual(config.gammas, [0.25, 0.5, 0.75])
        self.assertEqual(config.delta, 0.5)
        self.assertEqual(config.tolerances, {})
        self.assertIsNone(config.resolution)
        self.assertIsNone(config.sampling)
        self.assertEqual(config.geom.label, 'FS_CP1(1)')

    def test_unknown_keys(self):
        """Test unknown keys are rejected at every nesting level."""
        self.assertInvalid(ExperimentDataFactory(colour='red'), 'colour')
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'FS_CP1', 'params': {'d': 1}, 'extra': 1}),
                           'geometry', 'extra')
        self.assertInvalid(ExperimentDataFactory(symbols={'f': {'scalar': [{'kind': 'height', 'colour': 1}]}}),
                           'symbols')
        self.assertInvalid(ExperimentDataFactory(sampling={'families': [{'kind': 'FIBONACCI_UNIFORM', 'n': 3}]}),
                           'sampling', 'families')

    def test_geometry_params(self):
        """Test catalog parameter errors surface under geometry.params."""
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'FS_CP1', 'params': {'d': -1}}),
                           'geometry', 'params')
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'NEG_CP1', 'params': {'d': 1}}, q=1),
                           'geometry', 'params')
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'PERTURBED_CP1', 'params': {'d': 1, 't': 'big'}}),
                           'geometry', 'params')
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'K3', 'params': {}}), 'geometry', 'name')

    def test_perturbation_limit(self):
        """Test t = 'max' resolves to the semi-positivity limit."""
        config = validate_config(ExperimentDataFactory(geometry={'name': 'PERTURBED_CP1',
                                                                 'params': {'d': 1, 't': 'max'}}))
        self.assertEqual(config.geometry['params']['t'], 'max')
        self.assertAllClose(config.geom.params['t'], perturbation_limit(1))

    def test_form_degree(self):
        """Test each geometry accepts only its supported q."""
        self.assertInvalid(ExperimentDataFactory(q=1), 'q')
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'PRODUCT_CP1xCP1', 'params': {'a': 1, 'b': 1}},
                                                 q=0), 'q')
        validate_config(ExperimentDataFactory(geometry={'name': 'NEG_CP1', 'params': {'m': 2}}, q=1))

    def test_symbols(self):
        """Test block keys and factors are checked against the geometry dimension."""
        self.assertInvalid(ExperimentDataFactory(symbols={'f': {'E1': [{'kind': 'height'}]}}), 'symbols', 'f')
        self.assertInvalid(ExperimentDataFactory(symbols={'f': {'2': [{'kind': 'constant'}]}}), 'symbols', 'f')
        self.assertInvalid(ExperimentDataFactory(symbols={'f': {'scalar': [{'kind': 'height', 'factor': 2}]}}),
                           'symbols', 'f')
        config = validate_config(ExperimentDataFactory(
            geometry={'name': 'PRODUCT_CP1xCP1', 'params': {'a': 1, 'b': 1}}, q=1,
            symbols={'f': {'scalar': [{'kind': 'height', 'factor': 2}], '12': [{'kind': 'constant', 'weight': -1.0}]}},
        ))
        self.assertEqual(set(config.symbol('f').components), {(), (0, 1)})

    def test_default_symbols(self):
        """Test f and g default to the hemisphere indicator and the height."""
        config = ExperimentConfigFactory()
        self.assertEqual(config.symbol('f').component(()).terms[0].kind, 'cap')
        self.assertEqual(config.symbol('g').component(()).terms[0].kind, 'height')

    def test_tolerances(self):
        """Test overrides apply and unknown tolerance names are rejected."""
        config = ExperimentConfigFactory(tolerances={'trace': 5.0})
        self.assertEqual(config.tolerance('trace'), 5.0)
        self.assertEqual(config.tolerance('pushforward'), 0.15)
        self.assertInvalid(ExperimentDataFactory(tolerances={'speed': 1.0}), 'tolerances')

    def test_sampling_geometry(self):
        """Test the sampling experiment is refused off the positive curves."""
        self.assertInvalid(ExperimentDataFactory(geometry={'name': 'NEG_CP1', 'params': {'m': 1}}, q=1,
                                                 experiments=['sampling']), 'experiments')

    def test_families(self):
        """Test configured families and regions are built on the config geometry."""
        config = ExperimentConfigFactory(sampling={
            'families': [{'kind': 'CAP_DEFICIENT', 'c': 2.0, 'cap_center': None, 'cap_radius': 1.0}],
            'regions': [[{'kind': 'cap', 'center': None, 'radius': 1.0}]],
        })
        family, = config.families()
        self.assertEqual(family.kind, FamilyKind.CAP_DEFICIENT)
        self.assertIsNone(family.cap_center)
        self.assertEqual(family.geom, config.geom)
        region, = config.regions()
        self.assertIsNone(region.terms[0].center)
        self.assertEqual(len(ExperimentConfigFactory().families()), 3)
        self.assertInvalid(ExperimentDataFactory(sampling={'families': [{'kind': 'FIBONACCI_UNIFORM', 'c': 0.0}]}),
                           'sampling', 'families')


class TestConfigFiles(TestCase):
    def setUp(self):
        super().setUp()
        self.config = ExperimentConfigFactory(
            geometry={'name': 'PERTURBED_CP1', 'params': {'d': 1, 't': 'max'}},
            resolution=[8, 16],
            symbols={'f': {'scalar': [{'kind': 'cap', 'center': [0.5, -0.25], 'radius': 1.0},
                                      {'kind': 'constant', 'weight': 0.1}]}},
            experiments=['bergman', 'spectrum', 'sampling'],
            gammas=[0.1, 0.9],
            delta=float(np.pi / 3),
            tolerances={'counting': 2.0},
            sampling={'families': [{'kind': 'QUADRATURE_NODES'}], 'lattice': [1.5, 2.0]},
        )

    def test_round_trip(self):
        """Test parse(emit(config)) reproduces the config exactly."""
        self.assertEqual(parse_config(emit_config(self.config)), self.config)

    def test_load(self):
        """Test YAML and JSON files load to the same config."""
        text = emit_config(self.config)
        json_text = (
            '{"geometry": {"name": "FS_CP1", "params": {"d": 1}}, "q": 0, "ks": [2, 4, 6, 8],'
            ' "experiments": ["bergman"]}'
        )
        with tempfile.TemporaryDirectory() as tmp:
            yaml_path, json_path = Path(tmp) / 'run.yaml', Path(tmp) / 'run.json'
            yaml_path.write_text(text, encoding='utf-8')
            json_path.write_text(json_text, encoding='utf-8')
            self.assertEqual(load_config(yaml_path), self.config)
            self.assertEqual(load_config(json_path), ExperimentConfigFactory())

    def test_unreadable(self):
        """Test broken files and non-mappings raise ConfigError."""
        with self.assertRaises(ConfigError):
            parse_config('geometry: [unclosed')
        with self.assertRaises(ConfigError):
            parse_config('- just\n- a list\n')
        with self.assertRaises(ConfigError):
            parse_config('{"q": 0', 'json')
        with self.assertRaises(ConfigError):
            load_config('/nonexistent/run.yaml')

    def test_error_payload(self):
        """Test ConfigError carries the serializer error dictionary."""
        with self.assertRaises(ConfigError) as ctx:
            validate_config(ExperimentDataFactory(q=7, colour='red'))
        self.assertIn('colour', ctx.exception.errors)
