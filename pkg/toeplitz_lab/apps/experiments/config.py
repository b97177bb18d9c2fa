"""Experiment configurations: YAML (or JSON) files validated by ExperimentConfigSerializer."""
import json
import logging
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml
from django.conf import settings

from toeplitz_lab.apps.asymptotics.sweeps import default_symbols
from toeplitz_lab.apps.experiments.serializers import ExperimentConfigSerializer, resolve_params
from toeplitz_lab.apps.geometry.catalog import ModelGeometry, build_geometry
from toeplitz_lab.apps.sampling.families import FamilyKind, PointFamily
from toeplitz_lab.apps.superform.symbols import ScalarField, SuperSymbol
from toeplitz_lab.exceptions import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_FAMILIES = (
    {'kind': FamilyKind.CAP_DEFICIENT.value, 'c': 2.0},
    {'kind': FamilyKind.QUADRATURE_NODES.value, 'c': 1.5},
    {'kind': FamilyKind.FIBONACCI_UNIFORM.value, 'c': 1.5},
)


def _plain(value):
    """Serializer output as plain dicts and lists."""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def _complex(pair) -> complex | None:
    return None if pair is None else complex(pair[0], pair[1])


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: dict
    q: int
    ks: list
    resolution: list | None = None
    symbols: dict = field(default_factory=dict)
    experiments: list = field(default_factory=list)
    gammas: list = field(default_factory=list)
    delta: float = 0.5
    output_dir: str | None = None
    tolerances: dict = field(default_factory=dict)
    sampling: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @cached_property
    def geom(self) -> ModelGeometry:
        name = self.geometry['name']
        return build_geometry(name, resolve_params(name, self.geometry['params']))

    @property
    def grid_resolution(self) -> tuple | None:
        return None if self.resolution is None else tuple(self.resolution)

    def symbol(self, name: str) -> SuperSymbol:
        """Named symbol; 'f' defaults to the hemisphere indicator and 'g' to the height."""
        if name in self.symbols:
            return SuperSymbol.from_config(self.symbols[name], self.geom.n)
        f, g = default_symbols(self.geom)
        return {'f': f, 'g': g}[name]

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, settings.TOEPLITZ_LAB['TOLERANCES'][name]))

    def families(self) -> list:
        entries = self.sampling['families'] if self.sampling else DEFAULT_FAMILIES
        families = []
        for entry in entries:
            families.append(PointFamily(
                kind=entry['kind'],
                geom=self.geom,
                c=entry.get('c', 1.5),
                cap_center=_complex(entry.get('cap_center', [0.0, 0.0])),
                cap_radius=entry.get('cap_radius', np.pi / 2),
                resolution=self.grid_resolution,
            ))
        return families

    def regions(self) -> list:
        regions = self.sampling['regions'] if self.sampling else []
        return [ScalarField.from_config(terms) for terms in regions] or [ScalarField.hemisphere()]

    def lattice(self) -> list | None:
        return (self.sampling or {}).get('lattice')


def validate_config(data) -> ExperimentConfig:
    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(_plain(serializer.errors))
    return ExperimentConfig(**_plain(serializer.validated_data))


def parse_config(text: str, fmt: str = 'yaml') -> ExperimentConfig:
    try:
        data = json.loads(text) if fmt == 'json' else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError({'non_field_errors': [f'Unreadable {fmt} config: {exc}']})
    if not isinstance(data, dict):
        raise ConfigError({'non_field_errors': ['The config must be a mapping.']})
    return validate_config(data)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError({'config': [f'Cannot read {path}: {exc.strerror}']})
    config = parse_config(text, 'json' if path.suffix == '.json' else 'yaml')
    logger.info(f'Loaded config {path}: {config.geom.label}, q={config.q}, experiments={config.experiments}')
    return config


def emit_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, allow_unicode=True)
