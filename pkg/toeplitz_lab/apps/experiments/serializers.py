from collections.abc import Mapping

import numpy as np
from django.conf import settings
from rest_framework import serializers

from toeplitz_lab.apps.geometry.catalog import CatalogName, build_geometry, perturbation_limit
from toeplitz_lab.apps.sampling.families import FamilyKind
from toeplitz_lab.apps.sampling.frames import SAMPLING_GEOMETRIES
from toeplitz_lab.apps.spaces.sections import SUPPORTED_DEGREE
from toeplitz_lab.apps.superform.symbols import SuperSymbol, TermKind
from toeplitz_lab.exceptions import CatalogError, FormAlgebraError

EXPERIMENTS = (
    'bergman', 'dimension', 'spectrum', 'trace', 'product_trace', 'pushforward',
    'offdiagonal', 'morse', 'sampling', 'super_reduction',
)


def resolve_params(name: str, params: dict) -> dict:
    """Catalog parameters with t = 'max' replaced by the semi-positivity limit."""
    params = dict(params)
    if name == CatalogName.PERTURBED_CP1 and params.get('t') == 'max':
        params['t'] = perturbation_limit(params.get('d', 1))
    return params


class StrictSerializer(serializers.Serializer):
    """Serializer that rejects keys it does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
        return super().to_internal_value(data)


class GeometrySerializer(StrictSerializer):
    name = serializers.ChoiceField(
        choices=CatalogName.choices,
        help_text="Catalog geometry name, e.g. FS_CP1."
    )
    params = serializers.DictField(
        default=dict,
        help_text="Catalog parameters: d for FS_CP1, d and t (a number or 'max') for PERTURBED_CP1, "
                  "m for NEG_CP1, a and b for PRODUCT_CP1xCP1."
    )

    def validate(self, attrs):
        try:
            build_geometry(attrs['name'], resolve_params(attrs['name'], attrs['params']))
        except (CatalogError, TypeError, ValueError) as exc:
            raise serializers.ValidationError({'params': [str(exc)]})
        return attrs


class TermSerializer(StrictSerializer):
    kind = serializers.ChoiceField(
        choices=TermKind.choices,
        help_text="Term kind: constant, height or cap."
    )
    weight = serializers.FloatField(
        default=1.0,
        help_text="Multiplier of the term."
    )
    factor = serializers.IntegerField(
        min_value=1, max_value=2, default=1,
        help_text="Factor (1-based) the term depends on; ignored for constants."
    )
    center = serializers.ListField(
        child=serializers.FloatField(), min_length=2, max_length=2, allow_null=True, required=False,
        help_text="Cap centre as [re, im] of the affine coordinate; null is z = ∞."
    )
    radius = serializers.FloatField(
        min_value=0.0, max_value=float(np.pi), required=False,
        help_text="Cap angular radius in [0, π]."
    )


class FamilySerializer(StrictSerializer):
    kind = serializers.ChoiceField(
        choices=FamilyKind.choices,
        help_text="Point family kind."
    )
    c = serializers.FloatField(
        min_value=0.0, default=1.5,
        help_text="Density constant: D_k has ⌈c·k⌉ points."
    )
    cap_center = serializers.ListField(
        child=serializers.FloatField(), min_length=2, max_length=2, allow_null=True, required=False,
        help_text="Centre of the removed cap for CAP_DEFICIENT, [re, im]; null is z = ∞."
    )
    cap_radius = serializers.FloatField(
        min_value=0.0, max_value=float(np.pi), required=False,
        help_text="Angular radius of the removed cap for CAP_DEFICIENT."
    )

    def validate(self, attrs):
        if attrs['kind'] != FamilyKind.QUADRATURE_NODES and attrs['c'] <= 0:
            raise serializers.ValidationError({'c': ['Density constant must be positive.']})
        return attrs


class SamplingSerializer(StrictSerializer):
    families = serializers.ListField(
        child=FamilySerializer(), min_length=1,
        help_text="Point families compared in the necessary-condition experiment."
    )
    regions = serializers.ListField(
        child=serializers.ListField(child=TermSerializer(), min_length=1), default=list,
        help_text="Regions Ω as cap terms; empty means the hemisphere |z| ≤ 1."
    )
    lattice = serializers.ListField(
        child=serializers.FloatField(), required=False,
        help_text="Fock lattice spacings a₁…a_{2n} reported next to the experiment."
    )


class ExperimentConfigSerializer(StrictSerializer):
    """
    Serializer validating a whole experiment configuration.

    Cross-field checks build the geometry and every symbol once, so a config
    that validates can be run without further input errors.
    """
    geometry = GeometrySerializer(
        help_text="Catalog geometry and its parameters."
    )
    q = serializers.IntegerField(
        min_value=0, max_value=2,
        help_text="Form degree: 0 for sections, 1 for harmonic (0,1)-forms."
    )
    ks = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=1,
        help_text="Tensor powers to sweep."
    )
    resolution = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=2, max_length=2, allow_null=True, default=None,
        help_text="Quadrature resolution [radial nodes per segment, angular nodes]; null for the default."
    )
    symbols = serializers.DictField(
        child=serializers.DictField(child=serializers.ListField(child=TermSerializer())), default=dict,
        help_text="Named super symbols: block key ('scalar', '1', '2', '12') to a list of terms. "
                  "'f' is the primary symbol, 'g' the second one."
    )
    experiments = serializers.ListField(
        child=serializers.ChoiceField(choices=EXPERIMENTS), default=list,
        help_text="Experiments to run, in order."
    )
    gammas = serializers.ListField(
        child=serializers.FloatField(), min_length=1, default=lambda: list(settings.TOEPLITZ_LAB['GAMMAS']),
        help_text="Levels γ of the counting experiment."
    )
    delta = serializers.FloatField(
        min_value=0.0, max_value=float(np.pi), default=0.5,
        help_text="Geodesic radius of the off-diagonal experiment."
    )
    output_dir = serializers.CharField(
        allow_null=True, default=None,
        help_text="Output directory; the --out flag and TOEPLITZ_LAB_OUTPUT_DIR take precedence."
    )
    tolerances = serializers.DictField(
        child=serializers.FloatField(min_value=0.0), default=dict,
        help_text="Overrides of the acceptance band tolerances."
    )
    sampling = SamplingSerializer(
        allow_null=True, default=None,
        help_text="Point families and regions of the sampling experiment."
    )

    def validate_resolution(self, value):
        minimum = settings.TOEPLITZ_LAB['MIN_RESOLUTION']
        if value is not None and any(v < m for v, m in zip(value, minimum)):
            raise serializers.ValidationError([f'Resolution must be at least {list(minimum)}.'])
        return value

    def validate_tolerances(self, value):
        unknown = sorted(set(value) - set(settings.TOEPLITZ_LAB['TOLERANCES']))
        if unknown:
            raise serializers.ValidationError([f'Unknown tolerance {key!r}.' for key in unknown])
        return value

    def validate(self, attrs):
        geometry = attrs['geometry']
        geom = build_geometry(geometry['name'], resolve_params(geometry['name'], geometry['params']))
        supported = SUPPORTED_DEGREE[geom.name]
        if attrs['q'] != supported:
            raise serializers.ValidationError({'q': [f'{geom.label} supports q={supported} only.']})
        errors = {}
        for name, blocks in attrs['symbols'].items():
            try:
                for component in SuperSymbol.from_config(blocks, geom.n).components.values():
                    component.check_factors(geom.n)
            except (FormAlgebraError, KeyError) as exc:
                errors[name] = [str(exc)]
        if errors:
            raise serializers.ValidationError({'symbols': errors})
        if 'sampling' in attrs['experiments'] and geom.name not in SAMPLING_GEOMETRIES:
            raise serializers.ValidationError({'experiments': ['sampling runs on FS_CP1 or PERTURBED_CP1 only.']})
        return attrs
