"""Scalar symbol fields, diagonal super symbols and their reduction f_χ.

A ScalarField is a weighted sum of terms, each a function of at most one CP¹
factor:

    constant  weight
    height    weight · u/(1+u), u = |z|² of the factor (the normalized height on the sphere)
    cap       weight · 1{d(x, centre) ≤ radius} on the factor, d the round-sphere angle

A SuperSymbol assigns a ScalarField to every diagonal block E_J it uses; blocks
not listed are zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from django.db import models

from toeplitz_lab.apps.geometry.points import ChartPoints
from toeplitz_lab.apps.superform.forms import (
    GradedForm, diagonal_key, diagonal_subsets, parse_diagonal_key,
)
from toeplitz_lab.exceptions import FormAlgebraError, NonFiniteError


class TermKind(models.TextChoices):
    CONSTANT = 'constant', 'Constant'
    HEIGHT = 'height', 'Height u/(1+u) of one factor'
    CAP = 'cap', 'Indicator of a geodesic cap on one factor'


@dataclass(frozen=True)
class Term:
    kind: str
    weight: float = 1.0
    factor: int = 0
    center: complex | None = 0j
    radius: float = np.pi / 2

    def factor_values(self, points: ChartPoints) -> np.ndarray:
        if self.kind == TermKind.HEIGHT:
            h = points.homogeneous
            return self.weight * np.abs(h[:, 0]) ** 2
        if self.kind == TermKind.CAP:
            if self.center is None:
                center = np.array([1.0, 0.0], dtype=np.complex128)
            else:
                center = np.array([self.center, 1.0], dtype=np.complex128) / np.sqrt(1.0 + abs(self.center) ** 2)
            h = points.homogeneous
            inner = np.abs(h @ np.conj(center))
            cross = np.abs(h[:, 0] * center[1] - h[:, 1] * center[0])
            return self.weight * (2.0 * np.arctan2(cross, inner) <= self.radius).astype(np.float64)
        return np.full(len(points), float(self.weight))

    def to_config(self) -> dict:
        data = {'kind': str(self.kind), 'weight': self.weight}
        if self.kind != TermKind.CONSTANT:
            data['factor'] = self.factor + 1
        if self.kind == TermKind.CAP:
            data['center'] = None if self.center is None else [self.center.real, self.center.imag]
            data['radius'] = self.radius
        return data

    @classmethod
    def from_config(cls, data: dict) -> Term:
        kind = data['kind']
        if kind not in TermKind.values:
            raise FormAlgebraError(f'Unknown symbol term kind {kind!r}')
        center = data.get('center', [0.0, 0.0])
        return cls(
            kind=kind,
            weight=float(data.get('weight', 1.0)),
            factor=int(data.get('factor', 1)) - 1,
            center=None if center is None else complex(center[0], center[1]),
            radius=float(data.get('radius', np.pi / 2)),
        )


@dataclass(frozen=True)
class ScalarField:
    """A real function on X given by the term mini-language."""

    terms: tuple = ()

    @classmethod
    def constant(cls, value: float) -> ScalarField:
        return cls((Term(TermKind.CONSTANT, float(value)),))

    @classmethod
    def height(cls, factor: int = 0, weight: float = 1.0) -> ScalarField:
        return cls((Term(TermKind.HEIGHT, weight, factor),))

    @classmethod
    def cap(cls, center: complex | None = 0j, radius: float = np.pi / 2, factor: int = 0,
            weight: float = 1.0) -> ScalarField:
        return cls((Term(TermKind.CAP, weight, factor, center, radius),))

    @classmethod
    def hemisphere(cls, factor: int = 0) -> ScalarField:
        """Indicator of |z| ≤ 1."""
        return cls.cap(0j, np.pi / 2, factor)

    def __add__(self, other: ScalarField) -> ScalarField:
        return ScalarField(self.terms + other.terms)

    def __mul__(self, scale: float) -> ScalarField:
        return ScalarField(tuple(Term(t.kind, t.weight * scale, t.factor, t.center, t.radius) for t in self.terms))

    __rmul__ = __mul__

    @property
    def is_constant(self) -> bool:
        return all(t.kind == TermKind.CONSTANT for t in self.terms)

    def check_factors(self, n: int):
        for t in self.terms:
            if t.kind != TermKind.CONSTANT and not 0 <= t.factor < n:
                raise FormAlgebraError(f'Symbol term on factor {t.factor + 1} of a {n}-dimensional geometry')

    def sample(self, grid) -> np.ndarray:
        """Values at every grid node, shape grid.shape."""
        self.check_factors(grid.n)
        total = np.zeros(grid.shape)
        for t in self.terms:
            if t.kind == TermKind.CONSTANT:
                total = total + t.weight
                continue
            index = [None] * grid.n
            index[t.factor] = slice(None)
            total = total + t.factor_values(grid.factors[t.factor].points)[tuple(index)]
        if not np.all(np.isfinite(total)):
            raise NonFiniteError('Symbol samples are not finite')
        return total

    def evaluate(self, points: tuple) -> np.ndarray:
        """Values at paired points (one ChartPoints per factor, equal lengths)."""
        self.check_factors(len(points))
        total = np.zeros(len(points[0]))
        for t in self.terms:
            total = total + (t.weight if t.kind == TermKind.CONSTANT else t.factor_values(points[t.factor]))
        return total

    def to_config(self) -> list:
        return [t.to_config() for t in self.terms]

    @classmethod
    def from_config(cls, data: list) -> ScalarField:
        return cls(tuple(Term.from_config(d) for d in data))


@dataclass(frozen=True)
class SuperSymbol:
    """A dagger-real element of Ω^{(0)}: Σ_J f_J E_J with real fields f_J."""

    n: int
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        allowed = set(diagonal_subsets(self.n))
        for key in self.components:
            if tuple(sorted(key)) not in allowed:
                raise FormAlgebraError(f'Symbol block {key} is not diagonal in dimension {self.n}')

    @classmethod
    def scalar(cls, n: int, f: ScalarField) -> SuperSymbol:
        return cls(n, {(): f})

    def component(self, indices) -> ScalarField:
        return self.components.get(tuple(sorted(indices)), ScalarField())

    def sample(self, grid) -> dict:
        """{J: samples over the grid} for every stored block."""
        return {J: f.sample(grid) for J, f in self.components.items()}

    def forms_at(self, points: tuple) -> GradedForm:
        """The symbol as a batch of GradedForms at paired points."""
        return GradedForm.diagonal(self.n, {J: f.evaluate(points) for J, f in self.components.items()})

    def to_config(self) -> dict:
        return {diagonal_key(J): f.to_config() for J, f in self.components.items()}

    @classmethod
    def from_config(cls, data: dict, n: int) -> SuperSymbol:
        return cls(n, {parse_diagonal_key(key, n): ScalarField.from_config(terms) for key, terms in data.items()})


def reduced_symbol_field(samples: dict, curvature, q: int) -> np.ndarray:
    """f_χ over a grid: Σ f_J over blocks J avoiding the q most negative directions at each node."""
    directions = curvature.negative_directions(q)
    total = np.zeros(curvature.shape)
    for J, values in samples.items():
        avoids = np.ones(curvature.shape, dtype=bool)
        for a in J:
            avoids = avoids & ~directions[a]
        total = total + np.where(avoids, values, 0.0)
    return total
