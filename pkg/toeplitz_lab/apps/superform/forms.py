"""Graded forms in a pointwise orthonormal coframe.

Generators are ordered e¹…eⁿ, ē¹…ēⁿ (ēʲ = (eʲ)†) and a monomial is the bitmask
of its generators, bit a for eᵃ and bit n+a for ēᵃ, always stored in that
ascending normal order. Coefficient arrays have shape (..., 4ⁿ), so a whole
batch of forms shares one GradedForm. Every product sign comes from counting
transpositions against the normal order.

The diagonal blocks E_J = e^J∧(e^J)† = ∏_{j∈J} eʲ∧ēʲ are even, commute and are
dagger-real; symbols, e^{ω′} = Σ_J E_J and the volume ω_n = (i/2)ⁿE_{1…n} are
all expressed through them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cache

import numpy as np

from toeplitz_lab.exceptions import DegenerateCurvatureError, FormAlgebraError

MAX_DIMENSION = 2
HALF_I = 0.5j


def _bits(mask: int, width: int) -> list:
    return [b for b in range(width) if mask >> b & 1]


def _permutation_sign(sequence) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(sequence)), 2) if sequence[i] > sequence[j])
    return -1 if inversions % 2 else 1


@cache
def wedge_table(n: int) -> np.ndarray:
    """T[A, B, C] = ±1 when mono_A ∧ mono_B = ±mono_C, else 0."""
    size = 4 ** n
    table = np.zeros((size, size, size))
    for a in range(size):
        for b in range(size):
            if a & b:
                continue
            table[a, b, a | b] = _permutation_sign(_bits(a, 2 * n) + _bits(b, 2 * n))
    return table


@cache
def dagger_table(n: int) -> tuple:
    """Image monomial and sign of (mono_M)† for every M."""
    size = 4 ** n
    image = np.zeros(size, dtype=np.int64)
    sign = np.zeros(size)
    swap = {b: (b + n) % (2 * n) for b in range(2 * n)}
    for m in range(size):
        reversed_swapped = [swap[b] for b in reversed(_bits(m, 2 * n))]
        image[m] = sum(1 << b for b in reversed_swapped)
        sign[m] = _permutation_sign(reversed_swapped)
    return image, sign


def holo_mask(indices, n: int) -> int:
    """Bitmask of e^I for 0-based indices I."""
    return sum(1 << i for i in indices)


def anti_mask(indices, n: int) -> int:
    """Bitmask of ē^J for 0-based indices J."""
    return sum(1 << (n + j) for j in indices)


@cache
def diagonal_sign(n: int, indices: tuple) -> float:
    """E_J = sign · (normal monomial with e^J and ē^J)."""
    sequence = []
    for j in sorted(indices):
        sequence += [j, n + j]
    return float(_permutation_sign(sequence))


def diagonal_subsets(n: int) -> list:
    """All J ⊆ {0..n−1} as sorted tuples, ordered by size then lexicographically."""
    return [c for p in range(n + 1) for c in itertools.combinations(range(n), p)]


def diagonal_key(indices) -> str:
    """Config key of E_J: 'scalar' for J = ∅, else 1-based digits ('1', '2', '12')."""
    return 'scalar' if not indices else ''.join(str(j + 1) for j in sorted(indices))


def parse_diagonal_key(key: str, n: int) -> tuple:
    if key == 'scalar':
        return ()
    if not key.isdigit() or sorted(set(key)) != list(key) or any(not 1 <= int(c) <= n for c in key):
        raise FormAlgebraError(f'Symbol component {key!r} is not a diagonal block E_J of dimension {n}')
    return tuple(int(c) - 1 for c in key)


@dataclass(frozen=True)
class GradedForm:
    """Σ f_M mono_M with coefficient arrays of shape (..., 4ⁿ)."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n not in range(1, MAX_DIMENSION + 1):
            raise FormAlgebraError(f'Form dimension must be 1 or 2, got {self.n}')
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape[-1:] != (4 ** self.n,):
            raise FormAlgebraError(f'Expected {4 ** self.n} coefficients per form, got shape {coeffs.shape}')
        object.__setattr__(self, 'coeffs', coeffs)

    @classmethod
    def zero(cls, n: int, batch=()) -> GradedForm:
        return cls(n, np.zeros(tuple(batch) + (4 ** n,), dtype=np.complex128))

    @classmethod
    def scalar(cls, n: int, value=1.0) -> GradedForm:
        value = np.asarray(value, dtype=np.complex128)
        coeffs = np.zeros(value.shape + (4 ** n,), dtype=np.complex128)
        coeffs[..., 0] = value
        return cls(n, coeffs)

    @classmethod
    def monomial(cls, n: int, holo=(), anti=(), value=1.0) -> GradedForm:
        """value · e^{holo} ∧ ē^{anti} for 0-based index tuples, sorted into normal order."""
        mask = holo_mask(holo, n) | anti_mask(anti, n)
        sequence = list(holo) + [n + j for j in anti]
        if len(set(sequence)) != len(sequence):
            return cls.zero(n, np.shape(value))
        form = cls.zero(n, np.shape(value))
        form.coeffs[..., mask] = _permutation_sign(sequence) * np.asarray(value)
        return form

    @classmethod
    def diagonal(cls, n: int, components: dict) -> GradedForm:
        """Σ_J c_J E_J from {J (0-based tuple): coefficient}."""
        shape = np.broadcast_shapes(*(np.shape(v) for v in components.values())) if components else ()
        form = cls.zero(n, shape)
        for indices, value in components.items():
            mask = holo_mask(indices, n) | anti_mask(indices, n)
            form.coeffs[..., mask] += diagonal_sign(n, tuple(sorted(indices))) * np.asarray(value)
        return form

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[:-1]

    def component(self, holo=(), anti=()) -> np.ndarray:
        return self.coeffs[..., holo_mask(holo, self.n) | anti_mask(anti, self.n)]

    def diagonal_component(self, indices) -> np.ndarray:
        """Coefficient of E_J."""
        indices = tuple(sorted(indices))
        mask = holo_mask(indices, self.n) | anti_mask(indices, self.n)
        return diagonal_sign(self.n, indices) * self.coeffs[..., mask]

    def is_diagonal(self, atol=0.0) -> bool:
        keep = np.zeros(4 ** self.n, dtype=bool)
        for indices in diagonal_subsets(self.n):
            keep[holo_mask(indices, self.n) | anti_mask(indices, self.n)] = True
        return bool(np.all(np.abs(self.coeffs[..., ~keep]) <= atol))

    def __add__(self, other: GradedForm) -> GradedForm:
        _check_same_n(self, other)
        return GradedForm(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: GradedForm) -> GradedForm:
        _check_same_n(self, other)
        return GradedForm(self.n, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> GradedForm:
        return GradedForm(self.n, self.coeffs * np.asarray(scalar)[..., None])

    __rmul__ = __mul__


def _check_same_n(f: GradedForm, g: GradedForm):
    if f.n != g.n:
        raise FormAlgebraError(f'Dimension mismatch: {f.n} vs {g.n}')


def wedge(f: GradedForm, g: GradedForm) -> GradedForm:
    _check_same_n(f, g)
    return GradedForm(f.n, np.einsum('...a,...b,abc->...c', f.coeffs, g.coeffs, wedge_table(f.n)))


def dagger(f: GradedForm) -> GradedForm:
    """Conjugate-linear anti-automorphism swapping eᵃ ↔ ēᵃ."""
    image, sign = dagger_table(f.n)
    coeffs = np.zeros_like(f.coeffs)
    coeffs[..., image] = sign * np.conj(f.coeffs)
    return GradedForm(f.n, coeffs)


def is_dagger_real(f: GradedForm, atol=1e-14) -> bool:
    return bool(np.all(np.abs(dagger(f).coeffs - f.coeffs) <= atol))


def volume_form(n: int) -> GradedForm:
    """ω_n = ωⁿ/n! = (i/2)ⁿ E_{1…n}."""
    return GradedForm.diagonal(n, {tuple(range(n)): HALF_I ** n})


def berezin(f: GradedForm, vol: GradedForm | None = None) -> np.ndarray:
    """Top-degree coefficient of f divided by that of the volume form."""
    vol = volume_form(f.n) if vol is None else vol
    _check_same_n(f, vol)
    top = 4 ** f.n - 1
    denominator = vol.coeffs[..., top]
    if np.any(denominator == 0):
        raise FormAlgebraError('Berezin integral against a volume form with zero top coefficient')
    return f.coeffs[..., top] / denominator


def omega_prime(n: int) -> GradedForm:
    """ω′ = −2iω = Σ_j E_j."""
    return GradedForm.diagonal(n, {(j,): 1.0 for j in range(n)})


def exp_omega_prime(n: int) -> GradedForm:
    """Σ_p (ω′)^p/p!, truncated at degree 2n."""
    power = GradedForm.scalar(n)
    total = GradedForm.scalar(n)
    for p in range(1, n + 1):
        power = wedge(power, omega_prime(n)) * (1.0 / p)
        total = total + power
    return total


def pairing_sign(q: int) -> int:
    """c_{n,q}: α∧α† of a (0,q)-form is (−1)^q times a positive form."""
    return -1 if q % 2 else 1


def super_integral_density(f: GradedForm) -> np.ndarray:
    """(i/2)ⁿ·berezin(f ∧ e^{ω′}): the density of the super integral against ω_n."""
    return HALF_I ** f.n * berezin(wedge(f, exp_omega_prime(f.n)))


def norm_density(alpha: GradedForm, q: int) -> np.ndarray:
    """c_{n,q}(i/2)ⁿ·berezin(α∧α†∧e^{ω′}); real and equal to Σ|α_J|² for a (0,q)-form."""
    return pairing_sign(q) * super_integral_density(wedge(alpha, dagger(alpha)))


def pairing_table(n: int, q: int, component) -> dict:
    """Weights R_J = c_{n,q}(i/2)ⁿ·berezin(E_J∧w∧w†∧e^{ω′}) for w = ē^{component}.

    A super Toeplitz entry for basis elements u·w and v·w is then
    ∫ Σ_J f_J R_J u v̄ e^{−kφ} ω_n.
    """
    component = tuple(component)
    if len(component) != q:
        raise FormAlgebraError(f'(0,{q}) component {component} has the wrong degree')
    w = GradedForm.monomial(n, anti=component)
    ww = wedge(w, dagger(w))
    table = {}
    for indices in diagonal_subsets(n):
        e_j = GradedForm.diagonal(n, {indices: 1.0})
        value = pairing_sign(q) * super_integral_density(wedge(e_j, ww))
        table[indices] = float(np.real_if_close(value).real)
    return table


def diagonal_pairing(f: GradedForm, g: GradedForm) -> np.ndarray:
    """Σ_J conj(f_J) g_J over the diagonal blocks E_J."""
    _check_same_n(f, g)
    return sum(np.conj(f.diagonal_component(J)) * g.diagonal_component(J) for J in diagonal_subsets(f.n))


def _substitution_matrix(n: int, unitary: np.ndarray) -> np.ndarray:
    """R with (f·R)_{M'} the coefficients after substituting eᵇ = Σ_a U_{ba} e′ᵃ."""
    size = 4 ** n
    generators = []
    for b in range(2 * n):
        row = unitary[b % n] if b < n else np.conj(unitary[b % n])
        offset = 0 if b < n else n
        coeffs = np.zeros(size, dtype=np.complex128)
        for a in range(n):
            coeffs[1 << (offset + a)] = row[a]
        generators.append(GradedForm(n, coeffs))
    matrix = np.zeros((size, size), dtype=np.complex128)
    for m in range(size):
        image = GradedForm.scalar(n)
        for b in _bits(m, 2 * n):
            image = wedge(image, generators[b])
        matrix[m] = image.coeffs
    return matrix


def rotate(f: GradedForm, unitary) -> GradedForm:
    """Express f in the coframe e′ related by eᵇ = Σ_a U_{ba} e′ᵃ, ēᵇ = Σ_a conj(U_{ba}) ē′ᵃ."""
    unitary = np.asarray(unitary, dtype=np.complex128)
    if unitary.shape != (f.n, f.n):
        raise FormAlgebraError(f'Frame change must be {f.n}x{f.n}, got {unitary.shape}')
    if not np.allclose(unitary.conj().T @ unitary, np.eye(f.n), atol=1e-12):
        raise FormAlgebraError('Frame change is not unitary')
    return GradedForm(f.n, f.coeffs @ _substitution_matrix(f.n, unitary))


def direction_form(curv, q: int) -> tuple:
    """χ^{q,q} = e′^{I₀}∧(e′^{I₀})† in the chart coframe, with I₀ the first q eigendirections.

    Returns (form, degenerate_flag). A point outside X(q) gives the zero form;
    a DEGENERATE point gives the zero form with the flag set.
    """
    n = len(curv.lambdas)
    if curv.degenerate:
        return GradedForm.zero(n), True
    if q != curv.q_index:
        return GradedForm.zero(n), False
    chi = GradedForm.diagonal(n, {tuple(range(q)): 1.0})
    # e′ᵃ = Σ_b (Vᴴ)_{ab} eᵇ
    return rotate(chi, curv.v_frame.conj().T), False


def symbol_reduce(f: GradedForm, curv, berezin_route: bool = False) -> np.ndarray:
    """f_χ = Σ_{J∩I₀=∅} f_J in the eigenframe of curv.

    With `berezin_route` the same value comes from (i/2)ⁿ·berezin(χ∧f∧e^{ω′}).
    """
    if curv.degenerate:
        raise DegenerateCurvatureError('f_χ is undefined at a DEGENERATE point')
    q = curv.q_index
    if berezin_route:
        chi, _ = direction_form(curv, q)
        return np.real(super_integral_density(wedge(chi, f)))
    rotated = rotate(f, curv.v_frame)
    negative = set(range(q))
    return np.real(sum(rotated.diagonal_component(J) for J in diagonal_subsets(f.n)
                       if not negative.intersection(J)))
