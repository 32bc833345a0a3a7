"""Closed-form circulant spectra and exact arithmetic in Z[w_n].

The eigenvalue attached to character ``l`` of Cay(Z_n, S) is the character
sum ``sum_{s in S} w_n^{l s}``.  Floating values come from a cosine table
that returns exact results at the rational multiples of pi where they are
known; exact values live in :class:`CyclotomicInteger`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .graph_core import CirculantGraph, ConnectionSet, complement_graph, make_cycle


class UnsupportedOrderError(ValueError):
    pass


class InvalidFactorizationError(ValueError):
    pass


# -- number theory helpers ------------------------------------------------


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def euler_phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def odd_prime_factors(n: int) -> list[int]:
    out = []
    m = n
    while m % 2 == 0 and m:
        m //= 2
    p = 3
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 2
    if m > 1:
        out.append(m)
    return out


# -- floating spectra -----------------------------------------------------

_SQRT_HALF = math.sqrt(0.5)


def _cos_turn(k: int, n: int) -> float:
    """cos(2*pi*k/n), exact at multiples of 30 and 45 degrees."""
    k %= n
    if (12 * k) % n == 0:
        return (1.0, 0.8660254037844386, 0.5, 0.0, -0.5, -0.8660254037844386,
                -1.0, -0.8660254037844386, -0.5, 0.0, 0.5, 0.8660254037844386)[12 * k // n]
    if (8 * k) % n == 0:
        return (1.0, _SQRT_HALF, 0.0, -_SQRT_HALF, -1.0, -_SQRT_HALF, 0.0, _SQRT_HALF)[8 * k // n]
    # fold into the first octant, where sin/cos of a small argument is most accurate
    if 2 * k > n:
        k = n - k
    sign = 1.0
    if 4 * k > n:
        sign, k2 = -1.0, n - 2 * k  # angle pi - theta, measured in units of pi/n
    else:
        k2 = 2 * k
    # angle = pi * k2 / n in [0, pi/2]
    if 4 * k2 <= n:
        return sign * math.cos(math.pi * k2 / n)
    return sign * math.sin(math.pi * (n - 2 * k2) / (2 * n))


@lru_cache(maxsize=64)
def _cos_table_cached(n: int) -> tuple[float, ...]:
    return tuple(_cos_turn(k, n) for k in range(n))


def cos_table(n: int) -> np.ndarray:
    return np.array(_cos_table_cached(n))


@dataclass(frozen=True, eq=False)
class Spectrum:
    n: int
    values: np.ndarray
    integral: bool

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.n,):
            raise ValueError(f"expected {self.n} eigenvalues, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, l: int) -> float:
        return float(self.values[l % self.n])

    def __len__(self) -> int:
        return self.n

    def to_json(self) -> dict:
        return {"n": self.n, "values": [float(v) for v in self.values], "integral": self.integral}


def character_sums(n: int, elements: Sequence[int]) -> np.ndarray:
    table = cos_table(n)
    s = np.asarray(elements, dtype=np.int64)
    out = np.zeros(n)
    if s.size == 0:
        return out
    chunk = max(1, 4_000_000 // s.size)
    for start in range(0, n, chunk):
        ls = np.arange(start, min(n, start + chunk), dtype=np.int64)
        out[start:start + ls.size] = table[np.outer(ls, s) % n].sum(axis=1)
    return out


def eigenvalues(g: CirculantGraph) -> Spectrum:
    values = character_sums(g.n, g.connection.elements)
    integral = is_integral(g)
    if integral:
        values = np.rint(values)
    return Spectrum(g.n, values, integral)


def complement_spectrum(spec: Spectrum) -> Spectrum:
    """Spectrum of the complement of a regular graph, same eigenvectors."""
    vals = -spec.values - 1.0
    vals[0] = spec.n - spec.values[0] - 1.0
    return Spectrum(spec.n, vals, spec.integral)


# -- exact cyclotomic arithmetic -------------------------------------------


def _poly_divmod_monic(num: list[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    num = list(num)
    dd = len(den) - 1
    if len(num) <= dd:
        return [0], num + [0] * (dd - len(num))
    terms = [(i, c) for i, c in enumerate(den[:-1]) if c]
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            quot[i - dd] = c
            num[i] = 0
            base = i - dd
            for j, dc in terms:
                num[base + j] -= c * dc
    return quot, num[:dd]


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of the n-th cyclotomic polynomial, constant term first."""
    if n < 1:
        raise ValueError(f"cyclotomic polynomial needs n >= 1, got {n}")
    num = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        num, rem = _poly_divmod_monic(num, cyclotomic_poly(d))
        assert not any(rem)
    return tuple(num)


def _reduce(coeffs: Sequence[int], n: int) -> tuple[int, ...]:
    """Canonical remainder of a polynomial in w_n modulo Phi_n."""
    folded = [0] * n
    for j, c in enumerate(coeffs):
        if c:
            folded[j % n] += c
    phi = cyclotomic_poly(n)
    _, rem = _poly_divmod_monic(folded, phi)
    return tuple(rem)


@dataclass(frozen=True)
class CyclotomicInteger:
    """Element of Z[w_n] in the power basis 1, w, ..., w^(phi(n)-1)."""

    n: int
    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if len(coeffs) != euler_phi(self.n):
            raise ValueError(f"need {euler_phi(self.n)} coefficients for conductor {self.n}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_exponents(cls, n: int, exponents: Iterable[int]) -> "CyclotomicInteger":
        counts = [0] * n
        for e in exponents:
            counts[e % n] += 1
        return cls(n, _reduce(counts, n))

    @classmethod
    def integer(cls, n: int, value: int) -> "CyclotomicInteger":
        return cls(n, (value,) + (0,) * (euler_phi(n) - 1))

    @classmethod
    def root(cls, n: int, power: int = 1) -> "CyclotomicInteger":
        return cls.from_exponents(n, [power])

    def _coerce(self, other) -> "CyclotomicInteger":
        if isinstance(other, CyclotomicInteger):
            if other.n != self.n:
                raise ValueError("conductor mismatch")
            return other
        if isinstance(other, int):
            return CyclotomicInteger.integer(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicInteger(self.n, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInteger(self.n, tuple(-a for a in self.coefficients))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInteger(self.n, tuple(other * a for a in self.coefficients))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = [0] * (2 * len(self.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a:
                for j, b in enumerate(other.coefficients):
                    prod[i + j] += a * b
        return CyclotomicInteger(self.n, _reduce(prod, self.n))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def is_rational(self) -> bool:
        return not any(self.coefficients[1:])

    def to_complex(self) -> complex:
        n = self.n
        re = sum(c * _cos_turn(j, n) for j, c in enumerate(self.coefficients) if c)
        im = sum(c * _cos_turn(4 * j - n, 4 * n) for j, c in enumerate(self.coefficients) if c)
        return complex(re, im)

    def __float__(self) -> float:
        return self.to_complex().real

    def to_json(self) -> dict:
        return {"conductor": self.n, "coefficients": [str(c) for c in self.coefficients]}

    @classmethod
    def from_json(cls, data: dict) -> "CyclotomicInteger":
        return cls(int(data["conductor"]), tuple(int(c) for c in data["coefficients"]))


def exact_eigenvalue(n: int, l: int, s: ConnectionSet | Iterable[int]) -> CyclotomicInteger:
    elements = s.elements if isinstance(s, ConnectionSet) else tuple(s)
    return CyclotomicInteger.from_exponents(n, [l * x for x in elements])


def is_integral(g: CirculantGraph) -> bool:
    """Exact integrality test of every eigenvalue.

    The eigenvalue at ``a*l`` is the Galois conjugate of the one at ``l`` for
    every unit ``a``, so one rational representative per gcd class settles the
    whole class; only the characters ``l = d`` for divisors ``d`` are reduced.
    """
    n = g.n
    if n == 1 or g.degree == 0:
        return True
    return all(exact_eigenvalue(n, d, g.connection).is_rational() for d in divisors(n)[:-1])


# -- rank and certificates ------------------------------------------------


def bareiss_rank(matrix: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    m = [[int(x) for x in row] for row in matrix]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    prev = 1
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = next((i for i in range(r, rows) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        for i in range(r + 1, rows):
            f = m[i][c]
            for j in range(c + 1, cols):
                num = p * m[i][j] - f * m[r][j]
                q, rem = divmod(num, prev)
                assert rem == 0, "Bareiss division must be exact"
                m[i][j] = q
            m[i][c] = 0
        prev = p
        r += 1
    return r


@dataclass(frozen=True)
class IndependenceCertificate:
    n: int
    indices: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]
    rank: int
    independent: bool

    def to_json(self) -> dict:
        return {
            "kind": "independence",
            "n": self.n,
            "indices": list(self.indices),
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "rank": self.rank,
            "independent": self.independent,
        }


def rational_independence(n: int) -> IndependenceCertificate:
    """Certify that the distinct positive eigenvalues of C_n are Q-independent.

    Only n = 2^k with k >= 3 is supported.  Those eigenvalues are the
    characters 0 <= l < n/4; their exact coordinates in the power basis of
    Z[w_n] form an integer matrix whose rank is computed exactly.
    """
    if not (is_power_of_two(n) and n >= 8):
        raise UnsupportedOrderError(f"independence certificate needs n = 2^k >= 8, got {n}")
    cycle = make_cycle(n).connection
    indices = tuple(range(n // 4))
    matrix = tuple(exact_eigenvalue(n, l, cycle).coefficients for l in indices)
    rank = bareiss_rank(matrix)
    return IndependenceCertificate(n, indices, matrix, rank, rank == len(indices))


Relation = tuple[tuple[int, int], ...]


def _combine(terms: Relation) -> dict[int, int]:
    out: dict[int, int] = {}
    for l, c in terms:
        out[l] = out.get(l, 0) + c
    return {l: c for l, c in sorted(out.items()) if c}


def evaluate_relation(n: int, terms: Relation, s: ConnectionSet) -> CyclotomicInteger:
    total = CyclotomicInteger.integer(n, 0)
    for l, c in _combine(terms).items():
        total = total + c * exact_eigenvalue(n, l, s)
    return total


@dataclass(frozen=True)
class DependencyWitness:
    """Integer relation among cycle eigenvalues that rules out PGST.

    ``terms`` is the difference relation built from the two cosine-sum
    relations ``first`` (shift 1) and ``second`` (shift 2).  It obstructs
    antipodal PGST because its coefficients sum to zero while the index-weighted
    sum is odd: along any PGST sequence the left side would tend to -1 after
    exponentiation, yet it is identically zero.
    """

    m: int
    p: int
    terms: Relation
    first: Relation
    second: Relation
    residual: CyclotomicInteger
    first_residual: CyclotomicInteger
    second_residual: CyclotomicInteger
    complement_residual: CyclotomicInteger = field(repr=False)

    @property
    def n(self) -> int:
        return self.m * self.p

    def combined(self) -> dict[int, int]:
        return _combine(self.terms)

    @property
    def valid(self) -> bool:
        return self.residual.is_zero() and self.first_residual.is_zero() and self.second_residual.is_zero()

    @property
    def coefficient_sum(self) -> int:
        return sum(c for _, c in self.terms)

    @property
    def index_parity(self) -> int:
        return sum(l * c for l, c in self.terms) % 2

    @property
    def obstructs(self) -> bool:
        return self.valid and self.coefficient_sum == 0 and self.index_parity == 1

    @property
    def annihilates_complement(self) -> bool:
        """The same coefficients kill the complement spectrum (needs no index 0)."""
        return self.complement_residual.is_zero()

    def to_json(self) -> dict:
        return {
            "kind": "dependency",
            "m": self.m,
            "p": self.p,
            "n": self.n,
            "terms": [[l, c] for l, c in self.terms],
            "combined": {str(l): c for l, c in self.combined().items()},
            "first_relation": [[l, c] for l, c in self.first],
            "second_relation": [[l, c] for l, c in self.second],
            "residual": self.residual.to_json(),
            "residual_is_zero": self.residual.is_zero(),
            "coefficient_sum": self.coefficient_sum,
            "index_parity": self.index_parity,
            "obstructs": self.obstructs,
            "complement_residual": self.complement_residual.to_json(),
            "annihilates_complement": self.annihilates_complement,
        }


def _shift_relation(m: int, p: int, shift: int, sign: int) -> Relation:
    terms = [(shift, sign)]
    half = (p - 1) // 2
    terms += [(m * r + shift, sign) for r in range(1, half + 1)]
    terms += [(m * r - shift, sign) for r in range(1, half + 1)]
    return tuple(terms)


def dependency_witness(m: int, p: int, n: int | None = None) -> DependencyWitness:
    """Exact eigenvalue relation of C_{m p} for even m and odd prime p."""
    if not (isinstance(p, int) and p > 2 and is_prime(p)):
        raise InvalidFactorizationError(f"p must be an odd prime, got {p}")
    if m < 2 or m % 2:
        raise InvalidFactorizationError(f"m must be even and positive, got {m}")
    if n is not None and n != m * p:
        raise InvalidFactorizationError(f"{m} * {p} != {n}")
    n = m * p
    first = _shift_relation(m, p, 1, 1)
    second = _shift_relation(m, p, 2, 1)
    # (second) - (first), interleaved term by term as the paired differences
    terms: list[tuple[int, int]] = []
    for (a, _), (b, _) in zip(second, first):
        terms += [(a, 1), (b, -1)]
    terms_t = tuple(terms)
    cycle = make_cycle(n)
    comp = complement_graph(cycle).connection
    return DependencyWitness(
        m=m,
        p=p,
        terms=terms_t,
        first=first,
        second=second,
        residual=evaluate_relation(n, terms_t, cycle.connection),
        first_residual=evaluate_relation(n, first, cycle.connection),
        second_residual=evaluate_relation(n, second, cycle.connection),
        complement_residual=evaluate_relation(n, terms_t, comp),
    )
