"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

Exponent = tuple[int, ...]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


def degree(alpha: Exponent) -> int:
    return sum(alpha)


def unit(n: int, i: int) -> Exponent:
    return tuple(1 if k == i else 0 for k in range(n))


def zero_exponent(n: int) -> Exponent:
    return (0,) * n


def add_exponents(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def grlex_key(alpha: Exponent):
    """Sort key for graded lexicographic order (x1 > x2 > ... within a degree)."""
    return (sum(alpha), tuple(-a for a in alpha))


class Polynomial:
    """Immutable polynomial in ``nvars`` variables.

    ``terms`` maps exponent tuples to nonzero :class:`~fractions.Fraction`
    coefficients.
    """

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean: dict[Exponent, Fraction] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise ValueError(f"exponent {alpha} does not have length {nvars}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent {alpha}")
            c = _as_fraction(c)
            if c:
                clean[alpha] = clean.get(alpha, Fraction(0)) + c
                if not clean[alpha]:
                    del clean[alpha]
        self.nvars = nvars
        self._terms = clean

    # construction helpers

    @classmethod
    def constant(cls, nvars: int, c) -> Polynomial:
        return cls(nvars, {zero_exponent(nvars): c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> Polynomial:
        return cls(nvars, {unit(nvars, i): 1})

    @classmethod
    def monomial(cls, alpha: Exponent, c=1) -> Polynomial:
        return cls(len(alpha), {tuple(alpha): c})

    # basic access

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, alpha: Exponent) -> Fraction:
        return self._terms.get(tuple(alpha), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(a) for a in self._terms), default=-1)

    def support(self) -> frozenset[Exponent]:
        return frozenset(self._terms)

    def variables_used(self) -> frozenset[int]:
        return frozenset(i for a in self._terms for i, e in enumerate(a) if e)

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    # arithmetic

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different variable counts")
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, Fraction(0)) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self.nvars, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> Polynomial:
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for a, c in self._terms.items():
            for b, d in other._terms.items():
                k = add_exponents(a, b)
                out[k] = out.get(k, Fraction(0)) + c * d
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        from .parse import format_polynomial

        return f"Polynomial({self.nvars}, {format_polynomial(self)!r})"

    # calculus

    def derivative(self, i: int) -> Polynomial:
        out = {}
        for a, c in self._terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return Polynomial(self.nvars, out)

    # structural maps

    def embed(self, nvars: int, positions: Iterable[int]) -> Polynomial:
        """Re-index into ``nvars`` variables, variable k going to ``positions[k]``."""
        positions = list(positions)
        out = {}
        for a, c in self._terms.items():
            b = [0] * nvars
            for k, e in enumerate(a):
                b[positions[k]] += e
            out[tuple(b)] = c
        return Polynomial(nvars, out)

    def restrict_support(self, keep) -> Polynomial:
        return Polynomial(self.nvars, {a: c for a, c in self._terms.items() if keep(a)})

    # numerics

    @cached_property
    def _compiled(self):
        if not self._terms:
            return np.zeros((0, self.nvars), dtype=np.int64), np.zeros(0)
        exps = np.array(list(self._terms), dtype=np.int64)
        coefs = np.array([float(c) for c in self._terms.values()])
        return exps, coefs

    def __call__(self, point) -> float | np.ndarray:
        """Evaluate at a point of shape ``(nvars,)`` or a batch ``(k, nvars)``."""
        x = np.asarray(point, dtype=float)
        batched = x.ndim == 2
        if x.shape[-1] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {x.shape[-1]}")
        xb = x if batched else x[None, :]
        exps, coefs = self._compiled
        if not len(coefs):
            vals = np.zeros(len(xb))
        else:
            mons = np.ones((len(xb), len(coefs)))
            for i in range(self.nvars):
                col = exps[:, i]
                if col.any():
                    mons *= xb[:, i, None] ** col[None, :]
            vals = mons @ coefs
        return vals if batched else float(vals[0])


def evaluate(p: Polynomial, point) -> float:
    point = np.asarray(point, dtype=float)
    if point.shape != (p.nvars,):
        raise ValueError(f"point has shape {point.shape}, polynomial needs ({p.nvars},)")
    return p(point)


def gradient(p: Polynomial) -> list[Polynomial]:
    return [p.derivative(i) for i in range(p.nvars)]


def hessian(p: Polynomial) -> list[list[Polynomial]]:
    grad = gradient(p)
    n = p.nvars
    H = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            H[i][j] = H[j][i] = grad[i].derivative(j)
    return H


def evaluate_matrix(entries: list[list[Polynomial]], point) -> np.ndarray:
    return np.array([[q(point) for q in row] for row in entries])
