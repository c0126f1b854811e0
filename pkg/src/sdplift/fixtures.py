"""Named constraint sets used across the test-suite and the CLI demos."""

from __future__ import annotations

from fractions import Fraction
from math import factorial

import numpy as np

from .momentlift import LinearPencil, SdpRepresentation
from .polycore import Polynomial, SemialgebraicSet, parse_polynomial, unit, zero_exponent


def quartic_printed() -> SemialgebraicSet:
    """``1 - (x1^4 + x2^4 - x1^2 x2^2) >= 0``: the sign as displayed; not sos-concave."""
    return SemialgebraicSet.from_strings(["1 - x1^4 - x2^4 + x1^2*x2^2"], ["x1", "x2"])


def quartic() -> SemialgebraicSet:
    """``1 - x1^4 - x2^4 - x1^2 x2^2 >= 0``, the sos-concave working fixture."""
    return SemialgebraicSet.from_strings(["1 - x1^4 - x2^4 - x1^2*x2^2"], ["x1", "x2"])


def quartic_ball() -> SemialgebraicSet:
    """``1 - x1^4 - x2^4 >= 0``, the set with the hand-built three-block lift."""
    return SemialgebraicSet.from_strings(["1 - x1^4 - x2^4"], ["x1", "x2"])


def gram_form(B, d: int) -> Polynomial:
    """``[x^d]^T B [x^d]`` with ``[x^d] = (x1^d, ..., xn^d)``."""
    B = [[Fraction(v) for v in row] for row in B]
    n = len(B)
    p = Polynomial(n)
    for i in range(n):
        for j in range(n):
            alpha = [0] * n
            alpha[i] += d
            alpha[j] += d
            p = p + Polynomial.monomial(tuple(alpha), B[i][j])
    return p


def gram_form_set(B, d: int) -> SemialgebraicSet:
    p = gram_form(B, d)
    return SemialgebraicSet(p.nvars, (1 - p,))


def separable_octic(orthant: bool = True) -> SemialgebraicSet:
    """``1 - (x1^8 + x1^2 + x1 x2 + x2^2) >= 0``, optionally intersected with x >= 0."""
    cons = ["1 - x1^8 - x1^2 - x1*x2 - x2^2"]
    if orthant:
        cons += ["x1", "x2"]
    return SemialgebraicSet.from_strings(cons, ["x1", "x2"])


def exp_truncation(k_max: int) -> Polynomial:
    """``sum_{k=1}^{k_max} t^k / k!`` in one variable."""
    return Polynomial(1, {(k,): Fraction(1, factorial(k)) for k in range(1, k_max + 1)})


def exp_sum_set(n: int, d: int) -> SemialgebraicSet:
    """``1 - sum_i sum_{k=1}^{2d} x_i^k / k! >= 0``."""
    q = exp_truncation(2 * d)
    p = Polynomial(n)
    for i in range(n):
        p = p + q.embed(n, [i])
    return SemialgebraicSet(n, (1 - p,))


def product_set(n: int) -> SemialgebraicSet:
    """``x1 x2 ... xn - 1 >= 0`` (positive orthant branch selected by the box)."""
    names = [f"x{i + 1}" for i in range(n)]
    return SemialgebraicSet.from_strings(["*".join(names) + " - 1"], names)


def disk() -> SemialgebraicSet:
    return SemialgebraicSet.from_strings(["1 - x1^2 - x2^2"], ["x1", "x2"])


def interval() -> SemialgebraicSet:
    return SemialgebraicSet.from_strings(["1 - x1^2"], ["x1"])


def half_plane() -> SemialgebraicSet:
    return SemialgebraicSet.from_strings(["1 - x1"], ["x1", "x2"])


def motzkin() -> Polynomial:
    return parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", ["x1", "x2"])


def hand_lift_quartic_ball() -> SdpRepresentation:
    """Three 2x2 blocks over ``(x1, x2, w1, w2)`` whose projection is ``x1^4 + x2^4 <= 1``::

        [1  x2; x2 w2] >= 0,  [1+w1 w2; w2 1-w1] >= 0,  [1 x1; x1 w1] >= 0
    """
    n = 2
    one, e1, e2 = zero_exponent(n), unit(n, 0), unit(n, 1)
    M = lambda *rows: np.array(rows, dtype=np.int64)
    p1 = LinearPencil(2, {one: M([1, 0], [0, 0]), e2: M([0, 1], [1, 0]), "w2": M([0, 0], [0, 1])})
    p2 = LinearPencil(2, {one: M([1, 0], [0, 1]), "w1": M([1, 0], [0, -1]), "w2": M([0, 1], [1, 0])})
    p3 = LinearPencil(2, {one: M([1, 0], [0, 0]), e1: M([0, 1], [1, 0]), "w1": M([0, 0], [0, 1])})
    return SdpRepresentation(
        nvars=n,
        aux=("w1", "w2"),
        pencils=(p1, p2, p3),
        linear_ineqs=(),
        provenance="hand",
        names=("x1", "x2"),
    )


def random_separable_set(rng: np.random.Generator, max_vars: int = 3, max_half_degree: int = 3) -> SemialgebraicSet:
    """``1 - sum_blocks q_block(x_block) >= 0`` with each ``q_block`` sos-convex by construction.

    Blocks have one or two variables. A block is a linear term plus a PSD
    quadratic form plus even powers with nonnegative weights; the leading
    even power is strictly positive in every variable so the set is compact.
    """
    n = int(rng.integers(1, max_vars + 1))
    order = list(rng.permutation(n))
    blocks = []
    while order:
        size = 2 if len(order) >= 2 and rng.random() < 0.5 else 1
        blocks.append(sorted(int(i) for i in order[:size]))
        order = order[size:]
    d = int(rng.integers(1, max_half_degree + 1))
    rat = lambda lo, hi: Fraction(int(rng.integers(lo, hi + 1)), 4)
    q = Polynomial(n)
    x = [Polynomial.variable(n, i) for i in range(n)]
    for block in blocks:
        L = [[rat(-4, 4) for _ in block] for _ in block]
        # Gram matrix L L^T of the quadratic part is PSD
        for r in range(len(block)):
            form = Polynomial(n)
            for c, i in enumerate(block):
                form = form + x[i] * L[r][c]
            q = q + form * form
        for i in block:
            q = q + x[i] * rat(-4, 4)
            for k in range(2, d + 1):
                q = q + x[i] ** (2 * k) * rat(0, 4)
            q = q + x[i] ** (2 * d) * rat(1, 4)
    return SemialgebraicSet(n, (1 - q,))
