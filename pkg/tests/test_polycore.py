from fractions import Fraction
from itertools import product
from math import comb

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from sdplift import fixtures as fx
from sdplift.polycore import (
    NegativeExponentError,
    Polynomial,
    PolynomialSyntaxError,
    SemialgebraicSet,
    UnknownIdentifierError,
    evaluate,
    format_polynomial,
    gradient,
    half_hull_lattice,
    hessian,
    in_convex_hull,
    monomial_basis,
    parse_constraint,
    parse_polynomial,
    support,
)

X12 = ["x1", "x2"]


def fixture_polys():
    return [
        fx.quartic().constraints[0],
        fx.quartic_printed().constraints[0],
        fx.separable_octic().constraints[0],
        fx.exp_sum_set(2, 2).constraints[0],
        fx.product_set(3).constraints[0],
        fx.motzkin(),
        fx.gram_form([[1, 1], [1, 1]], 2),
    ]


# strategies -------------------------------------------------------------

coef = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw, nvars=2, maxdeg=4, max_terms=5):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        alpha = tuple(draw(st.integers(0, maxdeg)) for _ in range(nvars))
        terms[alpha] = draw(coef)
    return Polynomial(nvars, terms)


def to_sympy(p: Polynomial, syms):
    return sp.Add(*[sp.Rational(c.numerator, c.denominator) * sp.Mul(*[s**a for s, a in zip(syms, alpha)]) for alpha, c in p.items()])


def from_sympy(expr, syms) -> Polynomial:
    P = sp.Poly(sp.expand(expr), *syms)
    return Polynomial(len(syms), {m: Fraction(int(c.p), int(c.q)) for m, c in zip(P.monoms(), P.coeffs())})


SYMS = sp.symbols("x1 x2")


# parsing ----------------------------------------------------------------


def test_parse_examples():
    p = parse_polynomial("1 - x1^4 - x2^4 - x1^2*x2^2", X12)
    assert p.terms == {(0, 0): 1, (4, 0): -1, (0, 4): -1, (2, 2): -1}
    q = parse_polynomial("x1*x2*x3 - 1", ["x1", "x2", "x3"])
    assert q.terms == {(1, 1, 1): 1, (0, 0, 0): -1}
    r = parse_polynomial("3/2*x1^2", X12)
    assert r.terms == {(2, 0): Fraction(3, 2)}


def test_parse_decimals_and_leading_sign():
    p = parse_polynomial("-0.25*x1 + .5", ["x1"])
    assert p.terms == {(1,): Fraction(-1, 4), (0,): Fraction(1, 2)}


@pytest.mark.parametrize(
    "text, err, pos",
    [
        ("x1 + * x2", PolynomialSyntaxError, 5),
        ("2 x1", PolynomialSyntaxError, 2),
        ("x1^", PolynomialSyntaxError, 3),
        ("x1^1.5", PolynomialSyntaxError, 3),
        ("1/0", PolynomialSyntaxError, 2),
        ("x1 + y", UnknownIdentifierError, 5),
        ("x1^-2", NegativeExponentError, 3),
        ("x1 $ 2", PolynomialSyntaxError, 3),
    ],
)
def test_parse_errors_carry_positions(text, err, pos):
    with pytest.raises(err) as info:
        parse_polynomial(text, X12)
    assert info.value.position == pos


def test_unknown_identifier_names_it():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_polynomial("x1 + zeta", X12)
    assert info.value.name == "zeta"


def test_constraint_sides_and_offsets():
    assert parse_constraint("x1^2 <= 1", ["x1"]) == parse_polynomial("1 - x1^2", ["x1"])
    assert parse_constraint("x1 >= x2", X12) == parse_polynomial("x1 - x2", X12)
    with pytest.raises(UnknownIdentifierError) as info:
        parse_constraint("x1 >= q", X12)
    assert info.value.position == 6


def test_names_are_validated():
    with pytest.raises(ValueError):
        parse_polynomial("x1", ["x1", "x1"])
    with pytest.raises(ValueError):
        parse_polynomial("x1", ["x2", "x1"])  # canonical names must sit at their own slot


def test_print_order_and_format():
    p = parse_polynomial("1 - x1^4 - x2^4 - x1^2*x2^2 + 3/2*x1", X12)
    assert format_polynomial(p) == "-x1^4 - x1^2*x2^2 - x2^4 + 3/2*x1 + 1"


@pytest.mark.parametrize("p", fixture_polys())
def test_parse_print_parse_fixtures(p):
    names = [f"x{i + 1}" for i in range(p.nvars)]
    assert parse_polynomial(format_polynomial(p, names), names) == p


@given(polys())
def test_parse_print_roundtrip_property(p):
    assert parse_polynomial(format_polynomial(p, X12), X12) == p


# arithmetic against sympy ------------------------------------------------


@settings(max_examples=60)
@given(polys(), polys())
def test_arithmetic_matches_sympy(p, q):
    P, Q = to_sympy(p, SYMS), to_sympy(q, SYMS)
    assert p + q == from_sympy(P + Q, SYMS)
    assert p - q == from_sympy(P - Q, SYMS)
    assert p * q == from_sympy(P * Q, SYMS)


@settings(max_examples=40)
@given(polys(max_terms=3, maxdeg=3), st.integers(0, 3))
def test_power_matches_sympy(p, k):
    assert p**k == from_sympy(to_sympy(p, SYMS) ** k, SYMS)


@settings(max_examples=60)
@given(polys())
def test_derivatives_match_sympy(p):
    P = to_sympy(p, SYMS)
    for i, s in enumerate(SYMS):
        assert gradient(p)[i] == from_sympy(sp.diff(P, s), SYMS)
    H = hessian(p)
    for i, j in product(range(2), repeat=2):
        assert H[i][j] == from_sympy(sp.diff(P, SYMS[i], SYMS[j]), SYMS)
        assert H[i][j] == H[j][i]


def test_zero_polynomial_conventions():
    z = Polynomial(2)
    assert z.is_zero() and z.degree == -1 and support(z) == frozenset()
    assert (z * parse_polynomial("x1", X12)).is_zero()


# evaluation and calculus ------------------------------------------------


def test_evaluate_examples():
    assert evaluate(fx.quartic_ball().constraints[0], [0, 0]) == 1
    assert evaluate(fx.product_set(2).constraints[0], [2, 0.5]) == 0
    g = fx.separable_octic().constraints[0]
    assert evaluate(g, [0.5, 0.5]) == pytest.approx(0.24609375, abs=1e-15)
    with pytest.raises(ValueError):
        evaluate(g, [1, 2, 3])


def test_batch_evaluation_matches_pointwise():
    p = fx.motzkin()
    pts = np.random.default_rng(1).normal(size=(7, 2))
    assert np.allclose(p(pts), [evaluate(p, x) for x in pts])


def test_hessian_examples():
    p = fx.product_set(4).constraints[0]
    H = hessian(p)
    x = [Polynomial.variable(4, k) for k in range(4)]
    for i, j in product(range(4), repeat=2):
        if i == j:
            assert H[i][j].is_zero()
        else:
            expect = Polynomial.constant(4, 1)
            for k in range(4):
                if k not in (i, j):
                    expect = expect * x[k]
            assert H[i][j] == expect
    assert hessian(parse_polynomial("x1^2", ["x1"]))[0][0] == Polynomial.constant(1, 2)
    q = parse_polynomial("x1^4 + x2^4 - x1^2*x2^2", X12)
    Hq = hessian(q)
    assert Hq[0][0] == parse_polynomial("12*x1^2 - 2*x2^2", X12)
    assert Hq[0][1] == parse_polynomial("-4*x1*x2", X12)
    assert Hq[1][1] == parse_polynomial("12*x2^2 - 2*x1^2", X12)


@pytest.mark.parametrize("p", fixture_polys())
def test_derivatives_match_finite_differences(p):
    rng = np.random.default_rng(5)
    h = 1e-5
    n = p.nvars
    grad, H = gradient(p), hessian(p)
    for x in rng.uniform(-1, 1, size=(20, n)):
        E = np.eye(n) * h
        fd_grad = np.array([(p(x + e) - p(x - e)) / (2 * h) for e in E])
        an_grad = np.array([g(x) for g in grad])
        assert np.max(np.abs(fd_grad - an_grad)) <= 1e-6 * max(1.0, np.max(np.abs(an_grad)))
        fd_H = np.array([[(grad[i](x + E[j]) - grad[i](x - E[j])) / (2 * h) for j in range(n)] for i in range(n)])
        an_H = np.array([[q(x) for q in row] for row in H])
        assert np.max(np.abs(fd_H - an_H)) <= 1e-6 * max(1.0, np.max(np.abs(an_H)))


# lattice geometry ----------------------------------------------------------


def test_support_examples():
    assert support(fx.separable_octic().constraints[0]) == {(0, 0), (8, 0), (2, 0), (1, 1), (0, 2)}
    assert support(parse_polynomial("x1^2*x2^2", X12)) == {(2, 2)}


def test_half_hull_lattice_examples():
    octic = support(fx.separable_octic().constraints[0])
    assert half_hull_lattice(octic) == {(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (0, 1)}
    assert half_hull_lattice({(0, 0), (2, 0), (0, 2)}) == {(0, 0), (1, 0), (0, 1)}
    quartic = support(fx.quartic().constraints[0])
    assert half_hull_lattice(quartic) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}


def _lp_in_hull(point, gens) -> bool:
    """Float LP oracle: point = sum w_k g_k, w >= 0, sum w = 1."""
    G = np.array(gens, dtype=float).T
    A = np.vstack([G, np.ones(G.shape[1])])
    b = np.append(np.asarray(point, dtype=float), 1.0)
    res = linprog(np.zeros(G.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=6),
    st.tuples(st.integers(0, 6), st.integers(0, 6)),
)
def test_hull_membership_matches_lp(gens, point):
    assert in_convex_hull(point, gens) == _lp_in_hull(point, gens)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=5))
def test_half_hull_lattice_brute_force(points):
    got = half_hull_lattice(points)
    box = range(0, 4)
    brute = {q for q in product(box, repeat=2) if _lp_in_hull([2 * q[0], 2 * q[1]], points)}
    assert got == brute


def test_monomial_basis_examples():
    assert monomial_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert monomial_basis(1, 3) == [(0,), (1,), (2,), (3,)]
    assert len(monomial_basis(3, 2)) == 10


@given(st.integers(1, 4), st.integers(0, 5))
def test_monomial_basis_count(n, d):
    basis = monomial_basis(n, d)
    assert len(basis) == comb(n + d, d) == len(set(basis))
    assert basis[0] == (0,) * n


# semialgebraic sets --------------------------------------------------------


def test_semialgebraic_set_from_strings():
    S = SemialgebraicSet.from_strings(["x1^2 + x2^2 <= 1", "x1"], X12)
    assert S.max_degree == 2
    assert S.contains([0.5, 0.1]) and not S.contains([-0.1, 0.0])
    assert S.values([[0, 0], [1, 0]]).shape == (2, 2)
    with pytest.raises(ValueError):
        SemialgebraicSet(2, ())
