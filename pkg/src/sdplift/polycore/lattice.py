"""Monomial bases and lattice points of halved Newton polytopes.

Hull membership is decided with an exact rational simplex, so the lattice
sets are tolerance free.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .polynomial import Exponent, Polynomial, grlex_key

LatticeSet = frozenset


def support(p: Polynomial) -> frozenset[Exponent]:
    return p.support()


def exponents_of_degree(n: int, deg: int) -> list[Exponent]:
    if n == 1:
        return [(deg,)]
    out = []
    for first in range(deg, -1, -1):
        for rest in exponents_of_degree(n - 1, deg - first):
            out.append((first,) + rest)
    return out


def monomial_basis(nvars: int, maxdeg: int) -> list[Exponent]:
    """All exponents of total degree <= ``maxdeg`` in graded lex order."""
    if maxdeg < 0:
        raise ValueError("maxdeg must be nonnegative")
    basis = [a for d in range(maxdeg + 1) for a in exponents_of_degree(nvars, d)]
    assert len(basis) == comb(nvars + maxdeg, maxdeg)
    return basis


def sort_grlex(points: Iterable[Exponent]) -> list[Exponent]:
    return sorted(points, key=grlex_key)


def in_convex_hull(point: Sequence, generators: Sequence[Sequence]) -> bool:
    """Exact test of ``point`` in conv(generators) for rational coordinates.

    Solves the phase-one problem of ``sum(l) = 1, sum(l_k g_k) = point,
    l >= 0`` with Bland's rule over :class:`~fractions.Fraction`.
    """
    gens = [tuple(Fraction(c) for c in g) for g in generators]
    if not gens:
        return False
    target = tuple(Fraction(c) for c in point)
    if target in set(gens):
        return True
    dim = len(target)
    # equality rows: coordinates, then the convexity row
    rows = [[g[i] for g in gens] + [target[i]] for i in range(dim)]
    rows.append([Fraction(1)] * len(gens) + [Fraction(1)])
    for r in rows:
        if r[-1] < 0:
            for j in range(len(r)):
                r[j] = -r[j]
    m, k = len(rows), len(gens)
    # tableau columns: k structural, m artificial, rhs
    tab = []
    for i, r in enumerate(rows):
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        tab.append(r[:k] + art + [r[k]])
    basis = [k + i for i in range(m)]
    ncols = k + m
    while True:
        # reduced costs of phase-one objective (sum of artificials)
        entering = None
        for j in range(ncols):
            if j in basis:
                continue
            cost = (1 if j >= k else 0) - sum(tab[i][j] for i in range(m) if basis[i] >= k)
            if cost < 0:
                entering = j
                break
        if entering is None:
            break
        leave, best = None, None
        for i in range(m):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:  # unbounded direction cannot occur in phase one
            break
        piv = tab[leave][entering]
        tab[leave] = [v / piv for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][entering]:
                f = tab[i][entering]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[leave])]
        basis[leave] = entering
    infeasibility = sum(tab[i][-1] for i in range(m) if basis[i] >= k)
    return infeasibility == 0


def half_hull_lattice(points: Iterable[Exponent]) -> frozenset[Exponent]:
    """Integer points of conv({a/2 : a in points}), boundary included."""
    pts = sorted(set(tuple(p) for p in points))
    if not pts:
        raise ValueError("half_hull_lattice needs a nonempty support")
    n = len(pts[0])
    lo = [min(p[i] for p in pts) for i in range(n)]
    hi = [max(p[i] for p in pts) for i in range(n)]
    dlo, dhi = min(sum(p) for p in pts), max(sum(p) for p in pts)
    ranges = [range(-(-lo[i] // 2), hi[i] // 2 + 1) for i in range(n)]
    found = set()
    for q in itertools.product(*ranges):
        doubled = tuple(2 * c for c in q)
        if not dlo <= sum(doubled) <= dhi:
            continue
        if in_convex_hull(doubled, pts):
            found.add(q)
    return frozenset(found)
