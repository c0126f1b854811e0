"""Sum-of-squares, sos-convexity and sos-concavity certificates.

A polynomial ``p`` is certified SOS by a PSD Gram matrix ``G`` with
``m(x)^T G m(x) == p`` over a Newton-polytope basis ``m``. The Gram search is
``max t s.t. G - t I >= 0`` over the affine family of Gram matrices that
match ``p`` coefficient by coefficient; ``t* < 0`` means no PSD Gram matrix
exists on that basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .polycore import (
    Exponent,
    Polynomial,
    add_exponents,
    half_hull_lattice,
    hessian,
    sort_grlex,
)
from .sdpsolve import OptResult, SdpProblem, solve

EPS_PSD = 1e-7
EPS_COEF = 1e-7
EPS_WIT = 1e-6
N_STARTS = 100
SEED = 0
# Hessian witnesses are searched in the unit box first, then in [-2, 2]^n.
SEARCH_BOXES = (1.0, 2.0)


@dataclass
class SosCertificate:
    basis: tuple[Exponent, ...]
    gram: np.ndarray
    residual: float
    min_eig: float
    target: Polynomial | None = field(default=None, repr=False)
    status: str = "certified"

    @property
    def valid(self) -> bool:
        return self.min_eig >= -EPS_PSD and self.residual <= EPS_COEF

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "basis": [list(b) for b in self.basis],
            "gram": np.asarray(self.gram).tolist(),
            "residual": self.residual,
            "min_eig": self.min_eig,
        }


@dataclass
class Refutation:
    kind: str  # not-sos | not-sos-convex | not-concave
    witness: tuple[np.ndarray, ...] | None
    value: float
    sdp_margin: float | None = None
    status: str = "refuted"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "kind": self.kind,
            "witness": None if self.witness is None else [np.asarray(w).tolist() for w in self.witness],
            "value": self.value,
            "sdp_margin": self.sdp_margin,
        }


@dataclass
class Indeterminate:
    reason: str
    sdp: OptResult | None = field(default=None, repr=False)
    status: str = "indeterminate"

    def to_json(self) -> dict:
        return {"status": self.status, "reason": self.reason}


SosResult = SosCertificate | Refutation | Indeterminate


@dataclass(frozen=True)
class GramFamily:
    """Affine family ``G(z) = G0 + sum_k z_k D_k`` of matrices matching a polynomial."""

    basis: tuple[Exponent, ...]
    G0: np.ndarray
    directions: np.ndarray  # (k, N, N)
    unmatched: tuple[Exponent, ...]

    def gram(self, z) -> np.ndarray:
        return self.G0 + np.tensordot(np.asarray(z, dtype=float), self.directions, axes=1)


def gram_family(p: Polynomial, basis) -> GramFamily:
    basis = tuple(basis)
    N = len(basis)
    groups: dict[Exponent, list[tuple[int, int]]] = {}
    for i in range(N):
        for j in range(i, N):
            groups.setdefault(add_exponents(basis[i], basis[j]), []).append((i, j))
    unmatched = tuple(a for a in p.support() if a not in groups)
    G0 = np.zeros((N, N))
    dirs = []

    def unit_sym(i, j):
        E = np.zeros((N, N))
        E[i, j] = E[j, i] = 1.0
        return E

    for gamma, pairs in groups.items():
        weight = lambda ij: 1.0 if ij[0] == ij[1] else 2.0
        rep = pairs[0]
        c = float(p.coefficient(gamma))
        G0 += unit_sym(*rep) * (c / weight(rep))
        for q in pairs[1:]:
            dirs.append(unit_sym(*q) / weight(q) - unit_sym(*rep) / weight(rep))
    directions = np.array(dirs) if dirs else np.zeros((0, N, N))
    return GramFamily(basis, G0, directions, unmatched)


def gram_residual(p: Polynomial, basis, G) -> float:
    """Max coefficient mismatch of ``m^T G m - p``, summed exactly from the float entries."""
    coeffs: dict[Exponent, Fraction] = {}
    N = len(basis)
    for i in range(N):
        for j in range(N):
            key = add_exponents(basis[i], basis[j])
            coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction(float(G[i, j]))
    keys = set(coeffs) | set(p.support())
    return max((abs(float(coeffs.get(k, 0)) - float(p.coefficient(k))) for k in keys), default=0.0)


def _gram_sdp(fam: GramFamily) -> OptResult:
    k, N = len(fam.directions), len(fam.basis)
    block = np.zeros((k + 2, N, N))
    block[0] = fam.G0
    block[1 : k + 1] = fam.directions
    block[k + 1] = -np.eye(N)
    c = np.zeros(k + 1)
    c[-1] = 1.0
    return solve(SdpProblem(c, (block,)))


def certify_on_basis(p: Polynomial, basis) -> tuple[SosCertificate | None, OptResult | None, float]:
    """Gram search on a fixed basis; returns (certificate or None, solver result, t*)."""
    fam = gram_family(p, basis)
    if fam.unmatched:
        return None, None, -np.inf
    res = _gram_sdp(fam)
    if res.status != "optimal":
        return None, res, np.nan
    t = float(res.point[-1])
    G = fam.gram(res.point[:-1])
    G = 0.5 * (G + G.T)
    cert = SosCertificate(
        basis=fam.basis,
        gram=G,
        residual=gram_residual(p, fam.basis, G),
        min_eig=float(np.linalg.eigvalsh(G)[0]) if len(G) else 0.0,
        target=p,
    )
    if t >= -EPS_PSD and cert.valid:
        return cert, res, t
    return None, res, t


def _multistart_min(fun, n: int, box: float, seed: int = SEED, starts: int = N_STARTS):
    rng = np.random.default_rng(seed)
    best = (np.inf, None)
    bounds = [(-box, box)] * n
    for x0 in rng.uniform(-box, box, size=(starts, n)):
        r = minimize(fun, x0, method="L-BFGS-B", jac=True, bounds=bounds)
        if r.fun < best[0]:
            best = (float(r.fun), np.asarray(r.x))
    return best


def find_negative_point(p: Polynomial, box: float = 2.0):
    """Multistart local minimization of ``p``; returns ``(x, p(x))`` if ``p(x) < -EPS_WIT``."""
    grad = [p.derivative(i) for i in range(p.nvars)]

    def fun(x):
        return p(x), np.array([g(x) for g in grad])

    val, x = _multistart_min(fun, p.nvars, box)
    if x is not None and p(x) < -EPS_WIT:
        return x, float(p(x))
    return None


def sos_certificate(p: Polynomial) -> SosResult:
    if p.is_zero():
        return SosCertificate((), np.zeros((0, 0)), 0.0, 0.0, target=p)
    if p.degree % 2:
        raise ValueError(f"odd degree {p.degree} polynomial cannot be a sum of squares")
    basis = tuple(sort_grlex(half_hull_lattice(p.support())))
    cert, res, t = certify_on_basis(p, basis)
    if cert is not None:
        return cert
    witness = find_negative_point(p)
    if witness is not None:
        x, val = witness
        return Refutation("not-sos", (x,), val, sdp_margin=t)
    if res is not None and res.status != "optimal":
        return Indeterminate(f"Gram SDP ended {res.status}: {res.message}", res)
    return Refutation("not-sos", None, t, sdp_margin=t)


def hessian_form(p: Polynomial) -> Polynomial:
    """``h(x, v) = v^T Hess p(x) v`` in ``2n`` variables ``(x, v)``."""
    n = p.nvars
    H = hessian(p)
    h = Polynomial(2 * n)
    for i in range(n):
        for j in range(n):
            if H[i][j].is_zero():
                continue
            vv = [0] * (2 * n)
            vv[n + i] += 1
            vv[n + j] += 1
            h = h + H[i][j].embed(2 * n, range(n)) * Polynomial.monomial(tuple(vv))
    return h


def hessian_basis(p: Polynomial) -> tuple[Exponent, ...]:
    """Monomials ``x^b v_j`` with ``b`` in the halved hull of the Hessian entries' supports."""
    n = p.nvars
    H = hessian(p)
    supp = set()
    for row in H:
        for e in row:
            supp.update(e.support())
    xs = half_hull_lattice(supp) if supp else {(0,) * n}
    basis = []
    for b in xs:
        for j in range(n):
            basis.append(tuple(b) + tuple(1 if k == j else 0 for k in range(n)))
    return tuple(sort_grlex(basis))


def find_hessian_witness(p: Polynomial):
    """Search ``(x, v)`` with ``v^T Hess p(x) v < -EPS_WIT`` and ``|v| = 1``."""
    n = p.nvars
    H = hessian(p)
    dH = [[[H[i][j].derivative(k) for j in range(n)] for i in range(n)] for k in range(n)]

    def mat(entries, x):
        return np.array([[q(x) for q in row] for row in entries])

    def fun(x):
        w, U = np.linalg.eigh(mat(H, x))
        u = U[:, 0]
        return w[0], np.array([u @ mat(dH[k], x) @ u for k in range(n)])

    for box in SEARCH_BOXES:
        val, x = _multistart_min(fun, n, box)
        if x is None:
            continue
        w, U = np.linalg.eigh(mat(H, x))
        v = U[:, 0]
        v = v if v[np.argmax(np.abs(v))] > 0 else -v
        value = float(v @ mat(H, x) @ v)
        if value < -EPS_WIT:
            return x, v, value
    return None


def is_sos_convex(p: Polynomial) -> SosResult:
    h = hessian_form(p)
    if h.is_zero():
        basis = hessian_basis(p)
        return SosCertificate(basis, np.zeros((len(basis), len(basis))), 0.0, 0.0, target=h)
    cert, res, t = certify_on_basis(h, hessian_basis(p))
    if cert is not None:
        return cert
    witness = find_hessian_witness(p)
    if witness is not None:
        x, v, value = witness
        return Refutation("not-sos-convex", (x, v), value, sdp_margin=t)
    if res is not None and res.status != "optimal":
        return Indeterminate(f"Gram SDP ended {res.status}: {res.message}", res)
    return Refutation("not-sos-convex", None, t, sdp_margin=t)


def is_sos_concave(g: Polynomial) -> SosResult:
    """Same verdict as ``is_sos_convex(-g)``; a point witness is reported as ``not-concave``."""
    out = is_sos_convex(-g)
    if isinstance(out, Refutation) and out.witness is not None:
        return Refutation("not-concave", out.witness, out.value, out.sdp_margin)
    return out
