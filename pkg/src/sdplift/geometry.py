"""Boundary sampling and curvature diagnostics for semialgebraic sets.

These checks are necessary conditions evaluated on finitely many boundary
samples; they cannot certify positive curvature on the whole boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq

from .polycore import Polynomial, SemialgebraicSet, evaluate_matrix, gradient, hessian

EPS_BD = 1e-8
EPS_CURV = 1e-6
EPS_ND = 1e-8
EPS_PSD_DIFF = 1e-8
DEFAULT_BOX = (-2.0, 2.0)
INTERIOR_DRAWS = 4096
RAY_STEPS = 256
MAX_RAYS_PER_SAMPLE = 200

NOTE = "sampled necessary condition only; does not certify curvature on the whole boundary"


class NoInteriorPointError(ValueError):
    pass


def normalize_box(box, n: int) -> np.ndarray:
    """``(lo, hi)`` or a per-coordinate list of pairs, as an ``(n, 2)`` array."""
    if box is None:
        box = DEFAULT_BOX
    arr = np.asarray(box, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (n, 1))
    if arr.shape != (n, 2) or not np.all(np.isfinite(arr)) or np.any(arr[:, 0] >= arr[:, 1]):
        raise ValueError(f"box must be {n} finite (lo, hi) pairs with lo < hi")
    return arr


@dataclass
class BoundarySample:
    point: np.ndarray
    active: int
    tangent_basis: np.ndarray  # (n, n-1), orthonormal columns
    gradient: np.ndarray


@dataclass
class CurvatureReport:
    samples: int
    min_sff: float
    min_grad_norm: float
    verdict: str  # positively-curved-on-samples | degenerate | curvature-failure
    per_sample: list[float] = field(default_factory=list, repr=False)
    note: str = NOTE

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "min_sff": self.min_sff,
            "min_grad_norm": self.min_grad_norm,
            "verdict": self.verdict,
            "note": self.note,
        }


def find_interior_point(S: SemialgebraicSet, box=None, seed: int = 0) -> np.ndarray:
    """Centroid of uniformly drawn strictly feasible points (or the best draw if the centroid is not)."""
    B = normalize_box(box, S.nvars)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(B[:, 0], B[:, 1], size=(INTERIOR_DRAWS, S.nvars))
    vals = S.values(pts).min(axis=1) if S.constraints else np.ones(len(pts))
    inside = pts[vals > 0]
    if not len(inside):
        raise NoInteriorPointError("no strictly feasible point found in the box")
    c = inside.mean(axis=0)
    if S.slack(c)[0] > 0:
        return c
    return pts[np.argmax(vals)]


def tangent_basis(grad: np.ndarray) -> np.ndarray:
    return null_space(np.asarray(grad, dtype=float)[None, :])


def _box_exit(x0, u, B) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = np.where(u > 0, (B[:, 1] - x0) / u, np.inf)
        lo = np.where(u < 0, (B[:, 0] - x0) / u, np.inf)
    return float(np.min(np.minimum(hi, lo)))


def sample_boundary(
    S: SemialgebraicSet,
    active: int,
    count: int,
    seed: int = 0,
    box=None,
    interior=None,
) -> list[BoundarySample]:
    """Points of ``{g_active = 0}`` on the boundary, found by bisection along random rays.

    Rays that leave the box, or leave the set through another constraint,
    are discarded. At most ``count`` samples are returned; fewer means the
    ray budget ran out.
    """
    B = normalize_box(box, S.nvars)
    x0 = np.asarray(interior, dtype=float) if interior is not None else find_interior_point(S, B, seed)
    if S.slack(x0)[0] <= 0:
        raise NoInteriorPointError("supplied interior point is not strictly feasible")
    g = S.constraints[active]
    grads = gradient(g)
    rng = np.random.default_rng(seed)
    out: list[BoundarySample] = []
    for _ in range(count * MAX_RAYS_PER_SAMPLE):
        if len(out) == count:
            break
        u = rng.standard_normal(S.nvars)
        u /= np.linalg.norm(u)
        s_max = _box_exit(x0, u, B)
        s = np.linspace(0.0, s_max, RAY_STEPS + 1)[1:]
        vals = S.values(x0 + s[:, None] * u)
        bad = np.nonzero(vals.min(axis=1) < 0)[0]
        if not len(bad):
            continue
        k = bad[0]
        if vals[k].argmin() != active:
            continue
        s_lo = s[k - 1] if k else 0.0
        s_hi = s[k]
        root = brentq(lambda t: float(g(x0 + t * u)), s_lo, s_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        x = x0 + root * u
        if abs(g(x)) > EPS_BD or S.values(x[None])[0].min() < -EPS_BD:
            continue
        grad = np.array([d(x) for d in grads])
        out.append(BoundarySample(x, active, tangent_basis(grad), grad))
    return out


def sff_min(g: Polynomial, sample: BoundarySample) -> float:
    """Smallest eigenvalue of ``-B^T Hess g B`` on the tangent space (``inf`` if it is trivial)."""
    Bt = sample.tangent_basis
    if Bt.shape[1] == 0:
        return np.inf
    H = evaluate_matrix(hessian(g), sample.point)
    return float(np.linalg.eigvalsh(-Bt.T @ H @ Bt)[0])


def curvature_check(S: SemialgebraicSet, samples: list[BoundarySample]) -> CurvatureReport:
    if not samples:
        raise ValueError("curvature_check needs at least one boundary sample")
    sff = [sff_min(S.constraints[s.active], s) for s in samples]
    min_sff = float(min(sff))
    min_grad = float(min(np.linalg.norm(s.gradient) for s in samples))
    if min_grad <= EPS_ND:
        verdict = "degenerate"
    elif min_sff > EPS_CURV:
        verdict = "positively-curved-on-samples"
    else:
        verdict = "curvature-failure"
    return CurvatureReport(len(samples), min_sff, min_grad, verdict, sff)


def product_set_difference(x) -> np.ndarray:
    """``-Hess g + grad g grad g^T - (g + 1) diag(1/x_i^2)`` for ``g = x_1...x_n - 1``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("all coordinates must be positive")
    prod = np.prod(x)
    grad = prod / x
    H = prod / np.outer(x, x)
    np.fill_diagonal(H, 0.0)
    return -H + np.outer(grad, grad) - prod * np.diag(1.0 / x**2)


def product_set_inequality_check(n: int, samples) -> list[bool]:
    out = []
    for s in samples:
        x = s.point if isinstance(s, BoundarySample) else np.asarray(s, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"sample has shape {x.shape}, expected ({n},)")
        out.append(bool(np.linalg.eigvalsh(product_set_difference(x))[0] >= -EPS_PSD_DIFF))
    return out
