"""Dense primal-dual interior-point solver for small semidefinite programs.

Problems are stated in LMI form::

    maximize    c^T z
    subject to  F0_b + sum_i z_i Fi_b  >= 0   (PSD, one per block b)
                a0_k + sum_i z_i aik   >= 0   (scalar rows)

and solved together with the dual ``min <F0, X> s.t. <Fi, X> = -c_i, X >= 0``
by an infeasible-start path-following method using the HKM search direction
and a Mehrotra predictor-corrector step.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

EPS_GAP = 1e-8
EPS_PSD = 1e-7
EPS_MEMBER = 1e-5
MAX_ITER = 200
STEP_FRACTION = 0.98
PINF_LOOSE = 1e-6
LOOSE_GRACE = 5


_OBSERVERS: list = []


def add_observer(fn) -> None:
    """Call ``fn(result)`` after every interior-point run (used for suite-wide audits)."""
    _OBSERVERS.append(fn)


def remove_observer(fn) -> None:
    _OBSERVERS.remove(fn)


def gap_tolerance() -> float:
    return float(os.environ.get("SDPLIFT_TOL_GAP", EPS_GAP))


@dataclass(frozen=True)
class SdpProblem:
    """``blocks[b]`` has shape ``(nvars + 1, d, d)``; slice 0 is the constant
    term. ``ineqs`` has shape ``(k, nvars + 1)`` with the constant in column 0."""

    c: np.ndarray
    blocks: tuple[np.ndarray, ...] = ()
    ineqs: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        m = len(c)
        if m < 1:
            raise ValueError("an SDP needs at least one decision variable")
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        for b in blocks:
            if b.ndim != 3 or b.shape[0] != m + 1 or b.shape[1] != b.shape[2]:
                raise ValueError(f"block of shape {b.shape} does not fit {m} variables")
            if not np.array_equal(b, b.transpose(0, 2, 1)):
                raise ValueError("block coefficient matrices must be symmetric")
        ineqs = np.zeros((0, m + 1)) if self.ineqs is None else np.atleast_2d(np.asarray(self.ineqs, dtype=float))
        if ineqs.size and ineqs.shape[1] != m + 1:
            raise ValueError(f"inequality rows need {m + 1} columns")
        ineqs = ineqs.reshape(-1, m + 1)
        if not blocks and not len(ineqs):
            raise ValueError("an SDP needs at least one block or inequality")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "ineqs", ineqs)

    @property
    def nvars(self) -> int:
        return len(self.c)

    def block_values(self, z) -> list[np.ndarray]:
        z = np.asarray(z, dtype=float)
        return [b[0] + np.tensordot(z, b[1:], axes=1) for b in self.blocks]

    def ineq_values(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.ineqs[:, 0] + self.ineqs[:, 1:] @ z

    def margin(self, z) -> float:
        """Smallest eigenvalue over blocks and smallest inequality value at ``z``."""
        vals = [np.linalg.eigvalsh(S)[0] for S in self.block_values(z)]
        if len(self.ineqs):
            vals.append(self.ineq_values(z).min())
        return float(min(vals))

    def scaled(self, factors) -> SdpProblem:
        return SdpProblem(self.c, tuple(f * b for f, b in zip(factors, self.blocks)), self.ineqs)


@dataclass
class OptResult:
    status: str  # optimal | infeasible | unbounded | indeterminate
    value: float
    point: np.ndarray
    margin: float
    gap: float
    bound: float = np.nan
    dual_residual: float = np.nan
    iterations: int = 0
    phase1: float | None = None
    message: str = ""
    dual_blocks: list = field(default_factory=list, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    Linv = sla.solve_triangular(L, np.eye(len(X)), lower=True)
    lam = np.linalg.eigvalsh(Linv @ dX @ Linv.T)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    return np.inf if not neg.any() else float(np.min(-x[neg] / dx[neg]))


def _sym(A):
    return 0.5 * (A + A.T)


class _Ipm:
    def __init__(self, prob: SdpProblem, tol: float):
        self.prob = prob
        self.tol = tol
        self.m = prob.nvars
        self.F0 = [b[0] for b in prob.blocks]
        self.Fi = [b[1:] for b in prob.blocks]
        self.a0 = prob.ineqs[:, 0]
        self.A = prob.ineqs[:, 1:]
        self.nb = sum(len(F) for F in self.F0) + len(self.a0)
        self.b = -prob.c

    def AX(self, X, x):
        out = np.zeros(self.m)
        for Fi, Xb in zip(self.Fi, X):
            out += np.tensordot(Fi, Xb, axes=([1, 2], [0, 1]))
        if len(x):
            out += self.A.T @ x
        return out

    def Aadj(self, dz):
        return [np.tensordot(dz, Fi, axes=1) for Fi in self.Fi], self.A @ dz

    def initial_point(self):
        X, S = [], []
        norms_F = [np.linalg.norm(self.Fi[b], axis=(1, 2)) for b in range(len(self.Fi))]
        for F0, Fi, nF in zip(self.F0, self.Fi, norms_F):
            d = len(F0)
            xi = max(10.0, np.sqrt(d), d * np.max((1 + np.abs(self.b)) / (1 + nF)))
            eta = max(10.0, np.sqrt(d), np.linalg.norm(F0), nF.max(initial=0.0))
            X.append(xi * np.eye(d))
            S.append(eta * np.eye(d))
        k = len(self.a0)
        if k:
            nA = np.linalg.norm(self.A, axis=0)
            xi = max(10.0, np.max((1 + np.abs(self.b)) / (1 + nA)))
            eta = max(10.0, np.abs(self.a0).max(initial=0.0), nA.max(initial=0.0))
            x, s = xi * np.ones(k), eta * np.ones(k)
        else:
            x, s = np.zeros(0), np.zeros(0)
        return X, x, S, s, np.zeros(self.m)

    def schur(self, X, x, Sinv, s):
        M = np.zeros((self.m, self.m))
        for Fi, Xb, Si in zip(self.Fi, X, Sinv):
            d = len(Xb)
            Y = np.matmul(np.matmul(Xb[None], Fi), Si[None])
            M += Fi.reshape(self.m, d * d) @ Y.transpose(0, 2, 1).reshape(self.m, d * d).T
        if len(x):
            M += self.A.T @ ((x / s)[:, None] * self.A)
        return _sym(M)

    def run(self, max_iter=MAX_ITER) -> OptResult:
        prob = self.prob
        X, x, S, s, z = self.initial_point()
        normc = 1 + np.linalg.norm(prob.c)
        normF0 = 1 + np.sqrt(sum(np.linalg.norm(F) ** 2 for F in self.F0) + np.linalg.norm(self.a0) ** 2)
        status, message = "indeterminate", "iteration limit reached"
        loose, grace = None, 0
        it = 0
        for it in range(1, max_iter + 1):
            Fz, fz = prob.block_values(z), prob.ineq_values(z)
            rp = self.b - self.AX(X, x)
            Rd = [F - Sb for F, Sb in zip(Fz, S)]
            rd = fz - s
            mu = (sum(np.vdot(Xb, Sb) for Xb, Sb in zip(X, S)) + x @ s) / self.nb
            pobj = sum(np.vdot(F, Xb) for F, Xb in zip(self.F0, X)) + self.a0 @ x
            dobj = prob.c @ z
            relgap = mu * self.nb / (1 + abs(pobj) + abs(dobj))
            pinf = np.linalg.norm(rp) / normc
            dinf = np.sqrt(sum(np.linalg.norm(R) ** 2 for R in Rd) + rd @ rd) / normF0
            log.debug("it %3d  gap %.2e  pinf %.2e  dinf %.2e  mu %.2e", it, relgap, pinf, dinf, mu)
            if relgap <= self.tol and pinf <= self.tol and dinf <= self.tol:
                status, message = "optimal", "converged"
                break
            if relgap <= self.tol and dinf <= self.tol and pinf <= PINF_LOOSE:
                # unbounded optimal faces stall the primal residual; keep the best such iterate
                if loose is None or pinf < loose[0]:
                    loose = (pinf, X, x, S, s, z)
                grace += 1
                if grace > LOOSE_GRACE:
                    break
            big = max(max((np.abs(Xb).max() for Xb in X), default=0), np.abs(x).max(initial=0))
            if big > 1e13 or np.abs(z).max(initial=0) > 1e13:
                message = "iterates diverged"
                break

            Sinv = [np.linalg.inv(Sb) for Sb in S]
            Sinv = [_sym(Si) for Si in Sinv]
            M = self.schur(X, x, Sinv, s)
            try:
                factor = sla.cho_factor(M + 1e-14 * np.trace(M) / self.m * np.eye(self.m))
                solve_M = lambda r: sla.cho_solve(factor, r)
            except (np.linalg.LinAlgError, ValueError):
                Mp = np.linalg.pinv(M)
                solve_M = lambda r: Mp @ r

            def direction(target_R, target_r):
                # target_R = sigma*mu*I - (second order), in the HKM complementarity row
                G = [T @ Si - Xb - Xb @ R @ Si for T, Si, Xb, R in zip(target_R, Sinv, X, Rd)]
                g = (target_r - x * s - x * rd) / s if len(x) else np.zeros(0)
                rhs = self.AX([_sym(Gb) for Gb in G], g) - rp
                dz = solve_M(rhs)
                dSb, dsl = self.Aadj(dz)
                dS = [D + R for D, R in zip(dSb, Rd)]
                ds = dsl + rd
                dX = [_sym(T @ Si - Xb - Xb @ D @ Si) for T, Si, Xb, D in zip(target_R, Sinv, X, dS)]
                dx = (target_r - x * s - x * ds) / s if len(x) else np.zeros(0)
                return dX, dx, dS, ds, dz

            def steps(dX, dx, dS, ds):
                ap = min([_max_step(Xb, D) for Xb, D in zip(X, dX)] + [_max_step_lp(x, dx) if len(x) else np.inf])
                ad = min([_max_step(Sb, D) for Sb, D in zip(S, dS)] + [_max_step_lp(s, ds) if len(s) else np.inf])
                return min(1.0, STEP_FRACTION * ap), min(1.0, STEP_FRACTION * ad)

            # predictor
            zeros_R = [np.zeros_like(Xb) for Xb in X]
            dXa, dxa, dSa, dsa, _ = direction(zeros_R, np.zeros_like(x))
            ap, ad = steps(dXa, dxa, dSa, dsa)
            mu_aff = (
                sum(np.vdot(Xb + ap * D1, Sb + ad * D2) for Xb, D1, Sb, D2 in zip(X, dXa, S, dSa))
                + (x + ap * dxa) @ (s + ad * dsa)
            ) / self.nb
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
            # corrector
            target_R = [sigma * mu * np.eye(len(Xb)) - D1 @ D2 for Xb, D1, D2 in zip(X, dXa, dSa)]
            target_r = sigma * mu - dxa * dsa
            dX, dx, dS, ds, dz = direction(target_R, target_r)
            ap, ad = steps(dX, dx, dS, ds)
            if ap < 1e-12 and ad < 1e-12:
                message = "step length collapsed"
                break
            X = [_sym(Xb + ap * D) for Xb, D in zip(X, dX)]
            x = x + ap * dx
            S = [_sym(Sb + ad * D) for Sb, D in zip(S, dS)]
            s = s + ad * ds
            z = z + ad * dz

        if status != "optimal" and loose is not None:
            pinf, X, x, S, s, z = loose
            status, message = "optimal", f"converged with primal residual {pinf:.1e}"
        pobj = sum(np.vdot(F, Xb) for F, Xb in zip(self.F0, X)) + self.a0 @ x
        dobj = float(prob.c @ z)
        compl = sum(np.vdot(Xb, Sb) for Xb, Sb in zip(X, S)) + x @ s
        gap = compl / (1 + abs(pobj) + abs(dobj))
        # <F0, X> shifted by the equality residual of X: equals c^T z + <F(z), X>
        rp = self.b - self.AX(X, x)
        bound = pobj - z @ rp
        res = OptResult(
            status=status,
            value=dobj,
            point=z,
            margin=prob.margin(z),
            gap=float(gap),
            bound=float(bound),
            dual_residual=float(np.linalg.norm(rp)),
            iterations=it,
            message=message,
            dual_blocks=X + [x],
        )
        for fn in _OBSERVERS:
            fn(res)
        return res


def _phase1(prob: SdpProblem, tol: float, cap: float | None = 1.0) -> OptResult:
    """Maximize t subject to every block >= t I and every row >= t."""
    m = prob.nvars
    blocks = []
    for b in prob.blocks:
        d = b.shape[1]
        nb = np.zeros((m + 2, d, d))
        nb[: m + 1] = b
        nb[m + 1] = -np.eye(d)
        blocks.append(nb)
    rows = np.hstack([prob.ineqs, -np.ones((len(prob.ineqs), 1))])
    if cap is not None:
        capped = np.zeros((1, m + 2))
        capped[0, 0], capped[0, -1] = cap, -1.0
        rows = np.vstack([rows, capped])
    c = np.zeros(m + 1)
    c[-1] = 1.0
    return _Ipm(SdpProblem(c, tuple(blocks), rows), tol).run()


def solve(prob: SdpProblem, tol: float | None = None) -> OptResult:
    """Maximize ``prob.c @ z`` over the LMI; see :class:`OptResult` for the status contract."""
    tol = gap_tolerance() if tol is None else tol
    res = _Ipm(prob, tol).run()
    if res.status == "optimal":
        if res.margin < -EPS_PSD:
            res.status, res.message = "indeterminate", f"returned point violates the LMI by {-res.margin:.2e}"
        return res
    p1 = _phase1(prob, tol)
    res.phase1 = p1.value if p1.status == "optimal" else None
    if p1.status == "optimal" and p1.value < -EPS_PSD:
        res.status, res.message = "infeasible", f"phase-one margin {p1.value:.3e}"
        res.value = -np.inf
    elif p1.status == "optimal" and res.value > 1e8 * (1 + np.linalg.norm(prob.c)):
        res.status, res.message = "unbounded", "objective grows without bound on a feasible set"
        res.value = np.inf
    log.debug("solve finished: %s (%s)", res.status, res.message)
    return res


def maximize_margin(prob: SdpProblem, tol: float | None = None, cap: float | None = None) -> OptResult:
    """Largest ``t`` with every block ``>= t I`` and every scalar row ``>= t``.

    ``value`` of the result is ``t*``; ``point`` holds the decision variables
    without ``t``.
    """
    tol = gap_tolerance() if tol is None else tol
    res = _phase1(prob, tol, cap)
    t = res.point[-1]
    res.point = res.point[:-1]
    if res.status != "optimal":
        if res.value > 1e8:
            res.status, res.value = "unbounded", np.inf
        return res
    res.value = float(t)
    res.margin = prob.margin(res.point)
    return res


def feasibility_margin(prob: SdpProblem, tol: float | None = None) -> OptResult:
    """Membership margin of a problem whose coordinates are already substituted.

    ``t* >= -EPS_MEMBER`` means the fixed point lies in the projection.
    """
    return maximize_margin(prob, tol, cap=1.0)


def is_member(res: OptResult) -> bool:
    return res.status == "optimal" and res.value >= -EPS_MEMBER
