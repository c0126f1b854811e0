"""Brute-force oracles and behavioural checks that a lift projects onto its set."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .geometry import find_interior_point, normalize_box
from .momentlift import SdpRepresentation
from .polycore import SemialgebraicSet, gradient
from .sdpsolve import EPS_PSD, OptResult, feasibility_margin, is_member, solve

GRID_POINTS = 201
GRID_CHUNK = 1 << 18
TOL_OPT = 1e-4
N_RANDOM_DIRECTIONS = 8


class EmptyFeasibleSetError(ValueError):
    pass


class Oracle:
    """Grid scan of ``S`` inside a box, reused across objective directions."""

    def __init__(self, S: SemialgebraicSet, box=None, grid: int = GRID_POINTS):
        if S.nvars > 3:
            raise ValueError("the grid oracle supports at most 3 variables")
        self.S = S
        self.box = normalize_box(box, S.nvars)
        axes = [np.linspace(lo, hi, grid) for lo, hi in self.box]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, S.nvars)
        keep = []
        for start in range(0, len(mesh), GRID_CHUNK):
            chunk = mesh[start : start + GRID_CHUNK]
            keep.append(chunk[S.slack(chunk) >= 0])
        self.feasible = np.concatenate(keep)
        if not len(self.feasible):
            raise EmptyFeasibleSetError("no grid point of the box satisfies every constraint")
        self.center = self.feasible[np.argmax(S.slack(self.feasible))]
        self._grads = [gradient(g) for g in S.constraints]

    def _feasible_toward(self, x_good, x_try) -> np.ndarray:
        """Feasible point on the segment from ``x_good`` to ``x_try``, as close to ``x_try`` as bisection allows."""
        if self.S.slack(x_try)[0] >= 0:
            return x_try
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.S.slack(x_good + mid * (x_try - x_good))[0] >= 0:
                lo = mid
            else:
                hi = mid
        return x_good + lo * (x_try - x_good)

    def minimize(self, ell) -> tuple[float, np.ndarray]:
        ell = np.asarray(ell, dtype=float)
        vals = self.feasible @ ell
        x0 = self.feasible[np.argmin(vals)]
        cons = [
            {
                "type": "ineq",
                "fun": (lambda x, g=g: float(g(x))),
                "jac": (lambda x, gr=gr: np.array([d(x) for d in gr])),
            }
            for g, gr in zip(self.S.constraints, self._grads)
        ]
        r = minimize(
            lambda x: (float(ell @ x), ell),
            x0,
            jac=True,
            method="SLSQP",
            bounds=[tuple(b) for b in self.box],
            constraints=cons,
            options={"ftol": 1e-14, "maxiter": 500},
        )
        # repair tiny violations by pulling toward the most interior grid point
        x = self._feasible_toward(self.center, np.clip(r.x, self.box[:, 0], self.box[:, 1]))
        if ell @ x > ell @ x0:
            x = x0
        return float(ell @ x), x


def oracle_min_linear(S: SemialgebraicSet, ell, box=None) -> float:
    """Minimum of ``ell . x`` over ``S`` intersected with the box (grid scan, then local refinement)."""
    return Oracle(S, box).minimize(ell)[0]


def default_panel(n: int, seed: int = 0) -> list[np.ndarray]:
    """``+e_i, -e_i`` for each axis, the normalized all-ones vector and seeded random unit vectors."""
    out = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out += [e, -e]
    out.append(np.ones(n) / np.sqrt(n))
    rng = np.random.default_rng(seed)
    for _ in range(N_RANDOM_DIRECTIONS):
        u = rng.standard_normal(n)
        out.append(u / np.linalg.norm(u))
    return out


def lift_min_linear(rep: SdpRepresentation, ell) -> OptResult:
    """Minimize ``ell . x`` over the lift; ``value`` is the minimum."""
    res = solve(rep.to_problem(-np.asarray(ell, dtype=float)))
    res.value = -res.value
    return res


def lift_contains(rep: SdpRepresentation, x) -> OptResult:
    return feasibility_margin(rep.to_problem(fixed_x=np.asarray(x, dtype=float)))


def _has_moment_slots(rep: SdpRepresentation) -> bool:
    return all(isinstance(k, tuple) for k in rep.aux)


@dataclass
class OptimaRow:
    direction: np.ndarray
    oracle: float
    lift: float
    status: str = "optimal"

    @property
    def delta(self) -> float:
        return abs(self.oracle - self.lift)


@dataclass
class EquivalenceReport:
    soundness_failures: int
    exactness_failures: int
    optima_table: list[OptimaRow]
    tol_opt: float = TOL_OPT
    inside_samples: int = 0
    outside_samples: int = 0
    requested: int = 0
    indeterminate: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def max_delta(self) -> float:
        return max((r.delta for r in self.optima_table), default=0.0)

    @property
    def passed(self) -> bool:
        return (
            self.soundness_failures == 0
            and self.exactness_failures == 0
            and self.indeterminate == 0
            and all(r.status == "optimal" and r.delta <= self.tol_opt for r in self.optima_table)
        )

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "soundness_failures": self.soundness_failures,
            "exactness_failures": self.exactness_failures,
            "indeterminate": self.indeterminate,
            "inside_samples": self.inside_samples,
            "outside_samples": self.outside_samples,
            "requested": self.requested,
            "tol_opt": self.tol_opt,
            "optima": [
                {"direction": r.direction.tolist(), "oracle": r.oracle, "lift": r.lift, "delta": r.delta, "status": r.status}
                for r in self.optima_table
            ],
            "notes": list(self.notes),
        }

    def format_table(self) -> str:
        w = 9 * len(self.optima_table[0].direction) + 2 if self.optima_table else 12
        lines = [f"{'direction':<{w}} {'oracle':>14} {'lift':>14} {'|delta|':>10}"]
        for r in self.optima_table:
            d = "(" + ", ".join(f"{v:+.3f}" for v in r.direction) + ")"
            lines.append(f"{d:<{w}} {r.oracle:>14.8f} {r.lift:>14.8f} {r.delta:>10.2e}")
        lines.append(
            f"inside {self.inside_samples}/{self.requested} (soundness failures {self.soundness_failures}), "
            f"outside {self.outside_samples}/{self.requested} (exactness failures {self.exactness_failures}), "
            f"verdict {self.verdict}"
        )
        return "\n".join(lines)


def inside_points(S: SemialgebraicSet, box, count: int, rng) -> np.ndarray:
    B = normalize_box(box, S.nvars)
    out = []
    for _ in range(200):
        pts = rng.uniform(B[:, 0], B[:, 1], size=(max(4 * count, 256), S.nvars))
        out.extend(pts[S.slack(pts) >= 0])
        if len(out) >= count:
            break
    return np.array(out[:count]).reshape(-1, S.nvars)


def outside_points(S: SemialgebraicSet, box, count: int, delta: float, rng, center=None) -> np.ndarray:
    """Points at distance ``delta`` outside ``S``.

    A random ray from an interior centre is bisected to the boundary and the
    crossing is pushed ``delta`` along the outward unit normal of the
    constraint that is active there. For convex ``S`` the crossing is then
    the nearest point of ``S``.
    """
    n = S.nvars
    B = normalize_box(box, n)
    c = find_interior_point(S, B) if center is None else np.asarray(center, dtype=float)
    grads = [gradient(g) for g in S.constraints]
    reach = 4 * float(np.linalg.norm(B[:, 1] - B[:, 0]))
    slack = lambda x: float(S.slack(x)[0])
    out = []
    for _ in range(50 * count):
        if len(out) == count:
            break
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        if slack(c + reach * u) >= 0:
            continue  # unbounded in this direction
        s = brentq(lambda t: slack(c + t * u), 0.0, reach, xtol=1e-14)
        xb = c + s * u
        k = int(np.argmin(S.values(xb)[0]))
        normal = np.array([d(xb) for d in grads[k]])
        norm = np.linalg.norm(normal)
        if norm < 1e-8:
            continue
        x = xb - delta * normal / norm
        if slack(x) < 0:
            out.append(x)
    return np.array(out).reshape(-1, n)


def projection_equivalence(
    rep: SdpRepresentation,
    S: SemialgebraicSet,
    box=None,
    nsamples: int = 100,
    delta: float = 0.05,
    seed: int = 0,
    panel=None,
    tol_opt: float = TOL_OPT,
    oracle: Oracle | None = None,
) -> EquivalenceReport:
    rng = np.random.default_rng(seed)
    notes = []
    inside = inside_points(S, box, nsamples, rng)
    soundness = indeterminate = 0
    moment = _has_moment_slots(rep)
    for x in inside:
        if moment:
            ok = rep.substitution_margin(x) >= -EPS_PSD
        else:
            res = lift_contains(rep, x)
            indeterminate += res.status != "optimal"
            ok = is_member(res)
        soundness += not ok
    outside = outside_points(S, box, nsamples, delta, rng)
    exactness = 0
    for x in outside:
        res = lift_contains(rep, x)
        if res.status != "optimal":
            indeterminate += 1
        elif is_member(res):
            exactness += 1
    if len(inside) < nsamples:
        notes.append(f"inside sampling exhausted after {len(inside)} points")
    if len(outside) < nsamples:
        notes.append(f"outside sampling exhausted after {len(outside)} points")
    oracle = oracle or Oracle(S, box)
    rows = []
    for ell in default_panel(S.nvars, seed) if panel is None else panel:
        ell = np.asarray(ell, dtype=float)
        res = lift_min_linear(rep, ell)
        rows.append(OptimaRow(ell, oracle.minimize(ell)[0], float(res.value), res.status))
    return EquivalenceReport(
        soundness_failures=soundness,
        exactness_failures=exactness,
        optima_table=rows,
        tol_opt=tol_opt,
        inside_samples=len(inside),
        outside_samples=len(outside),
        requested=nsamples,
        indeterminate=indeterminate,
        notes=notes,
    )


@dataclass
class ComparisonRow:
    direction: np.ndarray
    value_a: float
    value_b: float
    oracle: float | None

    @property
    def delta(self) -> float:
        return abs(self.value_a - self.value_b)


@dataclass
class LiftComparison:
    rows: list[ComparisonRow]
    sizes: dict

    @property
    def max_delta(self) -> float:
        return max((r.delta for r in self.rows), default=0.0)

    def to_json(self) -> dict:
        return {
            "sizes": self.sizes,
            "rows": [
                {"direction": r.direction.tolist(), "a": r.value_a, "b": r.value_b, "oracle": r.oracle}
                for r in self.rows
            ],
        }


def lift_size(rep: SdpRepresentation) -> dict:
    return {
        "provenance": rep.provenance,
        "pencil_dims": rep.pencil_dims,
        "aux_count": rep.aux_count,
        "scalar_rows": len(rep.linear_ineqs),
    }


def compare_lifts(repA, repB, S, panel=None, box=None, with_oracle: bool = True) -> LiftComparison:
    panel = default_panel(S.nvars) if panel is None else panel
    oracle = Oracle(S, box) if with_oracle and S.nvars <= 3 else None
    rows = []
    for ell in panel:
        ell = np.asarray(ell, dtype=float)
        a, b = lift_min_linear(repA, ell), lift_min_linear(repB, ell)
        rows.append(
            ComparisonRow(ell, float(a.value), float(b.value), oracle.minimize(ell)[0] if oracle else None)
        )
    return LiftComparison(rows, {"a": lift_size(repA), "b": lift_size(repB)})
