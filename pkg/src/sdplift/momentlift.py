"""Dense moment-matrix lifts.

A lift is stated over the decision vector ``(x_1..x_n, aux_1..aux_M)``.
Slots are keyed by exponent tuples: the zero exponent is the constant term,
``e_i`` is the coordinate ``x_i`` and every exponent of degree >= 2 is the
auxiliary moment ``y_alpha``. Hand-built lifts may use string keys for
auxiliaries that are not moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Hashable, Mapping, Sequence

import numpy as np

from .polycore import (
    Exponent,
    Polynomial,
    SemialgebraicSet,
    add_exponents,
    grlex_key,
    monomial_basis,
    unit,
    zero_exponent,
)
from .sdpsolve import SdpProblem

Slot = Hashable


class DegreeOverflowError(ValueError):
    pass


def _is_exponent(key) -> bool:
    return isinstance(key, tuple)


def slot_sort_key(key):
    if _is_exponent(key):
        return (0, grlex_key(key))
    return (1, str(key))


def slot_name(key, names: Sequence[str] | None = None) -> str:
    """``y20``-style label for exponents (``y_2_0_10`` when an entry exceeds 9)."""
    if not _is_exponent(key):
        return str(key)
    if sum(key) == 0:
        return "1"
    if sum(key) == 1:
        i = key.index(1)
        return names[i] if names else f"x{i + 1}"
    if max(key) > 9:
        return "y_" + "_".join(map(str, key))
    return "y" + "".join(map(str, key))


@dataclass(frozen=True)
class VariableIndex:
    """Moment slots ``y_alpha`` for ``2 <= |alpha| <= degree_bound`` in graded lex order."""

    nvars: int
    degree_bound: int
    table: tuple[Exponent, ...] = field(init=False)

    def __post_init__(self):
        if self.degree_bound % 2 or self.degree_bound < 2:
            raise ValueError("degree_bound must be an even integer >= 2")
        table = tuple(a for a in monomial_basis(self.nvars, self.degree_bound) if sum(a) >= 2)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_pos", {a: k for k, a in enumerate(table)})

    @property
    def half_degree(self) -> int:
        return self.degree_bound // 2

    @property
    def size(self) -> int:
        return len(self.table)

    def slot(self, alpha: Exponent) -> int:
        """0 for the constant, ``i + 1`` for ``x_i`` and ``n + 1 + k`` for the k-th moment."""
        alpha = tuple(alpha)
        d = sum(alpha)
        if d == 0:
            return 0
        if d == 1:
            return alpha.index(1) + 1
        if alpha not in self._pos:
            raise DegreeOverflowError(f"exponent {alpha} exceeds degree bound {self.degree_bound}")
        return self.nvars + 1 + self._pos[alpha]

    def exponent(self, slot: int) -> Exponent:
        if slot == 0:
            return zero_exponent(self.nvars)
        if slot <= self.nvars:
            return unit(self.nvars, slot - 1)
        return self.table[slot - self.nvars - 1]


@dataclass(frozen=True)
class LinearPencil:
    """Affine symmetric matrix ``sum_slot value(slot) * mats[slot]`` with integer matrices."""

    dim: int
    mats: Mapping[Slot, np.ndarray]
    labels: tuple[Exponent, ...] | None = None

    def __post_init__(self):
        for key, A in self.mats.items():
            if A.shape != (self.dim, self.dim):
                raise ValueError(f"slot {key!r} matrix has shape {A.shape}, expected {self.dim}")
            if not np.array_equal(A, A.T):
                raise ValueError(f"slot {key!r} matrix is not symmetric")

    @property
    def slots(self) -> list[Slot]:
        return sorted(self.mats, key=slot_sort_key)

    def evaluate(self, values: Mapping[Slot, float]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for key, A in self.mats.items():
            out += values[key] * A
        return out

    def symbolic(self, names=None) -> list[list[str]]:
        """Entry-by-entry display, e.g. ``[['1', 'x1'], ['x1', 'y20']]``."""
        rows = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                terms = [
                    (A[i, j], slot_name(k, names)) for k, A in sorted(self.mats.items(), key=lambda kv: slot_sort_key(kv[0])) if A[i, j]
                ]
                if not terms:
                    row.append("0")
                else:
                    row.append(" + ".join(s if c == 1 else f"{c}*{s}" for c, s in terms))
            rows.append(row)
        return rows


def moment_pencil_from_basis(basis: Sequence[Exponent]) -> LinearPencil:
    """Pencil with ``A_slot[i, j] = 1`` exactly where ``basis[i] + basis[j] == slot``."""
    basis = list(basis)
    dim = len(basis)
    mats: dict[Slot, np.ndarray] = {}
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            key = add_exponents(a, b)
            if key not in mats:
                mats[key] = np.zeros((dim, dim), dtype=np.int64)
            mats[key][i, j] = 1
    return LinearPencil(dim, mats, tuple(basis))


def build_index(S: SemialgebraicSet) -> VariableIndex:
    deg = max(S.max_degree, 1)
    return VariableIndex(S.nvars, deg + (deg % 2))


def moment_pencil(index: VariableIndex) -> LinearPencil:
    return moment_pencil_from_basis(monomial_basis(index.nvars, index.half_degree))


def linearize(g: Polynomial, index: VariableIndex | None = None) -> dict[Slot, Fraction]:
    """Replace every monomial ``x^alpha`` by its slot; keys are exponents."""
    if index is not None and g.degree > index.degree_bound:
        raise DegreeOverflowError(f"degree {g.degree} exceeds the bound {index.degree_bound}")
    return dict(g.items())


@dataclass(frozen=True)
class SdpRepresentation:
    """Lifted LMI description: pencils and affine rows over ``(1, x, aux)``."""

    nvars: int
    aux: tuple[Slot, ...]
    pencils: tuple[LinearPencil, ...]
    linear_ineqs: tuple[Mapping[Slot, Fraction], ...]
    provenance: str
    index: VariableIndex | None = None
    blocks: tuple[tuple[int, ...], ...] = ()
    names: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        known = set(self.slots)
        for P in self.pencils:
            missing = set(P.mats) - known
            if missing:
                raise ValueError(f"pencil references unknown slots {sorted(missing, key=slot_sort_key)}")
        for row in self.linear_ineqs:
            missing = set(row) - known
            if missing:
                raise ValueError(f"inequality references unknown slots {sorted(missing, key=slot_sort_key)}")

    @property
    def aux_count(self) -> int:
        return len(self.aux)

    @property
    def slots(self) -> list[Slot]:
        n = self.nvars
        return [zero_exponent(n)] + [unit(n, i) for i in range(n)] + list(self.aux)

    @property
    def pencil_dims(self) -> list[int]:
        return [P.dim for P in self.pencils]

    def column_of(self) -> dict[Slot, int]:
        return {key: k for k, key in enumerate(self.slots)}

    def to_problem(self, objective=None, fixed_x=None) -> SdpProblem:
        """SDP over ``z = (x, aux)`` maximizing ``objective @ x``.

        With ``fixed_x`` the coordinates are substituted and only the
        auxiliaries remain free (the objective is then ignored).
        """
        col = self.column_of()
        n = self.nvars
        ncols = len(col)
        blocks = []
        for P in self.pencils:
            T = np.zeros((ncols, P.dim, P.dim))
            for key, A in P.mats.items():
                T[col[key]] += A
            blocks.append(T)
        rows = np.zeros((len(self.linear_ineqs), ncols))
        for r, row in enumerate(self.linear_ineqs):
            for key, c in row.items():
                rows[r, col[key]] += float(c)
        if fixed_x is None:
            c = np.zeros(ncols - 1)
            if objective is not None:
                c[:n] = np.asarray(objective, dtype=float)
            return SdpProblem(c, tuple(blocks), rows)
        x = np.asarray(fixed_x, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"fixed_x must have shape ({n},)")
        keep = [0] + list(range(n + 1, ncols))
        fold = lambda T: np.concatenate([(T[0] + np.tensordot(x, T[1 : n + 1], axes=1))[None], T[n + 1 :]])
        blocks = tuple(fold(T) for T in blocks)
        rows = np.column_stack([rows[:, 0] + rows[:, 1 : n + 1] @ x, rows[:, n + 1 :]])
        if not self.aux:
            raise ValueError("lift has no auxiliary variables to optimize over")
        return SdpProblem(np.zeros(len(keep) - 1), blocks, rows)

    def moment_values(self, x) -> dict[Slot, float]:
        """The assignment ``y_alpha := x^alpha`` (valid for moment slots only)."""
        x = np.asarray(x, dtype=float)
        out = {}
        for key in self.slots:
            if not _is_exponent(key):
                raise ValueError(f"slot {key!r} is not a moment; no canonical substitution")
            out[key] = float(np.prod(x ** np.array(key)))
        return out

    def substitution_margin(self, x) -> float:
        """Min eigenvalue / row value after substituting ``y_alpha := x^alpha``."""
        vals = self.moment_values(x)
        out = [np.linalg.eigvalsh(P.evaluate(vals))[0] for P in self.pencils]
        out += [sum(float(c) * vals[k] for k, c in row.items()) for row in self.linear_ineqs]
        return float(min(out))

    def truncated(self, drop_ineqs: bool = True) -> SdpRepresentation:
        return SdpRepresentation(
            self.nvars,
            self.aux,
            self.pencils,
            () if drop_ineqs else self.linear_ineqs,
            self.provenance,
            self.index,
            self.blocks,
            self.names,
            self.notes + ("scalar inequalities removed",),
        )


def referenced_aux(pencils, rows) -> tuple[Slot, ...]:
    keys = set()
    for P in pencils:
        keys.update(P.mats)
    for row in rows:
        keys.update(row)
    aux = [k for k in keys if not (_is_exponent(k) and sum(k) <= 1)]
    return tuple(sorted(aux, key=slot_sort_key))


def build_dense_lift(S: SemialgebraicSet) -> SdpRepresentation:
    index = build_index(S)
    pencil = moment_pencil(index)
    rows = tuple(linearize(g, index) for g in S.constraints)
    aux = referenced_aux([pencil], rows)
    assert aux == index.table
    assert len(aux) == comb(S.nvars + index.degree_bound, index.degree_bound) - S.nvars - 1
    return SdpRepresentation(
        nvars=S.nvars,
        aux=aux,
        pencils=(pencil,),
        linear_ineqs=rows,
        provenance="dense",
        index=index,
        blocks=(tuple(range(S.nvars)),),
        names=S.names,
    )


def reconstruct(pencil: LinearPencil, nvars: int) -> list[list[Polynomial]]:
    """Substitute ``y_alpha := x^alpha`` symbolically, giving a polynomial matrix."""
    out = [[Polynomial(nvars) for _ in range(pencil.dim)] for _ in range(pencil.dim)]
    for key, A in pencil.mats.items():
        mono = Polynomial.monomial(key)
        for i, j in zip(*np.nonzero(A)):
            out[i][j] = out[i][j] + mono * int(A[i, j])
    return out
