from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .parse import canonical_names, check_names, parse_constraint, parse_polynomial
from .polynomial import Polynomial


@dataclass(frozen=True)
class SemialgebraicSet:
    """The set {x : g_k(x) >= 0 for every constraint g_k}."""

    nvars: int
    constraints: tuple[Polynomial, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise ValueError("a semialgebraic set needs at least one constraint")
        for g in self.constraints:
            if g.nvars != self.nvars:
                raise ValueError("constraint variable count differs from the set's")
        names = tuple(self.names) or tuple(canonical_names(self.nvars))
        if len(names) != self.nvars:
            raise ValueError("names must match nvars")
        check_names(names)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_strings(cls, constraints, names) -> SemialgebraicSet:
        """Build from expressions; each is either ``"g"`` (read as g >= 0) or an inequality."""
        names = check_names(names)
        polys = [
            parse_constraint(c, names) if ("=" in c) else parse_polynomial(c, names)
            for c in constraints
        ]
        return cls(len(names), tuple(polys), tuple(names))

    @property
    def max_degree(self) -> int:
        return max(g.degree for g in self.constraints)

    def with_constraints(self, extra) -> SemialgebraicSet:
        return SemialgebraicSet(self.nvars, self.constraints + tuple(extra), self.names)

    def values(self, points) -> np.ndarray:
        """Constraint values, shape ``(k, m)`` for a batch of ``k`` points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.column_stack([g(pts) for g in self.constraints])

    def slack(self, points) -> np.ndarray:
        """Smallest constraint value per point."""
        return self.values(points).min(axis=1)

    def contains(self, point, tol: float = 0.0) -> bool:
        return bool(self.slack(point)[0] >= -tol)
