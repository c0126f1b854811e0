"""Structured lifts for constraint sets whose variables split into uncoupled blocks.

Each block ``I`` gets a moment pencil indexed by the lattice points of half
the Newton polytope of its generator support, so the pencil only carries
the monomials a block-wise SOS multiplier can actually use.
"""

from __future__ import annotations

from dataclasses import dataclass

from .momentlift import (
    LinearPencil,
    SdpRepresentation,
    VariableIndex,
    build_index,
    linearize,
    moment_pencil_from_basis,
    referenced_aux,
)
from .polycore import (
    Exponent,
    SemialgebraicSet,
    half_hull_lattice,
    sort_grlex,
    unit,
    zero_exponent,
)


@dataclass(frozen=True)
class AuxCountCheck:
    """A derived auxiliary-variable count set against an externally stated one."""

    derived: int
    claimed: int

    @property
    def agrees(self) -> bool:
        return self.derived == self.claimed

    def message(self) -> str:
        if self.agrees:
            return f"aux_count {self.derived} matches the stated count"
        return f"aux_count {self.derived} differs from the stated count {self.claimed}"


def check_aux_claim(rep: SdpRepresentation, claimed: int) -> AuxCountCheck:
    return AuxCountCheck(rep.aux_count, int(claimed))


@dataclass(frozen=True)
class Partition:
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = [i for b in self.blocks for i in b]
        if len(seen) != len(set(seen)):
            raise ValueError("partition blocks overlap")
        if sorted(seen) != list(range(len(seen))):
            raise ValueError("partition blocks must cover every variable exactly once")

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class SparseBlock:
    block: tuple[int, ...]
    F: frozenset[Exponent]
    pencil: LinearPencil


def detect_partition(S: SemialgebraicSet) -> Partition:
    """Finest partition in which every monomial of every constraint lives in one block."""
    parent = list(range(S.nvars))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in S.constraints:
        for alpha, _ in g.items():
            used = [i for i, e in enumerate(alpha) if e]
            for j in used[1:]:
                ri, rj = find(used[0]), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(S.nvars):
        groups.setdefault(find(i), []).append(i)
    blocks = sorted((tuple(v) for v in groups.values()), key=min)
    return Partition(tuple(blocks))


def _in_block(alpha: Exponent, block) -> bool:
    return all(e == 0 or i in block for i, e in enumerate(alpha))


def block_generator_support(S: SemialgebraicSet, block) -> frozenset[Exponent]:
    """Superset of the support of the block part of ``a^T x - b - sum lambda_k g_k``."""
    block = set(block)
    n = S.nvars
    pts = {zero_exponent(n)} | {unit(n, j) for j in block}
    for g in S.constraints:
        pts.update(a for a in g.support() if _in_block(a, block))
    return frozenset(pts)


def block_lattice(S: SemialgebraicSet, block) -> frozenset[Exponent]:
    block = sorted(block)
    full = block_generator_support(S, block)
    local = {tuple(a[i] for i in block) for a in full}
    out = set()
    for q in half_hull_lattice(local):
        alpha = [0] * S.nvars
        for i, e in zip(block, q):
            alpha[i] = e
        out.add(tuple(alpha))
    return frozenset(out)


def sparse_moment_pencil(F, index: VariableIndex | None = None) -> LinearPencil:
    basis = sort_grlex(F)
    pencil = moment_pencil_from_basis(basis)
    if index is not None:
        for key in pencil.mats:
            if sum(key) >= 2:
                index.slot(key)  # raises when the lattice overshoots the degree bound
    return pencil


def sparse_blocks(S: SemialgebraicSet) -> list[SparseBlock]:
    index = build_index(S)
    out = []
    for block in detect_partition(S).blocks:
        F = block_lattice(S, block)
        out.append(SparseBlock(block, F, sparse_moment_pencil(F, index)))
    return out


def build_sparse_lift(S: SemialgebraicSet, notes=()) -> SdpRepresentation:
    index = build_index(S)
    blocks = sparse_blocks(S)
    pencils = tuple(b.pencil for b in blocks)
    rows = tuple(linearize(g, index) for g in S.constraints)
    return SdpRepresentation(
        nvars=S.nvars,
        aux=referenced_aux(pencils, rows),
        pencils=pencils,
        linear_ineqs=rows,
        provenance="sparse",
        index=index,
        blocks=tuple(b.block for b in blocks),
        names=S.names,
        notes=tuple(notes),
    )
