"""JSON serialization of lifts and SDPA sparse (``.dat-s``) export/import.

SDPA states ``min c^T x s.t. sum_i F_i x_i - F_0 >= 0``; the LMI form used
here is ``max c^T z s.t. F_0 + sum_i z_i F_i >= 0``, so the objective and the
constant matrices change sign on the way out and back in.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path

import numpy as np

from .momentlift import LinearPencil, SdpRepresentation, VariableIndex
from .sdpsolve import SdpProblem

FORMAT_VERSION = 1


def _slot_out(key):
    return list(key) if isinstance(key, tuple) else key


def _slot_in(obj):
    return tuple(obj) if isinstance(obj, list) else obj


def rep_to_json(rep: SdpRepresentation) -> dict:
    return {
        "format": "sdplift-lift",
        "version": FORMAT_VERSION,
        "nvars": rep.nvars,
        "names": list(rep.names),
        "provenance": rep.provenance,
        "degree_bound": rep.index.degree_bound if rep.index else None,
        "blocks": [list(b) for b in rep.blocks],
        "aux": [_slot_out(k) for k in rep.aux],
        "pencils": [
            {
                "dim": P.dim,
                "labels": [list(a) for a in P.labels] if P.labels else None,
                "terms": [{"slot": _slot_out(k), "matrix": P.mats[k].tolist()} for k in P.slots],
            }
            for P in rep.pencils
        ],
        "linear_ineqs": [[[_slot_out(k), str(c)] for k, c in row.items()] for row in rep.linear_ineqs],
        "notes": list(rep.notes),
    }


def rep_from_json(data: dict) -> SdpRepresentation:
    if data.get("format") != "sdplift-lift":
        raise ValueError("not a serialized lift")
    pencils = tuple(
        LinearPencil(
            p["dim"],
            {_slot_in(t["slot"]): np.array(t["matrix"], dtype=np.int64) for t in p["terms"]},
            tuple(tuple(a) for a in p["labels"]) if p.get("labels") else None,
        )
        for p in data["pencils"]
    )
    rows = tuple({_slot_in(k): Fraction(c) for k, c in row} for row in data["linear_ineqs"])
    db = data.get("degree_bound")
    return SdpRepresentation(
        nvars=data["nvars"],
        aux=tuple(_slot_in(k) for k in data["aux"]),
        pencils=pencils,
        linear_ineqs=rows,
        provenance=data["provenance"],
        index=VariableIndex(data["nvars"], db) if db else None,
        blocks=tuple(tuple(b) for b in data.get("blocks", [])),
        names=tuple(data.get("names", [])),
        notes=tuple(data.get("notes", [])),
    )


def save_rep(rep: SdpRepresentation, path) -> None:
    Path(path).write_text(json.dumps(rep_to_json(rep), indent=1))


def load_rep(path) -> SdpRepresentation:
    return rep_from_json(json.loads(Path(path).read_text()))


def _num(v: float) -> str:
    return f"{v:.17g}"


def sdpa_text(prob: SdpProblem, title: str = "") -> str:
    """SDPA sparse layout: LMI blocks first, then one diagonal block for the scalar rows."""
    m = prob.nvars
    sizes = [b.shape[1] for b in prob.blocks]
    if len(prob.ineqs):
        sizes.append(-len(prob.ineqs))
    lines = [f'"{title}"'] if title else []
    lines += [str(m), str(len(sizes)), " ".join(map(str, sizes)), " ".join(_num(0.0 - v) for v in prob.c)]
    for k in range(m + 1):
        sign = -1.0 if k == 0 else 1.0
        for bno, b in enumerate(prob.blocks, start=1):
            A = b[k]
            for i, j in zip(*np.nonzero(np.triu(A))):
                lines.append(f"{k} {bno} {i + 1} {j + 1} {_num(sign * A[i, j])}")
        if len(prob.ineqs):
            bno = len(prob.blocks) + 1
            for r in np.nonzero(prob.ineqs[:, k])[0]:
                lines.append(f"{k} {bno} {r + 1} {r + 1} {_num(sign * prob.ineqs[r, k])}")
    return "\n".join(lines) + "\n"


def write_sdpa(prob: SdpProblem, path, title: str = "") -> None:
    Path(path).write_text(sdpa_text(prob, title))


def parse_sdpa(text: str) -> SdpProblem:
    body = [ln for ln in text.splitlines() if ln.strip() and ln.lstrip()[0] not in '"*']
    tokens = lambda ln: [t for t in re.split(r"[\s,{}()]+", ln.strip()) if t]
    m = int(tokens(body[0])[0])
    nblocks = int(tokens(body[1])[0])
    sizes = [int(t) for t in tokens(body[2])[:nblocks]]
    c = -np.array([float(t) for t in tokens(body[3])[:m]])
    mats = [np.zeros((m + 1, abs(s), abs(s))) for s in sizes]
    for ln in body[4:]:
        k, b, i, j, v = tokens(ln)[:5]
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        if k == 0:
            v = -v
        mats[b][k, i, j] = mats[b][k, j, i] = v
    blocks = tuple(M for M, s in zip(mats, sizes) if s > 0)
    rows = [np.stack([np.diagonal(M[k]) for k in range(m + 1)], axis=1) for M, s in zip(mats, sizes) if s < 0]
    ineqs = np.vstack(rows) if rows else np.zeros((0, m + 1))
    return SdpProblem(c, blocks, ineqs)


def read_sdpa(path) -> SdpProblem:
    return parse_sdpa(Path(path).read_text())
