"""Command-line interface: ``sdplift {check,lift,optimize,verify,curvature} PROBLEM.json``.

Problem files are JSON::

    {"variables": ["x1", "x2"],
     "constraints": ["1 - x1^4 - x2^4 - x1^2*x2^2 >= 0"],
     "box": [[-2, 2], [-2, 2]],
     "options": {"tol_gap": 1e-8, "claimed_aux_count": 12}}

Exit codes: 0 success, 2 parse error, 3 certification refused (or not
obtained), 4 verification failed, 5 solver indeterminate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formats import rep_to_json, sdpa_text
from .geometry import NoInteriorPointError, curvature_check, sample_boundary
from .momentlift import SdpRepresentation, build_dense_lift
from .polycore import PolynomialParseError, SemialgebraicSet, format_polynomial
from .soscheck import Refutation, SosCertificate, is_sos_concave
from .sparselift import build_sparse_lift, check_aux_claim, detect_partition
from .verify import lift_min_linear, projection_equivalence

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_REFUSED = 3
EXIT_FAIL = 4
EXIT_INDETERMINATE = 5


class ProblemError(ValueError):
    pass


@dataclass
class ProblemFile:
    set: SemialgebraicSet
    box: np.ndarray | None = None
    options: dict = field(default_factory=dict)
    source: str = ""


def _parse_box(spec, n: int) -> np.ndarray:
    box = np.asarray(spec, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (n, 1))
    if box.shape != (n, 2) or not np.all(np.isfinite(box)) or np.any(box[:, 0] >= box[:, 1]):
        raise ProblemError(f"box must give {n} finite (lo, hi) pairs with lo < hi")
    return box


def parse_box_flag(text: str, n: int) -> np.ndarray:
    """``"lo:hi"`` for every coordinate, or ``"lo:hi,lo:hi,..."``."""
    try:
        pairs = [tuple(float(v) for v in part.split(":")) for part in text.split(",")]
    except ValueError as exc:
        raise ProblemError(f"bad --box value {text!r}") from exc
    if any(len(p) != 2 for p in pairs):
        raise ProblemError(f"bad --box value {text!r}")
    return _parse_box(pairs[0] if len(pairs) == 1 else pairs, n)


def load_problem(path) -> ProblemFile:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON: {exc}") from exc
    names = data.get("variables")
    cons = data.get("constraints")
    if not names or not cons:
        raise ProblemError(f"{path}: 'variables' and 'constraints' are required")
    try:
        S = SemialgebraicSet.from_strings(cons, names)
    except PolynomialParseError as exc:
        # find the failing constraint so the location is meaningful
        for k, c in enumerate(cons):
            try:
                SemialgebraicSet.from_strings([c], names)
            except PolynomialParseError as inner:
                pos = getattr(inner, "position", None)
                caret = "" if pos is None else "\n  " + c + "\n  " + " " * pos + "^"
                raise ProblemError(f"{path}: constraint {k + 1}: {inner}{caret}") from exc
        raise ProblemError(f"{path}: {exc}") from exc
    except ValueError as exc:
        raise ProblemError(f"{path}: {exc}") from exc
    box = _parse_box(data["box"], S.nvars) if data.get("box") is not None else None
    return ProblemFile(S, box, dict(data.get("options", {})), str(path))


def parse_objective(text: str, n: int) -> np.ndarray:
    try:
        ell = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ProblemError(f"bad --objective value {text!r}") from exc
    if ell.shape != (n,):
        raise ProblemError(f"--objective needs {n} comma-separated numbers")
    return ell


def _status_line(k: int, g, names, res) -> str:
    head = f"g{k + 1} = {format_polynomial(g, names)}"
    if isinstance(res, SosCertificate):
        return f"{head}: sos-concave (certificate basis {len(res.basis)}, residual {res.residual:.1e}, min eig {res.min_eig:.2e})"
    if isinstance(res, Refutation):
        if res.witness is not None:
            x, v = (list(res.witness) + [None])[:2]
            where = f"x = {(np.round(x, 6) + 0.0).tolist()}"
            if v is not None:
                where += f", v = {(np.round(v, 6) + 0.0).tolist()}"
            return f"{head}: refuted ({res.kind}) at {where}, value {res.value:.6g}"
        return f"{head}: refuted ({res.kind}), no point witness; Gram margin {res.value:.3g}"
    return f"{head}: indeterminate ({res.reason})"


def run_check(problem: ProblemFile, out=print) -> tuple[int, list]:
    S = problem.set
    results = [is_sos_concave(g) for g in S.constraints]
    for k, (g, r) in enumerate(zip(S.constraints, results)):
        out(_status_line(k, g, S.names, r))
    part = detect_partition(S)
    out("partition: " + " ".join("{" + ",".join(S.names[i] for i in b) + "}" for b in part.blocks))
    certified = all(isinstance(r, SosCertificate) for r in results)
    if not certified:
        out("not every constraint is certified sos-concave; the lift need not be exact (try 'curvature')")
    return (EXIT_OK if certified else EXIT_REFUSED), results


def build_lift(problem: ProblemFile, mode: str, force: bool, out=print) -> tuple[int, SdpRepresentation | None]:
    if mode == "dense":
        return EXIT_OK, build_dense_lift(problem.set)
    notes = []
    if not all(isinstance(is_sos_concave(g), SosCertificate) for g in problem.set.constraints):
        if not force:
            out("refusing the sparse lift: some constraint is not certified sos-concave (use --force)")
            return EXIT_REFUSED, None
        notes.append("WARNING: sparse lift forced without sos-concavity certificates")
        out(notes[-1])
    return EXIT_OK, build_sparse_lift(problem.set, notes)


def size_summary(rep: SdpRepresentation, claimed=None) -> list[str]:
    lines = [
        f"provenance: {rep.provenance}",
        f"pencil dims: {' '.join(f'{d}x{d}' for d in rep.pencil_dims)}",
        f"aux_count: {rep.aux_count}",
        f"scalar rows: {len(rep.linear_ineqs)}",
    ]
    if rep.blocks:
        lines.append("blocks: " + " ".join("{" + ",".join(rep.names[i] for i in b) + "}" for b in rep.blocks))
    if claimed is not None:
        lines.append(check_aux_claim(rep, claimed).message())
    return lines


def cmd_check(args) -> int:
    code, _ = run_check(load_problem(args.problem))
    return code


def cmd_lift(args) -> int:
    problem = load_problem(args.problem)
    code, rep = build_lift(problem, args.mode, args.force)
    if rep is None:
        return code
    for line in size_summary(rep, problem.options.get("claimed_aux_count")):
        print(line)
    if args.out == "json":
        text = json.dumps(rep_to_json(rep), indent=1)
        suffix = ".lift.json"
    else:
        ell = parse_objective(args.objective, rep.nvars) if args.objective else np.zeros(rep.nvars)
        text = sdpa_text(rep.to_problem(-ell), f"{rep.provenance} lift, minimize {ell.tolist()} . x")
        suffix = ".dat-s"
    target = Path(args.output) if args.output else Path(args.problem).with_suffix(suffix)
    target.write_text(text)
    print(f"wrote {target}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    problem = load_problem(args.problem)
    code, rep = build_lift(problem, args.mode, args.force)
    if rep is None:
        return code
    ell = parse_objective(args.objective, rep.nvars) if args.objective else np.eye(rep.nvars)[0]
    res = lift_min_linear(rep, ell)
    x = res.point[: rep.nvars]
    report = {
        "status": res.status,
        "value": res.value,
        "x": x.tolist(),
        "margin": res.margin,
        "gap": res.gap,
        "message": res.message,
    }
    if args.json:
        print(json.dumps(report, indent=1))
    else:
        print(f"minimize {ell.tolist()} . x over the {rep.provenance} lift")
        print(f"status: {res.status}" + (f" ({res.message})" if res.message else ""))
        print(f"value: {res.value:.10g}")
        print(f"x: {np.round(x, 10).tolist()}")
        print(f"margin: {res.margin:.3e}  gap: {res.gap:.3e}")
    if res.status == "optimal":
        return EXIT_OK
    return EXIT_INDETERMINATE if res.status == "indeterminate" else EXIT_FAIL


def _box(args, problem: ProblemFile):
    if args.box:
        return parse_box_flag(args.box, problem.set.nvars)
    return problem.box


def cmd_verify(args) -> int:
    problem = load_problem(args.problem)
    code, rep = build_lift(problem, args.mode, args.force)
    if rep is None:
        return code
    report = projection_equivalence(
        rep, problem.set, _box(args, problem), nsamples=args.samples, delta=args.delta, seed=args.seed
    )
    print(json.dumps(report.to_json(), indent=1) if args.json else report.format_table())
    for note in report.notes:
        print("note:", note)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_curvature(args) -> int:
    problem = load_problem(args.problem)
    S = problem.set
    box = _box(args, problem)
    code = EXIT_OK
    reports = []
    for k in range(len(S.constraints)):
        try:
            samples = sample_boundary(S, k, args.samples, seed=args.seed, box=box)
        except NoInteriorPointError as exc:
            print(f"g{k + 1}: {exc}")
            return EXIT_FAIL
        if not samples:
            print(f"g{k + 1}: no boundary samples found in the box")
            continue
        rep = curvature_check(S, samples)
        reports.append(rep.to_json() | {"constraint": k + 1})
        if not args.json:
            shortfall = f" (requested {args.samples})" if len(samples) < args.samples else ""
            print(
                f"g{k + 1}: {rep.verdict} on {rep.samples} samples{shortfall}; "
                f"min second fundamental form {rep.min_sff:.4g}, min |grad| {rep.min_grad_norm:.4g}"
            )
        if rep.verdict != "positively-curved-on-samples":
            code = EXIT_FAIL
    if args.json:
        print(json.dumps(reports, indent=1))
    else:
        print("note: sampled necessary condition only; does not certify curvature on the whole boundary")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sdplift", description="Semidefinite lifts of sos-concave semialgebraic sets.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, lift=True):
        p.add_argument("problem", help="problem file (JSON)")
        if lift:
            p.add_argument("--mode", choices=("dense", "sparse"), default="dense")
            p.add_argument("--force", action="store_true", help="build the sparse lift without certificates")

    p = sub.add_parser("check", help="certify sos-concavity of every constraint")
    common(p, lift=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lift", help="build a lift and write it as JSON or SDPA")
    common(p)
    p.add_argument("--out", choices=("json", "sdpa"), default="json")
    p.add_argument("-o", "--output", help="output path (default: next to the problem file)")
    p.add_argument("--objective", help="objective to minimize in the SDPA export, e.g. '1,0'")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("optimize", help="minimize a linear objective over the lift")
    common(p)
    p.add_argument("--objective", help="comma-separated coefficients (default: first coordinate)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="sampled projection-equivalence report")
    common(p)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box", help="'lo:hi' or 'lo:hi,lo:hi,...'")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("curvature", help="boundary curvature diagnostics")
    common(p, lift=False)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box", help="'lo:hi' or 'lo:hi,lo:hi,...'")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_curvature)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem_opts = json.loads(Path(args.problem).read_text()).get("options", {})
    except (OSError, json.JSONDecodeError, AttributeError):
        problem_opts = {}
    # the environment variable wins over the problem file
    override = "tol_gap" in problem_opts and "SDPLIFT_TOL_GAP" not in os.environ
    if override:
        os.environ["SDPLIFT_TOL_GAP"] = str(problem_opts["tol_gap"])
    try:
        return args.func(args)
    except (ProblemError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    finally:
        if override:
            del os.environ["SDPLIFT_TOL_GAP"]


if __name__ == "__main__":
    sys.exit(main())
