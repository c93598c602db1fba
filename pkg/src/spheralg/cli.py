"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import analyzer as an
from .dsl import DSLError, lower, parse, substitute_ast
from .opalg import OperatorExpr, degree_N, to_dict, to_text
from .params import MissingParameterError
from .reports import (
    ConfigError,
    RunConfig,
    dumps,
    envelope,
    jsonable,
    parse_params,
    parse_range,
    scan_csv,
)
from .scan import DEFAULT_RANGE, grid, scan, summarize
from .sphere import Basis, LmaxTooSmallError, SparseOperator, evaluate
from .suite import run_suite

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--lmax", type=int, default=16, help="basis cutoff (default 16)")
    g.add_argument("--tol", type=float, default=1e-10, help="residual tolerance (default 1e-10)")
    g.add_argument("--floor", type=float, default=1e-6, help="Casimir/Hamiltonian non-commutation floor")
    g.add_argument("--format", choices=("text", "json", "csv"), default="text")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jobs", type=int, default=1, help="worker processes for scans")
    g.add_argument("--reproducible", action="store_true", help="omit timestamps from reports")
    g.add_argument("--output", metavar="FILE", help="write the report here instead of stdout")

    p = _Parser(prog="spheralg", description="Verify the N, L, NxL operator algebra on the sphere.")
    p.add_argument("--version", action="version", version=f"spheralg {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("verify", parents=[common], help="run the full identity suite")
    sub.add_parser("derive-constraints", parents=[common], help="conjugacy and closure derivations")

    s = sub.add_parser("scan", parents=[common], help="closure scan over an (a, b) grid")
    s.add_argument("--a-range", default="-5:5:1/10", help="start:stop:step, stop inclusive")
    s.add_argument("--b-range", default="-5:5:1/10")

    for name, help in (("classify", "classify the algebra at (a, b)"), ("casimir", "Casimir checks at (a, b)")):
        c = sub.add_parser(name, parents=[common], help=help)
        c.add_argument("--a", type=_fraction, required=True)
        c.add_argument("--b", type=_fraction, required=True)

    for name, help in (("repr", "sparse matrix dump of an expression"), ("eval", "normal form of an expression")):
        c = sub.add_parser(name, parents=[common], help=help)
        src = c.add_mutually_exclusive_group(required=True)
        src.add_argument("--expr", help="DSL expression")
        src.add_argument("--script", metavar="FILE", help="DSL script file")
        c.add_argument("--params", help="parameter values, e.g. a=1,b=0,c=-1,d=0")
        if name == "repr":
            c.add_argument("--interior", action="store_true",
                           help="restrict to the interior block at depth N-degree")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=ns.command,
        lmax=ns.lmax,
        tol=ns.tol,
        casimir_floor=ns.floor,
        format=ns.format,
        seed=ns.seed,
        jobs=ns.jobs,
        reproducible=ns.reproducible,
        output=ns.output,
        a=getattr(ns, "a", None),
        b=getattr(ns, "b", None),
        expr=getattr(ns, "expr", None),
        script=getattr(ns, "script", None),
        params=parse_params(getattr(ns, "params", None)),
        interior=getattr(ns, "interior", False),
    )
    if ns.command == "scan":
        cfg.a_range = parse_range(ns.a_range)
        cfg.b_range = parse_range(ns.b_range)
    return cfg.validate()


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _json(kind: str, payload, cfg: RunConfig) -> str:
    return dumps(envelope(kind, payload, cfg))


# --- commands ----------------------------------------------------------------

def cmd_verify(cfg: RunConfig) -> int:
    rep = run_suite(cfg)
    if cfg.format == "json":
        _emit(dumps(rep.to_dict()), cfg)
    elif cfg.format == "csv":
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("id", "status", "residual", "tolerance", "expect", "lmax", "note"))
        for c in rep.checks:
            w.writerow((c.id, c.status, f"{c.residual:.17g}", f"{c.tolerance:.17g}", c.expect,
                        "" if c.lmax is None else c.lmax, c.note))
        _emit(buf.getvalue(), cfg)
    else:
        _emit(rep.to_text(), cfg)
    return EXIT_PASS if rep.status == "pass" else EXIT_FAIL


def cmd_derive(cfg: RunConfig) -> int:
    der = an.derive_conjugacy_constraints()
    lvals = tuple(sorted({min(12, cfg.lmax), cfg.lmax}))
    match = an.commutator_match(lmax_values=lvals, seed=cfg.seed, tol=cfg.tol)
    closure = an.closure_conditions()
    cases = an.enumerate_cases()
    ok = der.double_adjoint_ok and der.reverse_ok and match.branch != "mismatch" and match.numeric_max_residual <= cfg.tol
    payload = {
        "conjugacy": {
            "constraints": der.constraints.as_text(),
            "solution": der.solution,
            "adjoint_Kplus": der.adjoint_Kplus,
            "double_adjoint_ok": der.double_adjoint_ok,
            "reverse_ok": der.reverse_ok,
        },
        "commutator": {
            "branch": match.branch,
            "relations_used": list(match.relations_used),
            "difference_d_eq_b": match.difference_d_eq_b,
            "nl_factor": match.nl_factor,
            "numeric_max_residual": match.numeric_max_residual,
            "numeric_free_d_residual": match.numeric_free_d_residual,
            "points": match.numeric_points,
        },
        "closure": closure.as_text(),
        "cases": {
            "solutions": cases.solutions,
            "labelled_cases": [c.id + ": " + c.description for c in cases.labelled_cases],
            "solver_cases": [c.id + ": " + c.description for c in cases.solver_cases],
            "flags": cases.flags,
        },
        "status": "pass" if ok else "fail",
    }
    if cfg.format == "json":
        _emit(_json("derive-constraints", payload, cfg), cfg)
    else:
        lines = ["conjugacy constraints (K+^dagger = K-):"]
        lines += [f"  {t}" for t in der.constraints.labels]
        lines.append(f"  double adjoint: {'ok' if der.double_adjoint_ok else 'FAILED'}; "
                     f"reverse: {'ok' if der.reverse_ok else 'FAILED'}")
        lines.append(f"[K+, K-] vs printed form: {match.branch}")
        lines.append(f"  relations: {', '.join(match.relations_used)}")
        if match.nl_factor is not None:
            lines.append(f"  difference = ({to_text(match.nl_factor)}) * (N.L)")
        lines.append(f"  max interior residual (d=b, lmax {lvals}): {match.numeric_max_residual:.3e}")
        lines.append(f"  residual with d != b: {match.numeric_free_d_residual:.3e}")
        lines.append("closure conditions:")
        lines += [f"  {t}" for t in closure.labels]
        lines.append(f"solutions: {cases.solutions}")
        lines.append("solver cases: " + "; ".join(c.id + " (" + c.description + ")" for c in cases.solver_cases))
        lines += [f"flag: {f}" for f in cases.flags]
        lines.append(f"status: {payload['status']}")
        _emit("\n".join(lines) + "\n", cfg)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_scan(cfg: RunConfig) -> int:
    points = grid(cfg.a_range or DEFAULT_RANGE, cfg.b_range or DEFAULT_RANGE)
    rows = scan(points, lmax=cfg.lmax, tol=cfg.tol, jobs=cfg.jobs)
    summary = summarize(rows)
    if cfg.format == "csv":
        _emit(scan_csv(rows), cfg)
    elif cfg.format == "json":
        _emit(_json("scan", {"summary": summary, "rows": rows}, cfg), cfg)
    else:
        lines = [f"{summary['points']} points, {summary['closed']} closed "
                 f"(exact closure agrees: {summary['agree']})"]
        for r in rows:
            if r["closed"]:
                lines.append(f"  a={r['a']} b={r['b']} c={r['c']} d={r['d']} residual={r['residual']:.3e} "
                             f"{r['labelled_case']} {r['solver_case']}")
        if summary["min_open_residual"] is not None:
            lines.append(f"smallest residual among open points: {summary['min_open_residual']:.6g}")
        _emit("\n".join(lines) + "\n", cfg)
    return EXIT_PASS


def _render_classify(rep: an.AlgebraReport) -> str:
    lines = [f"(a, b, c, d) = ({rep.a}, {rep.b}, {rep.c}, {rep.d})"]
    lines.append("closure: " + ", ".join(f"{k} = {v}" for k, v in rep.closure.items()))
    if not rep.closed:
        lines.append("not closed")
    else:
        lines.append(f"raw (a0, b0) = ({rep.raw[0]}, {rep.raw[1]})  family: {rep.family}")
        if rep.rescaled is not None:
            lines.append(f"rescaled (a0, b0) = ({rep.rescaled[0]}, {rep.rescaled[1]})  "
                         f"normalized = {rep.normalized} after Kz -> Kz + {rep.kz_shift}")
        if rep.g_entry is not None:
            lines.append(f"G{rep.g_entry} = {rep.g_algebra}  (matched on {rep.g_entry_basis} pair)")
        lines.append(f"case: labelled {rep.labelled_case}, solver {rep.solver_case}")
        if rep.fitted is not None:
            lines.append(f"fitted (a0, b0) from matrices: ({rep.fitted[0]:.12g}, {rep.fitted[1]:.12g})")
    for k, v in rep.residuals.items():
        lines.append(f"residual {k}: {v:.3e}")
    lines += [f"note: {n}" for n in rep.notes]
    return "\n".join(lines) + "\n"


def cmd_classify(cfg: RunConfig) -> int:
    rep = an.classify(cfg.a, cfg.b, lmax=cfg.lmax)
    if cfg.format == "json":
        _emit(_json("classify", rep, cfg), cfg)
    else:
        _emit(_render_classify(rep), cfg)
    return EXIT_PASS


def cmd_casimir(cfg: RunConfig) -> int:
    try:
        rep = an.casimir_check(cfg.a, cfg.b, lmax=cfg.lmax, tol=cfg.tol, floor=cfg.casimir_floor,
                               h_lmax=min(12, cfg.lmax))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.format == "json":
        _emit(_json("casimir", {**jsonable(rep), "passed": rep.passed}, cfg), cfg)
    else:
        lines = [f"(a, b) = ({rep.a}, {rep.b}), raw (a0, b0) = ({rep.raw[0]}, {rep.raw[1]})"]
        for k in ("K+", "K-", "Kz"):
            lines.append(f"[C, {k}]: {rep.residuals[k]:.3e} (tol {rep.tol:g}); "
                         f"invariant form {rep.invariant_form_residuals[k]:.3e}")
        lines.append(f"[C, L^2/2] at lmax {rep.h_lmax}: {rep.residuals['H']:.3e} (floor {rep.floor:g})")
        lines += [f"note: {n}" for n in rep.notes]
        lines.append("PASS" if rep.passed else "FAIL")
        _emit("\n".join(lines) + "\n", cfg)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _load_value(cfg: RunConfig):
    source = cfg.expr if cfg.expr is not None else Path(cfg.script).read_text()
    script = parse(source)
    if cfg.params:
        script = substitute_ast(script, cfg.params)
    return lower(script)


def cmd_repr(cfg: RunConfig) -> int:
    value = _load_value(cfg)
    if not isinstance(value, OperatorExpr):
        raise UsageError("repr needs a scalar operator, not a vector")
    basis = Basis(cfg.lmax)
    mat = evaluate(value, basis)
    if cfg.interior:
        k = degree_N(value)
        n = basis.interior_dim(k)
        mask = mat.matrix.copy().tolil()
        mask[n:, :] = 0
        mask[:, n:] = 0
        mat = SparseOperator(basis, mask.tocsr())
    if cfg.format == "json":
        entries = [{"row": list(r), "col": list(c), "re": v.real, "im": v.imag} for r, c, v in mat.entries()]
        _emit(_json("repr", {"lmax": cfg.lmax, "entries": entries}, cfg), cfg)
    else:
        _emit(mat.dump(diagonal=True), cfg)
    return EXIT_PASS


def cmd_eval(cfg: RunConfig) -> int:
    value = _load_value(cfg)
    parts = value if isinstance(value, tuple) else (value,)
    if cfg.format == "json":
        _emit(_json("eval", [to_dict(p) for p in parts], cfg), cfg)
    else:
        _emit("\n".join(to_text(p) for p in parts) + "\n", cfg)
    return EXIT_PASS


HANDLERS = {
    "verify": cmd_verify,
    "derive-constraints": cmd_derive,
    "scan": cmd_scan,
    "classify": cmd_classify,
    "casimir": cmd_casimir,
    "repr": cmd_repr,
    "eval": cmd_eval,
}


# values that may legitimately start with "-" (negative rationals, ranges, expressions)
DASH_VALUE_FLAGS = {"--a", "--b", "--a-range", "--b-range", "--expr"}


def _attach_dash_values(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok in DASH_VALUE_FLAGS and nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = parser.parse_args(_attach_dash_values(argv))
    try:
        cfg = config_from_args(ns)
        return HANDLERS[ns.command](cfg)
    except (ConfigError, UsageError, LmaxTooSmallError, MissingParameterError, OSError) as exc:
        print(f"spheralg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DSLError as exc:
        print(f"spheralg: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
