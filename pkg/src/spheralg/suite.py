"""The full identity suite behind ``spheralg verify``."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from . import analyzer as an
from .analyzer import LZ, build_J, build_K
from .opalg import L, adjoint, commutator, dot
from .params import A, B, C
from .reports import CheckRecord, RunConfig, VerificationReport, timestamp
from .sphere import (
    Basis,
    SparseOperator,
    evaluate,
    gen_matrix,
    ladder_matrix,
    quadrature_matrix,
    residual_norm,
)

SUITE_NAME = "spheralg-identities"
CLOSED_POINTS = ((Fraction(1), Fraction(0)), (Fraction(1), Fraction(1)), (Fraction(3, 2), Fraction(1)))


def _sym(id: str, ok: bool, tol: float, note: str = "", **kw) -> CheckRecord:
    # exact identities: residual is 0 on success, 1 on any surviving term
    return CheckRecord.measure(id, 0.0 if ok else 1.0, tol, note=note, **kw)


def _p(a, b) -> dict:
    return {"a": str(a), "b": str(b)}


def conjugacy_checks(cfg: RunConfig) -> list[CheckRecord]:
    der = an.derive_conjugacy_constraints()
    ok = der.solution["c"] == A - B - 2 and der.solution["d"] == B
    out = [
        _sym("conjugacy.constraints", ok, cfg.tol, note="; ".join(der.constraints.labels)),
        _sym("conjugacy.double_adjoint", der.double_adjoint_ok, cfg.tol),
        _sym("conjugacy.reverse_adjoint", der.reverse_ok, cfg.tol),
    ]
    rng = random.Random(cfg.seed)
    basis = Basis(cfg.lmax)
    worst = 0.0
    for _ in range(10):
        a, b = an.random_rational(rng), an.random_rational(rng)
        p = an._closed_params(a, b)
        kp = evaluate(build_K("+", p), basis)
        km = evaluate(build_K("-", p), basis)
        worst = max(worst, residual_norm(kp.dagger(), km, 1))
    out.append(CheckRecord.measure("conjugacy.matrix", worst, cfg.tol, lmax=cfg.lmax,
                                   note="10 random rational (a, b), c=a-b-2, d=b"))
    return out


def adjoint_checks(cfg: RunConfig) -> list[CheckRecord]:
    out = []
    for which in (1, 2):
        got = tuple(adjoint(x) for x in build_J(which))
        out.append(_sym(f"adjoint.J{which}", got == an.J_adjoint_as_printed(which), cfg.tol))
    for sign, name in (("+", "Kplus"), ("-", "Kminus")):
        out.append(_sym(f"adjoint.{name}", adjoint(build_K(sign)) == an.K_adjoint_as_printed(sign), cfg.tol))
    return out


def commutator_checks(cfg: RunConfig) -> list[CheckRecord]:
    lvals = tuple(sorted({min(12, cfg.lmax), cfg.lmax}))
    m = an.commutator_match(lmax_values=lvals, n_points=5, seed=cfg.seed, tol=cfg.tol)
    note = f"branch: {m.branch}; relations: {', '.join(m.relations_used)}"
    return [
        CheckRecord.measure("commutator.printed_form", m.numeric_max_residual, cfg.tol,
                            lmax=max(lvals), note=note),
        # without d=b the printed form cannot hold
        CheckRecord.measure("commutator.free_d_breaks", m.numeric_free_d_residual, cfg.tol,
                            expect="gt", lmax=max(lvals), note="witness a=1, b=1/3, c=-1, d=2"),
    ]


def ladder_checks(cfg: RunConfig) -> list[CheckRecord]:
    tol = min(cfg.tol, 1e-12)
    basis = Basis(cfg.lmax)
    lz = gen_matrix(5, basis)
    out = []
    params = {"a": Fraction(2, 3), "b": Fraction(-5, 4), "c": Fraction(7, 2), "d": Fraction(1, 3)}
    for sign, s in (("+", 1), ("-", -1)):
        k = build_K(sign)
        out.append(_sym(f"ladder.symbolic{sign}", not (commutator(LZ, k) - k.scale(s)), cfg.tol,
                        note="unconstrained a, b, c, d"))
        km = evaluate(build_K(sign, params), basis)
        r = residual_norm(lz.commutator(km) - km * s, None, 1)
        out.append(CheckRecord.measure(f"ladder.matrix{sign}", r, tol, lmax=cfg.lmax, parameters=params))
    return out


def closure_checks(cfg: RunConfig) -> list[CheckRecord]:
    cl = an.closure_conditions()
    expected = an.ConstraintSet.of([(A + C) * (1 - B), B * (1 - B)])
    enum = an.enumerate_cases()
    sols = sorted(tuple(sorted(s.items())) for s in enum.solutions)
    want = sorted([(("a", "1"), ("b", "0")), (("b", "1"),)])
    return [
        _sym("closure.conditions", cl.equivalent(expected), cfg.tol, note="; ".join(cl.as_text())),
        _sym("closure.solutions", sols == want, cfg.tol, note=f"solver: {enum.solutions}"),
        _sym("closure.flags_raised", bool(enum.flags), cfg.tol, note=" | ".join(enum.flags)),
    ]


def closed_algebra_checks(cfg: RunConfig) -> list[CheckRecord]:
    basis = Basis(cfg.lmax)
    lz = gen_matrix(5, basis).toarray()
    n = basis.interior_dim(2)
    out = []
    for a, b in CLOSED_POINTS:
        p = an._closed_params(a, b)
        a0, b0 = -(b + 1) ** 2, -(p["a"] + p["c"]) * (b + 1)
        # matrix-product route, independent of the symbolic commutator
        kp = evaluate(build_K("+", p), basis).toarray()
        km = evaluate(build_K("-", p), basis).toarray()
        comm = kp @ km - km @ kp
        target = 2 * float(a0) * lz + float(b0) * np.eye(basis.dim)
        r = float(np.linalg.norm((comm - target)[:n, :n]))
        out.append(CheckRecord.measure(f"closed.a={a},b={b}", r, cfg.tol, lmax=cfg.lmax,
                                       parameters={**_p(a, b), "a0": str(a0), "b0": str(b0)}))
    rep = an.classify(1, 0, lmax=cfg.lmax, numeric=False)
    out.append(_sym("classify.a=1,b=0", rep.g_entry == (-1, 0), cfg.tol, parameters=_p(1, 0),
                    note=f"G{rep.g_entry} {rep.g_algebra} via {rep.g_entry_basis}"))
    return out


def decomposition_checks(cfg: RunConfig) -> list[CheckRecord]:
    out = []
    for case in ("CASE1", "CASE2", "CASE3"):
        rep = an.case_decomposition_check(case, lmax=cfg.lmax, tol=cfg.tol)
        for chk in rep.checks:
            if case == "CASE1" and chk.variant == "constrained":
                continue  # identical parameters
            expect = "gt" if (case, chk.variant, chk.sign) == ("CASE3", "constrained", "-") else "le"
            r = 0.0 if chk.symbolic_equal else chk.residual
            note = chk.status if chk.status != "mismatch" else f"mismatch: {chk.difference}"
            out.append(CheckRecord.measure(f"decomposition.{case}.{chk.variant}{chk.sign}", r, cfg.tol,
                                           expect=expect, lmax=cfg.lmax, note=note))
        if case == "CASE3":
            out.append(CheckRecord.measure("decomposition.CASE3.printed_conjugacy",
                                           rep.conjugacy_residual["printed"], cfg.tol, expect="gt",
                                           lmax=cfg.lmax, note="printed c=-1 violates K+^dagger = K-"))
    return out


def casimir_checks(cfg: RunConfig) -> list[CheckRecord]:
    h_lmax = min(12, cfg.lmax)
    out = []
    for a, b in CLOSED_POINTS:
        rep = an.casimir_check(a, b, lmax=cfg.lmax, tol=cfg.tol, floor=cfg.casimir_floor, h_lmax=h_lmax)
        tag = f"a={a},b={b}"
        b0 = rep.raw[1]
        for x in ("K+", "K-", "Kz"):
            out.append(CheckRecord.measure(f"casimir.{tag}.invariant[C,{x}]", rep.invariant_form_residuals[x],
                                           cfg.tol, lmax=cfg.lmax, parameters=_p(a, b)))
            # the printed linear coefficient only commutes when b0 = 0
            out.append(CheckRecord.measure(f"casimir.{tag}.printed[C,{x}]", rep.residuals[x], cfg.tol,
                                           expect="le" if b0 == 0 or x == "Kz" else "gt",
                                           lmax=cfg.lmax, parameters=_p(a, b),
                                           note=f"b0={b0}"))
        out.append(CheckRecord.measure(f"casimir.{tag}.[C,H]", rep.residuals["H"], cfg.casimir_floor,
                                       expect="gt", lmax=h_lmax, parameters=_p(a, b), note="H = L^2/2"))
    return out


def oracle_checks(cfg: RunConfig) -> list[CheckRecord]:
    tol = min(cfg.tol, 1e-12)
    basis = Basis(cfg.lmax)
    out = []
    for name, f, mat in (("NZ", "cos", gen_matrix(2, basis)),
                         ("N+", "sin_eip", ladder_matrix("N+", basis)),
                         ("N-", "sin_emip", ladder_matrix("N-", basis))):
        q = quadrature_matrix(f, basis)
        r = float(np.abs(mat.toarray() - q).max())
        out.append(CheckRecord.measure(f"oracle.{name}", r, tol, lmax=cfg.lmax, note="max abs entry error"))
    # products of generator matrices, not the symbolic normal form
    g = [gen_matrix(i, basis) for i in range(6)]
    nn = g[0] @ g[0] + g[1] @ g[1] + g[2] @ g[2] - SparseOperator.identity(basis)
    nl = g[0] @ g[3] + g[1] @ g[4] + g[2] @ g[5]
    out.append(CheckRecord.measure("oracle.N.N=1", residual_norm(nn, None, 1), tol, lmax=cfg.lmax))
    out.append(CheckRecord.measure("oracle.N.L=0", residual_norm(nl, None, 1), tol, lmax=cfg.lmax))
    l2 = evaluate(dot(L, L), basis).toarray()
    ll = basis.l_values
    out.append(CheckRecord.measure("oracle.L2_diagonal", float(np.abs(l2 - np.diag(ll * (ll + 1))).max()),
                                   tol, lmax=cfg.lmax))
    return out


GROUPS = (
    conjugacy_checks,
    adjoint_checks,
    commutator_checks,
    ladder_checks,
    closure_checks,
    closed_algebra_checks,
    decomposition_checks,
    casimir_checks,
    oracle_checks,
)


def run_suite(cfg: RunConfig) -> VerificationReport:
    checks: list[CheckRecord] = []
    for group in GROUPS:
        checks.extend(group(cfg))
    return VerificationReport(SUITE_NAME, checks, cfg.echo(), timestamp=timestamp(cfg.reproducible))
