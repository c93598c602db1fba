"""The ten acceptance criteria, each at its stated tolerance.

Every test records one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the terminal summary.  Runtime limits are measured after clearing all
memoization caches.
"""

import os
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from spheralg import analyzer, dsl, opalg, sphere
from spheralg import analyzer as an
from spheralg.analyzer import LZ, build_J, build_K
from spheralg.opalg import adjoint, commutator
from spheralg.params import A, B, I
from spheralg.scan import grid, scan
from spheralg.sphere import (
    Basis,
    SparseOperator,
    evaluate,
    gen_matrix,
    ladder_matrix,
    quadrature_matrix,
    residual_norm,
)

import test_opalg

F = Fraction


def cold_caches():
    for mod in (opalg, sphere, analyzer, dsl):
        for obj in vars(mod).values():
            if hasattr(obj, "cache_clear"):
                obj.cache_clear()


def timed(fn, *args, **kw):
    cold_caches()
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_criterion_01_conjugacy_derivation(acceptance_line):
    der, dt = timed(an.derive_conjugacy_constraints)
    exact = der.solution == {"c": A - 2 - B, "d": B}
    ok = exact and dt < 1.0
    acceptance_line(1, ok, f"conjugacy -> {der.constraints.labels} exact={exact}, {dt:.3f}s (< 1s)")
    assert ok


def test_criterion_02_adjoint_identities(acceptance_line):
    def run():
        j = [tuple(adjoint(x) for x in build_J(w)) == an.J_adjoint_as_printed(w) for w in (1, 2)]
        k = [adjoint(build_K(s)) == an.K_adjoint_as_printed(s) for s in ("+", "-")]
        return j + k

    results, dt = timed(run)
    ok = all(results) and dt < 1.0
    acceptance_line(2, ok, f"J1+, J2+, K+ +, K- + termwise exact={results}, {dt:.3f}s (< 1s)")
    assert ok


def test_criterion_03_commutator_reproduction(acceptance_line):
    m, dt = timed(an.commutator_match, lmax_values=(12, 16), n_points=5, seed=0, tol=1e-10)
    npts = len({(p["a"], p["b"], p["c"]) for p in m.numeric_points})
    ok = (m.exact or m.numeric_max_residual <= 1e-10) and npts == 5 and dt < 10.0
    acceptance_line(
        3, ok,
        f"branch '{m.branch}' (relations {', '.join(m.relations_used)}); max residual "
        f"{m.numeric_max_residual:.2e} over {npts} points x lmax {{12,16}}, {dt:.2f}s (< 10s)",
    )
    assert ok


def test_criterion_04_ladder_relation(acceptance_line):
    symbolic = [commutator(LZ, build_K(s)) == build_K(s).scale(sign) for s, sign in (("+", 1), ("-", -1))]
    rng = random.Random(4)
    basis = Basis(16)
    lz = gen_matrix(5, basis)
    worst = 0.0
    for _ in range(3):
        p = {k: an.random_rational(rng) for k in "abcd"}
        for s, sign in (("+", 1), ("-", -1)):
            k = evaluate(build_K(s, p), basis)
            worst = max(worst, residual_norm(lz.commutator(k) - k * sign, None, 1))
    ok = all(symbolic) and worst <= 1e-12
    acceptance_line(4, ok, f"[Kz,K+-] = +-K+- exact for free (a,b,c,d)={symbolic}; matrix residual {worst:.2e} (<= 1e-12)")
    assert ok


def test_criterion_05_closure_manifold(acceptance_line):
    points = grid()
    rows, dt = timed(scan, points, lmax=16, tol=1e-10, jobs=1)
    flagged = {(r["a"], r["b"]) for r in rows if r["closed"]}
    expected = {(a, b) for a, b in points if b == 1 or (a, b) == (1, 0)}
    false_pos = flagged - expected
    missed = expected - flagged
    margin = min(r["residual"] for r in rows if not r["closed"])
    ok = len(points) == 101 * 101 and not false_pos and not missed and dt < 120
    cpus = os.cpu_count() or 1
    speed = "worker speedup not measurable here (1 CPU)" if cpus < 2 else "worker speedup: see test_criterion_05_worker_speedup"
    acceptance_line(
        5, ok,
        f"{len(points)} points, {len(flagged)} closed, false positives {len(false_pos)}, missed {len(missed)}, "
        f"smallest open residual {margin:.3g}; single-threaded {dt:.1f}s (< 120s); {speed}",
    )
    assert ok


def test_criterion_05_worker_speedup():
    cpus = os.cpu_count() or 1
    if cpus < 2:
        pytest.skip("needs at least 2 CPUs to measure speedup")
    jobs = min(4, cpus)
    points = grid()
    scan(points[:50], jobs=1)
    t0 = time.perf_counter()
    serial = scan(points, jobs=1)
    t1 = time.perf_counter()
    parallel = scan(points, jobs=jobs)
    t2 = time.perf_counter()
    assert [r["residual"] for r in serial] == [r["residual"] for r in parallel]
    speedup = (t1 - t0) / (t2 - t1)
    # near-linear: at least 60% parallel efficiency
    assert speedup >= 0.6 * jobs, f"speedup {speedup:.2f} with {jobs} workers"


def test_criterion_06_closed_algebra(acceptance_line):
    basis = Basis(16)
    lz = gen_matrix(5, basis).toarray()
    n = basis.interior_dim(2)
    residuals = {}
    for a, b in ((F(1), F(0)), (F(1), F(1)), (F(3, 2), F(1))):
        p = an._closed_params(a, b)
        a0, b0 = -(b + 1) ** 2, -(p["a"] + p["c"]) * (b + 1)
        kp = evaluate(build_K("+", p), basis).toarray()
        km = evaluate(build_K("-", p), basis).toarray()
        diff = kp @ km - km @ kp - (2 * float(a0) * lz + float(b0) * np.eye(basis.dim))
        residuals[(str(a), str(b))] = float(np.linalg.norm(diff[:n, :n]))
    g = an.classify(1, 0).g_entry
    ok = max(residuals.values()) <= 1e-10 and g == (-1, 0)
    acceptance_line(6, ok, f"residuals {', '.join(f'{k}: {v:.1e}' for k, v in residuals.items())} (<= 1e-10); classify(1,0) -> G{g}")
    assert ok


def test_criterion_07_casimir(acceptance_line):
    rep, dt = timed(an.casimir_check, 1, 0, lmax=16, tol=1e-10, floor=1e-6, h_lmax=12)
    comm = max(rep.residuals[k] for k in ("K+", "K-", "Kz"))
    ok = comm <= 1e-10 and rep.residuals["H"] > 1e-6 and dt < 10.0
    acceptance_line(
        7, ok,
        f"case 1: max [C,K+-,Kz] {comm:.1e} (<= 1e-10), [C,L^2/2] {rep.residuals['H']:.4g} (> 1e-6) at lmax 12, {dt:.2f}s (< 10s)",
    )
    assert ok


def test_criterion_08_oracle_integrity(acceptance_line):
    basis = Basis(20)
    errs = {}
    for name, f, mat in (("NZ", "cos", gen_matrix(2, basis)),
                         ("N+", "sin_eip", ladder_matrix("N+", basis)),
                         ("N-", "sin_emip", ladder_matrix("N-", basis))):
        errs[name] = float(np.abs(mat.toarray() - quadrature_matrix(f, basis)).max())
    g = [gen_matrix(i, basis) for i in range(6)]
    nn = residual_norm(g[0] @ g[0] + g[1] @ g[1] + g[2] @ g[2] - SparseOperator.identity(basis), None, 1)
    nl = residual_norm(g[0] @ g[3] + g[1] @ g[4] + g[2] @ g[5], None, 1)
    ok = max(errs.values()) <= 1e-12 and nn <= 1e-12 and nl <= 1e-12
    acceptance_line(8, ok, f"lmax 20 max entry error {', '.join(f'{k} {v:.1e}' for k, v in errs.items())}; "
                           f"N.N-1 {nn:.1e}, N.L {nl:.1e} on interior (<= 1e-12)")
    assert ok


def test_criterion_09_engine_properties(acceptance_line):
    test_opalg.CALLS.clear()
    for prop in (
        test_opalg.test_normal_form_idempotent,
        test_opalg.test_adjoint_involution,
        test_opalg.test_adjoint_anti_homomorphism,
        test_opalg.test_jacobi_identity,
        test_opalg.test_leibniz_rule,
        test_opalg.test_normal_form_matches_matrix_products,
    ):
        prop()  # raises on any counterexample
    counts = dict(test_opalg.CALLS)
    need = {"idempotence": 200, "involution": 200, "anti_homomorphism": 200, "jacobi": 200, "leibniz": 200, "oracle": 100}
    ok = all(counts.get(k, 0) >= v for k, v in need.items())
    acceptance_line(9, ok, f"instances {counts} (>= 200 each, oracle >= 100 at residual <= 1e-10, word length <= 6)")
    assert ok


def test_criterion_10_case_decompositions(acceptance_line):
    case1 = an.case_decomposition_check("CASE1", lmax=16)
    exact1 = all(c.symbolic_equal for c in case1.checks)
    # cases 2 and 3: numeric residual of Kx +- i Ky - K+- at lmax 16, whatever the symbolic verdict
    basis = Basis(16)
    numeric = {}
    for case in ("CASE2", "CASE3"):
        kx, ky = an.case_components(case)
        for variant, table in an.CASE_PARAMS.items():
            p = {k: an._pp(v) for k, v in table[case].items()}
            for sign, combo in (("+", kx + ky.scale(I)), ("-", kx - ky.scale(I))):
                diff = an._subst_poly(combo - build_K(sign), p)
                free = sorted(diff.parameters())
                pts = [dict.fromkeys(free, x) for x in (2, -1, F(1, 2))] if free else [{}]
                numeric[(case, variant, sign)] = max(an.expr_residual(diff, pt, basis) for pt in pts)
    reports = {c: an.case_decomposition_check(c, lmax=16) for c in ("CASE2", "CASE3")}
    mismatches = {k: v for k, v in numeric.items() if v > 1e-10}
    reported = [n for r in reports.values() for n in r.notes]
    # every numeric mismatch must show up as a reported note with its residual
    all_reported = all(any(f"{case} {variant} K{sign}" in n for n in reported) for case, variant, sign in mismatches)
    ok = exact1 and all_reported
    acceptance_line(
        10, ok,
        f"case 1 exact={exact1}; cases 2-3 numeric residuals "
        + ", ".join(f"{c}/{v}/K{s}: {r:.3g}" for (c, v, s), r in numeric.items())
        + f"; mismatches reported={all_reported}",
    )
    assert ok
