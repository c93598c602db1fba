"""Derivation chain for the gl(2,c) realization built from N, L and N x L.

Raising and lowering operators

    K+ =  i (N x L)+ + a N+ + b N+ Lz
    K- = -i (N x L)- + c N- + d N- Lz

close with Kz = Lz into G(a0, b0),

    [K+, K-] = 2 a0 Kz + b0,   [Kz, K+-] = +-K+-,

only on a small parameter set.  This module derives that set symbolically
and checks every claim against the matrix representation in
:mod:`spheralg.sphere`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
import sympy

from . import opalg
from .opalg import (
    L,
    N,
    OperatorExpr,
    adjoint,
    commutator,
    cross,
    degree_N,
    dot,
    minus,
    plus,
    substitute_params,
    to_pre_elimination,
)
from .params import A, B, C, D, I, GaussQ, ParamPoly
from .sphere import Basis, evaluate, interior_block, residual_norm

LZ = L[2]
NZ = N[2]
NXL = cross(N, L)

# (r, s, t, q1, q2, q3): N+^r N-^s NZ^t LX^q1 LY^q2 LZ^q3
PAPER_ONE = (0, 0, 0, 0, 0, 0)
PAPER_NZ2 = (0, 0, 2, 0, 0, 0)
PAPER_LZ = (0, 0, 0, 0, 0, 1)
PAPER_NZ2_LZ = (0, 0, 2, 0, 0, 1)

G_TABLE = {
    (1, 1): "o(3)+u(1) ~ u(2)+u(1)",
    (1, -1): "o(3)+u(1) ~ u(2)+u(1)",
    (-1, 1): "o(2,1)+u(1) ~ u(1,1)+u(1)",
    (-1, -1): "o(2,1)+u(1) ~ u(1,1)+u(1)",
    (1, 0): "so(3)+u(1) ~ su(2)+u(1)",
    (-1, 0): "so(2,1)+u(1) ~ su(1,1)+u(1)",
}


def _pp(x) -> ParamPoly:
    return ParamPoly.coerce(x)


def _frac(x) -> Fraction:
    if isinstance(x, GaussQ):
        if x.im:
            raise ValueError("parameters must be real")
        return x.re
    return Fraction(x)


# --- builders ----------------------------------------------------------------

def build_J(which: int, params: Mapping[str, object] | None = None) -> tuple[OperatorExpr, ...]:
    """J1 = i NxL + a N + b N Lz, J2 = -i NxL + c N + d N Lz (componentwise)."""
    params = params or {}
    if which == 1:
        sign, p, q = I, _pp(params.get("a", "a")), _pp(params.get("b", "b"))
    elif which == 2:
        sign, p, q = -I, _pp(params.get("c", "c")), _pp(params.get("d", "d"))
    else:
        raise ValueError("which must be 1 or 2")
    return tuple(v.scale(sign) + n.scale(p) + (n * LZ).scale(q) for v, n in zip(NXL, N))


def build_K(sign: str, params: Mapping[str, object] | None = None) -> OperatorExpr:
    if sign in ("+", "plus", 1):
        return plus(build_J(1, params))
    if sign in ("-", "minus", -1):
        return minus(build_J(2, params))
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def commutator_rhs_as_printed() -> OperatorExpr:
    """Right-hand side of the full [K+, K-] formula, with explicit NZ^2 terms.

    Valid only for d = b; the printed form has no d.
    """
    a, b, c = A, B, C
    nz2 = NZ * NZ
    return (
        OperatorExpr.scalar(-(a + c) * (b + 1))
        - (nz2).scale((a + c) * (1 - b))
        - (LZ.scale(1 + 2 * b + b * b) + (nz2 * LZ).scale(b * (1 - b))).scale(2)
    )


def J_adjoint_as_printed(which: int) -> tuple[OperatorExpr, ...]:
    """J1^+ = -i NxL + aN + bNLz - 2N + b[Lz, N]; J2^+ likewise with signs flipped."""
    if which == 1:
        s, p, q, shift = -I, A, B, -2
    else:
        s, p, q, shift = I, C, D, 2
    return tuple(
        v.scale(s) + n.scale(p) + (n * LZ).scale(q) + n.scale(shift) + commutator(LZ, n).scale(q)
        for v, n in zip(NXL, N)
    )


def K_adjoint_as_printed(sign: str) -> OperatorExpr:
    if sign == "+":
        return minus(NXL).scale(-I) + minus(N).scale(A - 2 - B) + (minus(N) * LZ).scale(B)
    return plus(NXL).scale(I) + plus(N).scale(C + 2 + D) + (plus(N) * LZ).scale(D)


# --- constraint sets ---------------------------------------------------------

def _normalize_relation(p: ParamPoly) -> ParamPoly:
    """Scale to integer coefficients with no common factor; lowest-degree term positive."""
    from math import gcd

    items = sorted(p.terms.items(), key=lambda kv: (sum(e for _, e in kv[0]), kv[0]))
    lead = items[0][1]
    p = p.scale(GaussQ(1) / lead)
    den = 1
    for v in p.terms.values():
        for part in (v.re, v.im):
            den = den * part.denominator // gcd(den, part.denominator)
    p = p.scale(den)
    g = 0
    for v in p.terms.values():
        g = gcd(g, gcd(abs(v.re.numerator), abs(v.im.numerator)))
    return p.scale(Fraction(1, g)) if g > 1 else p


@dataclass(frozen=True)
class ConstraintSet:
    """Polynomial relations ``poly == 0`` (deduplicated, nonzero)."""

    relations: tuple[ParamPoly, ...]
    labels: tuple[str, ...] = ()

    @classmethod
    def of(cls, polys: Sequence[ParamPoly], labels: Sequence[str] = ()) -> "ConstraintSet":
        seen: list[ParamPoly] = []
        kept_labels: list[str] = []
        for i, p in enumerate(polys):
            if not p:
                continue
            n = _normalize_relation(p)
            if n not in seen:
                seen.append(n)
                kept_labels.append(labels[i] if i < len(labels) else str(n))
        return cls(tuple(seen), tuple(kept_labels))

    def values(self, params: Mapping[str, object]) -> list[ParamPoly]:
        return [r.substitute(params, partial=True) for r in self.relations]

    def holds(self, params: Mapping[str, object]) -> bool:
        vals = self.values(params)
        return all(not v for v in vals)

    def equivalent(self, other: "ConstraintSet") -> bool:
        return set(self.relations) == set(other.relations)

    def __contains__(self, poly: ParamPoly) -> bool:
        return _normalize_relation(poly) in self.relations

    def __iter__(self):
        return iter(self.relations)

    def __len__(self):
        return len(self.relations)

    def as_text(self) -> list[str]:
        return [f"{r} = 0" for r in self.relations]


class MatchFailure(RuntimeError):
    """The adjoint of K+ does not fit the K- template."""


@dataclass(frozen=True)
class ConjugacyDerivation:
    constraints: ConstraintSet
    solution: dict[str, ParamPoly]
    adjoint_Kplus: OperatorExpr
    double_adjoint_ok: bool
    reverse_ok: bool


def derive_conjugacy_constraints() -> ConjugacyDerivation:
    """Match adjoint(K+) against the K- template and solve for (c, d)."""
    kp = build_K("+")
    adj = adjoint(kp)
    rest = adj - minus(NXL).scale(-I)
    # rest must be X N- + Y N- Lz; read X off NX and Y off NX*Lz
    x = rest.terms.get((1, 0, 0, 0, 0, 0), ParamPoly())
    y = rest.terms.get((1, 0, 0, 0, 0, 1), ParamPoly())
    if rest != minus(N).scale(x) + (minus(N) * LZ).scale(y):
        raise MatchFailure(f"adjoint(K+) is not of the K- form: remainder {rest}")
    if x.variables() & {"c", "d"} or y.variables() & {"c", "d"}:
        raise MatchFailure("matched coefficients depend on c or d")
    constraints = ConstraintSet.of([C - x, D - y], ["c = " + str(x), "d = " + str(y)])
    double_ok = adjoint(adj) == kp
    km = _subst_poly(build_K("-"), {"c": x, "d": y})
    reverse_ok = adjoint(km) == kp
    return ConjugacyDerivation(constraints, {"c": x, "d": y}, adj, double_ok, reverse_ok)


def _subst_poly(expr: OperatorExpr, values: Mapping[str, ParamPoly]) -> OperatorExpr:
    """Substitute parameters by polynomials in the other parameters."""
    out = OperatorExpr.zero()
    for m, coeff in expr.terms.items():
        total = ParamPoly()
        for pm, v in coeff.terms.items():
            term = ParamPoly.const(v)
            for name, e in pm:
                term = term * (values[name] ** e if name in values else ParamPoly.var(name) ** e)
            total = total + term
        out = out + OperatorExpr({m: total})
    return out


# --- [K+, K-] ----------------------------------------------------------------

def _left_factor_NL(diff: OperatorExpr) -> OperatorExpr | None:
    """Return f with diff == f (N.L) when diff is linear in L, else None."""
    comps = [OperatorExpr.zero() for _ in range(3)]
    for m, c in diff.terms.items():
        q = m[3:]
        if sum(q) != 1:
            return None
        k = q.index(1)
        comps[k] = comps[k] + OperatorExpr({m[:3] + (0, 0, 0): c})
    f = comps[0] * N[0] + comps[1] * N[1] + comps[2] * N[2]
    return f if f * dot(N, L) == diff else None


def random_rational(rng: random.Random, lo: int = -3, hi: int = 3, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))


@dataclass
class CommutatorMatch:
    commutator: OperatorExpr
    printed: OperatorExpr
    printed_pre_elimination: dict
    difference: OperatorExpr
    difference_d_eq_b: OperatorExpr
    pre_elimination_differences: dict
    exact: bool
    exact_with_d_eq_b: bool
    nl_factor: OperatorExpr | None
    numeric_points: list[dict] = field(default_factory=list)
    numeric_max_residual: float = 0.0
    numeric_free_d_residual: float = 0.0
    branch: str = ""
    relations_used: tuple[str, ...] = ()


BASE_RELATIONS = ("[L_i,L_j]=i eps L_k", "[L_i,N_j]=i eps N_k", "[N_i,N_j]=0", "N.N=1")


def commutator_match(
    lmax_values: Sequence[int] = (12, 16),
    n_points: int = 5,
    seed: int = 0,
    tol: float = 1e-10,
) -> CommutatorMatch:
    """Compare [K+, K-] with the printed closed form, symbolically then numerically."""
    comm = commutator(build_K("+"), build_K("-"))
    printed = commutator_rhs_as_printed()
    diff = comm - printed
    diff_db = _subst_poly(diff, {"d": B})
    pre_diff = to_pre_elimination(diff_db)
    exact = not diff
    exact_db = not diff_db
    factor = None if exact_db else _left_factor_NL(diff_db)

    rng = random.Random(seed)
    points = []
    worst = 0.0
    for _ in range(n_points):
        a, b, c = (random_rational(rng) for _ in range(3))
        vals = {"a": a, "b": b, "c": c, "d": b}
        for lmax in lmax_values:
            basis = Basis(lmax)
            r = residual_norm(
                evaluate(substitute_params(comm, vals), basis),
                evaluate(substitute_params(printed, vals), basis),
                2,
            )
            worst = max(worst, r)
            points.append({"a": str(a), "b": str(b), "c": str(c), "d": str(b), "lmax": lmax, "residual": r})
    # d != b breaks the printed form: one witness point
    vals = {"a": Fraction(1), "b": Fraction(1, 3), "c": Fraction(-1), "d": Fraction(2)}
    basis = Basis(max(lmax_values))
    free_d = residual_norm(
        evaluate(substitute_params(comm, vals), basis),
        evaluate(substitute_params(printed, vals), basis),
        2,
    )

    if exact:
        branch, rel = "exact", BASE_RELATIONS
    elif exact_db:
        branch, rel = "exact given d=b", BASE_RELATIONS + ("d=b",)
    elif worst <= tol:
        branch, rel = "modulo N.L=0 given d=b", BASE_RELATIONS + ("N.L=0", "d=b")
    else:
        branch, rel = "mismatch", BASE_RELATIONS
    return CommutatorMatch(
        commutator=comm,
        printed=printed,
        printed_pre_elimination=to_pre_elimination(printed),
        difference=diff,
        difference_d_eq_b=diff_db,
        pre_elimination_differences=pre_diff,
        exact=exact,
        exact_with_d_eq_b=exact_db,
        nl_factor=factor,
        numeric_points=points,
        numeric_max_residual=worst,
        numeric_free_d_residual=free_d,
        branch=branch,
        relations_used=rel,
    )


def closure_conditions() -> ConstraintSet:
    """The NZ^2 coefficients of the printed [K+, K-] must vanish."""
    coeffs = to_pre_elimination(commutator_rhs_as_printed())
    one = coeffs.get(PAPER_NZ2, ParamPoly())
    two = coeffs.get(PAPER_NZ2_LZ, ParamPoly())
    return ConstraintSet.of([one, two], ["(a+c)(1-b) = 0", "b(1-b) = 0"])


def closure_values(a, b) -> tuple[Fraction, Fraction]:
    """Exact (a+c)(1-b) and b(1-b) with c = a - b - 2."""
    a, b = _frac(a), _frac(b)
    c = a - b - 2
    return (a + c) * (1 - b), b * (1 - b)


# --- case enumeration --------------------------------------------------------

@dataclass(frozen=True)
class CaseLabel:
    id: str
    description: str
    conditions: dict = field(default_factory=dict, hash=False, compare=False)


PAPER_CASES = (
    CaseLabel("CASE1", "b=0, a=1", {"b": 0, "a": 1}),
    CaseLabel("CASE2", "b=1, a!=1", {"b": 1, "a!=": 1}),
    CaseLabel("CASE3", "b=1, a=1", {"b": 1, "a": 1}),
)


@dataclass
class CaseEnumeration:
    solutions: list[dict]
    labelled_cases: tuple[CaseLabel, ...]
    solver_cases: tuple[CaseLabel, ...]
    flags: list[str]


def _to_sympy(p: ParamPoly, syms: Mapping[str, sympy.Symbol]):
    expr = sympy.Integer(0)
    for pm, v in p.terms.items():
        term = sympy.Rational(v.re.numerator, v.re.denominator) + sympy.I * sympy.Rational(
            v.im.numerator, v.im.denominator
        )
        for name, e in pm:
            term *= syms[name] ** e
        expr += term
    return expr


def enumerate_cases() -> CaseEnumeration:
    closure = closure_conditions()
    cons = derive_conjugacy_constraints().solution
    syms = {n: sympy.Symbol(n, real=True) for n in "abcd"}
    eqs = [_to_sympy(_subst_poly(OperatorExpr.scalar(r), cons).terms.get(opalg.UNIT, ParamPoly()), syms)
           for r in closure]
    sols = sympy.solve(eqs, [syms["a"], syms["b"]], dict=True)
    solutions = []
    for s in sols:
        solutions.append({str(k): str(v) for k, v in s.items()})
    solutions.sort(key=lambda d: (d.get("b", ""), d.get("a", "")))

    a_sym = syms["a"]
    solver: list[CaseLabel] = []
    flags: list[str] = []
    for s in sols:
        bval = s.get(syms["b"])
        if a_sym in s:
            solver.append(CaseLabel(f"B{bval}_A{s[a_sym]}", f"b={bval}, a={s[a_sym]}",
                                    {"b": str(bval), "a": str(s[a_sym])}))
            continue
        # a free: split by whether the constant b0 = -(a+c)(b+1) vanishes
        c_expr = _to_sympy(cons["c"], syms).subs(syms["b"], bval)
        apc = sympy.expand(a_sym + c_expr)
        roots = sympy.solve(apc, a_sym)
        solver.append(CaseLabel(f"B{bval}_GENERIC", f"b={bval}, a+c={apc} != 0",
                                {"b": str(bval), "a+c": str(apc), "a!=": [str(r) for r in roots]}))
        for r in roots:
            solver.append(CaseLabel(f"B{bval}_PURE", f"b={bval}, a={r} (a+c=0)",
                                    {"b": str(bval), "a": str(r)}))
            if r != 1:
                flags.append(
                    f"b={bval} branch: a+c = {apc} vanishes at a={r}, not at a=1 as the printed case iii/3 "
                    f"labels state; at a=1, c={c_expr.subs(a_sym, 1)} and a+c={apc.subs(a_sym, 1)}"
                )
    c_case3 = sympy.simplify(_to_sympy(cons["c"], syms).subs({syms["a"]: 1, syms["b"]: 1}))
    if c_case3 != -1:
        flags.append(f"printed case 3 'a=-c=1, b=d=1' needs c=-1 but c=a-b-2 gives c={c_case3}")
    return CaseEnumeration(solutions, PAPER_CASES, tuple(solver), flags)


def labelled_case_of(a, b) -> str | None:
    a, b = _frac(a), _frac(b)
    if b == 0 and a == 1:
        return "CASE1"
    if b == 1:
        return "CASE3" if a == 1 else "CASE2"
    return None


def solver_case_of(a, b) -> str | None:
    a, b = _frac(a), _frac(b)
    if b == 0 and a == 1:
        return "B0_A1"
    if b == 1:
        return "B1_PURE" if 2 * a - 3 == 0 else "B1_GENERIC"
    return None


# --- numerics ----------------------------------------------------------------

class CommutatorFamily:
    """Interior blocks of every bilinear piece of [K+, K-] at one lmax.

    K+ = P0 + a P1 + b P2 and K- = M0 + c M1 + d M2, so the commutator is a
    fixed 3x3 combination of precomputed matrices.  Used by parameter scans.
    """

    K_DEPTH = 2

    def __init__(self, lmax: int):
        self.basis = Basis(lmax)
        p = (plus(NXL).scale(I), plus(N), plus(N) * LZ)
        m = (minus(NXL).scale(-I), minus(N), minus(N) * LZ)
        k = self.K_DEPTH
        self.blocks = np.array([[interior_block(evaluate(commutator(pi, mj), self.basis), k) for mj in m] for pi in p])
        self.kz = interior_block(evaluate(LZ, self.basis), k)
        self.one = np.eye(self.kz.shape[0])
        n = self.kz.shape[0]
        # rows: the 9 bilinear pieces, then Kz and 1
        self._flat = np.vstack([self.blocks.reshape(9, n * n), self.kz.reshape(1, -1), self.one.reshape(1, -1)])

    def _weights(self, a, b, c, d) -> np.ndarray:
        u = np.array([1.0, float(a), float(b)])
        v = np.array([1.0, float(c), float(d)])
        return np.outer(u, v).ravel()

    def commutator_block(self, a, b, c, d) -> np.ndarray:
        n = self.kz.shape[0]
        return (self._weights(a, b, c, d) @ self._flat[:9]).reshape(n, n)

    def closed_residual(self, a, b, a0, b0, c=None, d=None) -> float:
        c = _frac(a) - _frac(b) - 2 if c is None else c
        d = b if d is None else d
        w = np.concatenate([self._weights(a, b, c, d), [-2 * float(a0), -float(b0)]])
        return float(np.linalg.norm(w @ self._flat))

    def fit_pair(self, a, b) -> tuple[float, float]:
        """Least-squares (a0, b0) with [K+, K-] ~ 2 a0 Kz + b0."""
        c = _frac(a) - _frac(b) - 2
        comm = self.commutator_block(a, b, c, b).ravel()
        design = np.stack([2 * self.kz.ravel(), self.one.ravel()], axis=1)
        sol, *_ = np.linalg.lstsq(design, comm, rcond=None)
        return float(sol[0].real), float(sol[1].real)


@lru_cache(maxsize=8)
def commutator_family(lmax: int) -> CommutatorFamily:
    return CommutatorFamily(lmax)


def _closed_params(a, b) -> dict[str, Fraction]:
    a, b = _frac(a), _frac(b)
    return {"a": a, "b": b, "c": a - b - 2, "d": b}


def expr_residual(expr: OperatorExpr, params: Mapping[str, object], basis: Basis, target: OperatorExpr | None = None) -> float:
    """Interior residual of ``expr - target`` at depth degree_N."""
    diff = expr if target is None else expr - target
    diff = substitute_params(diff, params)
    k = min(degree_N(diff), basis.lmax)
    return residual_norm(evaluate(diff, basis), None, k)


# --- classification ----------------------------------------------------------

@dataclass
class AlgebraReport:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    closed: bool
    closure: dict[str, Fraction]
    raw: tuple[Fraction, Fraction] | None = None
    family: str | None = None
    rescaled: tuple[Fraction, Fraction] | None = None
    normalized: tuple[int, int] | None = None
    kz_shift: Fraction | None = None
    scale: float | None = None
    g_entry: tuple[int, int] | None = None
    g_entry_basis: str | None = None
    g_algebra: str | None = None
    labelled_case: str | None = None
    solver_case: str | None = None
    residuals: dict[str, float] = field(default_factory=dict)
    fitted: tuple[float, float] | None = None
    lmax: int = 16
    notes: list[str] = field(default_factory=list)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def classify(a, b, lmax: int = 16, numeric: bool = True) -> AlgebraReport:
    params = _closed_params(a, b)
    a, b, c, d = params["a"], params["b"], params["c"], params["d"]
    e1, e2 = closure_values(a, b)
    rep = AlgebraReport(a, b, c, d, closed=(e1 == 0 and e2 == 0),
                        closure={"(a+c)(1-b)": e1, "b(1-b)": e2}, lmax=lmax)
    rep.labelled_case = labelled_case_of(a, b)
    rep.solver_case = solver_case_of(a, b)
    a0 = -(b + 1) ** 2
    b0 = -(a + c) * (b + 1)
    if numeric:
        fam = commutator_family(lmax)
        rep.residuals["closed_commutator"] = fam.closed_residual(a, b, a0, b0)
        basis = Basis(lmax)
        kp, km = build_K("+", params), build_K("-", params)
        rep.residuals["ladder_plus"] = residual_norm(evaluate(commutator(LZ, kp) - kp, basis), None, 1)
        rep.residuals["ladder_minus"] = residual_norm(evaluate(commutator(LZ, km) + km, basis), None, 1)
        if rep.closed:
            rep.fitted = fam.fit_pair(a, b)
    if not rep.closed:
        bad = [f"{k} = {v}" for k, v in rep.closure.items() if v]
        rep.notes.append("not closed: " + ", ".join(bad))
        return rep

    rep.raw = (a0, b0)
    s = _sign(a0)
    rep.family = {-1: "su(1,1)-type", 1: "su(2)-type", 0: "oscillator/degenerate"}[s]
    if a0 != 0:
        rep.rescaled = (Fraction(s), b0 / abs(a0))
        rep.kz_shift = b0 / (2 * a0)
        rep.scale = float(abs(a0)) ** -0.5
        rep.normalized = (s, 0)
    unit = {-1, 0, 1}
    for basis_name, pair in (("raw", rep.raw), ("rescaled", rep.rescaled), ("shifted", rep.normalized)):
        if pair is not None and pair[0] in unit and pair[1] in unit and (int(pair[0]), int(pair[1])) in G_TABLE:
            rep.g_entry = (int(pair[0]), int(pair[1]))
            rep.g_entry_basis = basis_name
            rep.g_algebra = G_TABLE[rep.g_entry]
            break
    if rep.g_entry_basis == "shifted":
        rep.notes.append(
            f"constant b0={b0} removed only by shifting Kz by {rep.kz_shift}; raw algebra is G({a0},{b0})"
        )
    if rep.labelled_case == "CASE3" and a + c != 0:
        rep.notes.append(
            f"labelled case iii/3 (su(1,1), a=-c=1) but c=a-b-2={c} gives a+c={a + c}, b0={b0} != 0"
        )
    if rep.solver_case == "B1_PURE" and rep.labelled_case != "CASE3":
        rep.notes.append("a+c=0 on the b=1 branch occurs at a=3/2, which the printed labels call case ii/2")
    return rep


# --- Casimir -----------------------------------------------------------------

def casimir_operator(a0, b0, kp: OperatorExpr, km: OperatorExpr, form: str = "printed") -> OperatorExpr:
    """C = K+K- + a0 Kz^2 + beta Kz.

    ``form="printed"`` uses beta = -(a0 + b0); ``"invariant"`` uses
    beta = b0 - a0, the coefficient that commutes with K+- for any b0.
    """
    beta = -(a0 + b0) if form == "printed" else b0 - a0
    return kp * km + (LZ * LZ).scale(a0) + LZ.scale(beta)


@dataclass
class CasimirReport:
    a: Fraction
    b: Fraction
    raw: tuple[Fraction, Fraction]
    lmax: int
    h_lmax: int
    tol: float
    floor: float
    residuals: dict[str, float]
    invariant_form_residuals: dict[str, float]
    symbolic_zero: dict[str, bool]
    commutes: bool
    hamiltonian_noncommuting: bool
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.commutes and self.hamiltonian_noncommuting


def casimir_check(a, b, lmax: int = 16, tol: float = 1e-10, floor: float = 1e-6, h_lmax: int = 12) -> CasimirReport:
    params = _closed_params(a, b)
    e1, e2 = closure_values(a, b)
    if e1 or e2:
        raise ValueError(f"(a, b) = ({a}, {b}) is not closed")
    a, b, c = params["a"], params["b"], params["c"]
    a0, b0 = -(b + 1) ** 2, -(a + c) * (b + 1)
    kp, km = build_K("+", params), build_K("-", params)
    basis = Basis(lmax)
    h = dot(L, L).scale(Fraction(1, 2))

    def run(form):
        cas = casimir_operator(a0, b0, kp, km, form)
        out, zero = {}, {}
        for name, x in (("K+", kp), ("K-", km), ("Kz", LZ)):
            comm = commutator(cas, x)
            zero[name] = not comm
            out[name] = expr_residual(comm, {}, basis)
        comm_h = commutator(cas, h)
        zero["H"] = not comm_h
        out["H"] = expr_residual(comm_h, {}, Basis(h_lmax))
        return out, zero

    printed, zero = run("printed")
    invariant, _ = run("invariant")
    commutes = all(printed[k] <= tol for k in ("K+", "K-", "Kz"))
    notes = []
    if b0 != 0 and not commutes:
        notes.append(
            f"b0={b0} != 0: the printed linear coefficient -(a0+b0) does not commute; "
            f"-(a0-b0) does (max residual {max(invariant[k] for k in ('K+', 'K-', 'Kz')):.3g})"
        )
    return CasimirReport(
        a=a, b=b, raw=(a0, b0), lmax=lmax, h_lmax=h_lmax, tol=tol, floor=floor,
        residuals=printed, invariant_form_residuals=invariant, symbolic_zero=zero,
        commutes=commutes, hamiltonian_noncommuting=printed["H"] > floor, notes=notes,
    )


# --- per-case Kx, Ky decompositions -----------------------------------------

def _V(t) -> tuple[OperatorExpr, ...]:
    return tuple(v.scale(I) + n.scale(_pp(t)) for v, n in zip(NXL, N))


def _W(s) -> tuple[OperatorExpr, ...]:
    return tuple(n.scale(_pp(s)) + n * LZ for n in N)


def case_components(case: str, a=None) -> tuple[OperatorExpr, OperatorExpr]:
    """Kx, Ky exactly as printed for each case (case 2 keeps a and c symbolic)."""
    if case == "CASE1":
        v = _V(1)
        return v[1].scale(I), v[0].scale(-I)
    if case == "CASE2":
        s = (A + C).scale(Fraction(1, 2))
        t = (A - C).scale(Fraction(1, 2))
        v, w = _V(t), _W(s)
        return w[0] + v[1].scale(I), (v[0] + w[1].scale(I)).scale(-I)
    if case == "CASE3":
        v = _V(1)
        nl = tuple(n * LZ for n in N)
        return nl[0] + v[1].scale(I), v[0].scale(-I) + nl[1]
    raise ValueError(f"unknown case {case!r}")


CASE_PARAMS = {
    # as printed in the case list
    "printed": {
        "CASE1": {"a": 1, "b": 0, "c": -1, "d": 0},
        "CASE2": {"b": 1, "d": 1},
        "CASE3": {"a": 1, "b": 1, "c": -1, "d": 1},
    },
    # with c = a - b - 2, d = b imposed
    "constrained": {
        "CASE1": {"a": 1, "b": 0, "c": -1, "d": 0},
        "CASE2": {"b": 1, "d": 1, "c": A - 3},
        "CASE3": {"a": 1, "b": 1, "c": -2, "d": 1},
    },
}


@dataclass
class DecompositionCheck:
    case: str
    variant: str
    sign: str
    symbolic_equal: bool
    residual: float | None
    status: str
    difference: str


@dataclass
class DecompositionReport:
    case: str
    lmax: int
    tol: float
    checks: list[DecompositionCheck]
    conjugacy_residual: dict[str, float]
    notes: list[str] = field(default_factory=list)

    @property
    def exact_printed(self) -> bool:
        return all(c.symbolic_equal for c in self.checks if c.variant == "printed")


def case_decomposition_check(case: str, lmax: int = 16, tol: float = 1e-10, numeric_a: Sequence = (2, -1, Fraction(1, 2))) -> DecompositionReport:
    kx, ky = case_components(case)
    combos = {"+": kx + ky.scale(I), "-": kx - ky.scale(I)}
    basis = Basis(lmax)
    checks = []
    conj = {}
    notes = []
    for variant, table in CASE_PARAMS.items():
        p = {k: _pp(v) for k, v in table[case].items()}
        lhs_sub = {s: _subst_poly(e, p) for s, e in combos.items()}
        for sign, lhs in lhs_sub.items():
            target = _subst_poly(build_K(sign), p)
            diff = lhs - target
            sym = not diff
            residual = None
            if not sym:
                free = sorted(diff.parameters())
                points = [dict(zip(free, [x] * len(free))) for x in numeric_a] if free else [{}]
                residual = max(expr_residual(diff, pt, basis) for pt in points)
            status = "exact" if sym else ("numeric" if residual <= tol else "mismatch")
            checks.append(DecompositionCheck(case, variant, sign, sym, residual, status, str(diff)))
        kp = _subst_poly(build_K("+"), p)
        km = _subst_poly(build_K("-"), p)
        d = adjoint(kp) - km
        free = sorted(d.parameters())
        if "c" in free:
            # c left open by the case description; conjugacy is not claimed
            continue
        pts = [dict(zip(free, [x] * len(free))) for x in numeric_a] if free else [{}]
        conj[variant] = 0.0 if not d else max(expr_residual(d, pt, basis) for pt in pts)
    for chk in checks:
        if chk.status == "mismatch":
            notes.append(
                f"{case} {chk.variant} K{chk.sign}: Kx{'+' if chk.sign == '+' else '-'}iKy differs from K{chk.sign} "
                f"by {chk.difference} (residual {chk.residual:.6g})"
            )
    if conj.get("printed", 0.0) > tol:
        notes.append(f"{case} printed parameters violate K+^dagger = K- (residual {conj['printed']:.6g})")
    return DecompositionReport(case, lmax, tol, checks, conj, notes)
