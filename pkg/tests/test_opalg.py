from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

from spheralg.opalg import (
    UNIT,
    Generator,
    L,
    N,
    OperatorExpr,
    adjoint,
    coefficient_of,
    commutator,
    cross,
    degree_N,
    dot,
    from_dict,
    from_pre_elimination,
    from_text,
    minus,
    normal_form,
    plus,
    substitute_params,
    to_dict,
    to_pre_elimination,
    to_text,
)
from spheralg.params import I, MissingParameterError, ParamPoly
from spheralg.sphere import Basis, evaluate, gen_matrix, residual_norm, SparseOperator

from strategies import exprs, raw_sums, words

NX, NY, NZ = N
LX, LY, LZ = L

# invocation counters, read by the acceptance suite
CALLS: Counter = Counter()
PROPERTY_SETTINGS = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


# --- axioms -------------------------------------------------------------------

@pytest.mark.parametrize("i,j,k", [(0, 1, 2), (1, 2, 0), (2, 0, 1)])
def test_angular_momentum_axioms(i, j, k):
    assert commutator(L[i], L[j]) == L[k].scale(I)
    assert commutator(L[i], N[j]) == N[k].scale(I)
    assert commutator(N[j], L[i]) == N[k].scale(-I)
    assert not commutator(N[i], N[j])
    assert not commutator(L[i], L[i])


def test_unit_vector_relation():
    assert dot(N, N) == OperatorExpr.scalar(1)
    assert NZ * NZ == OperatorExpr.scalar(1) - NX * NX - NY * NY


def test_n_dot_l_is_not_used_as_an_axiom():
    # N.L vanishes on the sphere, but the engine keeps it as an explicit expression
    assert dot(N, L)
    assert degree_N(dot(N, L)) == 1


def test_normal_form_orders_n_before_l():
    assert normal_form([(1, ["LX", "NY"])]) == NY * LX + NZ.scale(I)
    assert normal_form([(1, ["LY", "LX"])]) == LX * LY - LZ.scale(I)
    # NZ^2 never survives
    e = LZ * NZ * LY * NZ
    assert all(m[2] <= 1 for m in e.terms)
    assert e == normal_form([(1, ["LZ", "NZ", "LY", "NZ"])])


def test_cross_product_components():
    v = cross(N, L)
    assert v[2] == NX * LY - NY * LX
    # L x L = i L
    w = cross(L, L)
    assert w == tuple(x.scale(I) for x in L)


def test_generator_names_roundtrip():
    for g in Generator:
        assert Generator.coerce(g.name) is g
        assert Generator.coerce(int(g)) is g


def test_parameter_substitution():
    e = NX.scale(ParamPoly.var("a")) + LZ.scale(ParamPoly.var("b"))
    assert substitute_params(e, {"a": 2, "b": Fraction(1, 2)}) == NX.scale(2) + LZ.scale(Fraction(1, 2))
    with pytest.raises(MissingParameterError):
        substitute_params(e, {"a": 1})
    partial = substitute_params(e, {"a": 1}, partial=True)
    assert partial.parameters() == {"b"}


def test_ladder_combinations():
    assert commutator(LZ, plus(N)) == plus(N)
    assert commutator(LZ, minus(N)) == -minus(N)
    assert commutator(plus(L), minus(L)) == LZ.scale(2)


def test_coefficient_conventions():
    e = NZ * NZ * LZ
    assert coefficient_of(e, (0, 0, 0, 0, 0, 1)) == ParamPoly.const(1)
    assert coefficient_of(e, (2, 0, 0, 0, 0, 1)) == ParamPoly.const(-1)
    assert coefficient_of(e, (0, 0, 2, 0, 0, 1), convention="pre_elimination") == ParamPoly.const(1)
    assert coefficient_of(e, UNIT) == ParamPoly()


def test_text_format_examples():
    assert to_text(OperatorExpr.zero()) == "0"
    assert to_text(commutator(LZ, NX)) == "(1i) NY"
    assert from_text("(3/2*a - 1i) NX*LZ + (1) 1") == NX * LZ * (ParamPoly.var("a").scale(Fraction(3, 2)) - ParamPoly.const(I)) + 1


# --- properties -------------------------------------------------------------

@PROPERTY_SETTINGS
@given(raw_sums(max_len=4))
def test_normal_form_idempotent(raw):
    CALLS["idempotence"] += 1
    once = normal_form(raw)
    again = normal_form([(c, [g for g in _word(m)]) for m, c in once.terms.items()])
    assert again == once


def _word(m):
    out = []
    for g, e in enumerate(m):
        out += [g] * e
    return out


@PROPERTY_SETTINGS
@given(exprs(params=True))
def test_adjoint_involution(a):
    CALLS["involution"] += 1
    assert adjoint(adjoint(a)) == a


@PROPERTY_SETTINGS
@given(exprs(max_len=2, params=True), exprs(max_len=2, params=True))
def test_adjoint_anti_homomorphism(a, b):
    CALLS["anti_homomorphism"] += 1
    assert adjoint(a * b) == adjoint(b) * adjoint(a)
    assert adjoint(a + b) == adjoint(a) + adjoint(b)


@PROPERTY_SETTINGS
@given(exprs(max_len=2, max_terms=2), exprs(max_len=2, max_terms=2), exprs(max_len=2, max_terms=2))
def test_jacobi_identity(a, b, c):
    CALLS["jacobi"] += 1
    total = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert not total


@PROPERTY_SETTINGS
@given(exprs(max_len=2, max_terms=2), exprs(max_len=2, max_terms=2), exprs(max_len=2, max_terms=2))
def test_leibniz_rule(a, b, c):
    CALLS["leibniz"] += 1
    assert commutator(a, b * c) == commutator(a, b) * c + b * commutator(a, c)


@settings(max_examples=100, deadline=None)
@given(exprs(max_len=2), exprs(max_len=2), exprs(max_len=2))
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=100, deadline=None)
@given(exprs(params=True))
def test_serialization_roundtrips(a):
    assert from_text(to_text(a)) == a
    assert from_dict(to_dict(a)) == a
    assert from_pre_elimination(to_pre_elimination(a)) == a


# --- symbolic vs matrix oracle --------------------------------------------

ORACLE_LMAX = 8
_GEN = {}


def _gen(g):
    if g not in _GEN:
        _GEN[g] = gen_matrix(g, Basis(ORACLE_LMAX))
    return _GEN[g]


def raw_matrix(raw, basis):
    """Sum of products of generator matrices, never touching the rewrite engine."""
    out = SparseOperator.zeros(basis)
    for coeff, word in raw:
        m = SparseOperator.identity(basis)
        for g in word:
            m = m @ _gen(int(g))
        out = out + m * complex(coeff)
    return out


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(raw_sums(max_len=6, max_terms=3))
def test_normal_form_matches_matrix_products(raw):
    CALLS["oracle"] += 1
    basis = Basis(ORACLE_LMAX)
    k = max(sum(1 for g in w if g < 3) for _, w in raw)
    symbolic = evaluate(normal_form(raw), basis)
    assert residual_norm(symbolic, raw_matrix(raw, basis), k) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(words(3))
def test_truncation_is_exact_only_on_the_interior(word):
    basis = Basis(4)
    k = sum(1 for g in word if g < 3)
    sym = evaluate(normal_form([(1, word)]), basis)
    raw = raw_matrix([(1, word)], Basis(ORACLE_LMAX))
    # compare on basis lmax=4 by slicing the larger product
    n = basis.dim
    diff = sym.toarray() - raw.toarray()[:n, :n]
    m = basis.interior_dim(k)
    assert np.linalg.norm(diff[:m, :m]) <= 1e-10
