import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spheralg.opalg import L, N, OperatorExpr, dot
from spheralg.params import ParamPoly
from spheralg.sphere import (
    Basis,
    BasisMismatchError,
    InsufficientGridError,
    LmaxTooSmallError,
    QuadratureGrid,
    SparseOperator,
    evaluate,
    gen_matrix,
    interior_projector,
    ladder_matrix,
    ladder_structure,
    parse_dump,
    quadrature_element,
    quadrature_matrix,
    residual_norm,
)
from spheralg.params import MissingParameterError


def test_basis_indexing():
    b = Basis(3)
    assert b.dim == 16
    assert [b.index(*s) for s in b.states()] == list(range(16))
    assert b.state(5) == (2, -1)
    assert b.interior_dim(1) == 9
    with pytest.raises(IndexError):
        b.index(4, 0)


def test_lz_and_l2_diagonal():
    b = Basis(2)
    assert np.allclose(np.diag(gen_matrix(5, b).toarray()), b.m_values)
    l2 = evaluate(dot(L, L), b).toarray()
    assert np.allclose(l2, np.diag(b.l_values * (b.l_values + 1)))


def test_nz_first_coupling():
    # <1,0|cos(theta)|0,0> = 1/sqrt(3)
    b = Basis(1)
    assert gen_matrix(2, b).element((1, 0), (0, 0)) == pytest.approx(0.5773502692)


@pytest.mark.parametrize("lmax", [1, 4, 20])
def test_generators_match_quadrature(lmax):
    b = Basis(lmax)
    for f, mat in (("cos", gen_matrix(2, b)), ("sin_eip", ladder_matrix("N+", b)), ("sin_emip", ladder_matrix("N-", b))):
        assert np.abs(mat.toarray() - quadrature_matrix(f, b)).max() <= 1e-12


def test_single_quadrature_element():
    grid = QuadratureGrid.for_lmax(3)
    assert quadrature_element("cos", (1, 0), (0, 0), grid) == pytest.approx(3 ** -0.5)
    assert quadrature_element("sin_eip", (1, 1), (0, 0), grid) == pytest.approx(-(2 / 3) ** 0.5)


def test_coarse_grid_is_rejected():
    with pytest.raises(InsufficientGridError):
        quadrature_element("cos", (5, 0), (5, 0), QuadratureGrid(5, 3, 3))
    with pytest.raises(InsufficientGridError):
        quadrature_matrix("cos", Basis(6), QuadratureGrid.for_lmax(2))


@pytest.mark.parametrize("g", range(6))
def test_generators_are_hermitian(g):
    m = gen_matrix(g, Basis(5)).toarray()
    assert np.allclose(m, m.conj().T)


def test_ladder_operators_shift_m():
    b = Basis(6)
    for name, shift in (("L+", 1), ("L-", -1), ("N+", 1), ("N-", -1)):
        rep = ladder_structure(ladder_matrix(name, b))
        assert rep.shifts == {shift}
        assert rep.leakage == 0.0
    assert ladder_structure(gen_matrix(2, b)).shifts == {0}


@pytest.mark.parametrize("i,j,k", [(0, 1, 2), (1, 2, 0), (2, 0, 1)])
def test_axioms_hold_on_matrices(i, j, k):
    b = Basis(8)
    g = [gen_matrix(x, b) for x in range(6)]
    assert residual_norm(g[3 + i].commutator(g[3 + j]), g[3 + k] * 1j, 0) <= 1e-12
    assert residual_norm(g[3 + i].commutator(g[j]), g[k] * 1j, 1) <= 1e-12
    assert residual_norm(g[i].commutator(g[j]), None, 1) <= 1e-12


def test_truncation_breaks_unit_norm_at_the_boundary():
    b = Basis(4)
    g = [gen_matrix(x, b) for x in range(3)]
    nn = g[0] @ g[0] + g[1] @ g[1] + g[2] @ g[2] - SparseOperator.identity(b)
    assert residual_norm(nn, None, 1) <= 1e-12
    assert residual_norm(nn, None, 0) > 0.1


def test_dump_roundtrip():
    b = Basis(3)
    op = evaluate(N[0] * L[2] + N[2], b)
    assert parse_dump(op.dump(), b).toarray() == pytest.approx(op.toarray())
    with_diag = op.dump(diagonal=True)
    assert len(with_diag.splitlines()) >= len(op.dump().splitlines())


def test_lz_dump_lists_zero_diagonal():
    lines = gen_matrix(5, Basis(1)).dump(diagonal=True).splitlines()
    assert [float(x.split()[4]) for x in lines] == [0, -1, 0, 1]


def test_evaluate_errors():
    a = ParamPoly.var("a")
    with pytest.raises(MissingParameterError):
        evaluate(N[0].scale(a), Basis(2))
    with pytest.raises(LmaxTooSmallError):
        evaluate(N[0] * N[1] * N[2], Basis(2))
    with pytest.raises(BasisMismatchError):
        gen_matrix(0, Basis(2)) + gen_matrix(0, Basis(3))


def test_interior_projector():
    b = Basis(3)
    p = interior_projector(b, 1).toarray()
    assert np.trace(p) == b.interior_dim(1)
    with pytest.raises(ValueError):
        interior_projector(b, 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_evaluate_is_linear(g1, g2, x, y):
    b = Basis(4)
    e1, e2 = OperatorExpr.gen(g1), OperatorExpr.gen(g2)
    lhs = evaluate(e1 * e2, b)
    # interior depth covers the N factors
    k = int(g1 < 3) + int(g2 < 3)
    assert residual_norm(lhs, gen_matrix(g1, b) @ gen_matrix(g2, b), k) <= 1e-12
    comb = gen_matrix(g1, b) * x + gen_matrix(g2, b) * y
    assert np.allclose(comb.toarray(), x * gen_matrix(g1, b).toarray() + y * gen_matrix(g2, b).toarray())
