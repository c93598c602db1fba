"""Sparse matrices of operator expressions on a truncated Y_lm basis.

Phase convention: Condon-Shortley, the same one used by
``scipy.special.sph_harm_y``.  With it

    cos(theta) Y_lm          = A(l, m) Y_{l+1,m} + A(l-1, m) Y_{l-1,m}
    sin(theta) e^{+i phi} Y_lm = -sqrt((l+m+1)(l+m+2)/((2l+1)(2l+3))) Y_{l+1,m+1}
                                + sqrt((l-m)(l-m-1)/((2l-1)(2l+1))) Y_{l-1,m+1}
    L+ Y_lm                  = sqrt(l(l+1) - m(m+1)) Y_{l,m+1}

with A(l, m) = sqrt(((l+1)^2 - m^2) / ((2l+1)(2l+3))).  The quadrature oracle
in this module integrates the same matrix elements directly and is the
reference those closed forms are tested against.

Truncation: a product of ``k`` truncated N-matrices is exact only between
states with ``l <= lmax - k``.  Every comparison therefore takes the interior
depth ``k`` explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.special import sph_harm_y

from .opalg import Generator, OperatorExpr, degree_N, mono_word
from .params import MissingParameterError

ZERO_CUTOFF = 1e-15


class BasisState(NamedTuple):
    l: int
    m: int

    @property
    def index(self) -> int:
        return self.l * self.l + self.l + self.m


class LmaxTooSmallError(ValueError):
    pass


class InsufficientGridError(ValueError):
    pass


class BasisMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Basis:
    lmax: int

    def __post_init__(self):
        if self.lmax < 0:
            raise ValueError("lmax must be non-negative")

    @property
    def dim(self) -> int:
        return (self.lmax + 1) ** 2

    def index(self, l: int, m: int) -> int:
        if not (0 <= l <= self.lmax and abs(m) <= l):
            raise IndexError(f"state ({l}, {m}) outside basis lmax={self.lmax}")
        return l * l + l + m

    def state(self, index: int) -> BasisState:
        index = int(index)
        l = int(np.floor(np.sqrt(index)))
        return BasisState(l, index - l * l - l)

    def states(self) -> Iterator[BasisState]:
        for l in range(self.lmax + 1):
            for m in range(-l, l + 1):
                yield BasisState(l, m)

    def interior_dim(self, k: int) -> int:
        return (self.lmax - k + 1) ** 2

    @property
    def m_values(self) -> np.ndarray:
        return np.array([s.m for s in self.states()])

    @property
    def l_values(self) -> np.ndarray:
        return np.array([s.l for s in self.states()])


@dataclass(frozen=True)
class SparseOperator:
    basis: Basis
    matrix: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise BasisMismatchError(f"matrix shape {m.shape} does not fit lmax={self.basis.lmax}")
        m.data[np.abs(m.data) < ZERO_CUTOFF] = 0
        m.eliminate_zeros()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)

    def _check(self, other: "SparseOperator"):
        if other.basis != self.basis:
            raise BasisMismatchError(f"lmax {self.basis.lmax} vs {other.basis.lmax}")

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.basis, self.matrix - other.matrix)

    def __neg__(self):
        return SparseOperator(self.basis, -self.matrix)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.basis, self.matrix @ other.matrix)

    def __mul__(self, c: complex) -> "SparseOperator":
        return SparseOperator(self.basis, self.matrix * complex(c))

    __rmul__ = __mul__

    def dagger(self) -> "SparseOperator":
        return SparseOperator(self.basis, self.matrix.conj().T)

    def commutator(self, other: "SparseOperator") -> "SparseOperator":
        return self @ other - other @ self

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def element(self, row: tuple[int, int], col: tuple[int, int]) -> complex:
        return complex(self.matrix[self.basis.index(*row), self.basis.index(*col)])

    def entries(self) -> Iterator[tuple[BasisState, BasisState, complex]]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for i in order:
            yield self.basis.state(int(coo.row[i])), self.basis.state(int(coo.col[i])), complex(coo.data[i])

    def dump(self, diagonal: bool = False) -> str:
        """One ``l' m' l m re im`` line per stored entry, in index order.

        ``diagonal=True`` also writes zero diagonal entries.
        """
        entries = list(self.entries())
        if diagonal:
            have = {(r, c) for r, c, _ in entries}
            states = self.basis.states()
            entries += [(st, st, 0j) for st in states if (st, st) not in have]
            entries.sort(key=lambda e: (e[0].index, e[1].index))
        lines = [f"{r.l} {r.m} {c.l} {c.m} {v.real:.17g} {v.imag:.17g}" for r, c, v in entries]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def identity(cls, basis: Basis) -> "SparseOperator":
        return cls(basis, sp.identity(basis.dim, dtype=complex, format="csr"))

    @classmethod
    def zeros(cls, basis: Basis) -> "SparseOperator":
        return cls(basis, sp.csr_matrix((basis.dim, basis.dim), dtype=complex))


def parse_dump(text: str, basis: Basis) -> SparseOperator:
    rows, cols, vals = [], [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        lr, mr, lc, mc, re, im = line.split()
        rows.append(basis.index(int(lr), int(mr)))
        cols.append(basis.index(int(lc), int(mc)))
        vals.append(complex(float(re), float(im)))
    return SparseOperator(basis, sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim)))


# --- closed-form generator matrices -----------------------------------------

def _nz_up(l: int, m: int) -> float:
    return np.sqrt(((l + 1) ** 2 - m * m) / ((2 * l + 1) * (2 * l + 3)))


@lru_cache(maxsize=None)
def _ladder_parts(lmax: int):
    basis = Basis(lmax)
    dim = basis.dim
    lp, nz, np_ = (sp.lil_matrix((dim, dim)) for _ in range(3))
    lz = np.zeros(dim)
    for l, m in basis.states():
        col = basis.index(l, m)
        lz[col] = m
        if m < l:
            lp[basis.index(l, m + 1), col] = np.sqrt(l * (l + 1) - m * (m + 1))
        if l < lmax:
            nz[basis.index(l + 1, m), col] = _nz_up(l, m)
            np_[basis.index(l + 1, m + 1), col] = -np.sqrt(
                (l + m + 1) * (l + m + 2) / ((2 * l + 1) * (2 * l + 3))
            )
        if l >= 1 and abs(m) < l:
            nz[basis.index(l - 1, m), col] = _nz_up(l - 1, m)
        if l >= 1 and abs(m + 1) <= l - 1:
            np_[basis.index(l - 1, m + 1), col] = np.sqrt((l - m) * (l - m - 1) / ((2 * l - 1) * (2 * l + 1)))
    return lp.tocsr(), sp.diags(lz).tocsr(), nz.tocsr(), np_.tocsr()


@lru_cache(maxsize=None)
def _gen_csr(g: int, lmax: int) -> sp.csr_matrix:
    lp, lz, nz, nplus = _ladder_parts(lmax)
    lm = lp.T
    nminus = nplus.T  # real entries, so transpose is the adjoint
    g = Generator(g)
    if g is Generator.LZ:
        out = lz
    elif g is Generator.LX:
        out = (lp + lm) / 2
    elif g is Generator.LY:
        out = (lp - lm) / 2j
    elif g is Generator.NZ:
        out = nz
    elif g is Generator.NX:
        out = (nplus + nminus) / 2
    else:
        out = (nplus - nminus) / 2j
    return sp.csr_matrix(out, dtype=complex)


def gen_matrix(g, basis: Basis) -> SparseOperator:
    return SparseOperator(basis, _gen_csr(int(Generator.coerce(g)), basis.lmax))


def ladder_matrix(name: str, basis: Basis) -> SparseOperator:
    """``"L+"``, ``"L-"``, ``"N+"`` or ``"N-"``."""
    lp, _, _, nplus = _ladder_parts(basis.lmax)
    table = {"L+": lp, "L-": lp.T, "N+": nplus, "N-": nplus.T}
    return SparseOperator(basis, table[name])


# --- quadrature oracle -------------------------------------------------------

FUNCTIONS = ("cos", "sin_eip", "sin_emip")


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre in cos(theta) times uniform phi."""

    lmax: int
    n_theta: int
    n_phi: int

    @classmethod
    def for_lmax(cls, lmax: int) -> "QuadratureGrid":
        n = 2 * lmax + 4
        return cls(lmax, n, n)

    def supports(self, l_row: int, l_col: int, m_row: int = 0, m_col: int = 0) -> bool:
        # integrand in cos(theta) has degree <= l_row + l_col + 1
        poly_ok = 2 * self.n_theta - 1 >= l_row + l_col + 1
        fourier_ok = self.n_phi > abs(m_row) + abs(m_col) + 1
        return poly_ok and fourier_ok

    @property
    def nodes(self):
        return _grid_nodes(self.n_theta, self.n_phi)


@lru_cache(maxsize=None)
def _grid_nodes(n_theta: int, n_phi: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    wphi = np.full(n_phi, 2 * np.pi / n_phi)
    return theta, w, phi, wphi


@lru_cache(maxsize=None)
def _ylm_table(n_theta: int, n_phi: int, lmax: int) -> np.ndarray:
    theta, _, phi, _ = _grid_nodes(n_theta, n_phi)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    out = np.empty(((lmax + 1) ** 2, n_theta, n_phi), dtype=complex)
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            out[l * l + l + m] = sph_harm_y(l, m, tt, pp)
    return out


def _f_values(f: str, n_theta: int, n_phi: int) -> np.ndarray:
    theta, _, phi, _ = _grid_nodes(n_theta, n_phi)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    if f == "cos":
        return np.cos(tt).astype(complex)
    if f == "sin_eip":
        return np.sin(tt) * np.exp(1j * pp)
    if f == "sin_emip":
        return np.sin(tt) * np.exp(-1j * pp)
    raise ValueError(f"unknown function {f!r}; expected one of {FUNCTIONS}")


def quadrature_element(f: str, row: tuple[int, int], col: tuple[int, int], grid: QuadratureGrid) -> complex:
    """Numerical integral of conj(Y_row) * f * Y_col over the unit sphere."""
    (lr, mr), (lc, mc) = row, col
    if not grid.supports(lr, lc, mr, mc) or max(lr, lc) > grid.lmax:
        raise InsufficientGridError(
            f"grid ({grid.n_theta}x{grid.n_phi}, lmax={grid.lmax}) too coarse for <{lr},{mr}|{f}|{lc},{mc}>"
        )
    theta, w, phi, wphi = grid.nodes
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    yr = sph_harm_y(lr, mr, tt, pp)
    yc = sph_harm_y(lc, mc, tt, pp)
    integrand = np.conj(yr) * _f_values(f, grid.n_theta, grid.n_phi) * yc
    return complex(np.einsum("i,j,ij->", w, wphi, integrand))


def quadrature_matrix(f: str, basis: Basis, grid: QuadratureGrid | None = None) -> np.ndarray:
    """All elements <row|f|col> on ``basis`` at once (dense)."""
    grid = grid or QuadratureGrid.for_lmax(basis.lmax + 1)
    if grid.lmax < basis.lmax or not grid.supports(basis.lmax, basis.lmax, basis.lmax, basis.lmax):
        raise InsufficientGridError(f"grid lmax={grid.lmax} too coarse for basis lmax={basis.lmax}")
    _, w, _, wphi = grid.nodes
    y = _ylm_table(grid.n_theta, grid.n_phi, grid.lmax)[: basis.dim]
    fw = _f_values(f, grid.n_theta, grid.n_phi) * np.outer(w, wphi)
    return np.einsum("aij,ij,bij->ab", np.conj(y), fw, y, optimize=True)


# --- expression evaluation ---------------------------------------------------

@lru_cache(maxsize=4096)
def _mono_csr(mono: tuple[int, ...], lmax: int) -> sp.csr_matrix:
    out = sp.identity((lmax + 1) ** 2, dtype=complex, format="csr")
    for g in mono_word(mono):
        out = out @ _gen_csr(g, lmax)
    return out


def monomial_matrix(mono, basis: Basis) -> SparseOperator:
    return SparseOperator(basis, _mono_csr(tuple(mono), basis.lmax))


def evaluate(A: OperatorExpr, basis: Basis, params: Mapping[str, complex] | None = None) -> SparseOperator:
    params = dict(params or {})
    missing = sorted(A.parameters() - set(params))
    if missing:
        raise MissingParameterError(missing[0])
    if basis.lmax < degree_N(A):
        raise LmaxTooSmallError(f"lmax={basis.lmax} below N-degree {degree_N(A)}")
    vals = {k: complex(v) for k, v in params.items()}
    out = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for mono, coeff in A.terms.items():
        c = coeff.evaluate(vals)
        if c:
            out = out + c * _mono_csr(mono, basis.lmax)
    return SparseOperator(basis, out)


def interior_projector(basis: Basis, k: int) -> SparseOperator:
    if not 0 <= k <= basis.lmax:
        raise ValueError(f"interior depth k={k} outside [0, {basis.lmax}]")
    diag = np.zeros(basis.dim)
    diag[: basis.interior_dim(k)] = 1.0
    return SparseOperator(basis, sp.diags(diag).tocsr())


def interior_block(A: SparseOperator, k: int) -> np.ndarray:
    if not 0 <= k <= A.basis.lmax:
        raise ValueError(f"interior depth k={k} outside [0, {A.basis.lmax}]")
    n = A.basis.interior_dim(k)
    return A.matrix[:n, :n].toarray()


def residual_norm(A: SparseOperator, B: SparseOperator | None, k: int) -> float:
    """Frobenius norm of P (A - B) P with P the depth-``k`` interior projector.

    ``B=None`` compares against the zero operator.
    """
    if B is not None:
        A._check(B)
        diff = A - B
    else:
        diff = A
    return float(np.linalg.norm(interior_block(diff, k)))


@dataclass(frozen=True)
class LadderReport:
    transitions: dict[int, float]
    dominant: int | None
    leakage: float

    @property
    def shifts(self) -> set[int]:
        return set(self.transitions)


def ladder_structure(A: SparseOperator, threshold: float = 1e-12) -> LadderReport:
    """Group entries by the change in m they cause."""
    coo = A.matrix.tocoo()
    m = A.basis.m_values
    dm = m[coo.row] - m[coo.col]
    norms: dict[int, float] = {}
    for shift in np.unique(dm):
        sel = dm == shift
        norms[int(shift)] = float(np.linalg.norm(coo.data[sel]))
    transitions = {s: v for s, v in sorted(norms.items()) if v > threshold}
    if not transitions:
        return LadderReport({}, None, 0.0)
    dominant = max(transitions, key=lambda s: transitions[s])
    outside = np.abs(coo.data[dm != dominant])
    return LadderReport(transitions, dominant, float(outside.max()) if outside.size else 0.0)
