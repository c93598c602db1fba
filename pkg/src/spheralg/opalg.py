"""Noncommutative polynomials in the unit-vector and angular-momentum generators.

Every :class:`OperatorExpr` is kept in normal order: all ``N`` letters to the
left of all ``L`` letters, each block sorted ``x < y < z``, and ``NZ`` squared
eliminated through ``NZ^2 = 1 - NX^2 - NY^2``.  The rewrite axioms are

    [L_i, L_j] = i eps_ijk L_k,   [L_i, N_j] = i eps_ijk N_k,   [N_i, N_j] = 0

in units with hbar = 1.  ``N . L = 0`` holds on the sphere but is not used
here, so two expressions that agree as operators may still have different
normal forms; :mod:`spheralg.sphere` arbitrates those cases numerically.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple, Sequence

from .params import ONE, ZERO, I, GaussQ, ParamPoly, format_poly, parse_poly


class Generator(enum.IntEnum):
    NX = 0
    NY = 1
    NZ = 2
    LX = 3
    LY = 4
    LZ = 5

    @property
    def is_N(self) -> bool:
        return self < 3

    @classmethod
    def coerce(cls, g) -> "Generator":
        if isinstance(g, Generator):
            return g
        if isinstance(g, str):
            return cls[g.upper().replace("_", "")]
        return cls(g)


class Monomial(NamedTuple):
    """Exponents of ``NX^p1 NY^p2 NZ^p3 LX^q1 LY^q2 LZ^q3`` (``p3 <= 1``)."""

    p1: int = 0
    p2: int = 0
    p3: int = 0
    q1: int = 0
    q2: int = 0
    q3: int = 0

    @property
    def n_degree(self) -> int:
        return self.p1 + self.p2 + self.p3

    def word(self) -> tuple[int, ...]:
        return mono_word(self)

    def __str__(self):
        return mono_text(self)


UNIT = (0, 0, 0, 0, 0, 0)


def mono_word(m: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for g, e in enumerate(m):
        out.extend([g] * e)
    return tuple(out)


def mono_sort_key(m: Sequence[int]):
    # graded lexicographic
    return (sum(m), tuple(-e for e in m))


def mono_text(m: Sequence[int]) -> str:
    parts = []
    for g, e in zip(Generator, m):
        if e == 1:
            parts.append(g.name)
        elif e > 1:
            parts.append(f"{g.name}^{e}")
    return "*".join(parts) if parts else "1"


def _eps(i: int, j: int) -> tuple[int, int]:
    """Index k and sign of eps_ijk for i != j."""
    k = 3 - i - j
    return k, (1 if (i, j) in ((0, 1), (1, 2), (2, 0)) else -1)


@lru_cache(maxsize=None)
def _reduce_nz(m: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], GaussQ], ...]:
    p1, p2, p3, q1, q2, q3 = m
    if p3 < 2:
        return ((m, ONE),)
    acc: dict = {}
    for shifted, sign in (
        ((p1, p2, p3 - 2, q1, q2, q3), ONE),
        ((p1 + 2, p2, p3 - 2, q1, q2, q3), -ONE),
        ((p1, p2 + 2, p3 - 2, q1, q2, q3), -ONE),
    ):
        for mm, g in _reduce_nz(shifted):
            acc[mm] = acc.get(mm, ZERO) + sign * g
    return tuple((mm, g) for mm, g in acc.items() if g)


@lru_cache(maxsize=None)
def nf_word(word: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], GaussQ], ...]:
    """Normal form of a single generator word, as (monomial, coefficient) pairs."""
    for k in range(len(word) - 1):
        x, y = word[k], word[k + 1]
        if x <= y:
            continue
        acc = dict(nf_word(word[:k] + (y, x) + word[k + 2:]))
        # x > y forces x to be an L letter unless both are N (which commute)
        if x >= 3:
            i = x - 3
            base = 3 if y >= 3 else 0
            j = y - base
            if i != j:
                kk, sign = _eps(i, j)
                coeff = I * sign
                for mm, g in nf_word(word[:k] + (base + kk,) + word[k + 2:]):
                    acc[mm] = acc.get(mm, ZERO) + coeff * g
        return tuple((mm, g) for mm, g in acc.items() if g)
    m = [0] * 6
    for g in word:
        m[g] += 1
    return _reduce_nz(tuple(m))


@lru_cache(maxsize=None)
def _mono_mul(m1: tuple[int, ...], m2: tuple[int, ...]):
    return nf_word(mono_word(m1) + mono_word(m2))


@lru_cache(maxsize=None)
def _mono_adjoint(m: tuple[int, ...]):
    return nf_word(tuple(reversed(mono_word(m))))


def _coerce_coeff(c) -> ParamPoly:
    if isinstance(c, ParamPoly):
        return c
    if isinstance(c, str):
        return parse_poly(c)
    return ParamPoly.const(c)


class OperatorExpr:
    """Exact normal-ordered operator with parameter-polynomial coefficients.

    Supports ``+``, ``-``, ``*`` (with other expressions, numbers or
    :class:`ParamPoly`), equality, and hashing.  Instances are immutable.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], object] | None = None):
        clean: dict = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if len(m) != 6 or any(e < 0 for e in m):
                raise ValueError(f"bad monomial {m}")
            c = _coerce_coeff(c)
            if not c:
                continue
            if m[2] >= 2:
                for mm, g in _reduce_nz(m):
                    clean[mm] = clean.get(mm, ParamPoly()) + c.scale(g)
            else:
                clean[m] = clean.get(m, ParamPoly()) + c
        object.__setattr__(self, "terms", {m: c for m, c in clean.items() if c})
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("OperatorExpr is immutable")

    @classmethod
    def _raw(cls, terms: dict) -> "OperatorExpr":
        obj = cls.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "_hash", None)
        return obj

    @classmethod
    def gen(cls, g) -> "OperatorExpr":
        m = [0] * 6
        m[Generator.coerce(g)] = 1
        return cls._raw({tuple(m): ParamPoly.const(1)})

    @classmethod
    def scalar(cls, c) -> "OperatorExpr":
        c = _coerce_coeff(c) if not isinstance(c, str) else ParamPoly.coerce(c)
        return cls._raw({UNIT: c} if c else {})

    @classmethod
    def zero(cls) -> "OperatorExpr":
        return cls._raw({})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, OperatorExpr):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussQ, ParamPoly)):
            return self == OperatorExpr.scalar(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self.terms.items())))
        return self._hash

    def __add__(self, other):
        o = _as_expr(other)
        if o is None:
            return NotImplemented
        return add(self, o)

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpr._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = _as_expr(other)
        if o is None:
            return NotImplemented
        return add(self, -o)

    def __rsub__(self, other):
        o = _as_expr(other)
        if o is None:
            return NotImplemented
        return add(o, -self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussQ, ParamPoly)):
            return self.scale(other)
        o = _as_expr(other)
        if o is None:
            return NotImplemented
        return mul(self, o)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussQ, ParamPoly)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussQ)):
            return self.scale(ONE / GaussQ.coerce(other))
        return NotImplemented

    def __pow__(self, n: int):
        out = OperatorExpr.scalar(1)
        for _ in range(n):
            out = mul(out, self)
        return out

    def scale(self, c) -> "OperatorExpr":
        c = _coerce_coeff(c)
        if not c:
            return OperatorExpr.zero()
        out = {m: p * c for m, p in self.terms.items()}
        return OperatorExpr._raw({m: p for m, p in out.items() if p})

    def sorted_terms(self) -> list[tuple[tuple[int, ...], ParamPoly]]:
        return sorted(self.terms.items(), key=lambda kv: mono_sort_key(kv[0]))

    def parameters(self) -> set[str]:
        out: set[str] = set()
        for c in self.terms.values():
            out |= c.variables()
        return out

    def __repr__(self):
        return f"OperatorExpr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)


def _as_expr(x):
    if isinstance(x, OperatorExpr):
        return x
    if isinstance(x, (int, Fraction, GaussQ, ParamPoly)):
        return OperatorExpr.scalar(x)
    return None


def normal_form(raw: Iterable[tuple[object, Sequence]]) -> OperatorExpr:
    """Normal-order a sum of ``(coefficient, generator word)`` pairs.

    >>> str(normal_form([(1, ["LX", "NY"])]))
    '(i) NZ + (1) NY*LX'
    """
    acc: dict = {}
    for coeff, word in raw:
        c = _coerce_coeff(coeff)
        if not c:
            continue
        w = tuple(int(Generator.coerce(g)) for g in word)
        for m, g in nf_word(w):
            acc[m] = acc.get(m, ParamPoly()) + c.scale(g)
    return OperatorExpr._raw({m: c for m, c in acc.items() if c})


def add(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    if not B.terms:
        return A
    if not A.terms:
        return B
    out = dict(A.terms)
    for m, c in B.terms.items():
        s = out.get(m)
        s = c if s is None else s + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return OperatorExpr._raw(out)


def mul(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    acc: dict = {}
    for m1, c1 in A.terms.items():
        for m2, c2 in B.terms.items():
            c = c1 * c2
            if not c:
                continue
            for m, g in _mono_mul(m1, m2):
                s = acc.get(m)
                t = c.scale(g)
                acc[m] = t if s is None else s + t
    return OperatorExpr._raw({m: c for m, c in acc.items() if c})


def commutator(A: OperatorExpr, B: OperatorExpr) -> OperatorExpr:
    return add(mul(A, B), -mul(B, A))


def adjoint(A: OperatorExpr) -> OperatorExpr:
    """Hermitian conjugate; generators are self-adjoint and parameters real."""
    acc: dict = {}
    for m, c in A.terms.items():
        cc = c.conjugate()
        for mm, g in _mono_adjoint(m):
            s = acc.get(mm)
            t = cc.scale(g)
            acc[mm] = t if s is None else s + t
    return OperatorExpr._raw({m: c for m, c in acc.items() if c})


def substitute_params(A: OperatorExpr, values: Mapping[str, object], partial: bool = False) -> OperatorExpr:
    """Replace parameters by Gaussian-rational values.

    Raises :class:`~spheralg.params.MissingParameterError` for an unbound
    parameter unless ``partial`` is set.
    """
    out: dict = {}
    for m, c in A.terms.items():
        v = c.substitute(values, partial=partial)
        if v:
            out[m] = v
    return OperatorExpr._raw(out)


def degree_N(A: OperatorExpr) -> int:
    return max((m[0] + m[1] + m[2] for m in A.terms), default=0)


# --- pre-elimination convention ---------------------------------------------
#
# The N block is rewritten in the N+ = NX + i NY, N- = NX - i NY, NZ basis and
# N+ N- = NX^2 + NY^2 is replaced by 1 - NZ^2, so keys are
# (r, s, t, q1, q2, q3) for N+^r N-^s NZ^t L... with r*s == 0 and no bound on t.

def _binomial_expand(p1: int, p2: int) -> dict[tuple[int, int], GaussQ]:
    """(N+ + N-)^p1/2^p1 * ((N+ - N-)/(2i))^p2 as {(r, s): coeff}."""
    from math import comb

    out: dict = {}
    half = GaussQ(Fraction(1, 2))
    fx = half ** p1
    fy = (ONE / GaussQ(0, 2)) ** p2
    for k1 in range(p1 + 1):
        for k2 in range(p2 + 1):
            c = fx * fy * comb(p1, k1) * comb(p2, k2) * (-1) ** (p2 - k2)
            key = (k1 + k2, (p1 - k1) + (p2 - k2))
            out[key] = out.get(key, ZERO) + c
    return {k: v for k, v in out.items() if v}


def to_pre_elimination(A: OperatorExpr) -> dict[tuple[int, ...], ParamPoly]:
    acc: dict = {}
    for m, c in A.terms.items():
        p1, p2, p3, q1, q2, q3 = m
        for (r, s), g in _binomial_expand(p1, p2).items():
            u = min(r, s)
            # (1 - NZ^2)^u
            for j in range(u + 1):
                from math import comb

                h = g * comb(u, j) * (-1) ** j
                key = (r - u, s - u, p3 + 2 * j, q1, q2, q3)
                t = c.scale(h)
                acc[key] = acc.get(key, ParamPoly()) + t
    return {k: v for k, v in acc.items() if v}


def from_pre_elimination(terms: Mapping[tuple[int, ...], object]) -> OperatorExpr:
    nx, ny, nz = (OperatorExpr.gen(g) for g in ("NX", "NY", "NZ"))
    nplus = nx + ny.scale(I)
    nminus = nx - ny.scale(I)
    out = OperatorExpr.zero()
    for key, c in terms.items():
        r, s, t, q1, q2, q3 = key
        left = (nplus ** r) * (nminus ** s) * (nz ** t)
        right = OperatorExpr({(0, 0, 0, q1, q2, q3): 1})
        out = out + (left * right).scale(_coerce_coeff(c))
    return out


def coefficient_of(A: OperatorExpr, M: Sequence[int], convention: str = "normal") -> ParamPoly:
    """Coefficient of monomial ``M`` in ``A``.

    ``convention="normal"`` reads the stored normal form.  ``"pre_elimination"`` reads
    ``M = (r, s, t, q1, q2, q3)`` in the N+/N-/NZ basis with explicit NZ powers,
    which is how hand derivations usually write results.
    """
    M = tuple(M)
    if convention == "normal":
        return A.terms.get(M, ParamPoly())
    if convention == "pre_elimination":
        return to_pre_elimination(A).get(M, ParamPoly())
    raise ValueError(f"unknown convention {convention!r}")


# --- vector helpers ----------------------------------------------------------

Vector = tuple  # (x, y, z) of OperatorExpr

N = tuple(OperatorExpr.gen(g) for g in ("NX", "NY", "NZ"))
L = tuple(OperatorExpr.gen(g) for g in ("LX", "LY", "LZ"))


def cross(u: Vector, v: Vector) -> Vector:
    """Componentwise ``u x v`` keeping the written operand order."""
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def dot(u: Vector, v: Vector) -> OperatorExpr:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def plus(u: Vector) -> OperatorExpr:
    return u[0] + u[1].scale(I)


def minus(u: Vector) -> OperatorExpr:
    return u[0] - u[1].scale(I)


def vscale(u: Vector, c) -> Vector:
    return tuple(x * c for x in u)


def vmul_right(u: Vector, x: OperatorExpr) -> Vector:
    return tuple(ui * x for ui in u)


def vadd(*vs: Vector) -> Vector:
    return tuple(sum(comps[1:], comps[0]) for comps in zip(*vs))


# --- text and structured serialization --------------------------------------

def to_text(A: OperatorExpr) -> str:
    """Canonical one-line form, e.g. ``(a + 2i) NX*LZ + (-1/2) 1``."""
    if not A.terms:
        return "0"
    return " + ".join(f"({format_poly(c)}) {mono_text(m)}" for m, c in A.sorted_terms())


def _parse_mono(text: str) -> tuple[int, ...]:
    m = [0] * 6
    if text.strip() == "1":
        return tuple(m)
    for factor in text.strip().split("*"):
        name, _, e = factor.strip().partition("^")
        m[Generator[name]] += int(e) if e else 1
    return tuple(m)


def from_text(text: str) -> OperatorExpr:
    s = text.strip()
    if s == "0":
        return OperatorExpr.zero()
    terms: dict = {}
    pos = 0
    while pos < len(s):
        if s[pos] != "(":
            raise ValueError(f"expected '(' at column {pos + 1} in {text!r}")
        depth = 0
        end = pos
        for end in range(pos, len(s)):
            depth += {"(": 1, ")": -1}.get(s[end], 0)
            if depth == 0:
                break
        poly = parse_poly(s[pos + 1:end])
        nxt = s.find(" + (", end)
        mono_txt = s[end + 1:] if nxt < 0 else s[end + 1:nxt]
        mono = _parse_mono(mono_txt)
        if mono in terms:
            raise ValueError(f"duplicate monomial {mono_txt.strip()!r}")
        terms[mono] = poly
        if nxt < 0:
            break
        pos = nxt + 3
    return OperatorExpr(terms)


def to_dict(A: OperatorExpr) -> list[dict]:
    out = []
    for m, c in A.sorted_terms():
        coeff = []
        for pm, v in c.sorted_items():
            coeff.append({"params": {n: e for n, e in pm}, "re": str(v.re), "im": str(v.im)})
        out.append({"monomial": list(m), "coefficient": coeff})
    return out


def from_dict(data: list[dict]) -> OperatorExpr:
    terms = {}
    for item in data:
        poly = ParamPoly({
            tuple(sorted(c["params"].items())): GaussQ(Fraction(c["re"]), Fraction(c["im"]))
            for c in item["coefficient"]
        })
        terms[tuple(item["monomial"])] = poly
    return OperatorExpr(terms)
