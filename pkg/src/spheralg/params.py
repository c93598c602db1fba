"""Exact Gaussian-rational scalars and polynomials in the real parameters."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction, "GaussQ"]

PARAM_ORDER = ("a", "b", "c", "d")


class GaussQ:
    """Immutable complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussQ is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussQ":
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, str):
            try:
                return cls(Fraction(x.strip()))
            except ValueError:
                return cls.parse(x)
        return cls(Fraction(x))

    @classmethod
    def parse(cls, text: str) -> "GaussQ":
        """Parse ``"3/4"``, ``"-2i"``, ``"1/2+3/5i"`` style literals."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty Gaussian rational")
        pure = re.fullmatch(r"([+-]?)(\d*(?:/\d+)?)i", s)
        if pure is not None:
            mag = Fraction(pure.group(2)) if pure.group(2) else Fraction(1)
            return cls(0, -mag if pure.group(1) == "-" else mag)
        m = re.fullmatch(r"([+-]?\d+(?:/\d+)?)?(?:([+-]?\d*(?:/\d+)?)i)?", s)
        if m is None or (m.group(1) is None and m.group(2) is None):
            raise ValueError(f"not a Gaussian rational: {text!r}")
        re_part = Fraction(m.group(1)) if m.group(1) else Fraction(0)
        im_text = m.group(2)
        if im_text is None:
            im_part = Fraction(0)
        elif im_text in ("", "+"):
            im_part = Fraction(1)
        elif im_text == "-":
            im_part = Fraction(-1)
        else:
            im_part = Fraction(im_text)
        return cls(re_part, im_part)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussQ):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other):
        o = _as_gq(other)
        if o is None:
            return NotImplemented
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, other):
        o = _as_gq(other)
        if o is None:
            return NotImplemented
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _as_gq(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _as_gq(other)
        if o is None:
            return NotImplemented
        if not o.im:
            return GaussQ(self.re * o.re, self.im * o.re)
        if not self.im:
            return GaussQ(self.re * o.re, self.re * o.im)
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_gq(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if not den:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussQ(o.re / den, -o.im / den)

    def __rtruediv__(self, other):
        o = _as_gq(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussQ({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_text(self.im)
        sign = "+" if self.im > 0 else ""
        return f"{self.re}{sign}{_imag_text(self.im)}"


def _imag_text(x: Fraction) -> str:
    if x == 1:
        return "i"
    if x == -1:
        return "-i"
    return f"{x}i"


def _as_gq(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussQ(x)
    return None


ZERO = GaussQ(0)
ONE = GaussQ(1)
I = GaussQ(0, 1)


# A parameter monomial is a sorted tuple of (name, exponent) pairs; () is the constant.
PMono = tuple


def _pmono_mul(x: PMono, y: PMono) -> PMono:
    if not x:
        return y
    if not y:
        return x
    d = dict(x)
    for name, e in y:
        d[name] = d.get(name, 0) + e
    return tuple(sorted(d.items(), key=_pkey))


def _pkey(item):
    name = item[0]
    try:
        return (PARAM_ORDER.index(name), name)
    except ValueError:
        return (len(PARAM_ORDER), name)


class ParamPoly:
    """Polynomial in real parameters with Gaussian-rational coefficients.

    Values are immutable and never store zero coefficients, so equality is
    structural.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[PMono, GaussQ] | None = None):
        clean = {}
        if terms:
            for k, v in terms.items():
                v = GaussQ.coerce(v)
                if v:
                    clean[tuple(sorted(k, key=_pkey))] = v
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("ParamPoly is immutable")

    @classmethod
    def _raw(cls, terms: dict) -> "ParamPoly":
        # trusted constructor: keys sorted, values nonzero
        obj = cls.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "_hash", None)
        return obj

    @classmethod
    def const(cls, x) -> "ParamPoly":
        x = GaussQ.coerce(x)
        return cls._raw({(): x} if x else {})

    @classmethod
    def var(cls, name: str) -> "ParamPoly":
        return cls._raw({((name, 1),): ONE})

    @classmethod
    def coerce(cls, x) -> "ParamPoly":
        if isinstance(x, ParamPoly):
            return x
        if isinstance(x, str) and re.fullmatch(r"[a-z][a-zA-Z0-9]*", x) and x != "i":
            return cls.var(x)
        return cls.const(x)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, ParamPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussQ, complex)):
            return self == ParamPoly.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self.terms.items())))
        return self._hash

    def __add__(self, other):
        o = _as_pp(other)
        if o is None:
            return NotImplemented
        if not o.terms:
            return self
        if not self.terms:
            return o
        out = dict(self.terms)
        for k, v in o.terms.items():
            s = out.get(k)
            s = v if s is None else s + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return ParamPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly._raw({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        o = _as_pp(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = _as_pp(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (GaussQ, int, Fraction)):
            return self.scale(other)
        o = _as_pp(other)
        if o is None:
            return NotImplemented
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in o.terms.items():
                k = _pmono_mul(k1, k2)
                s = out.get(k)
                p = v1 * v2
                out[k] = p if s is None else s + p
        return ParamPoly._raw({k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = ParamPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, x) -> "ParamPoly":
        x = GaussQ.coerce(x)
        if not x:
            return ParamPoly._raw({})
        if x == ONE:
            return self
        return ParamPoly._raw({k: v * x for k, v in self.terms.items()})

    def conjugate(self) -> "ParamPoly":
        # parameters are real symbols
        return ParamPoly._raw({k: v.conjugate() for k, v in self.terms.items()})

    def variables(self) -> set[str]:
        return {name for k in self.terms for name, _ in k}

    def is_constant(self) -> bool:
        return all(k == () for k in self.terms)

    def constant_value(self) -> GaussQ:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((), ZERO)

    def degree(self) -> int:
        return max((sum(e for _, e in k) for k in self.terms), default=0)

    def substitute(self, values: Mapping[str, object], partial: bool = False) -> "ParamPoly":
        vals = {k: GaussQ.coerce(v) for k, v in values.items()}
        out = ParamPoly._raw({})
        for k, v in self.terms.items():
            coeff = v
            rest = []
            for name, e in k:
                if name in vals:
                    coeff = coeff * vals[name] ** e
                elif partial:
                    rest.append((name, e))
                else:
                    raise MissingParameterError(name)
            if coeff:
                out = out + ParamPoly._raw({tuple(rest): coeff})
        return out

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Floating-point evaluation; every variable must be bound."""
        total = 0j
        for k, v in self.terms.items():
            term = complex(v)
            for name, e in k:
                if name not in values:
                    raise MissingParameterError(name)
                term *= complex(values[name]) ** e
            total += term
        return total

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: _pmono_sort_key(kv[0]))

    def __repr__(self):
        return f"ParamPoly({str(self)!r})"

    def __str__(self):
        return format_poly(self)


class MissingParameterError(KeyError):
    """A parameter needed for substitution or evaluation has no value."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound parameter {self.name!r}"


def _as_pp(x):
    if isinstance(x, ParamPoly):
        return x
    if isinstance(x, (int, Fraction, GaussQ)):
        return ParamPoly.const(x)
    return None


def _pmono_sort_key(k: PMono):
    degs = [0] * len(PARAM_ORDER)
    extra = []
    for name, e in k:
        if name in PARAM_ORDER:
            degs[PARAM_ORDER.index(name)] = e
        else:
            extra.append((name, -e))
    return (sum(e for _, e in k), [-x for x in degs], extra)


def _pmono_text(k: PMono) -> str:
    return "*".join(name if e == 1 else f"{name}^{e}" for name, e in k)


def format_poly(p: ParamPoly) -> str:
    """Canonical text, lowest degree first: ``7 - 1/4i*c + 3/2*a^2*b``; ``0`` for zero.

    Real and imaginary parts of a coefficient become separate terms so the
    text parses back without ambiguity.
    """
    parts: list[tuple[Fraction, str]] = []
    for k, v in p.sorted_items():
        mono = _pmono_text(k)
        for value, suffix in ((v.re, ""), (v.im, "i")):
            if not value:
                continue
            mag = abs(value)
            if mono:
                body = (mono if mag == 1 and not suffix else f"{mag}{suffix}*{mono}")
            else:
                body = f"{mag}{suffix}"
            parts.append((value, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
    for value, body in parts[1:]:
        out += (" - " if value < 0 else " + ") + body
    return out


_TERM_RE = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)(i)?|(i))?\s*\*?\s*((?:[a-z][a-zA-Z0-9]*(?:\^\d+)?\s*\*?\s*)*)"
)


def parse_poly(text: str) -> ParamPoly:
    """Inverse of :func:`format_poly`."""
    s = text.strip()
    if s == "0":
        return ParamPoly()
    out = ParamPoly()
    pos = 0
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse polynomial term at {s[pos:]!r}")
        sign, num, imag, lone_i, mono = m.groups()
        if num is None and lone_i is None and not mono.strip():
            raise ValueError(f"cannot parse polynomial term at {s[pos:]!r}")
        value = Fraction(num) if num else Fraction(1)
        if sign == "-":
            value = -value
        coeff = GaussQ(0, value) if (imag or lone_i) else GaussQ(value)
        key = []
        for factor in filter(None, (f.strip() for f in mono.split("*"))):
            name, _, e = factor.partition("^")
            key.append((name, int(e) if e else 1))
        merged: PMono = ()
        for item in key:
            merged = _pmono_mul(merged, (item,))
        out = out + ParamPoly._raw({merged: coeff})
        pos = m.end()
    return out


def as_params(values: Mapping[str, object] | Iterable[tuple[str, object]]) -> dict[str, GaussQ]:
    items = values.items() if isinstance(values, Mapping) else values
    return {k: GaussQ.coerce(v) for k, v in items}


A = ParamPoly.var("a")
B = ParamPoly.var("b")
C = ParamPoly.var("c")
D = ParamPoly.var("d")
