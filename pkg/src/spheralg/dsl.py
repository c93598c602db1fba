"""A small text language for operator expressions.

Grammar (EBNF)::

    script     = { statement sep } expr [ sep ] ;
    statement  = [ "let" ] NAME "=" expr ;
    sep        = NEWLINE | ";" ;
    expr       = term { ("+" | "-") term } ;
    term       = unary { ("*" | "/") unary } ;
    unary      = "-" unary | power ;
    power      = postfix [ "^" INTEGER ] ;
    postfix    = primary { SUFFIX } ;
    SUFFIX     = "_x" | "_y" | "_z" | "_plus" | "_minus" ;
    primary    = NUMBER | "i" | NAME | FUNC "(" expr { "," expr } ")" | "(" expr ")" ;
    FUNC       = "cross" | "dot" | "comm" | "adjoint" ;

``N`` and ``L`` are the vector symbols, ``i`` the imaginary unit, other
lowercase names are real parameters.  The prelude binds ``J1``, ``J2``,
``Kplus``, ``Kminus`` and ``Kz``.  ``#`` starts a comment.

Errors carry a code: ``E_SYNTAX``, ``E_UNKNOWN_IDENT``, ``E_ARITY``,
``E_TYPE`` or ``E_DUPLICATE``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Union

from .opalg import L as L_VEC
from .opalg import N as N_VEC
from .opalg import OperatorExpr, adjoint, commutator, cross, dot
from .params import I, GaussQ, ParamPoly

SCALAR, VECTOR = "scalar", "vector"
FUNCS = {"cross": 2, "dot": 2, "comm": 2, "adjoint": 1}
COMPONENTS = ("x", "y", "z", "plus", "minus")
RESERVED = {"N", "L", "i", "let", *FUNCS}


class DSLError(Exception):
    def __init__(self, code: str, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{code} at {line}:{col}: {message}")
        self.code = code
        self.message = message
        self.line = line
        self.col = col


Pos = tuple  # (line, col)


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: Fraction
    pos: Pos = _pos()


@dataclass(frozen=True)
class Imag:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Param:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class VecSym:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Ref:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Component:
    child: "Node"
    comp: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Neg:
    child: "Node"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int
    pos: Pos = _pos()


Node = Union[Num, Imag, Param, VecSym, Ref, Component, Call, BinOp, Neg, Pow]


@dataclass(frozen=True)
class Script:
    bindings: tuple  # ((name, Node), ...)
    body: Node
    use_prelude: bool = field(default=True, compare=False)


# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<suffix>_(?:plus|minus|x|y|z)(?![A-Za-z0-9]))
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<op>[-+*/^(),=;])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, depth = 1, 0, 0
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise DSLError("E_SYNTAX", f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("sep", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "op":
            if text == "(":
                depth += 1
            elif text == ")":
                depth = max(0, depth - 1)
            tokens.append(Token("sep" if text == ";" else "op", text, line, col))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, env: Mapping[str, str]):
        self.toks = tokenize(source)
        self.i = 0
        self.env = dict(env)  # binding name -> type

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, code: str, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise DSLError(code, msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("op", "sep"):
            found = self.tok.text or "end of input"
            self.error("E_SYNTAX", f"expected {text!r}, found {found!r}")
        return self.advance()

    def skip_seps(self):
        while self.tok.kind == "sep":
            self.advance()

    def script(self, use_prelude: bool) -> Script:
        bindings = []
        self.skip_seps()
        while True:
            if self.tok.kind == "eof":
                self.error("E_SYNTAX", "script has no final expression")
            name_tok = None
            if self.tok.kind == "name" and self.tok.text == "let":
                self.advance()
                if self.tok.kind != "name":
                    self.error("E_SYNTAX", "expected a name after 'let'")
                name_tok = self.advance()
                self.expect("=")
            elif (self.tok.kind == "name" and self.toks[self.i + 1].text == "="
                  and self.toks[self.i + 1].kind == "op"):
                name_tok = self.advance()
                self.advance()
            if name_tok is not None:
                name = name_tok.text
                if name in RESERVED:
                    self.error("E_SYNTAX", f"cannot bind reserved name {name!r}", name_tok)
                if name in self.env:
                    self.error("E_DUPLICATE", f"name {name!r} is already bound", name_tok)
                node, typ = self.expr()
                self.env[name] = typ
                bindings.append((name, node))
                if self.tok.kind == "eof":
                    self.error("E_SYNTAX", "script has no final expression")
                if self.tok.kind != "sep":
                    self.error("E_SYNTAX", f"unexpected {self.tok.text!r}")
                self.skip_seps()
                continue
            body, _ = self.expr()
            self.skip_seps()
            if self.tok.kind != "eof":
                self.error("E_SYNTAX", f"unexpected {self.tok.text!r} after final expression")
            return Script(tuple(bindings), body, use_prelude)

    def expr(self):
        left, lt = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            right, rt = self.term()
            if lt != rt:
                self.error("E_TYPE", f"cannot {'add' if op.text == '+' else 'subtract'} {lt} and {rt}", op)
            left = BinOp(op.text, left, right, (op.line, op.col))
        return left, lt

    def term(self):
        left, lt = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            right, rt = self.unary()
            if op.text == "*":
                if lt == VECTOR and rt == VECTOR:
                    self.error("E_TYPE", "product of two vectors; use dot or cross", op)
                typ = VECTOR if VECTOR in (lt, rt) else SCALAR
            else:
                if rt != SCALAR or not _is_constant(right):
                    self.error("E_TYPE", "divisor must be a numeric constant", op)
                typ = lt
            left = BinOp(op.text, left, right, (op.line, op.col))
            lt = typ
        return left, lt

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            child, t = self.unary()
            return Neg(child, (op.line, op.col)), t
        return self.power()

    def power(self):
        base, t = self.postfix()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            if self.tok.kind != "number" or "." in self.tok.text:
                self.error("E_SYNTAX", "exponent must be a non-negative integer")
            if t != SCALAR:
                self.error("E_TYPE", "cannot raise a vector to a power", op)
            n = int(self.advance().text)
            return Pow(base, n, (op.line, op.col)), t
        return base, t

    def postfix(self):
        node, t = self.primary()
        while self.tok.kind == "suffix":
            s = self.advance()
            if t != VECTOR:
                self.error("E_TYPE", f"component {s.text} of a scalar", s)
            node = Component(node, s.text[1:], (s.line, s.col))
            t = SCALAR
        return node, t

    def primary(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if tok.kind == "number":
            self.advance()
            return Num(Fraction(tok.text), pos), SCALAR
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node, t = self.expr()
            self.expect(")")
            return node, t
        if tok.kind != "name":
            self.error("E_SYNTAX", f"unexpected {tok.text or 'end of input'!r}")
        self.advance()
        name = tok.text
        is_call = self.tok.kind == "op" and self.tok.text == "("
        if is_call:
            if name not in FUNCS:
                self.error("E_UNKNOWN_IDENT", f"unknown function {name!r}", tok)
            return self.call(name, tok)
        if name in FUNCS:
            self.error("E_SYNTAX", f"function {name!r} needs arguments", tok)
        if name == "i":
            return Imag(pos), SCALAR
        if name in ("N", "L"):
            return VecSym(name, pos), VECTOR
        if name in self.env:
            return Ref(name, pos), self.env[name]
        if name == "let":
            self.error("E_SYNTAX", "'let' is only allowed at the start of a statement", tok)
        if name[0].islower():
            return Param(name, pos), SCALAR
        self.error("E_UNKNOWN_IDENT", f"unknown identifier {name!r}", tok)

    def call(self, name: str, tok: Token):
        self.expect("(")
        args, types = [], []
        if not (self.tok.kind == "op" and self.tok.text == ")"):
            while True:
                node, t = self.expr()
                args.append(node)
                types.append(t)
                if self.tok.kind == "op" and self.tok.text == ",":
                    self.advance()
                    continue
                break
        self.expect(")")
        want = FUNCS[name]
        if len(args) != want:
            self.error("E_ARITY", f"{name} takes {want} argument(s), got {len(args)}", tok)
        if name in ("cross", "dot") and types != [VECTOR, VECTOR]:
            self.error("E_TYPE", f"{name} needs two vectors, got {', '.join(types)}", tok)
        if name == "comm" and types != [SCALAR, SCALAR]:
            self.error("E_TYPE", f"comm needs two scalar operators, got {', '.join(types)}", tok)
        typ = VECTOR if name == "cross" else (types[0] if name == "adjoint" else SCALAR)
        return Call(name, tuple(args), (tok.line, tok.col)), typ


def _is_constant(node: Node) -> bool:
    if isinstance(node, (Num, Imag)):
        return True
    if isinstance(node, BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    if isinstance(node, Neg):
        return _is_constant(node.child)
    if isinstance(node, Pow):
        return _is_constant(node.base)
    return False


PRELUDE_SOURCE = """\
J1 = i*cross(N, L) + a*N + b*N*L_z
J2 = -i*cross(N, L) + c*N + d*N*L_z
Kplus = J1_plus
Kminus = J2_minus
Kz = L_z
0
"""


@lru_cache(maxsize=1)
def prelude() -> Script:
    return _Parser(PRELUDE_SOURCE, {}).script(use_prelude=False)


def _prelude_env() -> dict[str, str]:
    p = _Parser(PRELUDE_SOURCE, {})
    p.script(use_prelude=False)
    return p.env


@lru_cache(maxsize=1)
def _prelude_types() -> dict[str, str]:
    return _prelude_env()


def parse(source: str, use_prelude: bool = True) -> Script:
    env = dict(_prelude_types()) if use_prelude else {}
    return _Parser(source, env).script(use_prelude)


def type_of(node: Node, script: Script | None = None) -> str:
    env = dict(_prelude_types())
    if script is not None:
        # bindings were type-checked at parse time; re-derive from their nodes
        for name, n in script.bindings:
            env[name] = _infer(n, env)
    return _infer(node, env)


def _infer(node: Node, env: Mapping[str, str]) -> str:
    if isinstance(node, (Num, Imag, Param, Component)):
        return SCALAR
    if isinstance(node, VecSym):
        return VECTOR
    if isinstance(node, Ref):
        return env[node.name]
    if isinstance(node, Call):
        if node.func == "cross":
            return VECTOR
        if node.func == "adjoint":
            return _infer(node.args[0], env)
        return SCALAR
    if isinstance(node, BinOp):
        lt, rt = _infer(node.left, env), _infer(node.right, env)
        return VECTOR if VECTOR in (lt, rt) else SCALAR
    if isinstance(node, Neg):
        return _infer(node.child, env)
    if isinstance(node, Pow):
        return SCALAR
    raise TypeError(node)


# --- pretty printer ----------------------------------------------------------

_PREC = {"sum": 1, "product": 2, "unary": 3, "power": 4, "postfix": 5, "atom": 6}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC["sum"] if node.op in "+-" else _PREC["product"]
    if isinstance(node, Neg):
        return _PREC["unary"]
    if isinstance(node, Pow):
        return _PREC["power"]
    if isinstance(node, Component):
        return _PREC["postfix"]
    return _PREC["atom"]


def _num_text(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    with localcontext() as ctx:
        ctx.prec = 200
        text = format(Decimal(x.numerator) / Decimal(x.denominator), "f")
    if Fraction(text) != x:
        raise ValueError(f"{x} has no finite decimal form")
    return text


def _wrap(node: Node, min_prec: int) -> str:
    s = pretty_expr(node)
    return f"({s})" if _prec(node) < min_prec else s


def pretty_expr(node: Node) -> str:
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, (Param, VecSym, Ref)):
        return node.name
    if isinstance(node, Component):
        return f"{_wrap(node.child, _PREC['postfix'])}_{node.comp}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(pretty_expr(a) for a in node.args)})"
    if isinstance(node, BinOp):
        if node.op in "+-":
            return f"{_wrap(node.left, 1)} {node.op} {_wrap(node.right, 2)}"
        return f"{_wrap(node.left, 2)} {node.op} {_wrap(node.right, 3)}"
    if isinstance(node, Neg):
        inner = _wrap(node.child, 3)
        return f"-{inner}" if not inner.startswith("-") else f"-({inner})"
    if isinstance(node, Pow):
        return f"{_wrap(node.base, 5)}^{node.exponent}"
    raise TypeError(node)


def pretty_print(script: Script) -> str:
    lines = [f"let {name} = {pretty_expr(node)}" for name, node in script.bindings]
    lines.append(pretty_expr(script.body))
    return "\n".join(lines) + "\n"


# --- substitution on the tree -------------------------------------------------

def _const_node(v: GaussQ) -> Node:
    def real(x: Fraction) -> Node:
        mag = abs(x)
        n: Node = Num(Fraction(mag.numerator))
        if mag.denominator != 1:
            n = BinOp("/", n, Num(Fraction(mag.denominator)))
        return Neg(n) if x < 0 else n

    re_node = real(v.re) if v.re or not v.im else None
    im_node = BinOp("*", real(v.im), Imag()) if v.im else None
    if re_node is None:
        return im_node
    if im_node is None:
        return re_node
    return BinOp("+", re_node, im_node)


def substitute_ast(script: Script, values: Mapping[str, object]) -> Script:
    vals = {k: GaussQ.coerce(v) for k, v in values.items()}

    def sub(node: Node) -> Node:
        if isinstance(node, Param):
            return _const_node(vals[node.name]) if node.name in vals else node
        if isinstance(node, Component):
            return Component(sub(node.child), node.comp, node.pos)
        if isinstance(node, Call):
            return Call(node.func, tuple(sub(a) for a in node.args), node.pos)
        if isinstance(node, BinOp):
            return BinOp(node.op, sub(node.left), sub(node.right), node.pos)
        if isinstance(node, Neg):
            return Neg(sub(node.child), node.pos)
        if isinstance(node, Pow):
            return Pow(sub(node.base), node.exponent, node.pos)
        return node

    # prelude names depend on a, b, c, d too: inline them so the result is self-contained
    inherited = prelude().bindings if script.use_prelude else ()
    bindings = tuple((name, sub(n)) for name, n in inherited + script.bindings)
    return Script(bindings, sub(script.body), False)


# --- lowering ----------------------------------------------------------------

Value = Union[OperatorExpr, tuple]


def _component(v: tuple, comp: str) -> OperatorExpr:
    if comp == "x":
        return v[0]
    if comp == "y":
        return v[1]
    if comp == "z":
        return v[2]
    if comp == "plus":
        return v[0] + v[1].scale(I)
    return v[0] - v[1].scale(I)


def _lower_node(node: Node, env: Mapping[str, Value]) -> Value:
    if isinstance(node, Num):
        return OperatorExpr.scalar(node.value)
    if isinstance(node, Imag):
        return OperatorExpr.scalar(I)
    if isinstance(node, Param):
        return OperatorExpr.scalar(ParamPoly.var(node.name))
    if isinstance(node, VecSym):
        return N_VEC if node.name == "N" else L_VEC
    if isinstance(node, Ref):
        return env[node.name]
    if isinstance(node, Component):
        return _component(_lower_node(node.child, env), node.comp)
    if isinstance(node, Call):
        args = [_lower_node(a, env) for a in node.args]
        if node.func == "cross":
            return cross(*args)
        if node.func == "dot":
            return dot(*args)
        if node.func == "comm":
            return commutator(*args)
        x = args[0]
        return tuple(adjoint(c) for c in x) if isinstance(x, tuple) else adjoint(x)
    if isinstance(node, BinOp):
        lv, rv = _lower_node(node.left, env), _lower_node(node.right, env)
        if node.op == "/":
            c = rv.terms.get((0,) * 6, ParamPoly())
            if set(rv.terms) - {(0,) * 6} or not c.is_constant() or not c:
                raise DSLError("E_TYPE", "divisor must be a nonzero constant", *node.pos)
            inv = GaussQ(1) / c.constant_value()
            return tuple(x.scale(inv) for x in lv) if isinstance(lv, tuple) else lv.scale(inv)
        if node.op in "+-":
            if isinstance(lv, tuple):
                return tuple(x + y if node.op == "+" else x - y for x, y in zip(lv, rv))
            return lv + rv if node.op == "+" else lv - rv
        if isinstance(lv, tuple):
            return tuple(x * rv for x in lv)
        if isinstance(rv, tuple):
            return tuple(lv * y for y in rv)
        return lv * rv
    if isinstance(node, Neg):
        v = _lower_node(node.child, env)
        return tuple(-x for x in v) if isinstance(v, tuple) else -v
    if isinstance(node, Pow):
        return _lower_node(node.base, env) ** node.exponent
    raise TypeError(node)


@lru_cache(maxsize=1)
def _prelude_values() -> dict[str, Value]:
    env: dict[str, Value] = {}
    for name, node in prelude().bindings:
        env[name] = _lower_node(node, env)
    return env


def lower_env(s: Script) -> dict[str, Value]:
    env: dict[str, Value] = dict(_prelude_values()) if s.use_prelude else {}
    for name, node in s.bindings:
        env[name] = _lower_node(node, env)
    return env


def lower(s: Script) -> Value:
    """Expand vector algebra, resolve bindings and normal-order.

    Returns an :class:`OperatorExpr` for scalar scripts and a 3-tuple of them
    for vector-valued scripts.
    """
    return _lower_node(s.body, lower_env(s))


def compile_expr(source: str) -> Value:
    return lower(parse(source))
