"""Small expression language over star-product elements, grids, forms and words.

Grammar::

    program := stmt ((';' | NEWLINE) stmt)*
    stmt    := NAME '=' expr | expr
    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*        '*' is the star product
    unary   := '-' unary | factor
    factor  := NUMBER | STRING | NAME | call | '(' expr ')' | '(' num ',' num ')'
    call    := NAME '(' [arg (',' arg)*] ')'      arg := [NAME '='] expr

Built-in names: ``t``, ``x``, ``one``, ``i``, ``kappa``, operators ``E``,
``P``, ``eps``, ``epsinv``, ``N`` and the fixture presets.  Every diagnostic
carries a (line, column) location.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import symbolic as sym
from .calculus import Calculus, Form, symbolic_calculus
from .cocycle import cocycle_phi, graded_trace, grid_calculus
from .errors import KappaForgeError
from .fixtures import PRESETS, preset
from .hopf import E, EPS, EPS_INV, IDENTITY, N, OperatorExpr, P, PolyWord, act_word, apply_op, word_eval
from .rieffel import eta_act, j_star
from .spectral import (GridSpec, SpectralGrid, grid_apply_op, grid_eval, grid_involution,
                       grid_star, grid_translate, lebesgue_integral)

CALLS = ("adj", "T", "act", "d", "wedge", "lmul", "rmul", "trace", "gtrace", "phi", "comm",
         "eval", "jstar", "eta")
EXTRA_CALLS = ("word", "elem", "bump", "gauss")
OPERATORS = {"E": E, "P": P, "eps": EPS, "epsinv": EPS_INV, "N": N}
RESERVED = {"t", "x", "one", "i", "kappa", "κ"} | set(OPERATORS) | set(PRESETS)


# -- diagnostics ------------------------------------------------------------------

class DslError(KappaForgeError):
    def __init__(self, message: str, pos: tuple[int, int] | None = None):
        self.message = message
        self.pos = pos
        loc = f"line {pos[0]}, column {pos[1]}: " if pos else ""
        super().__init__(loc + message)


class DslSyntaxError(DslError, SyntaxError):
    pass


class DslTypeError(DslError, TypeError):
    pass


class UnknownName(DslError, NameError):
    pass


class NameCollision(DslError):
    pass


class EvalError(DslError):
    """A runtime failure inside a library call, annotated with its location."""


# -- lexer ------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<str>"[^"\n]*"|'[^'\n]*')
  | (?P<name>[A-Za-z_κ][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),=;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: tuple[int, int]


def tokenize(src: str) -> list[Token]:
    out, line, start, i = [], 1, 0, 0
    while i < len(src):
        m = _TOKEN.match(src, i)
        if not m:
            raise DslSyntaxError(f"unexpected character {src[i]!r}", (line, i - start + 1))
        kind = m.lastgroup
        pos = (line, i - start + 1)
        if kind == "nl":
            out.append(Token("sep", "\n", pos))
            line, start = line + 1, m.end()
        elif kind == "op" and m.group() == ";":
            out.append(Token("sep", ";", pos))
        elif kind != "ws":
            out.append(Token(kind, m.group(), pos))
        i = m.end()
    out.append(Token("eof", "", (line, i - start + 1)))
    return out


# -- AST --------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    pos: tuple[int, int] = field(default=(0, 0), compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Complex(Node):
    re: float
    im: float


@dataclass(frozen=True)
class Str(Node):
    value: str


@dataclass(frozen=True)
class Name(Node):
    id: str


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Bin(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    args: tuple[Node, ...] = ()
    kwargs: tuple[tuple[str, Node], ...] = ()


@dataclass(frozen=True)
class Assign(Node):
    name: str
    value: Node


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num_text(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def unparse(node: Node, parent: int = 0, right: bool = False) -> str:
    """Source text that parses back to an identical AST."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Complex):
        return f"({_num_text(node.re)},{_num_text(node.im)})"
    if isinstance(node, Str):
        return f'"{node.value}"'
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Neg):
        # unary minus binds tighter than every binary operator
        return "-" + unparse(node.operand, 3)
    if isinstance(node, Bin):
        p = _PREC[node.op]
        text = f"{unparse(node.left, p)} {node.op} {unparse(node.right, p, True)}"
        return f"({text})" if p < parent or (p == parent and right) else text
    if isinstance(node, Call):
        parts = [unparse(a) for a in node.args] + [f"{k}={unparse(v)}" for k, v in node.kwargs]
        return f"{node.func}({', '.join(parts)})"
    if isinstance(node, Assign):
        return f"{node.name} = {unparse(node.value)}"
    raise TypeError(f"not an AST node: {node!r}")


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def _next(self) -> Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def _expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind in ("str", "sep", "eof") and text not in ("\n", ";"):
            raise DslSyntaxError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}",
                                 self.tok.pos)
        return self._next()

    def program(self) -> list[Node]:
        stmts = []
        while True:
            while self.tok.kind == "sep":
                self._next()
            if self.tok.kind == "eof":
                return stmts
            stmts.append(self.stmt())
            if self.tok.kind not in ("sep", "eof"):
                raise DslSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)

    def stmt(self) -> Node:
        if self.tok.kind == "name" and self.toks[self.k + 1].text == "=":
            name = self._next()
            self._next()
            return Assign(name.text, self.expr(), pos=name.pos)
        return self.expr()

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self._next()
            node = Bin(op.text, node, self.term(), pos=op.pos)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self._next()
            node = Bin(op.text, node, self.unary(), pos=op.pos)
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self._next()
            return Neg(self.unary(), pos=op.pos)
        return self.factor()

    def factor(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self._next()
            return Num(float(t.text), pos=t.pos)
        if t.kind == "str":
            self._next()
            return Str(t.text[1:-1], pos=t.pos)
        if t.kind == "name":
            self._next()
            if self.tok.text == "(" and self.tok.kind == "op":
                return self.call(t)
            return Name(t.text, pos=t.pos)
        if t.kind == "op" and t.text == "(":
            self._next()
            inner = self.expr()
            if self.tok.kind == "op" and self.tok.text == ",":
                self._next()
                im = self.expr()
                self._expect(")")
                return Complex(_literal(inner), _literal(im), pos=t.pos)
            self._expect(")")
            return inner
        raise DslSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos)

    def call(self, name: Token) -> Node:
        self._next()
        args, kwargs = [], []
        if not (self.tok.kind == "op" and self.tok.text == ")"):
            while True:
                if self.tok.kind == "name" and self.toks[self.k + 1].text == "=":
                    key = self._next()
                    self._next()
                    kwargs.append((key.text, self.expr()))
                else:
                    if kwargs:
                        raise DslSyntaxError("positional argument after keyword argument", self.tok.pos)
                    args.append(self.expr())
                if self.tok.kind == "op" and self.tok.text == ",":
                    self._next()
                    continue
                break
        self._expect(")")
        return Call(name.text, tuple(args), tuple(kwargs), pos=name.pos)


def _literal(node: Node) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg) and isinstance(node.operand, Num):
        return -node.operand.value
    raise DslSyntaxError("complex literals take two real numbers, e.g. (0,1)", node.pos)


def parse_program(src: str) -> list[Node]:
    return Parser(src).program()


def parse(src: str) -> Node:
    """Parse a single expression or assignment."""
    stmts = parse_program(src)
    if len(stmts) != 1:
        raise DslSyntaxError(f"expected one statement, found {len(stmts)}", (1, 1))
    return stmts[0]


# -- types ------------------------------------------------------------------------

SCALAR, ELEMENT, GRID, WORD, OP, STRING = "scalar", "element", "grid", "word", "op", "string"
BOOST_OP = "boost-op"  # an operator involving N; it acts on words only
OPS = (OP, BOOST_OP)


@dataclass(frozen=True)
class FormType:
    backend: str  # "element" | "grid"
    degree: int

    def __str__(self):
        return f"{self.degree}-form[{self.backend}]"


FUNCTIONS = (ELEMENT, GRID)


def _is_fn_or_form(t):
    return t in FUNCTIONS or isinstance(t, FormType)


def _as_form(t):
    return FormType(t, 0) if t in FUNCTIONS else t


def check(node: Node, env: dict[str, Any]) -> Any:
    """Static type of ``node`` given name types in ``env``; raises DslTypeError."""
    if isinstance(node, (Num, Complex)):
        return SCALAR
    if isinstance(node, Str):
        return STRING
    if isinstance(node, Name):
        return _name_type(node, env)
    if isinstance(node, Neg):
        t = check(node.operand, env)
        if t == STRING:
            raise DslTypeError("cannot negate a string", node.pos)
        return t
    if isinstance(node, Assign):
        return check(node.value, env)
    if isinstance(node, Bin):
        return _bin_type(node, check(node.left, env), check(node.right, env))
    if isinstance(node, Call):
        return _call_type(node, [check(a, env) for a in node.args],
                          {k: check(v, env) for k, v in node.kwargs})
    raise DslTypeError(f"unknown node {node!r}", getattr(node, "pos", None))


def _name_type(node: Name, env):
    n = node.id
    if n in ("t", "x", "one"):
        return ELEMENT
    if n in ("i", "kappa", "κ"):
        return SCALAR
    if n in OPERATORS:
        return BOOST_OP if n == "N" else OP
    if n in env:
        return env[n]
    if n in PRESETS:
        return GRID
    raise UnknownName(f"unknown name {n!r}", node.pos)


def _bin_type(node: Bin, a, b):
    op = node.op
    bad = DslTypeError(f"operator {op!r} does not apply to {a} and {b}", node.pos)
    if STRING in (a, b):
        raise bad
    if op == "/":
        if b != SCALAR:
            raise DslTypeError("only division by a scalar is defined", node.pos)
        return a
    if a in OPS and b in OPS:
        return BOOST_OP if BOOST_OP in (a, b) else OP
    if op in "+-":
        if a == b:
            return a
        if SCALAR in (a, b):
            other = b if a == SCALAR else a
            if other in (ELEMENT, WORD) + OPS:
                return other
            if other == GRID:
                raise DslTypeError("grid elements have no unit; cannot add a scalar", node.pos)
        raise bad
    # '*': scaling, star product, composition, concatenation or bimodule action
    if a == SCALAR:
        return b
    if b == SCALAR:
        return a
    if a == b and a in (ELEMENT, GRID, WORD, OP):
        return a
    if a in FUNCTIONS and isinstance(b, FormType) and b.backend == a:
        return b
    if b in FUNCTIONS and isinstance(a, FormType) and a.backend == b:
        return a
    if isinstance(a, FormType) and isinstance(b, FormType):
        raise DslTypeError("use wedge(a, b) to multiply forms", node.pos)
    raise bad


def _need(cond, msg, node):
    if not cond:
        raise DslTypeError(msg, node.pos)


def _call_type(node: Call, args, kwargs):
    f = node.func
    if f not in CALLS and f not in EXTRA_CALLS:
        raise UnknownName(f"unknown function {f!r}", node.pos)
    arity = {"adj": 1, "T": 2, "act": 2, "d": 1, "wedge": 2, "lmul": 2, "rmul": 2, "trace": 1,
             "gtrace": 1, "phi": 4, "comm": 2, "eval": 3, "jstar": 2, "eta": 3, "word": 1,
             "elem": 1, "bump": 0, "gauss": 0}[f]
    if len(args) != arity:
        raise DslTypeError(f"{f} takes {arity} positional argument(s), got {len(args)}", node.pos)
    if kwargs and f not in ("bump", "gauss"):
        raise DslTypeError(f"{f} takes no keyword arguments", node.pos)
    if f == "adj":
        _need(args[0] in FUNCTIONS, "adj needs an element or grid", node)
        return args[0]
    if f == "T":
        _need(args[0] == SCALAR, "T(gamma, f) needs a scalar gamma", node)
        _need(_is_fn_or_form(args[1]), "T acts on elements, grids and forms", node)
        return args[1]
    if f == "act":
        _need(args[0] in OPS, "act(h, f) needs an operator h", node)
        if args[0] == BOOST_OP:
            _need(args[1] == WORD, "the boost N acts only on words, e.g. act(N, word(\"tx\"))", node)
        _need(args[1] in (ELEMENT, GRID, WORD), "act applies to elements, grids or words", node)
        return args[1]
    if f == "d":
        t = _as_form(args[0])
        _need(isinstance(t, FormType), "d applies to functions and forms", node)
        return FormType(t.backend, min(t.degree + 1, 3))
    if f == "wedge":
        a, b = _as_form(args[0]), _as_form(args[1])
        _need(isinstance(a, FormType) and isinstance(b, FormType), "wedge needs forms", node)
        _need(a.backend == b.backend, "wedge operands must share a backend", node)
        _need(a.degree + b.degree <= 3, f"wedge degree {a.degree + b.degree} exceeds 3", node)
        return FormType(a.backend, a.degree + b.degree)
    if f in ("lmul", "rmul"):
        fn, fm = (args[0], args[1]) if f == "lmul" else (args[1], args[0])
        _need(fn in FUNCTIONS and isinstance(fm, FormType) and fm.backend == fn,
              f"{f} needs a function and a form on the same backend", node)
        return fm
    if f == "trace":
        if args[0] == ELEMENT:
            raise DslTypeError("symbolic elements are not integrable; trace needs a grid", node.pos)
        if isinstance(args[0], FormType):
            raise DslTypeError("use gtrace for forms", node.pos)
        _need(args[0] == GRID, "trace needs a grid element", node)
        return SCALAR
    if f == "gtrace":
        t = args[0]
        _need(isinstance(t, FormType), "gtrace needs a 3-form", node)
        _need(t.backend == GRID, "symbolic forms are not integrable; gtrace needs grid forms", node)
        _need(t.degree == 3, f"gtrace needs a 3-form, got a {t.degree}-form", node)
        return SCALAR
    if f in ("phi",):
        _need(all(a == GRID for a in args), "phi needs four grid elements", node)
        return SCALAR
    if f == "comm":
        _need(args[0] == args[1] and args[0] in FUNCTIONS, "comm needs two elements or two grids", node)
        return args[0]
    if f == "eval":
        _need(args[0] in FUNCTIONS and args[1] == SCALAR and args[2] == SCALAR,
              "eval(f, alpha, beta) needs a function and two scalars", node)
        return SCALAR
    if f == "jstar":
        _need(args == [GRID, GRID], "jstar needs two grids", node)
        return GRID
    if f == "eta":
        _need(args == [SCALAR, SCALAR, GRID], "eta(r, s, f) needs two scalars and a grid", node)
        return GRID
    if f == "word":
        _need(args[0] == STRING, 'word needs a string such as "tx"', node)
        return WORD
    if f == "elem":
        _need(args[0] == WORD, "elem needs a word", node)
        return ELEMENT
    # bump / gauss
    allowed = {"v0", "w", "c", "beta0", "sigma", "k", "profile"}
    for key, t in kwargs.items():
        _need(key in allowed, f"unknown fixture parameter {key!r}", node)
        _need(t == (STRING if key == "profile" else SCALAR), f"bad value type for {key}", node)
    return GRID


# -- evaluation -------------------------------------------------------------------

@dataclass
class Tolerances:
    symbolic: float = 1e-10
    grid: float = 1e-4


class Evaluator:
    def __init__(self, kappa: float, spec: GridSpec, resolve):
        self.kappa = float(kappa)
        self.spec = spec
        self.resolve = resolve
        self.sym_calc = symbolic_calculus(self.kappa)
        self.grid_calc = grid_calculus(self.kappa, spec)

    def calc_for(self, backend: str) -> Calculus:
        return self.sym_calc if backend == ELEMENT else self.grid_calc

    def value(self, node: Node):
        try:
            return self._value(node)
        except DslError:
            raise
        except (KappaForgeError, ValueError, ZeroDivisionError) as exc:
            raise EvalError(f"{type(exc).__name__}: {exc}", node.pos) from exc

    def _value(self, node: Node):
        k = self.kappa
        if isinstance(node, Num):
            return complex(node.value)
        if isinstance(node, Complex):
            return complex(node.re, node.im)
        if isinstance(node, Str):
            return node.value
        if isinstance(node, Name):
            n = node.id
            if n == "t":
                return sym.T
            if n == "x":
                return sym.X
            if n == "one":
                return sym.ONE
            if n == "i":
                return 1j
            if n in ("kappa", "κ"):
                return complex(k)
            if n in OPERATORS:
                return OPERATORS[n]
            found = self.resolve(n, self)
            if found is not None:
                return found
            return preset(n).sample(self.spec)
        if isinstance(node, Neg):
            return _scale(-1, self.value(node.operand))
        if isinstance(node, Assign):
            return self.value(node.value)
        if isinstance(node, Bin):
            return self._binary(node.op, self.value(node.left), self.value(node.right))
        if isinstance(node, Call):
            args = [self.value(a) for a in node.args]
            kwargs = {key: self.value(v) for key, v in node.kwargs}
            return self._call(node.func, args, kwargs)
        raise DslTypeError(f"cannot evaluate {node!r}", node.pos)

    def _binary(self, op, a, b):
        if op == "/":
            return _scale(1 / b, a)
        if op in "+-":
            sign = 1 if op == "+" else -1
            a, b = _promote(a, b), _promote(b, a)
            if isinstance(a, complex):
                return a + sign * b
            if isinstance(a, Form):
                return a + b if sign > 0 else a - b
            if isinstance(a, (sym.Element, SpectralGrid, OperatorExpr)):
                return a + b if sign > 0 else a - b
            if isinstance(a, PolyWord):
                return a + sign * b
        if isinstance(a, complex):
            return _scale(a, b)
        if isinstance(b, complex):
            return _scale(b, a)
        if isinstance(a, sym.Element) and isinstance(b, sym.Element):
            return sym.star_mul(a, b, self.kappa)
        if isinstance(a, SpectralGrid) and isinstance(b, SpectralGrid):
            return self.grid_calc.backend.star(a, b)
        if isinstance(a, OperatorExpr):
            return a @ b
        if isinstance(a, PolyWord):
            return a * b
        if isinstance(b, Form):
            return self.calc_for(_backend_of(a)).left_mul(a, b)
        if isinstance(a, Form):
            return self.calc_for(_backend_of(b)).right_mul(a, b)
        raise DslTypeError(f"cannot multiply {type(a).__name__} and {type(b).__name__}")

    def _to_form(self, f):
        if isinstance(f, Form):
            return f
        return self.calc_for(_backend_of(f)).function(f)

    def _call(self, f, args, kwargs):
        k = self.kappa
        if f == "adj":
            g = args[0]
            return sym.involution(g, k) if isinstance(g, sym.Element) else grid_involution(g, k)
        if f == "T":
            gamma, g = args
            gamma = _real(gamma)
            if isinstance(g, Form):
                return self.calc_for(_form_backend(g)).translate_form(gamma, g)
            return sym.translate(gamma, g) if isinstance(g, sym.Element) else grid_translate(gamma, g)
        if f == "act":
            h, g = args
            if isinstance(g, PolyWord):
                return act_word(h, g, k)
            if isinstance(g, sym.Element):
                return apply_op(h, g, k)
            return grid_apply_op(h, g, k)
        if f == "d":
            g = args[0]
            if isinstance(g, Form):
                return self.calc_for(_form_backend(g)).d(g)
            return self.calc_for(_backend_of(g)).d0(g)
        if f == "wedge":
            a, b = (self._to_form(x) for x in args)
            return self.calc_for(_form_backend(a)).wedge(a, b)
        if f == "lmul":
            return self.calc_for(_backend_of(args[0])).left_mul(args[0], args[1])
        if f == "rmul":
            return self.calc_for(_backend_of(args[1])).right_mul(args[0], args[1])
        if f == "trace":
            return lebesgue_integral(args[0])
        if f == "gtrace":
            return graded_trace(args[0])
        if f == "phi":
            return cocycle_phi(*args, self.grid_calc)
        if f == "comm":
            a, b = args
            if isinstance(a, sym.Element):
                return sym.commutator(a, b, k)
            star = self.grid_calc.backend.star
            return star(a, b) - star(b, a)
        if f == "eval":
            g, alpha, beta = args
            if isinstance(g, sym.Element):
                return complex(sym.eval_point(g, alpha, _real(beta)))
            return grid_eval(g, alpha, _real(beta))
        if f == "jstar":
            return j_star(args[0], args[1], k)
        if f == "eta":
            return eta_act(_real(args[0]), _real(args[1]), args[2])
        if f == "word":
            return PolyWord.word(args[0])
        if f == "elem":
            return word_eval(args[0], k)
        # fixtures
        base = "bump1" if f == "bump" else "gauss1"
        over = {key: (val if key == "profile" else _real(val) if key != "c" else val)
                for key, val in kwargs.items()}
        return preset(base, **over).sample(self.spec)


def _real(z) -> float:
    z = complex(z)
    if abs(z.imag) > 1e-15 * max(1.0, abs(z.real)):
        raise ValueError(f"expected a real number, got {z}")
    return z.real


def _backend_of(f) -> str:
    return ELEMENT if isinstance(f, sym.Element) else GRID


def _form_backend(w: Form) -> str:
    return GRID if w.backend.__class__.__name__ == "GridBackend" else ELEMENT


def _promote(a, other):
    if isinstance(a, complex) and not isinstance(other, complex):
        if isinstance(other, sym.Element):
            return sym.Element.scalar(a)
        if isinstance(other, PolyWord):
            return PolyWord({"": a})
        if isinstance(other, OperatorExpr):
            return a * IDENTITY
    return a


def _scale(c, v):
    if isinstance(v, complex):
        return c * v
    if isinstance(v, (sym.Element, SpectralGrid, PolyWord, Form)):
        return c * v
    if isinstance(v, OperatorExpr):
        return complex(c) * v
    raise DslTypeError(f"cannot scale {type(v).__name__}")


# -- kappa-aware printing ---------------------------------------------------------

_PROBES = (0.5, 0.8, 1.25, 1.6, 2.0, 2.5, 3.2, 4.0, 5.0)
_POWERS = tuple(range(-3, 4))
_SUPER = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def _fit_laurent(samples: dict[float, complex]) -> dict[int, complex] | None:
    ks = np.array(sorted(samples))
    vals = np.array([samples[x] for x in ks])
    A = np.array([[x ** p for p in _POWERS] for x in ks])
    coef, *_ = np.linalg.lstsq(A.astype(complex), vals, rcond=None)
    out = {}
    for p, c in zip(_POWERS, coef):
        re = Fraction(float(c.real)).limit_denominator(48)
        im = Fraction(float(c.imag)).limit_denominator(48)
        if re or im:
            out[p] = (re, im)
    for x, v in samples.items():
        rec = sum(complex(float(re), float(im)) * x ** p for p, (re, im) in out.items())
        if abs(rec - v) > 1e-9 * max(1.0, abs(v)):
            return None
    return out


def _rational_part(q: Fraction, imag: bool, p: int) -> tuple[str, str]:
    """(sign, body) for q * (i if imag) * kappa^p."""
    sign = "-" if q < 0 else ""
    q = abs(q)
    num = [] if q.numerator == 1 and (imag or p > 0) else [str(q.numerator)]
    if imag:
        num.append("i")
    if p > 0:
        num.append("κ" + (str(p).translate(_SUPER) if p > 1 else ""))
    den = [] if q.denominator == 1 else [str(q.denominator)]
    if p < 0:
        den.append("κ" + (str(-p).translate(_SUPER) if p < -1 else ""))
    body = "".join(num) or "1"
    if den:
        body += "/" + "".join(den)
    return sign, body


def format_kappa_coeff(parts: dict[int, tuple[Fraction, Fraction]]) -> str:
    pieces = []
    for p in sorted(parts, reverse=True):
        re, im = parts[p]
        if re:
            pieces.append(_rational_part(re, False, p))
        if im:
            pieces.append(_rational_part(im, True, p))
    text = ""
    for n, (sign, body) in enumerate(pieces):
        if n == 0:
            text = sign + body
        else:
            text += (" - " if sign else " + ") + body
    return text


def _monomial(m: int, n: int) -> str:
    parts = []
    if n:
        parts.append("x" if n == 1 else f"x^{n}")
    if m:
        parts.append("t" if m == 1 else f"t^{m}")
    return "·".join(parts)


def _combine_text(coeff: str, mono: str) -> str:
    if not mono:
        return coeff
    if coeff == "1":
        return mono
    if coeff == "-1":
        return "-" + mono
    simple = re.fullmatch(r"-?(?:[0-9]+|[0-9]*i)", coeff)
    return f"{coeff}·{mono}" if simple else f"({coeff})·{mono}"


def kappa_format_word(samples: dict[float, PolyWord]) -> str | None:
    words = set()
    for w in samples.values():
        words |= set(w.terms)
    parts = []
    for word in sorted(words, key=lambda w: (len(w), w)):
        fit = _fit_laurent({kv: w.terms.get(word, 0j) for kv, w in samples.items()})
        if fit is None:
            return None
        if fit:
            parts.append(_combine_text(format_kappa_coeff(fit), "·".join(word)))
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


def kappa_format_element(samples: dict[float, sym.Element]) -> str | None:
    """Print a polynomial element with kappa kept symbolic, or None if not possible."""
    keys = None
    for el in samples.values():
        if any(t.a or t.b or t.w for t in el.terms):
            return None
        ks = {(t.m, t.n) for t in el.terms}
        keys = ks if keys is None else keys | ks
    parts = []
    for m, n in sorted(keys or (), key=lambda mn: (mn[0] + mn[1], mn[0])):
        vals = {}
        for kv, el in samples.items():
            vals[kv] = sum((t.coeff for t in el.terms if (t.m, t.n) == (m, n)), 0j)
        fit = _fit_laurent(vals)
        if fit is None:
            return None
        if fit:
            parts.append(_combine_text(format_kappa_coeff(fit), _monomial(m, n)))
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


# -- session ----------------------------------------------------------------------

@dataclass
class Binding:
    type: Any
    value: Any
    ast: Node


class Session:
    """One kappa, one grid box, and a table of user-defined names."""

    def __init__(self, kappa: float = 1.0, spec: GridSpec | None = None,
                 tolerances: Tolerances | None = None):
        self.kappa = float(sym.Kappa(float(kappa)))
        self.spec = spec or GridSpec()
        self.tolerances = tolerances or Tolerances()
        self.symbols: dict[str, Binding] = {}
        self.evaluator = Evaluator(self.kappa, self.spec, self._resolve)

    def _resolve(self, name: str, ev: Evaluator):
        b = self.symbols.get(name)
        if b is None:
            return None
        if ev is self.evaluator:
            return b.value
        return ev.value(b.ast)

    def types(self) -> dict[str, Any]:
        return {n: b.type for n, b in self.symbols.items()}

    def check(self, node: Node):
        return check(node, self.types())

    def evaluate(self, node: Node):
        if isinstance(node, Assign):
            if node.name in RESERVED or node.name in CALLS or node.name in EXTRA_CALLS:
                raise NameCollision(f"{node.name!r} is a built-in name", node.pos)
            if node.name in self.symbols:
                raise NameCollision(f"{node.name!r} is already defined", node.pos)
        t = self.check(node)
        value = self.evaluator.value(node)
        if isinstance(node, Assign):
            self.symbols[node.name] = Binding(t, value, node.value)
        return t, value

    def run(self, src: str) -> list[tuple[Node, Any, Any]]:
        out = []
        for node in parse_program(src):
            t, value = self.evaluate(node)
            out.append((node, t, value))
        return out

    def show(self, node: Node, value) -> str:
        return render(value, lambda: self._probe(node))

    def _probe(self, node: Node):
        out = {self.kappa: self.evaluator.value(node)}
        for kv in _PROBES:
            if kv != self.kappa:
                ev = Evaluator(kv, self.spec, self._resolve)
                out[kv] = ev.value(node)
        return out

    def execute(self, src: str) -> list[str]:
        lines = []
        for node, _, value in self.run(src):
            text = self.show(node, value)
            lines.append(f"{node.name} = {text}" if isinstance(node, Assign) else text)
        return lines


def render(value, probe=None) -> str:
    if isinstance(value, complex):
        return sym.format_complex(value)
    if isinstance(value, str):
        return value
    if isinstance(value, sym.Element):
        if probe is not None:
            text = kappa_format_element(probe())
            if text is not None:
                return text
        return sym.format_element(value)
    if isinstance(value, PolyWord) and probe is not None:
        text = kappa_format_word(probe())
        return str(value) if text is None else text
    if isinstance(value, Form):
        if probe is not None and _form_backend(value) == ELEMENT:
            samples = probe()
            bases = set()
            for w in samples.values():
                bases |= set(w.coeffs)
            pieces = []
            for b in sorted(bases):
                text = kappa_format_element({kv: w[b] for kv, w in samples.items()})
                if text is None:
                    return str(value)
                if text != "0":
                    name = "^".join(("dx", "psi+", "psi-")[g] for g in b)
                    body = f"({text})" if " " in text or text.startswith("-") else text
                    pieces.append(f"{name}·{body}" if name else body)
            return " + ".join(pieces) if pieces else "0"
        return str(value)
    if isinstance(value, SpectralGrid):
        return repr(value)
    if isinstance(value, OperatorExpr):
        from .hopf import format_operator
        return format_operator(value)
    return str(value)


def to_jsonable(value):
    """JSON form of a DSL value (used by the CLI's --out json)."""
    if isinstance(value, complex):
        return {"type": SCALAR, "value": [value.real, value.imag]}
    if isinstance(value, sym.Element):
        return {"type": ELEMENT, "terms": sym.element_to_json(value)}
    if isinstance(value, PolyWord):
        return {"type": WORD, "terms": value.to_json()}
    if isinstance(value, Form):
        return {"type": "form", **value.to_json()}
    if isinstance(value, SpectralGrid):
        from .spectral import norm_l1
        return {"type": GRID, "l1": norm_l1(value), "spec": value.spec.__dict__}
    if isinstance(value, OperatorExpr):
        from .hopf import format_operator
        return {"type": OP, "expr": format_operator(value)}
    return {"type": STRING, "value": str(value)}

