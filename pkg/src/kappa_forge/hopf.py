"""kappa-Poincare generators acting on the star-product algebra.

E, P and the group-like EPS (with its inverse) act on symbolic Elements:
E by d/dalpha, P by d/dbeta, EPS by the translation T_{1/kappa}.  The boost N
has no realization on general Elements; it acts on PolyWords (star
polynomials in t, x) through the coproduct recursion

    N |> (y w) = (N |> y) w + (EPS |> y)(N |> w).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import UnknownRelation, UnsupportedGenerator
from . import symbolic as sym
from .symbolic import Element, _kappa

GENERATORS = ("E", "P", "eps", "epsinv", "N")
_ALIASES = {"E": "E", "P": "P", "N": "N", "eps": "eps", "EPS": "eps",
            "epsinv": "epsinv", "EPS_INV": "epsinv", "EPSINV": "epsinv"}
_COUNIT = {"E": 0.0, "P": 0.0, "N": 0.0, "eps": 1.0, "epsinv": 1.0}

# coproduct: list of (left leg, right leg); () is the identity
COPRODUCT = {
    "E": ((("E",), ()), ((), ("E",))),
    "P": ((("P",), ()), (("eps",), ("P",))),
    "N": ((("N",), ()), (("eps",), ("N",))),
    "eps": ((("eps",), ("eps",)),),
    "epsinv": ((("epsinv",), ("epsinv",)),),
}


def _reduce_word(word: tuple[str, ...]) -> tuple[str, ...]:
    out: list[str] = []
    for g in word:
        if out and {out[-1], g} == {"eps", "epsinv"}:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


class OperatorExpr:
    """Linear combination of compositions of Hopf generators.

    Stored normalized as ``{word: coeff}`` where a word is a tuple of
    generator names; the rightmost generator acts first.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[str, ...], complex] | None = None):
        acc: dict[tuple[str, ...], complex] = {}
        for word, c in (terms or {}).items():
            word = _reduce_word(tuple(word))
            for g in word:
                if g not in GENERATORS:
                    raise ValueError(f"unknown generator {g!r}")
            acc[word] = acc.get(word, 0) + complex(c)
        self.terms = {w: c for w, c in sorted(acc.items()) if c != 0}

    @classmethod
    def gen(cls, name: str) -> "OperatorExpr":
        if name in ("id", "1"):
            return cls({(): 1})
        return cls({(_ALIASES[name],): 1})

    def __add__(self, other):
        other = _as_op(other)
        acc = dict(self.terms)
        for w, c in other.terms.items():
            acc[w] = acc.get(w, 0) + c
        return OperatorExpr(acc)

    __radd__ = __add__

    def __neg__(self):
        return (-1) * self

    def __sub__(self, other):
        return self + (-1) * _as_op(other)

    def __rsub__(self, other):
        return _as_op(other) - self

    def __mul__(self, c):
        if isinstance(c, OperatorExpr):
            return NotImplemented
        return OperatorExpr({w: complex(c) * v for w, v in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = _as_op(other)
        acc: dict[tuple[str, ...], complex] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = _reduce_word(w1 + w2)
                acc[w] = acc.get(w, 0) + c1 * c2
        return OperatorExpr(acc)

    def __pow__(self, n: int):
        out = IDENTITY
        for _ in range(n):
            out = out @ self
        return out

    def __eq__(self, other):
        return isinstance(other, OperatorExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def mentions(self, name: str) -> bool:
        return any(name in w for w in self.terms)

    def __repr__(self):
        return f"OperatorExpr({format_operator(self)!r})"

    def __str__(self):
        return format_operator(self)


def _as_op(x) -> OperatorExpr:
    if isinstance(x, OperatorExpr):
        return x
    return OperatorExpr({(): complex(x)})


IDENTITY = OperatorExpr({(): 1})
E = OperatorExpr.gen("E")
P = OperatorExpr.gen("P")
N = OperatorExpr.gen("N")
EPS = OperatorExpr.gen("eps")
EPS_INV = OperatorExpr.gen("epsinv")


def counit(h: OperatorExpr) -> complex:
    total = 0j
    for word, c in h.terms.items():
        v = c
        for g in word:
            v *= _COUNIT[g]
        total += v
    return total


# -- prefix notation ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|(,)|([A-Za-z_][A-Za-z_0-9]*)|([-+]?[0-9.]+(?:[eE][-+]?\d+)?(?:[-+][0-9.]+(?:[eE][-+]?\d+)?j|j)?))")


def parse_operator(text: str, kappa=None) -> OperatorExpr:
    """Parse prefix notation such as ``sum(compose(epsinv,P), scale(-1,id))``.

    Scalars are Python complex literals (``2``, ``1j``, ``0.5-2j``); the names
    ``i`` and ``kappa`` are accepted inside ``scale``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse operator at column {pos + 1}: {text[pos:]!r}")
        tokens.append(m.group().strip())
        pos = m.end()
    idx = [0]

    def peek():
        return tokens[idx[0]] if idx[0] < len(tokens) else None

    def take(expected=None):
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'token'}, found {tok!r}")
        idx[0] += 1
        return tok

    def scalar():
        tok = take()
        if tok == "i":
            return 1j
        if tok == "kappa":
            if kappa is None:
                raise ValueError("kappa not available in this context")
            return _kappa(kappa)
        return complex(tok)

    def expr():
        name = take()
        if peek() != "(":
            if name in ("id", "1"):
                return IDENTITY
            if name not in _ALIASES:
                raise ValueError(f"unknown operator {name!r}")
            return OperatorExpr.gen(name)
        take("(")
        if name == "scale":
            c = scalar()
            take(",")
            args = [c, expr()]
        else:
            args = [expr()]
            while peek() == ",":
                take(",")
                args.append(expr())
        take(")")
        if name == "compose":
            out = args[0]
            for a in args[1:]:
                out = out @ a
            return out
        if name == "sum":
            out = args[0]
            for a in args[1:]:
                out = out + a
            return out
        if name == "scale":
            return args[0] * args[1]
        if name == "neg" and len(args) == 1:
            return -args[0]
        raise ValueError(f"unknown combinator {name!r}")

    out = expr()
    if peek() is not None:
        raise ValueError(f"trailing input {peek()!r}")
    return out


def format_operator(h: OperatorExpr) -> str:
    parts = []
    for word, c in h.terms.items():
        if not word:
            base = "id"
        elif len(word) == 1:
            base = word[0]
        else:
            base = "compose(" + ",".join(word) + ")"
        parts.append(base if c == 1 else f"scale({repr(c).strip('()')},{base})")
    if not parts:
        return "scale(0j,id)"
    return parts[0] if len(parts) == 1 else "sum(" + ",".join(parts) + ")"


# -- action on symbolic elements ----------------------------------------------

def _apply_generator(g: str, f: Element, k: float) -> Element:
    if g == "E":
        return sym.d_alpha(f)
    if g == "P":
        return sym.d_beta(f)
    if g == "eps":
        return sym.translate(1.0 / k, f)
    if g == "epsinv":
        return sym.translate(-1.0 / k, f)
    raise UnsupportedGenerator(f"generator {g!r} has no action on Elements")


def apply_op(h: OperatorExpr, f: Element, kappa) -> Element:
    if isinstance(h, str):
        h = parse_operator(h, kappa)
    k = _kappa(kappa)
    if h.mentions("N"):
        raise UnsupportedGenerator("the boost N acts only on PolyWords")
    pairs = []
    for word, c in h.terms.items():
        v = f
        for g in reversed(word):
            v = _apply_generator(g, v, k)
        pairs.append((c, v))
    return sym.linear_combine(pairs)


def twisted_product_action(h: str, f: Element, g: Element, kappa) -> Element:
    """Coproduct-expanded action of a generator on ``f * g``."""
    h = _ALIASES.get(h, h) if isinstance(h, str) else h
    if isinstance(h, OperatorExpr):
        (word,) = h.terms
        (h,) = word
    if h not in ("E", "P", "eps", "epsinv"):
        raise UnsupportedGenerator(f"no product rule on Elements for {h!r}")
    pairs = []
    for left, right in COPRODUCT[h]:
        lf = apply_op(OperatorExpr({left: 1}), f, kappa)
        rg = apply_op(OperatorExpr({right: 1}), g, kappa)
        pairs.append((1, sym.star_mul(lf, rg, kappa)))
    return sym.linear_combine(pairs)


# -- star polynomials -----------------------------------------------------------

class PolyWord:
    """Linear combination of ordered words over the letters ``t`` and ``x``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[str, complex] | Iterable[tuple[str, complex]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[str, complex] = {}
        for word, c in items:
            word = word.lower()
            if set(word) - {"t", "x"}:
                raise ValueError(f"words use letters t and x only, got {word!r}")
            acc[word] = acc.get(word, 0) + complex(c)
        self.terms = {w: c for w, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0]))
                      if abs(c) > sym.DROP_EPS}

    @classmethod
    def word(cls, w: str, c=1.0) -> "PolyWord":
        return cls({w: c})

    def __add__(self, other):
        return PolyWord(list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, c):
        return PolyWord({w: complex(c) * v for w, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PolyWord):
            return complex(other) * self
        acc: list[tuple[str, complex]] = []
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                acc.append((w1 + w2, c1 * c2))
        return PolyWord(acc)

    def __eq__(self, other):
        return isinstance(other, PolyWord) and self.terms == other.terms

    def __repr__(self):
        return f"PolyWord({self.terms!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.terms.items():
            word = "·".join(w) if w else "1"
            parts.append(word if c == 1 else f"{sym.format_complex(c)}·{word}")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [{"coeff": [c.real, c.imag], "word": w} for w, c in self.terms.items()]

    @classmethod
    def from_json(cls, data) -> "PolyWord":
        return cls([(d["word"], complex(*d["coeff"])) for d in data])


def word_eval(w: PolyWord, kappa) -> Element:
    gens = {"t": sym.T, "x": sym.X}
    pairs = []
    for word, c in w.terms.items():
        pairs.append((c, sym.star_chain([gens[ch] for ch in word], kappa)))
    return sym.linear_combine(pairs)


def _letter_action(g: str, letter: str, k: float) -> dict[str, complex]:
    if g == "E":
        return {"": 1} if letter == "t" else {}
    if g == "P":
        return {"": 1} if letter == "x" else {}
    if g == "N":
        return {"x": -1} if letter == "t" else {"t": -1}
    if g == "eps":
        return {"t": 1, "": 1j / k} if letter == "t" else {"x": 1}
    if g == "epsinv":
        return {"t": 1, "": -1j / k} if letter == "t" else {"x": 1}
    raise UnsupportedGenerator(g)


@lru_cache(maxsize=None)
def _act_word(g: str, word: str, k: float) -> tuple[tuple[str, complex], ...]:
    if not word:
        return (("", _COUNIT[g]),) if _COUNIT[g] else ()
    head, tail = word[0], word[1:]
    acc: dict[str, complex] = {}
    for left, right in COPRODUCT[g]:
        lpart = _letter_action(left[0], head, k) if left else {head: 1}
        rpart = dict(_act_word(right[0], tail, k)) if right else {tail: 1}
        for w1, c1 in lpart.items():
            for w2, c2 in rpart.items():
                acc[w1 + w2] = acc.get(w1 + w2, 0) + c1 * c2
    return tuple(acc.items())


def act_word(h: OperatorExpr | str, w: PolyWord, kappa) -> PolyWord:
    """Action of an operator expression (N allowed) on a PolyWord."""
    k = _kappa(kappa)
    if isinstance(h, str):
        h = parse_operator(h, k) if "(" in h or h not in _ALIASES else OperatorExpr.gen(h)
    acc: list[tuple[str, complex]] = []
    for opword, coeff in h.terms.items():
        cur = dict(w.terms)
        for g in reversed(opword):
            nxt: dict[str, complex] = {}
            for word, c in cur.items():
                for w2, c2 in _act_word(g, word, k):
                    nxt[w2] = nxt.get(w2, 0) + c * c2
            cur = nxt
        acc.extend((word, coeff * c) for word, c in cur.items())
    return PolyWord(acc)


def boost_act(w: PolyWord, kappa) -> PolyWord:
    return act_word(N, w, kappa)


# -- Hopf relations --------------------------------------------------------------

def _comm(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return a @ b - b @ a


def relation_catalog(kappa) -> dict[str, tuple[OperatorExpr, OperatorExpr]]:
    k = _kappa(kappa)
    return {
        "[P,E]": (_comm(P, E), OperatorExpr()),
        "[N,E]": (_comm(N, E), P),
        "[N,EPS]": (_comm(N, EPS), (1j / k) * (EPS @ P)),
        "[N,P]": (_comm(N, P), (0.5j * k) * (IDENTITY - EPS @ EPS) + (0.5j / k) * (P @ P)),
    }


@dataclass
class RelationReport:
    relation: str
    residuals: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def relation_check(rel: str, samples: Iterable[PolyWord | str], kappa) -> RelationReport:
    catalog = relation_catalog(kappa)
    key = rel.replace(" ", "").replace("ℰ", "EPS")
    if key not in catalog:
        raise UnknownRelation(f"unknown relation {rel!r}; known: {sorted(catalog)}")
    lhs, rhs = catalog[key]
    residuals = {}
    for s in samples:
        w = PolyWord.word(s) if isinstance(s, str) else s
        left = word_eval(act_word(lhs, w, kappa), kappa)
        right = word_eval(act_word(rhs, w, kappa), kappa)
        residuals[str(w)] = sym.max_residual(left, right)
    return RelationReport(key, residuals)


def all_words(max_len: int) -> list[str]:
    words = [""]
    frontier = [""]
    for _ in range(max_len):
        frontier = [w + c for w in frontier for c in "tx"]
        words.extend(frontier)
    return words
