"""Exact closed-form arithmetic for the kappa-Minkowski star product.

Elements are finite sums of terms

    c * alpha**m * exp(i a alpha) * beta**n * exp(i b beta) * exp(-w beta**2)

which is a class closed under the star product, the involution and the
complex translations T_gamma.  Coefficients are complex floats, so every
identity holds up to roundoff.

Star product of a single plane-wave term f = alpha**m e^{i a alpha} h(beta)
with an arbitrary g::

    (f * g)(alpha, beta) = h(beta) (-i d/da)^m [ e^{i a alpha} g(alpha, e^{-a/kappa} beta) ]

The derivative in ``a`` is carried out exactly on a small monomial basis
(see :func:`_differentiate_carrier`).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

KEY_TOL = 1e-12
DROP_EPS = 1e-14


@dataclass(frozen=True)
class Kappa:
    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"kappa must be a positive finite real, got {self.value!r}")

    def __float__(self):
        return float(self.value)


def _kappa(kappa) -> float:
    return float(kappa.value) if isinstance(kappa, Kappa) else float(Kappa(float(kappa)))


@dataclass(frozen=True)
class Term:
    coeff: complex
    m: int = 0
    a: float = 0.0
    n: int = 0
    b: float = 0.0
    w: float = 0.0

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("alpha and beta powers must be non-negative")
        if self.w < 0:
            raise ValueError(f"beta width must be non-negative, got {self.w}")

    @property
    def key(self):
        return (self.m, self.a, self.n, self.b, self.w)

    def __call__(self, alpha, beta):
        c = self.coeff * alpha ** self.m * cmath.exp(1j * self.a * alpha)
        return c * beta ** self.n * cmath.exp(1j * self.b * beta - self.w * beta * beta)


def _same_key(k1, k2, tol=KEY_TOL):
    return (k1[0] == k2[0] and k1[2] == k2[2]
            and abs(k1[1] - k2[1]) <= tol
            and abs(k1[3] - k2[3]) <= tol
            and abs(k1[4] - k2[4]) <= tol)


def _canonical(terms: Iterable[Term], tol=KEY_TOL) -> tuple[Term, ...]:
    groups: dict[tuple[int, int], list[list]] = {}
    for t in terms:
        if t.coeff == 0:
            continue
        bucket = groups.setdefault((t.m, t.n), [])
        for entry in bucket:
            if _same_key(entry[0], t.key, tol):
                entry[1] += t.coeff
                break
        else:
            bucket.append([t.key, complex(t.coeff)])
    out = []
    for bucket in groups.values():
        for key, c in bucket:
            if abs(c) > DROP_EPS:
                m, a, n, b, w = key
                out.append(Term(c, m, a + 0.0, n, b + 0.0, w + 0.0))
    out.sort(key=lambda t: t.key)
    return tuple(out)


class Element:
    """Immutable, canonicalized finite sum of :class:`Term`."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Term] = ()):
        object.__setattr__(self, "terms", _canonical(terms))

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    @classmethod
    def scalar(cls, c) -> "Element":
        return cls([Term(complex(c))])

    @classmethod
    def zero(cls) -> "Element":
        return cls()

    @classmethod
    def one(cls) -> "Element":
        return cls.scalar(1)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __add__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return Element(self.terms + other.terms)

    def __sub__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __rmul__(self, c):
        # scalar multiple only; the star product is star_mul()
        if isinstance(c, Element):
            return NotImplemented
        c = complex(c)
        return Element(Term(c * t.coeff, *t.key) for t in self.terms)

    def __call__(self, alpha, beta):
        return eval_point(self, alpha, beta)

    def __repr__(self):
        return f"Element({format_element(self)})"

    def __str__(self):
        return format_element(self)


# generators of the algebra: t = i_alpha, x = i_beta
T = Element([Term(1.0, m=1)])
X = Element([Term(1.0, n=1)])
ONE = Element.one()
ZERO = Element.zero()


def plane_wave(a=0.0, b=0.0, w=0.0, coeff=1.0, m=0, n=0) -> Element:
    return Element([Term(complex(coeff), m, float(a), n, float(b), float(w))])


def linear_combine(pairs: Iterable[tuple[complex, Element]]) -> Element:
    terms = []
    for c, f in pairs:
        c = complex(c)
        terms.extend(Term(c * t.coeff, *t.key) for t in f.terms)
    return Element(terms)


# -- exact differentiation in the spectral parameter ------------------------

def _differentiate_carrier(init, times, factor, sigma, tau, B, W):
    """Apply ``(factor * d/da)**times`` to ``sum c * alpha^p beta^q e^{s tau a} * E(a)``.

    ``E(a) = exp(i sigma a alpha + i B e^{tau a} beta - W e^{2 tau a} beta^2)``.
    Monomials are keyed by (p, q, s).
    """
    cur = dict(init)
    for _ in range(times):
        nxt: dict[tuple[int, int, int], complex] = {}
        for (p, q, s), c in cur.items():
            c = c * factor
            for key, dc in (((p, q, s), s * tau),
                            ((p + 1, q, s), 1j * sigma),
                            ((p, q + 1, s + 1), 1j * B * tau),
                            ((p, q + 2, s + 2), -2.0 * W * tau)):
                if dc != 0:
                    nxt[key] = nxt.get(key, 0) + c * dc
        cur = nxt
    return cur


def _star_terms(f: Term, g: Term, kappa: float) -> list[Term]:
    tau = -1.0 / kappa
    lam = math.exp(tau * f.a)
    init = {(g.m, g.n, g.n): g.coeff}
    mono = _differentiate_carrier(init, f.m, -1j, 1.0, tau, g.b, g.w)
    out = []
    b = g.b * lam + f.b
    w = g.w * lam * lam + f.w
    for (p, q, s), c in mono.items():
        out.append(Term(f.coeff * c * lam ** s, p, f.a + g.a, q + f.n, b, w))
    return out


def star_mul(f: Element, g: Element, kappa) -> Element:
    k = _kappa(kappa)
    terms = []
    for tf in f.terms:
        for tg in g.terms:
            terms.extend(_star_terms(tf, tg, k))
    return Element(terms)


def star_chain(factors: Sequence[Element], kappa) -> Element:
    out = ONE
    for f in factors:
        out = star_mul(out, f, kappa)
    return out


def commutator(f: Element, g: Element, kappa) -> Element:
    return star_mul(f, g, kappa) - star_mul(g, f, kappa)


def involution(f: Element, kappa) -> Element:
    k = _kappa(kappa)
    tau = 1.0 / k
    terms = []
    for t in f.terms:
        lam = math.exp(tau * t.a)
        init = {(0, t.n, t.n): t.coeff.conjugate()}
        mono = _differentiate_carrier(init, t.m, 1j, -1.0, tau, -t.b, t.w)
        for (p, q, s), c in mono.items():
            terms.append(Term(c * lam ** s, p, -t.a, q, -t.b * lam, t.w * lam * lam))
    return Element(terms)


def translate(gamma: float, f: Element) -> Element:
    """T_gamma: f(alpha, beta) -> f(alpha + i gamma, beta)."""
    gamma = float(gamma)
    terms = []
    for t in f.terms:
        damp = t.coeff * math.exp(-t.a * gamma)
        shift = 1j * gamma
        for j in range(t.m + 1):
            c = damp * math.comb(t.m, j) * shift ** (t.m - j)
            terms.append(Term(c, j, t.a, t.n, t.b, t.w))
    return Element(terms)


def d_alpha(f: Element) -> Element:
    terms = []
    for t in f.terms:
        if t.m:
            terms.append(Term(t.coeff * t.m, t.m - 1, t.a, t.n, t.b, t.w))
        terms.append(Term(t.coeff * 1j * t.a, *t.key))
    return Element(terms)


def d_beta(f: Element) -> Element:
    terms = []
    for t in f.terms:
        if t.n:
            terms.append(Term(t.coeff * t.n, t.m, t.a, t.n - 1, t.b, t.w))
        terms.append(Term(t.coeff * 1j * t.b, *t.key))
        terms.append(Term(t.coeff * -2.0 * t.w, t.m, t.a, t.n + 1, t.b, t.w))
    return Element(terms)


def eval_point(f: Element, alpha, beta) -> complex:
    return complex(sum((t(alpha, beta) for t in f.terms), 0j))


def equals_within(f: Element, g: Element, tol: float) -> bool:
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    diff = linear_combine([(1, f), (-1, g)])
    return all(abs(t.coeff) <= tol for t in diff.terms)


def max_residual(f: Element, g: Element) -> float:
    diff = linear_combine([(1, f), (-1, g)])
    return max((abs(t.coeff) for t in diff.terms), default=0.0)


# -- printing and serialization ----------------------------------------------

def _fmt_real(x: float) -> str:
    s = format(x, ".12g")
    return "0" if s == "-0" else s


def format_complex(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0:
        return _fmt_real(re)
    if re == 0:
        return f"{_fmt_real(im)}i"
    sign = "+" if im >= 0 else "-"
    return f"({_fmt_real(re)}{sign}{_fmt_real(abs(im))}i)"


def format_term(t: Term) -> str:
    factors = []
    if t.m:
        factors.append("α" if t.m == 1 else f"α^{t.m}")
    if t.a:
        factors.append(f"e^(i{_fmt_real(t.a)}α)")
    if t.n:
        factors.append("β" if t.n == 1 else f"β^{t.n}")
    if t.b:
        factors.append(f"e^(i{_fmt_real(t.b)}β)")
    if t.w:
        factors.append(f"e^(-{_fmt_real(t.w)}β²)")
    if not factors:
        return format_complex(t.coeff)
    if t.coeff == 1:
        return "·".join(factors)
    if t.coeff == -1:
        return "-" + "·".join(factors)
    return format_complex(t.coeff) + "·" + "·".join(factors)


def format_element(f: Element) -> str:
    if not f.terms:
        return "0"
    return " + ".join(format_term(t) for t in f.terms)


def element_to_json(f: Element) -> list[dict]:
    return [{"coeff": [t.coeff.real, t.coeff.imag], "m": t.m, "a": t.a,
             "n": t.n, "b": t.b, "w": t.w} for t in f.terms]


def element_from_json(data) -> Element:
    if isinstance(data, str):
        data = json.loads(data)
    return Element(Term(complex(*d["coeff"]), int(d["m"]), float(d["a"]),
                        int(d["n"]), float(d["b"]), float(d["w"])) for d in data)


def dumps(f: Element) -> str:
    return json.dumps(element_to_json(f))


def loads(s: str) -> Element:
    return element_from_json(json.loads(s))


def random_element(rng, n_terms: int = 2, max_power: int = 2, plane_waves: bool = True) -> Element:
    """Random element for property checks; ``rng`` is a numpy Generator."""
    terms = []
    for _ in range(n_terms):
        c = complex(rng.normal(), rng.normal())
        m, n = int(rng.integers(0, max_power + 1)), int(rng.integers(0, max_power + 1))
        a = float(rng.uniform(-1, 1)) if plane_waves else 0.0
        b = float(rng.uniform(-1, 1)) if plane_waves else 0.0
        w = float(rng.uniform(0, 0.5)) if plane_waves and rng.random() < 0.5 else 0.0
        terms.append(Term(c, m, a, n, b, w))
    return Element(terms)
