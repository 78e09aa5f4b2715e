"""Three-dimensional covariant differential calculus over the star algebra.

One-forms are generated by dx, psi+ and psi-; forms are stored as
``sum basis . f`` with the coefficient to the right of an ordered basis
monomial.  Functions are moved to the right with the bimodule rules

    f dx   = dx f + psi- (i/k)(P f)
    f psi+ = psi+ (EPS^-1 f) + dx (2i/k)(EPS^-1 P f) - psi- (1/k^2)(EPS^-1 P^2 f)
    f psi- = psi- (EPS f)

and the exterior derivative on functions is

    d f = dx (EPS^-1 P f) - (i k/2) psi+ ((EPS^-1 - 1) f)
          + 1/2 psi- (((i/k) EPS^-1 P^2 + i k (EPS - 1)) f).

The ``dx`` rule above is the one compatible with the Leibniz rule for this
``d``; the alternative with psi+ in the first line is kept as
``dx_rule="printed"`` for comparison only.

Coefficients come from a backend (symbolic Elements or spectral grids), so
one implementation serves both engines.
"""

from __future__ import annotations

from typing import Iterable, Protocol

from . import symbolic as sym
from .errors import DegreeOverflow
from .hopf import EPS, EPS_INV, IDENTITY, OperatorExpr, P, apply_op

DX, PSI_P, PSI_M = 0, 1, 2
NAMES = ("dx", "psi+", "psi-")


class Backend(Protocol):
    kappa: float

    def zero(self): ...
    def one(self): ...
    def combine(self, pairs): ...
    def star(self, f, g): ...
    def apply(self, h: OperatorExpr, f): ...
    def translate(self, gamma: float, f): ...
    def is_zero(self, f) -> bool: ...
    def distance(self, f, g) -> float: ...
    def to_json(self, f): ...
    def describe(self, f) -> str: ...


class SymbolicBackend:
    name = "symbolic"

    def __init__(self, kappa):
        self.kappa = sym._kappa(kappa)

    def zero(self):
        return sym.ZERO

    def one(self):
        return sym.ONE

    def combine(self, pairs):
        return sym.linear_combine(pairs)

    def star(self, f, g):
        return sym.star_mul(f, g, self.kappa)

    def apply(self, h, f):
        return apply_op(h, f, self.kappa)

    def translate(self, gamma, f):
        return sym.translate(gamma, f)

    def is_zero(self, f):
        return f.is_zero()

    def distance(self, f, g):
        return sym.max_residual(f, g)

    def to_json(self, f):
        return sym.element_to_json(f)

    def from_json(self, data):
        return sym.element_from_json(data)

    def describe(self, f):
        return sym.format_element(f)


def normalize_monomial(seq: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sort generators with anticommutation signs; sign 0 on repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, ()
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign, tuple(seq)


def basis_name(basis: tuple[int, ...]) -> str:
    return "^".join(NAMES[i] for i in basis) if basis else "1"


def parse_basis(name: str) -> tuple[int, ...]:
    if name in ("1", ""):
        return ()
    sign, basis = normalize_monomial(NAMES.index(p) for p in name.split("^"))
    if sign != 1:
        raise ValueError(f"basis {name!r} is not in canonical order")
    return basis


class Form:
    """Differential form ``sum_B B . coeffs[B]`` of fixed degree."""

    __slots__ = ("degree", "coeffs", "backend")

    def __init__(self, degree: int, coeffs: dict, backend):
        if not 0 <= degree <= 3:
            raise ValueError(f"degree must be in 0..3, got {degree}")
        for b in coeffs:
            if len(b) != degree:
                raise ValueError(f"basis {basis_name(b)} does not have degree {degree}")
        self.degree = degree
        self.coeffs = {b: c for b, c in sorted(coeffs.items()) if not backend.is_zero(c)}
        self.backend = backend

    def __getitem__(self, basis):
        if isinstance(basis, str):
            basis = parse_basis(basis)
        return self.coeffs.get(tuple(basis), self.backend.zero())

    def __add__(self, other):
        return form_combine([(1, self), (1, other)])

    def __sub__(self, other):
        return form_combine([(1, self), (-1, other)])

    def __rmul__(self, c):
        return form_combine([(c, self)])

    def is_zero(self):
        return not self.coeffs

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for b, c in self.coeffs.items():
            text = self.backend.describe(c)
            if " + " in text:
                text = f"({text})"
            parts.append(f"{basis_name(b)}·{text}" if b else text)
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self):
        return {"degree": self.degree,
                "coeffs": {basis_name(b): self.backend.to_json(c) for b, c in self.coeffs.items()}}


def form_combine(pairs) -> Form:
    pairs = list(pairs)
    degree = pairs[0][1].degree
    backend = pairs[0][1].backend
    acc: dict[tuple[int, ...], list] = {}
    for c, form in pairs:
        if form.degree != degree:
            raise ValueError("cannot add forms of different degree")
        for b, coeff in form.coeffs.items():
            acc.setdefault(b, []).append((c, coeff))
    return Form(degree, {b: backend.combine(v) for b, v in acc.items()}, backend)


def form_from_json(data, backend) -> Form:
    coeffs = {parse_basis(k): backend.from_json(v) for k, v in data["coeffs"].items()}
    return Form(int(data["degree"]), coeffs, backend)


def form_distance(a: Form, b: Form) -> float:
    bases = set(a.coeffs) | set(b.coeffs)
    return max((a.backend.distance(a[x], b[x]) for x in bases), default=0.0)


class Calculus:
    """Exterior derivative, bimodule structure and wedge for one backend."""

    def __init__(self, backend, dx_rule: str = "consistent", strict: bool = False):
        if dx_rule not in ("consistent", "printed"):
            raise ValueError("dx_rule must be 'consistent' or 'printed'")
        self.backend = backend
        self.strict = strict
        self.dx_rule = dx_rule
        k = backend.kappa
        self.kappa = k
        dx_partner = PSI_M if dx_rule == "consistent" else PSI_P
        self.push_rules = {
            DX: ((DX, IDENTITY), (dx_partner, (1j / k) * P)),
            PSI_P: ((PSI_P, EPS_INV),
                    (DX, (2j / k) * (EPS_INV @ P)),
                    (PSI_M, (-1.0 / k**2) * (EPS_INV @ P @ P))),
            PSI_M: ((PSI_M, EPS),),
        }
        # basis . g  ->  sum (op g) . basis', the inverse of push_rules
        self.pull_rules = {
            DX: ((DX, IDENTITY), (PSI_M, (-1j / k) * (EPS_INV @ P))),
            PSI_P: ((DX, (-2j / k) * P),
                    (PSI_P, EPS),
                    (PSI_M, (-1.0 / k**2) * (EPS_INV @ P @ P))),
            PSI_M: ((PSI_M, EPS_INV),),
        }
        self.d_ops = {
            DX: EPS_INV @ P,
            PSI_P: (-0.5j * k) * (EPS_INV - IDENTITY),
            PSI_M: 0.5 * ((1j / k) * (EPS_INV @ P @ P) + (1j * k) * (EPS - IDENTITY)),
        }

    # -- construction --
    def function(self, f) -> Form:
        return Form(0, {(): f}, self.backend)

    def basis(self, name: str, coeff=None) -> Form:
        b = parse_basis(name)
        return Form(len(b), {b: self.backend.one() if coeff is None else coeff}, self.backend)

    def form(self, degree: int, coeffs: dict) -> Form:
        parsed = {(parse_basis(k) if isinstance(k, str) else tuple(k)): v for k, v in coeffs.items()}
        return Form(degree, parsed, self.backend)

    def zero(self, degree: int) -> Form:
        return Form(degree, {}, self.backend)

    # -- operations --
    def d0(self, f) -> Form:
        be = self.backend
        return Form(1, {(g,): be.apply(op, f) for g, op in self.d_ops.items()}, be)

    def push(self, f, seq: tuple[int, ...]):
        """Move ``f`` right through the generators ``seq``: f.seq = sum seq'.f'."""
        cur = [((), f)]
        for gen in seq:
            nxt = []
            for prefix, h in cur:
                for target, op in self.push_rules[gen]:
                    if target in prefix:
                        continue
                    v = self.backend.apply(op, h)
                    if not self.backend.is_zero(v):
                        nxt.append((prefix + (target,), v))
            cur = nxt
        return cur

    def pull(self, seq: tuple[int, ...], g):
        """Move ``g`` left through the generators ``seq``: seq.g = sum g'.seq'."""
        cur = [((), g)]
        for gen in reversed(seq):
            nxt = []
            for suffix, h in cur:
                for target, op in self.pull_rules[gen]:
                    if target in suffix:
                        continue
                    v = self.backend.apply(op, h)
                    if not self.backend.is_zero(v):
                        nxt.append(((target,) + suffix, v))
            cur = nxt
        return cur

    def left_mul(self, f, omega: Form) -> Form:
        be = self.backend
        acc: dict[tuple[int, ...], list] = {}
        for basis, g in omega.coeffs.items():
            for seq, fp in self.push(f, basis):
                sign, b = normalize_monomial(seq)
                if sign:
                    acc.setdefault(b, []).append((sign, be.star(fp, g)))
        return Form(omega.degree, {b: be.combine(v) for b, v in acc.items()}, be)

    def right_mul(self, omega: Form, f) -> Form:
        be = self.backend
        return Form(omega.degree, {b: be.star(g, f) for b, g in omega.coeffs.items()}, be)

    def wedge(self, w1: Form, w2: Form) -> Form:
        be = self.backend
        degree = w1.degree + w2.degree
        if degree > 3:
            if self.strict:
                raise DegreeOverflow(f"wedge of degrees {w1.degree} and {w2.degree} exceeds 3")
            return Form(3, {}, be)
        acc: dict[tuple[int, ...], list] = {}
        for b1, f in w1.coeffs.items():
            for b2, g in w2.coeffs.items():
                for seq, fp in self.push(f, b2):
                    sign, b = normalize_monomial(b1 + seq)
                    if sign:
                        acc.setdefault(b, []).append((sign, be.star(fp, g)))
        return Form(degree, {b: be.combine(v) for b, v in acc.items()}, be)

    def d(self, omega) -> Form:
        """Exterior derivative; d(B . f) = (-1)^|B| B ^ d f, and d of a 3-form is 0."""
        if not isinstance(omega, Form):
            return self.d0(omega)
        be = self.backend
        if omega.degree == 3:
            return Form(3, {}, be)
        acc: dict[tuple[int, ...], list] = {}
        sign0 = -1 if omega.degree % 2 else 1
        for basis, f in omega.coeffs.items():
            for (gen,), c in self.d0(f).coeffs.items():
                sign, b = normalize_monomial(basis + (gen,))
                if sign:
                    acc.setdefault(b, []).append((sign0 * sign, c))
        return Form(omega.degree + 1, {b: be.combine(v) for b, v in acc.items()}, be)

    def translate_form(self, gamma: float, omega: Form) -> Form:
        be = self.backend
        return Form(omega.degree, {b: be.translate(gamma, c) for b, c in omega.coeffs.items()}, be)

    def apply_coefficientwise(self, h: OperatorExpr, omega: Form) -> Form:
        be = self.backend
        return Form(omega.degree, {b: be.apply(h, c) for b, c in omega.coeffs.items()}, be)


def symbolic_calculus(kappa, **kwargs) -> Calculus:
    return Calculus(SymbolicBackend(kappa), **kwargs)


# module-level spellings of the calculus operations

def exterior_d0(f, calc: Calculus) -> Form:
    return calc.d0(f)


def left_mul(f, omega: Form, calc: Calculus) -> Form:
    return calc.left_mul(f, omega)


def right_mul(omega: Form, f, calc: Calculus) -> Form:
    return calc.right_mul(omega, f)


def wedge(w1: Form, w2: Form, calc: Calculus) -> Form:
    return calc.wedge(w1, w2)


def exterior_d(omega, calc: Calculus) -> Form:
    return calc.d(omega)


def translate_form(gamma: float, omega: Form, calc: Calculus) -> Form:
    return calc.translate_form(gamma, omega)


# -- generator relations -----------------------------------------------------------
# (function letter, generator, [(generator, scalar c, letter or None)]): the
# right side is sum gen . (c * letter) with None meaning the unit.

PRINTED_RELATIONS = {
    "x dx": ("x", DX, [(DX, 1, "x"), (PSI_P, "i/k", None)]),
    "t dx": ("t", DX, [(DX, 1, "t")]),
    "x psi+": ("x", PSI_P, [(PSI_P, 1, "x"), (DX, "2i/k", None)]),
    "t psi+": ("t", PSI_P, [(PSI_P, 1, "t"), (PSI_P, "i/k", None)]),
    "x psi-": ("x", PSI_M, [(PSI_M, 1, "x")]),
    "t psi-": ("t", PSI_M, [(PSI_M, 1, "t"), (PSI_M, "-i/k", None)]),
}

# what the bimodule rules above actually give for the same six products
DERIVED_RELATIONS = {
    **PRINTED_RELATIONS,
    "x dx": ("x", DX, [(DX, 1, "x"), (PSI_M, "i/k", None)]),
    "t psi+": ("t", PSI_P, [(PSI_P, 1, "t"), (PSI_P, "-i/k", None)]),
    "t psi-": ("t", PSI_M, [(PSI_M, 1, "t"), (PSI_M, "i/k", None)]),
}


def _rel_scalar(c, k: float) -> complex:
    table = {"i/k": 1j / k, "-i/k": -1j / k, "2i/k": 2j / k}
    return table[c] if isinstance(c, str) else complex(c)


def relation_sides(name: str, calc: Calculus, table=None) -> tuple[Form, Form]:
    """(f . gen, stated right side) for one generator relation, symbolic backend."""
    table = PRINTED_RELATIONS if table is None else table
    letter, gen, rhs = table[name]
    letters = {"t": sym.T, "x": sym.X, None: sym.ONE}
    be = calc.backend
    lhs = calc.left_mul(letters[letter], Form(1, {(gen,): be.one()}, be))
    acc: dict[tuple[int, ...], list] = {}
    for g, c, let in rhs:
        acc.setdefault((g,), []).append((_rel_scalar(c, calc.kappa), letters[let]))
    right = Form(1, {b: be.combine(v) for b, v in acc.items()}, be)
    return lhs, right


def relation_residuals(calc: Calculus, table=None) -> dict[str, float]:
    table = PRINTED_RELATIONS if table is None else table
    out = {}
    for name in table:
        lhs, rhs = relation_sides(name, calc, table)
        out[name] = form_distance(lhs, rhs)
    return out
