import cmath
import json
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from kappa_forge import symbolic as S
from kappa_forge.symbolic import (ONE, ZERO, Element, Kappa, T, Term, X, commutator, element_from_json,
                                  element_to_json, equals_within, eval_point, involution,
                                  linear_combine, max_residual, plane_wave, star_mul, translate)

KAPPAS = (0.5, 1.0, 2.0, 10.0)

reals = st.floats(-1.0, 1.0, allow_nan=False).map(lambda x: round(x, 3))
coeffs = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2)).filter(lambda c: abs(c) > 1e-3)
terms = st.builds(Term, coeffs, st.integers(0, 2), reals, st.integers(0, 2), reals,
                  st.floats(0.0, 0.5).map(lambda x: round(x, 3)))
elements = st.lists(terms, min_size=1, max_size=3).map(Element)
kappas = st.sampled_from(KAPPAS)
FAST = settings(max_examples=40, deadline=None)


def rel_close(f, g, tol=1e-10):
    scale = max([abs(t.coeff) for t in f.terms + g.terms] + [1.0])
    return max_residual(f, g) <= tol * scale


# -- independent oracle -----------------------------------------------------------
al, be, s = sp.symbols("alpha beta s")


def to_sympy(f: Element):
    return sum((complex(t.coeff) * al ** t.m * sp.exp(sp.I * t.a * al)
                * be ** t.n * sp.exp(sp.I * t.b * be - t.w * be ** 2) for t in f.terms), sp.Integer(0))


def oracle_star(f: Element, g: Element, kappa: float, point):
    """Delta-derivative evaluation of the star product, expanded by sympy.

    alpha^m e^{i a alpha} has spectrum (-i d/da)^m e^{i a alpha}; its product with g is
    that derivative applied to e^{i s alpha} g(alpha, e^{-s/kappa} beta) at s = a.
    """
    G = to_sympy(g)
    total = 0j
    for t in f.terms:
        carrier = sp.exp(sp.I * s * al) * G.subs(be, sp.exp(-s / kappa) * be)
        expr = carrier
        for _ in range(t.m):
            expr = -sp.I * sp.diff(expr, s)
        h = be ** t.n * sp.exp(sp.I * t.b * be - t.w * be ** 2)
        val = (complex(t.coeff) * h * expr).subs({s: t.a, al: point[0], be: point[1]})
        total += complex(sp.N(val, 30))
    return total


POINTS = ((0.3, -0.7), (-1.1, 0.4), (0.9, 1.3))


# -- examples ---------------------------------------------------------------------

def test_linear_combine_examples():
    assert linear_combine([(1, T), (-1, T)]).is_zero()
    five = linear_combine([(2, X), (3, X)])
    assert five == Element([Term(5, n=1)])
    for k in KAPPAS:
        c = linear_combine([(1, star_mul(T, X, k)), (-1, star_mul(X, T, k))])
        assert equals_within(c, (1j / k) * X, 1e-12)


@pytest.mark.parametrize("k", KAPPAS)
def test_coordinate_products(k):
    tx = star_mul(T, X, k)
    assert equals_within(tx, Element([Term(1, m=1, n=1), Term(1j / k, n=1)]), 1e-12)
    assert equals_within(star_mul(X, T, k), Element([Term(1, m=1, n=1)]), 1e-12)
    assert abs(eval_point(tx, 2, 3) - (6 + 3j / k)) < 1e-12


def test_eval_point_examples():
    assert eval_point(T, 2, 3) == 2
    f = Element([Term(1 + 2j, 2, 0.3, 1, -0.2, 0.1)])
    for g in (0.0, 0.4, -1.3):
        assert abs(eval_point(translate(g, f), 0.5, 0.7) - eval_point(f, 0.5 + 1j * g, 0.7)) < 1e-12


def test_plane_wave_times_beta_power():
    a, b, k = 0.7, -0.4, 1.3
    for n in (0, 1, 3):
        got = star_mul(plane_wave(a), plane_wave(b=b, n=n), k)
        lam = math.exp(-a / k)
        want = Element([Term(lam ** n, 0, a, n, b * lam, 0.0)])
        assert equals_within(got, want, 1e-12)


def test_unit(rng):
    for _ in range(20):
        f = S.random_element(rng, n_terms=3)
        assert star_mul(ONE, f, 1.7) == f
        assert star_mul(f, ONE, 1.7) == f


def test_involution_examples():
    for k in KAPPAS:
        assert involution(T, k) == T and involution(X, k) == X
        assert equals_within(involution(star_mul(T, X, k), k), star_mul(X, T, k), 1e-12)
        ab = Element([Term(1, m=1, n=1)])
        assert equals_within(involution(ab, k), Element([Term(1, m=1, n=1), Term(1j / k, n=1)]), 1e-12)


def test_translate_examples(rng):
    f = S.random_element(rng, n_terms=3)
    assert translate(0.0, f) == f
    for k in KAPPAS:
        assert equals_within(translate(1 / k, T), T + (1j / k) * ONE, 1e-12)
    for _ in range(20):
        f = S.random_element(rng, n_terms=3)
        g, d = rng.uniform(-1, 1, size=2)
        assert rel_close(translate(g, translate(d, f)), translate(g + d, f))


def test_equals_within_examples():
    f = S.random_element(np.random.default_rng(1))
    assert equals_within(f, f, 0)
    assert not equals_within(T, X, 1e-12)
    with pytest.raises(ValueError):
        equals_within(T, T, -1)


def test_commutative_limit():
    c = commutator(T, X, 1e6)
    assert max(abs(t.coeff) for t in c.terms) <= 2e-6


def test_term_and_kappa_validation():
    with pytest.raises(ValueError):
        Term(1, w=-0.1)
    with pytest.raises(ValueError):
        Term(1, m=-1)
    with pytest.raises(ValueError):
        Kappa(0.0)
    with pytest.raises(ValueError):
        star_mul(T, X, -1.0)


def test_canonical_merge_and_order():
    f = Element([Term(1, 0, 0.5 + 1e-14), Term(2, 0, 0.5), Term(1, 1), Term(0)])
    assert len(f) == 2
    assert [t.key for t in f.terms] == sorted(t.key for t in f.terms)
    assert ZERO.is_zero() and (T - T).is_zero()


# -- oracles ----------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_star_matches_sympy_oracle(seed):
    rng = np.random.default_rng(seed)
    k = float(rng.choice(KAPPAS))
    f, g = S.random_element(rng), S.random_element(rng)
    prod = star_mul(f, g, k)
    for p in POINTS:
        want = oracle_star(f, g, k, p)
        assert abs(eval_point(prod, *p) - want) <= 1e-10 * max(1.0, abs(want))


def test_alpha_power_rule_by_finite_difference():
    """alpha e^{i a alpha} = -i d/da e^{i a alpha}; check on products with central differences."""
    rng = np.random.default_rng(7)
    g = S.random_element(rng, plane_waves=True)
    a, k, h = 0.35, 1.4, 1e-4
    lhs = star_mul(plane_wave(a, m=1), g, k)
    for p in POINTS:
        fp = eval_point(star_mul(plane_wave(a + h), g, k), *p)
        fm = eval_point(star_mul(plane_wave(a - h), g, k), *p)
        f2p = eval_point(star_mul(plane_wave(a + 2 * h), g, k), *p)
        f2m = eval_point(star_mul(plane_wave(a - 2 * h), g, k), *p)
        deriv = (8 * (fp - fm) - (f2p - f2m)) / (12 * h)
        assert abs(eval_point(lhs, *p) - (-1j) * deriv) < 1e-8 * max(1.0, abs(deriv))


def test_involution_pointwise_on_plane_waves():
    # (e^{i a alpha} h(beta))* = e^{-i a alpha} conj(h)(e^{a/kappa} beta)
    a, b, w, k = 0.6, 0.3, 0.2, 1.5
    f = plane_wave(a, b, w, coeff=1 - 2j)
    fs = involution(f, k)
    for al_, be_ in POINTS:
        lam = math.exp(a / k)
        want = cmath.exp(-1j * a * al_) * (1 + 2j) * cmath.exp(-1j * b * lam * be_ - w * (lam * be_) ** 2)
        assert abs(eval_point(fs, al_, be_) - want) < 1e-12


# -- properties -------------------------------------------------------------------

@FAST
@given(elements, elements, elements, kappas)
def test_associativity(f, g, h, k):
    assert rel_close(star_mul(star_mul(f, g, k), h, k), star_mul(f, star_mul(g, h, k), k))


@FAST
@given(elements, elements, kappas)
def test_involution_anti_automorphism(f, g, k):
    assert rel_close(involution(involution(f, k), k), f)
    assert rel_close(involution(star_mul(f, g, k), k),
                     star_mul(involution(g, k), involution(f, k), k))


@FAST
@given(elements, elements, st.floats(-1, 1), kappas)
def test_translation_automorphism(f, g, gamma, k):
    assert rel_close(translate(gamma, star_mul(f, g, k)),
                     star_mul(translate(gamma, f), translate(gamma, g), k))


@FAST
@given(elements)
def test_json_round_trip_exact(f):
    data = json.loads(json.dumps(element_to_json(f)))
    assert element_from_json(data) == f
    assert S.loads(S.dumps(f)) == f


def test_generator_set_associativity():
    k = 1.0
    gens = [ONE, T, X, star_mul(T, T, k), Element([Term(1, m=1, n=1)]),
            Element([Term(1, n=2, b=0.4, w=0.3)])]
    for f in gens:
        for g in gens:
            for h in gens:
                assert rel_close(star_mul(star_mul(f, g, k), h, k), star_mul(f, star_mul(g, h, k), k))
