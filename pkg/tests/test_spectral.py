import json
import math

import numpy as np
import pytest
from scipy import integrate

from kappa_forge.errors import InterpolationOutOfRange, OutOfRange, SupportOverflow, UnsupportedGenerator
from kappa_forge.fixtures import (Fixture, Profile, bump, fixture_star_position, make_bump, make_gaussian,
                                  mollified_plane_wave, preset)
from kappa_forge.hopf import E, EPS, EPS_INV, N, P
from kappa_forge.spectral import (SQRT_2PI, GridBackend, GridSpec, SpectralGrid, d_beta, edge_leakage,
                                  grid_apply_op, grid_eval, grid_from_json, grid_involution, grid_star,
                                  grid_to_json, grid_translate, lebesgue_integral, load_grid, norm_l1,
                                  rel_diff, save_grid, v_support)

K = 1.0
GAUSS = ("gauss1", "gauss2", "gauss3")


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(n_v=255)
    with pytest.raises(ValueError):
        GridSpec(n_beta=8)
    with pytest.raises(ValueError):
        GridSpec(v_min=0.5, v_max=8)
    with pytest.raises(ValueError):
        GridSpec(v_min=-8, v_max=9, n_v=256)  # v = 0 is not a node
    with pytest.raises(ValueError):
        GridSpec(rule="midpoint")
    s = GridSpec.symmetric(4, 64, 6, 32)
    assert s.shape == (65, 33) and s.v[s.i0] == 0
    assert s.refine(128).shape == (129, 129)


def test_quadrature_weights_integrate_polynomials():
    for rule in ("trapezoid", "simpson"):
        s = GridSpec(rule=rule)
        assert abs(s.wv().sum() - 16) < 1e-12 and abs(s.wb().sum() - 24) < 1e-12
    s = GridSpec(rule="simpson")
    assert abs(np.dot(s.wv(), s.v ** 2) - 2 * 8 ** 3 / 3) < 1e-9


def test_values_read_only(spec):
    f = SpectralGrid.zeros(spec)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1


# -- fixtures -----------------------------------------------------------------------

def test_bump_at_origin_is_profile(spec):
    prof = Profile("gauss", 0.3, 1.2)
    f = make_bump(0.0, 0.8, prof, spec)
    assert np.allclose(f.values[spec.i0], prof(spec.beta), rtol=0, atol=1e-15)
    # the v maximum sits at v = 0 in every beta column
    assert np.all(np.argmax(np.abs(f.values), axis=0)[np.abs(prof(spec.beta)) > 1e-12] == spec.i0)


def test_disjoint_bumps_have_zero_pointwise_product(spec):
    f = make_bump(-1.0, 0.5, spec=spec)
    g = make_bump(1.0, 0.5, spec=spec)
    assert not np.any(f.values * g.values)
    assert v_support(f)[1] < v_support(g)[0]


def test_sampled_bump_integral_matches_adaptive_quadrature(spec):
    # ~100 nodes across the support; the sampled bump converges like exp(-c sqrt(n))
    c, w = 0.5, 3.0
    prof = Profile("gauss", 0.0, 1.5)
    f = make_bump(c, w, prof, spec)
    got = np.dot(spec.wv(), f.values.real @ spec.wb())
    v_ref = integrate.quad(lambda v: float(bump((v - c) / w)), c - w, c + w, epsabs=1e-14, epsrel=1e-13,
                          limit=200)[0]
    b_ref = integrate.quad(lambda b: float(prof(b).real), -12, 12, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    assert abs(got - v_ref * b_ref) < 1e-8 * abs(v_ref * b_ref)


def test_bump_outside_box_rejected():
    with pytest.raises(SupportOverflow):
        make_bump(7.5, 1.0)


# -- star product -------------------------------------------------------------------

def test_unit_approximant():
    s = GridSpec.symmetric(4, 512, 12, 256)
    f = make_gaussian(0.1, 0.4, Profile("gauss", 0.2, 1.5, 0.3), s, 1 - 0.5j)
    u = mollified_plane_wave(0.0, 0.02, Profile("gauss", 0.0, 200.0)).sample(s)
    # normalise by the discrete mass so only the mollification error remains
    mass = np.dot(s.wv(), u.values[:, s.n_beta // 2].real) / SQRT_2PI
    u = SpectralGrid(s, u.values / mass)
    assert rel_diff(grid_star(f, u, K), f) < 1e-3
    assert rel_diff(grid_star(u, f, K), f) < 1e-3


@pytest.mark.parametrize("a,b", [("gauss1", "gauss2"), ("gauss2", "gauss3"), ("gauss3", "gauss1")])
def test_twisted_trace_gaussian_profiles(grids, a, b):
    f, g = grids[a], grids[b]
    lhs = lebesgue_integral(grid_star(f, g, K))
    rhs = lebesgue_integral(grid_star(grid_translate(1 / K, g), f, K))
    assert abs(lhs - rhs) <= 1e-6 * abs(lhs)


def test_star_matches_direct_double_integral(spec):
    f, g = preset("gauss1"), preset("gauss3")
    prod = grid_star(f.sample(spec), g.sample(spec), K)
    pts = ((0.0, 0.3), (1.2, -0.8), (-2.0, 1.1))
    want = np.array([fixture_star_position(f, g, K, a, b) for a, b in pts])
    got = np.array([grid_eval(prod, a, b) for a, b in pts])
    assert np.max(np.abs(got - want)) < 1e-4 * np.max(np.abs(want))


def test_star_bilinear_and_zero(grids):
    f, g, h = grids["gauss1"], grids["bump1"], grids["gauss3"]
    z = SpectralGrid.zeros(f.spec)
    assert not np.any(grid_star(f, z, K).values)
    lhs = grid_star(f, 2 * g + h, K)
    assert rel_diff(lhs, 2 * grid_star(f, g, K) + grid_star(f, h, K)) < 1e-13


def test_support_overflow():
    s = GridSpec.symmetric(2, 64, 12, 64)
    f = make_bump(1.0, 0.8, spec=s)
    with pytest.raises(SupportOverflow):
        grid_star(f, f, K)


def test_strict_interpolation_out_of_range(spec):
    wide = make_gaussian(0.0, 0.15, Profile("gauss", 0.0, 6.0), spec)
    grid_star(wide, wide, K)  # lenient mode only records the leakage
    assert edge_leakage(wide) > 1e-12
    with pytest.raises(InterpolationOutOfRange):
        grid_star(wide, wide, K, strict=True)
    with pytest.raises(InterpolationOutOfRange):
        grid_involution(wide, K, strict=True)


def test_threads_bitwise_identical(grids):
    f, g = grids["gauss2"], grids["bump3"]
    one = grid_star(f, g, K, threads=1)
    three = grid_star(f, g, K, threads=3)
    assert one.values.tobytes() == three.values.tobytes()


# -- translations and the Hopf action -------------------------------------------------

def test_translate_identity_and_group_law(grids):
    f = grids["bump2"]
    assert np.array_equal(grid_translate(0.0, f).values, f.values)
    a, b = 0.3, -0.45
    assert np.allclose(grid_translate(a, grid_translate(b, f)).values, grid_translate(a + b, f).values,
                       rtol=1e-14, atol=0)


def test_translate_shifts_alpha(grids):
    f = grids["gauss2"]
    for gamma in (0.2, -0.5):
        for a, b in ((0.4, 0.1), (-1.0, 0.9)):
            got = grid_eval(grid_translate(gamma, f), a, b)
            assert abs(got - grid_eval(f, a + 1j * gamma, b)) < 1e-12


def test_translate_automorphism(grids):
    f, g = grids["gauss1"], grids["bump2"]
    lhs = grid_translate(0.3, grid_star(f, g, K))
    rhs = grid_star(grid_translate(0.3, f), grid_translate(0.3, g), K)
    assert rel_diff(lhs, rhs) < 1e-6


def test_eps_inverse_identity(grids):
    f = grids["bump3"]
    back = grid_apply_op(EPS @ EPS_INV, f, K)
    assert np.allclose(back.values, f.values, rtol=1e-15, atol=0)


def test_E_action_is_alpha_derivative(grids):
    f = grids["gauss2"]
    ef = grid_apply_op(E, f, K)
    h = 1e-3
    for a, b in ((0.0, 0.3), (1.3, -0.6)):
        fd = (8 * (grid_eval(f, a + h, b) - grid_eval(f, a - h, b))
              - (grid_eval(f, a + 2 * h, b) - grid_eval(f, a - 2 * h, b))) / (12 * h)
        assert abs(grid_eval(ef, a, b) - fd) < 1e-6


def test_P_action_is_beta_derivative(spec):
    prof = Profile("gauss", 0.4, 1.5, 0.2)
    f = make_gaussian(0.0, 0.2, prof, spec)
    b = spec.beta
    dprof = prof(b) * (-(b - 0.4) / 1.5 ** 2 + 0.2j)
    want = np.outer(np.exp(-(spec.v / 0.2) ** 2 / 2), dprof)
    assert np.max(np.abs(d_beta(f).values - want)) < 1e-10
    assert rel_diff(grid_apply_op(P, f, K), d_beta(f)) == 0


def test_P_twisted_leibniz(grids):
    f, g = grids["gauss2"], grids["bump1"]
    lhs = grid_apply_op(P, grid_star(f, g, K), K)
    rhs = grid_star(grid_apply_op(P, f, K), g, K) + grid_star(grid_apply_op(EPS, f, K), grid_apply_op(P, g, K), K)
    assert rel_diff(lhs, rhs) < 1e-4


def test_boost_has_no_grid_action(grids):
    with pytest.raises(UnsupportedGenerator):
        grid_apply_op(N, grids["gauss1"], K)


# -- evaluation, involution, integral -------------------------------------------------

def test_grid_eval_real_for_symmetric_spectrum(grids):
    f = grids["gauss1"]  # real spectrum, even in v
    for a in (0.0, 0.7, -2.1):
        val = grid_eval(f, a, 0.5)
        assert abs(val.imag) < 1e-15 and val.real > 0
    with pytest.raises(OutOfRange):
        grid_eval(f, 0.0, 20.0)


def test_grid_eval_matches_closed_form(grids):
    fx, f = preset("gauss3"), grids["gauss3"]
    nodes = f.spec.beta[[100, 128, 141]]
    for a, b in zip((0.0, 2.0, -4.0), nodes):
        assert abs(grid_eval(f, a, b) - fx.position(a, b)) < 1e-12
    # off the beta nodes the cubic spline sets the error
    for a, b in ((2.0, -1.3), (-4.0, 0.77)):
        assert abs(grid_eval(f, a, b) - fx.position(a, b)) < 1e-7


def test_involution_examples(grids):
    for name in GAUSS:
        f = grids[name]
        assert rel_diff(grid_involution(grid_involution(f, K), K), f) < 1e-6
        assert abs(lebesgue_integral(grid_involution(f, K)) - np.conj(lebesgue_integral(f))) < 1e-12
    f, g = grids["gauss2"], grids["bump1"]
    lhs = grid_involution(grid_star(f, g, K), K)
    rhs = grid_star(grid_involution(g, K), grid_involution(f, K), K)
    assert rel_diff(lhs, rhs) < 1e-4


def test_involution_pointwise_is_conjugate_at_origin(grids):
    # f*(alpha, beta) at beta = 0 no rescaling survives: f*(alpha, 0) = conj f(alpha, 0)
    f = grids["gauss2"]
    fs = grid_involution(f, K)
    for a in (0.0, 0.6, -1.4):
        assert abs(grid_eval(fs, a, 0.0) - np.conj(grid_eval(f, a, 0.0))) < 1e-6


def test_lebesgue_integral_examples(grids):
    z = SpectralGrid.zeros(grids["gauss1"].spec)
    assert lebesgue_integral(z) == 0
    for f in grids.values():
        nf = norm_l1(f)
        assert abs(lebesgue_integral(grid_apply_op(E, f, K))) < 1e-8 * nf
        assert abs(lebesgue_integral(grid_apply_op(P, f, K))) < 1e-8 * nf
        assert abs(lebesgue_integral(grid_apply_op(EPS, f, K)) - lebesgue_integral(f)) < 1e-8 * nf


@pytest.mark.parametrize("name", GAUSS)
def test_lebesgue_integral_matches_position_quadrature(grids, name):
    fx = preset(name)
    alpha = np.linspace(-80, 80, 8001)
    beta = np.linspace(-12, 12, 2401)
    a_int = integrate.trapezoid(np.array([fx.alpha_part(a) for a in alpha]), alpha)
    b_int = integrate.trapezoid(fx.profile(beta), beta)
    want = fx.coeff * a_int * b_int
    assert abs(lebesgue_integral(grids[name]) - want) < 1e-6 * abs(want)


# -- serialisation and backend --------------------------------------------------------

def test_grid_json_round_trip(grids, tmp_path):
    f = grids["bump3"]
    data = json.loads(json.dumps(grid_to_json(f, 1.5)))
    back, kappa = grid_from_json(data)
    assert kappa == 1.5 and back.spec == f.spec
    assert back.values.tobytes() == f.values.tobytes()
    for raw in (False, True):
        p = tmp_path / f"f{raw}.json"
        save_grid(f, p, kappa=2.0, raw=raw)
        g, k = load_grid(p)
        assert k == 2.0 and g.values.tobytes() == f.values.tobytes()
    assert (tmp_path / "fTrue.json.bin").stat().st_size == f.values.size * 16
    with pytest.raises(ValueError):
        grid_from_json({"schema": "other"})


def test_grid_backend(grids):
    be = GridBackend(K, grids["gauss1"].spec)
    f, g = grids["gauss1"], grids["gauss2"]
    assert be.is_zero(be.zero())
    assert rel_diff(be.combine([(2, f), (-1j, g)]), 2 * f - 1j * g) == 0
    assert be.distance(f, f) == 0
    assert be.from_json(be.to_json(f)).values.tobytes() == f.values.tobytes()
    with pytest.raises(NotImplementedError):
        be.one()


def test_fixture_kinds_validated():
    with pytest.raises(ValueError):
        Fixture("triangle", 0, 1).v_part(0.0)
    with pytest.raises(ValueError):
        preset("gauss1", colour=3)
