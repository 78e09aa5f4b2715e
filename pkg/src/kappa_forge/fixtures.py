"""Test elements of the grid algebra with known analytic forms.

Every fixture is separable, f~(v, beta) = c * spectrum_v(v) * profile(beta),
and knows its position-space values f(alpha, beta) independently of the
grid engine (closed form for Gaussian spectra, adaptive quadrature for
compact bumps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np
from scipy import integrate

from .errors import SupportOverflow
from .spectral import SQRT_2PI, GridSpec, SpectralGrid

_BUMP_NORM = None


def bump(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; peak value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-s[inside] ** 2 / (1.0 - s[inside] ** 2))
    return out


def bump_mass() -> float:
    global _BUMP_NORM
    if _BUMP_NORM is None:
        _BUMP_NORM = integrate.quad(lambda s: math.exp(-s * s / (1.0 - s * s)), -1, 1,
                                    epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return _BUMP_NORM


@dataclass(frozen=True)
class Profile:
    """beta profile: Gaussian ``exp(-(beta-c)^2/(2 s^2) + i k beta)`` or a compact bump."""

    kind: str = "gauss"
    center: float = 0.0
    width: float = 1.0
    freq: float = 0.0

    def __call__(self, beta):
        beta = np.asarray(beta, dtype=float)
        if self.kind == "gauss":
            base = np.exp(-((beta - self.center) ** 2) / (2 * self.width ** 2))
        elif self.kind == "bump":
            base = bump((beta - self.center) / self.width)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        return base * np.exp(1j * self.freq * beta)


@dataclass(frozen=True)
class Fixture:
    """Separable element c * spectrum(v) * profile(beta) with a position-space oracle."""

    kind: str  # "bump" | "gauss" | "mollifier"
    center: float
    width: float
    profile: Profile = field(default_factory=Profile)
    coeff: complex = 1.0

    def v_part(self, v):
        v = np.asarray(v, dtype=float)
        if self.kind == "gauss":
            return np.exp(-((v - self.center) ** 2) / (2 * self.width ** 2))
        if self.kind == "bump":
            return bump((v - self.center) / self.width)
        if self.kind == "mollifier":
            # sqrt(2 pi) times a unit-mass bump: approximates exp(i center alpha)
            return SQRT_2PI * bump((v - self.center) / self.width) / (self.width * bump_mass())
        raise ValueError(f"unknown fixture kind {self.kind!r}")

    def spectrum(self, v, beta):
        return self.coeff * self.v_part(v) * self.profile(beta)

    def alpha_part(self, alpha) -> complex:
        """(2 pi)^(-1/2) int v_part(v) e^{i alpha v} dv, computed off-grid."""
        if self.kind == "gauss":
            s = self.width
            return s * np.exp(1j * alpha * self.center - 0.5 * (s * alpha) ** 2)
        c, w = self.center, self.width
        re = integrate.quad(lambda v: float(self.v_part(v)) * math.cos(alpha * v), c - w, c + w,
                            epsabs=1e-14, epsrel=1e-13, limit=400)[0]
        im = integrate.quad(lambda v: float(self.v_part(v)) * math.sin(alpha * v), c - w, c + w,
                            epsabs=1e-14, epsrel=1e-13, limit=400)[0]
        return (re + 1j * im) / SQRT_2PI

    def position(self, alpha, beta) -> complex:
        return complex(self.coeff * self.alpha_part(alpha) * self.profile(beta))

    def v_extent(self) -> tuple[float, float]:
        reach = self.width if self.kind != "gauss" else 7.5 * self.width
        return self.center - reach, self.center + reach

    def sample(self, spec: GridSpec) -> SpectralGrid:
        lo, hi = self.v_extent()
        if self.kind != "gauss" and not (spec.v_min < lo and hi < spec.v_max):
            raise SupportOverflow(f"bump support [{lo}, {hi}] not inside the v box")
        return SpectralGrid.from_function(spec, self.spectrum)


def make_bump(center_v: float, width_v: float, profile: Profile | None = None,
              spec: GridSpec | None = None, coeff: complex = 1.0) -> SpectralGrid:
    spec = spec or GridSpec()
    return Fixture("bump", center_v, width_v, profile or Profile(), coeff).sample(spec)


def make_gaussian(center_v: float, width_v: float, profile: Profile | None = None,
                  spec: GridSpec | None = None, coeff: complex = 1.0) -> SpectralGrid:
    spec = spec or GridSpec()
    return Fixture("gauss", center_v, width_v, profile or Profile(), coeff).sample(spec)


def mollified_plane_wave(a: float, eps: float, profile: Profile) -> Fixture:
    """Grid stand-in for exp(i a alpha) * profile(beta), mollified at width ``eps``."""
    return Fixture("mollifier", a, eps, profile)


PRESETS: dict[str, Fixture] = {
    "bump1": Fixture("bump", 0.0, 0.7, Profile("gauss", 0.0, 1.5)),
    "bump2": Fixture("bump", 0.2, 0.6, Profile("gauss", 0.4, 1.5, 0.2), 0.8 - 0.3j),
    "bump3": Fixture("bump", -0.15, 0.7, Profile("bump", -0.3, 4.0, -0.3), 0.5 + 0.5j),
    "gauss1": Fixture("gauss", 0.0, 0.15, Profile("gauss", 0.0, 1.5)),
    "gauss2": Fixture("gauss", 0.2, 0.15, Profile("gauss", 0.5, 1.5, 0.3), 1.0 + 0.5j),
    "gauss3": Fixture("gauss", -0.25, 0.12, Profile("gauss", -0.3, 1.6, -0.2), 0.3 - 1.0j),
}


def preset(name: str, **overrides) -> Fixture:
    base = PRESETS[name]
    if not overrides:
        return base
    prof = base.profile
    pkeys = {"beta0": "center", "sigma": "width", "k": "freq", "profile": "kind"}
    pargs = {pkeys[k]: v for k, v in overrides.items() if k in pkeys}
    if pargs:
        prof = Profile(**{**prof.__dict__, **pargs})
    fkeys = {"v0": "center", "w": "width", "c": "coeff", "kind": "kind"}
    fargs = {fkeys[k]: v for k, v in overrides.items() if k in fkeys}
    unknown = set(overrides) - set(pkeys) - set(fkeys)
    if unknown:
        raise ValueError(f"unknown fixture parameters {sorted(unknown)}")
    return Fixture(**{**base.__dict__, **fargs, "profile": prof})


def random_fixture(rng: np.random.Generator, kind: str = "gauss", v_radius: float | None = None,
                   beta_width: tuple[float, float] = (1.2, 2.0)) -> Fixture:
    """Random separable fixture with v-extent inside [-v_radius, v_radius].

    The radius bounds how far beta gets rescaled (by up to e^{v_radius/kappa})
    in products and involutions, so it is kept below 1.
    """
    if v_radius is None:
        v_radius = 1.2 if kind == "gauss" else 0.8
    coeff = complex(rng.normal(), rng.normal())
    prof = Profile("gauss", float(rng.uniform(-0.5, 0.5)), float(rng.uniform(*beta_width)),
                   float(rng.uniform(-0.5, 0.5)))
    if kind == "gauss":
        width = v_radius / 7.5 * float(rng.uniform(0.6, 1.0))
        reach = 7.5 * width
    else:
        width = v_radius * float(rng.uniform(0.8, 0.95))
        reach = width
    center = float(rng.uniform(-1, 1)) * (v_radius - reach) * 0.9
    return Fixture(kind, center, width, prof, coeff)


def fixture_star_position(f: Fixture, g: Fixture, kappa: float, alpha: float, beta: float) -> complex:
    """Independent value of (f * g)(alpha, beta) from the direct oscillatory double integral

        (1/2pi) int dv int du f(alpha + u, beta) g(alpha, e^{-v/kappa} beta) e^{-i u v}

    evaluated by trapezoid sums over position-space samples.  The inner u-sum
    runs over the decay range of f in alpha; the outer v-sum over the band
    where that inner transform is nonnegligible.
    """
    lo, hi = f.v_extent()
    # inner integrand decays on the alpha scale of f: 1/width for the v-spectrum
    if f.kind == "gauss":
        u_reach = 40.0 / f.width
        nu = int(u_reach * (max(abs(lo), abs(hi)) + 1.0) * 4) + 1
        u = np.linspace(-u_reach, u_reach, 2 * nu + 1)
        du = u[1] - u[0]
        fa = np.array([f.alpha_part(alpha + uu) for uu in u]) * f.profile(beta) * f.coeff
        v = np.linspace(lo, hi, 801)
        dv = v[1] - v[0]
        inner = np.exp(-1j * np.outer(v, u)) @ fa * du
    else:
        raise ValueError("direct double-integral oracle requires Gaussian-spectrum fixtures")
    gv = np.array([g.position(alpha, math.exp(-vv / kappa) * beta) for vv in v])
    integrand = inner * gv
    return complex((integrand.sum() - 0.5 * (integrand[0] + integrand[-1])) * dv / (2 * math.pi))
