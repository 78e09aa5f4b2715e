"""Rieffel-deformation presentation of the star algebra.

R^2 acts by eta_(r,s) f (alpha, beta) = f(alpha + r, e^{-s} beta), and the
deformation uses the nilpotent map J(r, s) = (s/kappa, 0).  Integrating
out the delta function in the four-variable J-product leaves

    f *_J g (alpha, beta) = (1/2pi) int du dv2 (eta_(u,0) f)(alpha, beta)
                                       (eta_(0, J2(v2)) g)(alpha, beta) e^{-i u v2}

where J2(v2) is the first component of J(0, v2).  The u-integral is the
partial transform of f, so only a single sum over v2-nodes survives; each
term is a resampled copy of g from :func:`eta_act`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SupportOverflow
from .spectral import (SQRT_2PI, RowSpline, SpectralGrid, edge_leakage,
                       v_support)


@dataclass(frozen=True)
class JMap:
    """(r, s) -> (s/kappa, 0).  ``JMap(1)`` is the undeformed-scale map (s, 0)."""

    kappa: float = 1.0

    def __call__(self, r: float, s: float) -> tuple[float, float]:
        return (s / self.kappa, 0.0 * r)

    def compose(self, r: float, s: float) -> tuple[float, float]:
        return self(*self(r, s))

    def matrix(self) -> np.ndarray:
        return np.array([[0.0, 1.0 / self.kappa], [0.0, 0.0]])


def _eta_rows(values: np.ndarray, spec, r: float, s: float, spline: RowSpline | None = None):
    v = spec.v
    scale = math.exp(-s)
    if spline is None:
        spline = RowSpline(spec, values)
    out = spline.at(scale * spec.beta) if s else np.array(values, dtype=np.complex128)
    if r:
        out = out * np.exp(1j * r * v)[:, None]
    return out


# edge/peak ratio above which a stretched profile counts as leaving the beta box
ETA_LEAKAGE_LIMIT = 1e-4


def eta_act(r: float, s: float, f: SpectralGrid, check: bool = True) -> SpectralGrid:
    """(eta_(r,s) f)~(v, beta) = e^{i r v} f~(v, e^{-s} beta)."""
    out = SpectralGrid(f.spec, _eta_rows(f.values, f.spec, float(r), float(s)))
    if check and s > 0 and edge_leakage(out) > ETA_LEAKAGE_LIMIT >= edge_leakage(f):
        raise SupportOverflow(f"eta with s={s} stretches the beta profile past the box")
    return out


def j_star(f: SpectralGrid, g: SpectralGrid, kappa=None, jmap: JMap | None = None) -> SpectralGrid:
    """J-deformed product, via the delta-reduced single-sum form.

    ``jmap`` defaults to ``JMap(kappa)``; passing ``JMap(1.0)`` gives the
    literal map (s, 0).
    """
    f._check(g)
    if jmap is None:
        jmap = JMap(1.0 if kappa is None else float(kappa))
    spec = f.spec
    fs, gs = v_support(f), v_support(g)
    if fs is None or gs is None:
        return SpectralGrid.zeros(spec)
    i0 = spec.i0
    if fs[0] + gs[0] - i0 < 0 or fs[1] + gs[1] - i0 > spec.n_v:
        raise SupportOverflow("J-product support exceeds the v box")
    glo, ghi = gs
    gblock = g.values[glo:ghi + 1]
    spline = RowSpline(spec, gblock)
    w = spec.wv()
    out = np.zeros(spec.shape, dtype=np.complex128)
    for k in range(fs[0], fs[1] + 1):
        v2 = spec.v[k]
        # delta(v1) collapses eta on g to a pure rescaling by J(0, v2)
        s = jmap(0.0, v2)[0]
        moved = _eta_rows(gblock, spec, 0.0, s, spline)
        # u-integral of eta_(u,0) f against e^{-i u v2}: sqrt(2 pi) f~(v2) e^{i alpha v2},
        # and e^{i alpha v2} shifts the output mode by v2
        coeff = (SQRT_2PI * w[k] / (2 * math.pi)) * f.values[k]
        j0 = glo + k - i0
        out[j0:j0 + len(gblock)] += coeff[None, :] * moved
    return SpectralGrid(spec, out)


def rieffel_involution(f: SpectralGrid, kappa) -> SpectralGrid:
    """f* = (kappa/2pi) int du1 du2 eta_u(conj f) e^{-i kappa u1 u2}.

    The u1-integral gives (2pi/kappa) delta(u2 - v/kappa) in mode v, so each
    output row is a rescaled row of conj f taken at u2 = v/kappa.
    """
    kappa = float(kappa)
    spec = f.spec
    sup = v_support(f)
    if sup is None:
        return SpectralGrid.zeros(spec)
    lo, hi = sup
    i0 = spec.i0
    if 2 * i0 - hi < 0 or 2 * i0 - lo > spec.n_v:
        raise SupportOverflow("reflected v support leaves the box")
    # transform of conj f at mode v is conj f~(-v): reflect rows about v = 0
    rows = np.arange(2 * i0 - hi, 2 * i0 - lo + 1)
    fbar = np.conj(f.values[2 * i0 - rows])
    spline = RowSpline(spec, fbar)
    norm = (kappa / (2 * math.pi)) * (2 * math.pi / kappa)
    u2 = spec.v[rows] / kappa
    out = np.zeros(spec.shape, dtype=np.complex128)
    out[rows] = norm * spline.at(np.exp(-u2)[:, None] * spec.beta[None, :])
    return SpectralGrid(spec, out)
