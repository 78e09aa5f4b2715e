"""Numerical engine for compactly supported elements of the star algebra.

An element is stored through its partial Fourier transform in the first
variable,

    f~(v, beta) = (2 pi)^(-1/2) int f(alpha, beta) e^{-i alpha v} d alpha,

sampled on a rectangular (v, beta) grid.  In this representation E, EPS and
T_gamma are diagonal, and the star product is the twisted convolution

    (f * g)~(w, beta) = (2 pi)^(-1/2) int dv f~(v, beta) g~(w - v, e^{-v/kappa} beta).

Quadrature is the composite trapezoid rule by default (``rule="simpson"`` is
available): the integrands are smooth and compactly supported or Gaussian,
where the trapezoid rule converges faster than any power of h while Simpson
stays O(h^4).  Rescaled beta samples come from a not-a-knot cubic spline
with zero extension outside the box.
"""

from __future__ import annotations

import base64
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InterpolationOutOfRange, OutOfRange, SupportOverflow, UnsupportedGenerator
from .hopf import OperatorExpr, parse_operator

SQRT_2PI = math.sqrt(2 * math.pi)
SUPPORT_FLOOR = 1e-14
LEAKAGE_FLOOR = 1e-10


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` (even) intervals."""
    if n % 2:
        raise ValueError("Simpson's rule needs an even number of intervals")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


_RULES = {"trapezoid": trapezoid_weights, "simpson": simpson_weights}


@dataclass(frozen=True)
class GridSpec:
    """Uniform (v, beta) box.  ``n_v`` and ``n_beta`` count intervals."""

    v_min: float = -8.0
    v_max: float = 8.0
    n_v: int = 256
    beta_min: float = -12.0
    beta_max: float = 12.0
    n_beta: int = 256
    rule: str = "trapezoid"

    def __post_init__(self):
        if self.rule not in _RULES:
            raise ValueError(f"quadrature rule must be one of {sorted(_RULES)}")
        if not self.v_min < 0 < self.v_max:
            raise ValueError("the v range must contain 0 in its interior")
        if self.beta_max <= self.beta_min:
            raise ValueError("empty beta range")
        for n in (self.n_v, self.n_beta):
            if n < 16 or n % 2:
                raise ValueError(f"interval counts must be even and >= 16, got {n}")
        i0 = -self.v_min / self.hv
        if abs(i0 - round(i0)) > 1e-9:
            raise ValueError("v = 0 must be a grid node")

    @classmethod
    def symmetric(cls, v_max=8.0, n_v=256, beta_max=12.0, n_beta=256, rule="trapezoid"):
        return cls(-v_max, v_max, n_v, -beta_max, beta_max, n_beta, rule)

    @property
    def hv(self) -> float:
        return (self.v_max - self.v_min) / self.n_v

    @property
    def hb(self) -> float:
        return (self.beta_max - self.beta_min) / self.n_beta

    @property
    def i0(self) -> int:
        return int(round(-self.v_min / self.hv))

    @property
    def v(self) -> np.ndarray:
        return (np.arange(self.n_v + 1) - self.i0) * self.hv

    @property
    def beta(self) -> np.ndarray:
        return self.beta_min + np.arange(self.n_beta + 1) * self.hb

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_v + 1, self.n_beta + 1)

    def wv(self) -> np.ndarray:
        return _RULES[self.rule](self.n_v, self.hv)

    def wb(self) -> np.ndarray:
        return _RULES[self.rule](self.n_beta, self.hb)

    def refine(self, n_v: int, n_beta: int | None = None) -> "GridSpec":
        return GridSpec(self.v_min, self.v_max, n_v, self.beta_min, self.beta_max,
                        n_beta if n_beta is not None else n_v, self.rule)


class SpectralGrid:
    """Samples of f~(v, beta) on a :class:`GridSpec`; values are read-only."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values):
        values = np.array(values, dtype=np.complex128)
        if values.shape != spec.shape:
            raise ValueError(f"values have shape {values.shape}, spec needs {spec.shape}")
        values.setflags(write=False)
        self.spec = spec
        self.values = values

    @classmethod
    def zeros(cls, spec: GridSpec) -> "SpectralGrid":
        return cls(spec, np.zeros(spec.shape, dtype=np.complex128))

    @classmethod
    def from_function(cls, spec: GridSpec, spectrum) -> "SpectralGrid":
        V, B = np.meshgrid(spec.v, spec.beta, indexing="ij")
        return cls(spec, spectrum(V, B))

    def _check(self, other):
        if not isinstance(other, SpectralGrid) or other.spec != self.spec:
            raise ValueError("grids must share one GridSpec")

    def __add__(self, other):
        self._check(other)
        return SpectralGrid(self.spec, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SpectralGrid(self.spec, self.values - other.values)

    def __neg__(self):
        return SpectralGrid(self.spec, -self.values)

    def __rmul__(self, c):
        if isinstance(c, SpectralGrid):
            return NotImplemented
        return SpectralGrid(self.spec, complex(c) * self.values)

    def norm(self) -> float:
        return norm_l1(self)

    def __repr__(self):
        return f"SpectralGrid({self.spec}, l1={norm_l1(self):.6g})"


def norm_l1(f: SpectralGrid) -> float:
    s = f.spec
    return float(np.abs(f.values).sum() * s.hv * s.hb)


def rel_diff(f: SpectralGrid, g: SpectralGrid) -> float:
    scale = max(norm_l1(f), norm_l1(g))
    return norm_l1(f - g) / scale if scale else 0.0


def v_support(f: SpectralGrid, floor: float = SUPPORT_FLOOR):
    """Index range (lo, hi) of rows above ``floor`` times the peak, or None."""
    rows = np.abs(f.values).max(axis=1)
    peak = rows.max()
    if peak == 0:
        return None
    idx = np.nonzero(rows > floor * peak)[0]
    return int(idx[0]), int(idx[-1])


def edge_leakage(f: SpectralGrid) -> float:
    """Size of f~ on the beta edges relative to its peak (zero-extension error)."""
    peak = np.abs(f.values).max()
    if peak == 0:
        return 0.0
    edge = max(np.abs(f.values[:, 0]).max(), np.abs(f.values[:, -1]).max())
    return float(edge / peak)


class RowSpline:
    """Cubic splines along beta for a block of rows, evaluated row-wise."""

    def __init__(self, spec: GridSpec, rows: np.ndarray):
        self.spec = spec
        beta = spec.beta
        cs = CubicSpline(beta, rows, axis=1)
        # c has shape (4, n_beta, nrows); rearrange for gathers
        self.c = np.ascontiguousarray(np.moveaxis(cs.c, 2, 0))  # (nrows, 4, n_beta)
        self.nrows = rows.shape[0]

    def at(self, points: np.ndarray) -> np.ndarray:
        """Evaluate row r at ``points[r]`` (or shared 1-D ``points``); 0 outside."""
        s = self.spec
        pts = np.broadcast_to(points, (self.nrows,) + np.shape(points)[-1:])
        t = (pts - s.beta_min) / s.hb
        inside = (t >= -1e-12) & (t <= s.n_beta + 1e-12)
        idx = np.clip(np.floor(t).astype(np.int64), 0, s.n_beta - 1)
        dx = pts - (s.beta_min + idx * s.hb)
        r = np.arange(self.nrows)[:, None]
        c0 = self.c[r, 0, idx]
        c1 = self.c[r, 1, idx]
        c2 = self.c[r, 2, idx]
        c3 = self.c[r, 3, idx]
        out = ((c0 * dx + c1) * dx + c2) * dx + c3
        return np.where(inside, out, 0)


def _star_block(fv, wv, v, kappa, spline, glo, ghi, flo, fhi, i0, beta, nv, out):
    for k in range(flo, fhi + 1):
        weight = wv[k] * fv[k]
        if not np.any(weight):
            continue
        lam = math.exp(-v[k] / kappa)
        G = spline.at(lam * beta)
        j0 = glo + k - i0
        out[j0:j0 + (ghi - glo) + 1] += weight[None, :] * G


def grid_star(f: SpectralGrid, g: SpectralGrid, kappa, strict: bool = False,
              threads: int = 1, diagnostics: dict | None = None) -> SpectralGrid:
    f._check(g)
    s = f.spec
    kappa = float(kappa)
    fs, gs = v_support(f), v_support(g)
    if fs is None or gs is None:
        return SpectralGrid.zeros(s)
    flo, fhi = fs
    glo, ghi = gs
    i0 = s.i0
    if flo + glo - i0 < 0 or fhi + ghi - i0 > s.n_v:
        raise SupportOverflow(
            f"product support [{s.v[flo] + s.v[glo]:.3g}, {s.v[fhi] + s.v[ghi]:.3g}] "
            f"exceeds the v box [{s.v_min}, {s.v_max}]")
    leakage = max(edge_leakage(f), edge_leakage(g))
    if diagnostics is not None:
        diagnostics["leakage"] = max(diagnostics.get("leakage", 0.0), leakage)
    if strict and leakage > LEAKAGE_FLOOR:
        raise InterpolationOutOfRange(f"beta profile reaches the box edge (leakage {leakage:.2e})")
    wv = s.wv() / SQRT_2PI
    v = s.v
    beta = s.beta
    out = np.zeros(s.shape, dtype=np.complex128)
    if threads <= 1:
        spline = RowSpline(s, g.values[glo:ghi + 1])
        _star_block(f.values, wv, v, kappa, spline, glo, ghi, flo, fhi, i0, beta, s.n_v, out)
    else:
        # each thread owns a slab of beta columns; results are bitwise identical
        chunks = np.array_split(np.arange(s.n_beta + 1), threads)
        spline = RowSpline(s, g.values[glo:ghi + 1])

        def work(cols):
            block = np.zeros((s.n_v + 1, len(cols)), dtype=np.complex128)
            _star_block(f.values[:, cols], wv, v, kappa, spline, glo, ghi, flo, fhi,
                        i0, beta[cols], s.n_v, block)
            return cols, block

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for cols, block in pool.map(work, chunks):
                out[:, cols] = block
    return SpectralGrid(s, out)


def grid_translate(gamma: float, f: SpectralGrid) -> SpectralGrid:
    """T_gamma, i.e. f(alpha + i gamma, beta): multiply f~ by e^{-gamma v}."""
    factor = np.exp(-float(gamma) * f.spec.v)
    return SpectralGrid(f.spec, f.values * factor[:, None])


def d_beta(f: SpectralGrid) -> SpectralGrid:
    """Spectral derivative in beta (periodic extension of a compact profile)."""
    s = f.spec
    period = s.beta_max - s.beta_min
    vals = f.values[:, :-1]
    k = 2j * np.pi * np.fft.fftfreq(s.n_beta, d=period / s.n_beta)
    if s.n_beta % 2 == 0:
        k[s.n_beta // 2] = 0
    der = np.fft.ifft(np.fft.fft(vals, axis=1) * k[None, :], axis=1)
    out = np.empty(s.shape, dtype=np.complex128)
    out[:, :-1] = der
    out[:, -1] = der[:, 0]
    return SpectralGrid(s, out)


def _apply_generator(g: str, f: SpectralGrid, kappa: float) -> SpectralGrid:
    s = f.spec
    if g == "E":
        return SpectralGrid(s, f.values * (1j * s.v)[:, None])
    if g == "P":
        return d_beta(f)
    if g == "eps":
        return grid_translate(1.0 / kappa, f)
    if g == "epsinv":
        return grid_translate(-1.0 / kappa, f)
    raise UnsupportedGenerator(f"generator {g!r} has no action on grids")


def grid_apply_op(h, f: SpectralGrid, kappa) -> SpectralGrid:
    kappa = float(kappa)
    if isinstance(h, str):
        h = parse_operator(h, kappa) if "(" in h else OperatorExpr.gen(h)
    out = np.zeros(f.spec.shape, dtype=np.complex128)
    for word, c in h.terms.items():
        v = f
        for g in reversed(word):
            v = _apply_generator(g, v, kappa)
        out += c * v.values
    return SpectralGrid(f.spec, out)


def _beta_column(f: SpectralGrid, beta: float) -> np.ndarray:
    s = f.spec
    if not s.beta_min - 1e-12 <= beta <= s.beta_max + 1e-12:
        raise OutOfRange(f"beta={beta} outside [{s.beta_min}, {s.beta_max}]")
    t = (beta - s.beta_min) / s.hb
    j = int(round(t))
    if abs(t - j) < 1e-9:
        return f.values[:, j]
    return CubicSpline(s.beta, f.values, axis=1)(beta)


def grid_eval(f: SpectralGrid, alpha, beta: float) -> complex:
    """Point value f(alpha, beta); complex alpha is allowed."""
    s = f.spec
    col = _beta_column(f, float(beta))
    phase = np.exp(1j * np.multiply.outer(np.asarray(alpha, dtype=complex), s.v))
    val = phase @ (s.wv() * col) / SQRT_2PI
    return complex(val) if np.ndim(val) == 0 else val


def grid_involution(f: SpectralGrid, kappa, strict: bool = False) -> SpectralGrid:
    """(f*)~(v, beta) = conj f~(-v, e^{-v/kappa} beta)."""
    s = f.spec
    kappa = float(kappa)
    sup = v_support(f)
    if sup is None:
        return SpectralGrid.zeros(s)
    lo, hi = sup
    # row j of the result reads row 2 i0 - j of f
    jlo, jhi = 2 * s.i0 - hi, 2 * s.i0 - lo
    if jlo < 0 or jhi > s.n_v:
        raise SupportOverflow("reflected v support leaves the box")
    if strict and edge_leakage(f) > LEAKAGE_FLOOR:
        raise InterpolationOutOfRange("beta profile reaches the box edge")
    rows = np.arange(jlo, jhi + 1)
    src = f.values[2 * s.i0 - rows]
    lam = np.exp(-s.v[rows] / kappa)
    vals = RowSpline(s, src).at(lam[:, None] * s.beta[None, :])
    out = np.zeros(s.shape, dtype=np.complex128)
    out[rows] = np.conj(vals)
    return SpectralGrid(s, out)


def lebesgue_integral(f: SpectralGrid) -> complex:
    """Integral of f over R^2, via sqrt(2 pi) * int f~(0, beta) d beta."""
    s = f.spec
    return complex(SQRT_2PI * np.dot(s.wb(), f.values[s.i0]))


class GridBackend:
    """Coefficient backend for :mod:`kappa_forge.calculus` on spectral grids."""

    name = "grid"

    def __init__(self, kappa, spec: GridSpec, strict: bool = False, threads: int = 1):
        self.kappa = float(kappa)
        self.spec = spec
        self.strict = strict
        self.threads = threads
        self.diagnostics: dict = {}

    def zero(self):
        return SpectralGrid.zeros(self.spec)

    def one(self):
        raise NotImplementedError("the unit is not an element of the compact-spectrum grid algebra")

    def combine(self, pairs):
        out = np.zeros(self.spec.shape, dtype=np.complex128)
        for c, f in pairs:
            out += complex(c) * f.values
        return SpectralGrid(self.spec, out)

    def star(self, f, g):
        return grid_star(f, g, self.kappa, strict=self.strict, threads=self.threads,
                         diagnostics=self.diagnostics)

    def apply(self, h, f):
        if h.terms == {(): 1}:
            return f
        return grid_apply_op(h, f, self.kappa)

    def translate(self, gamma, f):
        return grid_translate(gamma, f)

    def is_zero(self, f):
        return not np.any(f.values)

    def distance(self, f, g):
        return norm_l1(f - g)

    def to_json(self, f):
        return grid_to_json(f, self.kappa)

    def from_json(self, data):
        return grid_from_json(data)[0]

    def describe(self, f):
        return f"grid[l1={norm_l1(f):.6g}]"


# -- file format ----------------------------------------------------------------

GRID_SCHEMA = "kappa-forge-grid/1"


def _header(f: SpectralGrid, kappa) -> dict:
    return {"schema": GRID_SCHEMA, "spec": asdict(f.spec),
            "kappa": None if kappa is None else float(kappa),
            "dtype": "complex128", "endianness": "little",
            "layout": "row-major (v, beta), interleaved re/im float64"}


def _raw(f: SpectralGrid) -> bytes:
    return np.ascontiguousarray(f.values, dtype="<c16").tobytes()


def grid_to_json(f: SpectralGrid, kappa=None) -> dict:
    head = _header(f, kappa)
    head["encoding"] = "base64"
    head["data"] = base64.b64encode(_raw(f)).decode("ascii")
    return head


def grid_from_json(data) -> tuple[SpectralGrid, float | None]:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("schema") != GRID_SCHEMA:
        raise ValueError(f"not a {GRID_SCHEMA} document")
    spec = GridSpec(**data["spec"])
    if data.get("encoding", "base64") != "base64":
        raise ValueError("inline grids must be base64 encoded")
    values = np.frombuffer(base64.b64decode(data["data"]), dtype="<c16").reshape(spec.shape)
    return SpectralGrid(spec, values), data.get("kappa")


def save_grid(f: SpectralGrid, path, kappa=None, raw: bool = False) -> None:
    """Write ``path`` as JSON; with ``raw`` the array goes to ``path + '.bin'``."""
    path = Path(path)
    if raw:
        head = _header(f, kappa)
        head["encoding"] = "raw"
        head["data_file"] = path.name + ".bin"
        path.with_name(path.name + ".bin").write_bytes(_raw(f))
        path.write_text(json.dumps(head, indent=1))
    else:
        path.write_text(json.dumps(grid_to_json(f, kappa)))


def load_grid(path) -> tuple[SpectralGrid, float | None]:
    path = Path(path)
    data = json.loads(path.read_text())
    if data.get("encoding") == "raw":
        spec = GridSpec(**data["spec"])
        buf = path.with_name(data["data_file"]).read_bytes()
        values = np.frombuffer(buf, dtype="<c16").reshape(spec.shape)
        return SpectralGrid(spec, values), data.get("kappa")
    return grid_from_json(data)
