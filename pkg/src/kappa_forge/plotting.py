"""Figures for suite reports.

Each function takes the JSON report produced by ``run_suite`` and writes PNG
files next to it; nothing here feeds back into the checks.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {"figure.figsize": (5.0, 3.6), "figure.dpi": 120, "axes.grid": True,
         "grid.alpha": 0.3, "font.size": 9, "savefig.bbox": "tight",
         "svg.hashsalt": "kappa-forge"}


def _save(fig, path: Path) -> Path:
    # fixed metadata keeps repeated runs byte-stable
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_convergence(study: dict, path: Path, title: str, xlabel: str, slope: float) -> Path:
    xs = np.asarray(study.get("sizes") or study["widths"], dtype=float)
    errs = np.asarray(study["errors"], dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(xs, errs, "o-", label="observed")
        # reference line through the first point
        if "sizes" in study:
            ref = errs[0] * (xs / xs[0]) ** (-slope)
        else:
            ref = errs[0] * (xs / xs[0]) ** slope
        ax.loglog(xs, ref, "k--", lw=0.8, label=f"order {slope:g}")
        for x, e, o in zip(xs[1:], errs[1:], study["orders"]):
            ax.annotate(f"{o:.2f}", (x, e), textcoords="offset points", xytext=(4, 4))
        ax.set_xlabel(xlabel)
        ax.set_ylabel("max error")
        ax.set_title(title)
        ax.legend()
        return _save(fig, path)


def plot_margins(report: dict, path: Path) -> Path:
    """log10(residual / tol) per counted check; bars left of zero pass."""
    rows = [c for c in report["checks"] if c["counted"]]
    labels, vals, colors = [], [], []
    for c in rows:
        r, t = max(abs(float(c["residual"])), 1e-300), float(c["tol"])
        if c["mode"] == "min":
            margin = np.log10(t / r) if t > 0 else -16.0
        elif t == 0:
            margin = -16.0 if r <= 1e-300 else 16.0
        else:
            margin = np.log10(r / t)
        labels.append(f"{c['suite']}: {c['name']}")
        vals.append(max(margin, -16.0))
        colors.append("tab:green" if c["pass"] else "tab:red")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.5, 0.22 * len(rows) + 1.0))
        y = np.arange(len(rows))
        ax.barh(y, vals, color=colors)
        ax.axvline(0.0, color="k", lw=0.8)
        ax.set_yticks(y, labels, fontsize=6)
        ax.invert_yaxis()
        ax.set_xlabel("log10(residual / tolerance)")
        ax.set_title(f"suite {report['suite']}: {'pass' if report['pass'] else 'FAIL'}")
        return _save(fig, path)


def plot_cocycle(data: dict, path: Path) -> Path:
    cyc = np.asarray(data["cyclicity_defect"], dtype=float)
    hoch = np.asarray(data["hochschild_defect"], dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(np.arange(len(cyc)), np.maximum(cyc, 1e-18), "o", label="cyclicity / |phi|")
        ax.semilogy(np.arange(len(hoch)), np.maximum(hoch, 1e-18), "s",
                    label="Hochschild / l1 scale")
        ax.axhline(1e-4, color="k", ls="--", lw=0.8, label="tolerance")
        ax.set_xlabel("fixture tuple")
        ax.set_ylabel("relative defect")
        ax.set_title(f"cocycle defects (sign {data['sign']:+d})")
        ax.legend()
        return _save(fig, path)


def render_report(report: dict, outdir) -> list[Path]:
    """Write every figure the report supports into ``outdir``; returns the paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    tag = report["suite"]
    paths = [plot_margins(report, out / f"{tag}_margins.png")]
    series = report.get("series", {})
    if "star3_convergence" in series:
        paths.append(plot_convergence(series["star3_convergence"], out / "star3_convergence.png",
                                      "grid star vs direct oracle", "n (nodes per axis)", 2.0))
    if "cross_engine" in series:
        paths.append(plot_convergence(series["cross_engine"], out / "cross_engine.png",
                                      "mollified plane waves vs symbolic", "mollifier width", 1.0))
    if "cocycle" in series:
        paths.append(plot_cocycle(series["cocycle"], out / "cocycle_defects.png"))
    return paths
