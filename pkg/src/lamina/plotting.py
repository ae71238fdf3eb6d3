"""Matplotlib report figures written straight to files.

Figures are saved as SVG with a fixed hash salt and no date stamp so that
reruns with the same data produce the same bytes.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis.estimators import m1_closed_form  # noqa: E402
from .engine import BETA_STAR  # noqa: E402

plt.rcParams["svg.hashsalt"] = "lamina"


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if path.suffix == ".svg" else None)
    plt.close(fig)
    return path


def plot_series(t, value, stderr, path, *, slope: float | None = None, ylabel: str = "mean",
                title: str = "") -> Path:
    """Log-log means with error bars and an optional reference power law."""
    t, value, stderr = (np.asarray(x, dtype=float) for x in (t, value, stderr))
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(t, value, yerr=stderr, fmt="o", ms=4, capsize=2, label="estimate")
    if slope is not None and len(t):
        ref = value[0] * (t / t[0]) ** slope
        ax.plot(t, ref, "--", label=f"slope {slope:.4g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def plot_m1_profile(r, mean, stderr, path, beta: float = BETA_STAR) -> Path:
    """Monte Carlo first moment against the closed form on (0, 1)."""
    u = np.linspace(0.0, 1.0, 401)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(u, m1_closed_form(u, beta), "-", label="closed form")
    ax.errorbar(r, mean, yerr=stderr, fmt="o", ms=4, capsize=2, label="Monte Carlo")
    ax.set_xlabel("r")
    ax.set_ylabel("E M(r)")
    ax.legend()
    return _save(fig, path)


def plot_box_counts(curves: dict[str, tuple[Sequence[float], Sequence[float]]], path) -> Path:
    """log N(eps) against log(1/eps), one line per named chord set."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for name, (scales, counts) in curves.items():
        x = 1.0 / np.asarray(scales, dtype=float)
        y = np.asarray(counts, dtype=float)
        slope = np.polyfit(np.log(x), np.log(y), 1)[0]
        ax.plot(x, y, "o-", ms=4, label=f"{name} (slope {slope:.3f})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("1 / cell size")
    ax.set_ylabel("occupied cells")
    ax.legend()
    return _save(fig, path)


def plot_quantiles(reference, others: dict[str, Sequence[float]], path, label: str = "direct") -> Path:
    """Quantile-quantile plot of other samples against a reference sample."""
    reference = np.asarray(reference, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    lo, hi = reference.min(), reference.max()
    ax.plot([lo, hi], [lo, hi], "k:", lw=1)
    for name, q in others.items():
        ax.plot(reference, np.asarray(q, dtype=float), ".", label=name)
    ax.set_xlabel(f"{label} quantiles")
    ax.set_ylabel("quantiles")
    ax.legend()
    return _save(fig, path)


def _find(results, cid: int) -> list[dict]:
    for r in results:
        if r.id == cid:
            return r.checks
    return []


def acceptance_figures(results, out_dir) -> list[Path]:
    """Figures for whichever criteria are present in results."""
    os.makedirs(out_dir, exist_ok=True)
    out_dir = Path(out_dir)
    paths = []
    m1 = [c for c in _find(results, 7) if "r" in c]
    if m1:
        paths.append(plot_m1_profile([c["r"] for c in m1], [c["estimate"] for c in m1],
                                     [c["stderr"] for c in m1], out_dir / "m1_profile.svg"))
    h = [c for c in _find(results, 9) if "times" in c]
    if h:
        c = h[0]
        paths.append(plot_series(c["times"], c["means"], c["stderrs"], out_dir / "height_regression.svg",
                                 slope=BETA_STAR / 2, ylabel="E H(1, -1)", title="alpha = 2"))
    dims = {c["name"].replace("box dimension of ", ""): (c["scales"], c["counts"])
            for c in _find(results, 14) if "counts" in c}
    if dims:
        paths.append(plot_box_counts(dims, out_dir / "box_counts.svg"))
    ss = [c for c in _find(results, 15) if "quantiles_t05" in c]
    if ss:
        q = ss[0]["quantiles_t05"]
        paths.append(plot_quantiles(q["direct"], {"rebuilt": q["rebuilt"], "rebuilt, exponent 0.5":
                                                  q["rebuilt_control"]}, out_dir / "self_similarity_qq.svg"))
    return paths


__all__ = ["plot_series", "plot_m1_profile", "plot_box_counts", "plot_quantiles", "acceptance_figures"]
