"""Figures written next to the tabular reports."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_MARKERS = {"dense": "o", "exact": "s", "cheb": "^", "mahler": "D"}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_convergence(report, path, title=None):
    """Per-level entropy values by method, with the norm bracket shaded."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    methods = sorted({r.method for r in report.rows})
    for m in methods:
        rows = [r for r in report.rows if r.method == m and r.order > 0]
        if not rows:
            continue
        if m == "mahler":
            for r in rows:
                ax.axhline(r.value, color="k", ls="--", lw=0.8, label=f"mahler N^d={r.order}")
            continue
        ax.plot([r.order for r in rows], [r.value for r in rows],
                marker=_MARKERS.get(m, "."), lw=1, label=m)
    if report.bracket:
        lo, hi = report.bracket
        ax.axhspan(lo, hi, color="0.9", zorder=0, label="norm bracket")
        span = [r.value for r in report.rows]
        if span:
            pad = max(1e-3, 0.1 * (max(span) - min(span)))
            ax.set_ylim(min(span) - pad, max(span) + pad)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("quotient order")
    ax.set_ylabel("entropy per level")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_decay(profile, path, title=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(profile.radii, profile.maxima, "o", ms=3, label="shell max")
    fit = [math.exp(profile.intercept + profile.rate * r) for r in profile.radii]
    ax.semilogy(profile.radii, fit, "-", lw=1, label=f"rate {profile.rate:.4f}")
    ax.set_xlabel("word length")
    ax.set_ylabel("max |coefficient|")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_counts(orders, counts, path, title=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(orders, [math.log(c) / n for n, c in zip(orders, counts)], "s-", lw=1)
    ax.set_xlabel("quotient order")
    ax.set_ylabel("log |Fix| / order")
    if title:
        ax.set_title(title)
    return _finish(fig, path)
