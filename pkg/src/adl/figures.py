"""Figure rendering for the report path.

Every scan command drops a PNG next to its delimited output; these
helpers keep all matplotlib use in one place (Agg backend, no display).
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def sumset_cover_figure(records: list[dict], path: str) -> str:
    """Sets tested per modulus, colored by pass/fail."""
    fig, ax = plt.subplots(figsize=(7, 4))
    qs = [str(r["q"]) for r in records]
    tested = [r["sets_tested"] for r in records]
    colors = ["tab:green" if r["counterexample_count"] == 0 else "tab:red" for r in records]
    ax.bar(qs, tested, color=colors)
    ax.set_yscale("log")
    ax.set_xlabel("modulus q")
    ax.set_ylabel("subsets tested")
    ax.set_title("four-fold sumset cover verification")
    return _finish(fig, path)


def spectrum_figure(alphas: np.ndarray, err_over_n: np.ndarray, is_major: np.ndarray,
                    title: str, path: str, max_points: int = 4096) -> str:
    """|error|/N across the torus, majors and minors distinguished.

    Long grids are max-pooled so peaks survive the downsampling.
    """
    m = alphas.size
    if m > max_points:
        bins = max_points
        pad = (-m) % bins
        err = np.pad(err_over_n, (0, pad), constant_values=0.0).reshape(bins, -1)
        maj = np.pad(is_major, (0, pad), constant_values=False).reshape(bins, -1)
        err_plot = err.max(axis=1)
        maj_plot = maj.any(axis=1)
        alpha_plot = np.linspace(0, 1, bins, endpoint=False)
    else:
        err_plot, maj_plot, alpha_plot = err_over_n, is_major, alphas
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(alpha_plot[maj_plot], err_plot[maj_plot], ".", ms=2, label="major", color="tab:blue")
    if (~maj_plot).any():
        ax.plot(alpha_plot[~maj_plot], err_plot[~maj_plot], ".", ms=2, label="minor",
                color="tab:orange")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel("error / N")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    return _finish(fig, path)


def per_q_error_figure(per_q_max: dict[int, float], title: str, path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    qs = sorted(per_q_max)
    ax.plot(qs, [per_q_max[q] for q in qs], "o", ms=3)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("arc denominator q")
    ax.set_ylabel("max |model error| / N")
    ax.set_title(title)
    return _finish(fig, path)


def discrepancy_trend_figure(entries: list[dict], path: str) -> str:
    """Discrepancy versus N per (W, b) series."""
    fig, ax = plt.subplots(figsize=(7, 4))
    series: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for e in entries:
        series.setdefault((e["W"], e["b"]), []).append((e["N"], e["discrepancy"]))
    for (w_val, b), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"W={w_val}, b={b}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("N")
    ax.set_ylabel("sup |nu_hat - ind_hat| / N")
    ax.set_title("pseudorandomness discrepancy")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def restriction_figure(rows: list[dict], path: str) -> str:
    """Level-set statistics over delta (log-log)."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    deltas = [r["delta"] for r in rows]
    axes[0].plot(deltas, [r["measure"] for r in rows], "o-")
    axes[0].set_xscale("log")
    axes[0].set_yscale("log")
    axes[0].set_xlabel(r"$\delta$")
    axes[0].set_ylabel("superlevel measure")
    axes[1].plot(deltas, [r["measure_stat"] for r in rows], "o-", label="measure stat")
    axes[1].plot(deltas, [r["count_stat"] for r in rows], "s-", label="count stat")
    axes[1].set_xscale("log")
    axes[1].set_xlabel(r"$\delta$")
    axes[1].set_ylabel("normalized statistic")
    axes[1].legend(fontsize=8)
    fig.suptitle("large-spectrum scaling")
    return _finish(fig, path)


def window_figure(exceptions: list[dict], lo: int, hi: int, title: str, path: str) -> str:
    """Histogram of unrepresented even integers across the window."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ns = [e["n"] for e in exceptions]
    if ns:
        ax.hist(ns, bins=min(60, max(10, len(ns) // 8 + 1)), color="tab:red")
    ax.set_xlim(lo, hi)
    ax.set_xlabel("n")
    ax.set_ylabel("unrepresented evens")
    ax.set_title(title)
    return _finish(fig, path)


def merged_overview_figure(merged: dict, path: str) -> str:
    """One panel per merged report kind, counting entries."""
    fig, ax = plt.subplots(figsize=(7, 4))
    kinds: dict[str, int] = {}
    for entry in merged.get("reports", []):
        k = entry["report"].get("kind", "unknown")
        kinds[k] = kinds.get(k, 0) + 1
    if kinds:
        ax.bar(list(kinds.keys()), list(kinds.values()), color="tab:blue")
    ax.set_ylabel("reports")
    ax.set_title("merged report inventory")
    return _finish(fig, path)
