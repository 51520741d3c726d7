"""Figure rendering for the report path.

Renders the evaluation artifacts (median profiles, pooled p-value
histograms, pass-rate tables, dip fits) to image files next to the
CSV/JSON output.  Uses the Agg backend; nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import HistogramSpec, MedianProfile, PassRates
from .physics import HomFit, dip_model
from .stattests import CATEGORY_LABELS, TEST_CATEGORIES

_CATEGORY_COLORS = {
    "I": "#4c72b0",
    "II": "#dd8452",
    "III": "#55a868",
    "IV": "#c44e52",
    "V": "#8172b3",
}


def _category_color(test_id: int) -> str:
    return _CATEGORY_COLORS[TEST_CATEGORIES[test_id][0]]


def save_median_profile(profile: MedianProfile, path, mae_value: float | None = None) -> None:
    normalized = profile.normalized()
    ids = sorted(normalized)
    values = [normalized[t] for t in ids]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(range(len(ids)), values, color=[_category_color(t) for t in ids])
    ax.axhline(0.5, color="black", linestyle="--", linewidth=1, label="target 0.5")
    ax.set_xticks(range(len(ids)))
    ax.set_xticklabels([str(t) for t in ids])
    ax.set_xlabel("test")
    ax.set_ylabel("median p-value (test 9 halved)")
    title = "Median p-values"
    if mae_value is not None:
        title += f"  (MAE = {mae_value:.4f})"
    ax.set_title(title)
    ax.set_ylim(0, 1.05)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_histogram(hist: HistogramSpec, path) -> None:
    fig, ax = plt.subplots(figsize=(8, 4))
    lefts = [lo for lo, _ in hist.edges()]
    ax.bar(lefts, hist.counts, width=hist.bin_width * 0.92, align="edge",
           color="#4c72b0", label="observed")
    ax.axhline(hist.uniform_expectation, color="gray", linestyle="--",
               linewidth=1, label=f"uniform ({hist.uniform_expectation:.1f}/bin)")
    ax.set_xlabel("p-value")
    ax.set_ylabel("count")
    ax.set_title(f"Pooled p-value distribution ({hist.total} values)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pass_rates(rates: PassRates, path) -> None:
    ids = sorted(rates.rates)
    values = [rates.rates[t] for t in ids]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(range(len(ids)), values, color=[_category_color(t) for t in ids])
    ax.axhline(100.0, color="black", linewidth=0.5)
    ax.set_xticks(range(len(ids)))
    ax.set_xticklabels([str(t) for t in ids])
    ax.set_xlabel("test")
    ax.set_ylabel(f"subsequences passing at alpha={rates.alpha} (%)")
    ax.set_ylim(0, 105)
    handles = [
        plt.Rectangle((0, 0), 1, 1, color=color)
        for cat, color in _CATEGORY_COLORS.items()
    ]
    labels = [f"{cat} {CATEGORY_LABELS[cat]}" for cat in _CATEGORY_COLORS]
    ax.legend(handles, labels, loc="lower right", fontsize=7)
    ax.set_title(f"Pass rates over {rates.subsequences} subsequences")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_dip_fit(points, fit: HomFit, path) -> None:
    pts = np.asarray(list(points), dtype=float)
    L, y = pts[:, 0], pts[:, 1]
    grid = np.linspace(L.min(), L.max(), 400)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(L, y, "o", markersize=4, color="#4c72b0", label="data")
    ax.plot(grid, dip_model(grid, fit.baseline, fit.amplitude, fit.width),
            color="#c44e52", label="fit")
    ax.set_xlabel("delay (m)")
    ax.set_ylabel("coincidences")
    ax.set_title(
        f"Dip fit: C={fit.baseline:.3g}, A={fit.amplitude:.3g}, w={fit.width:.3g} m"
    )
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
