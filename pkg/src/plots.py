import io
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed salt and no date keep the svg bytes a function of the data
matplotlib.rcParams["svg.hashsalt"] = "bakerdim"
_SVG_METADATA = {"Date": None}


def _render(fig) -> bytes:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    return buffer.getvalue()


def cross_section_svg(panels: Sequence[Tuple[str, np.ndarray]], x_label: str = "y", y_label: str = "w") -> bytes:
    """
    side-by-side scatter plots of (y, w) cross-sections

    Args:
        panels: (title, (n, 2) points) per panel
    """
    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4.5), squeeze=False)
    for ax, (title, points) in zip(axes[0], panels):
        ax.scatter(points[:, 0], points[:, 1], s=1, c="black", linewidths=0, rasterized=False)
        ax.set_title(title)
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
    fig.tight_layout()
    return _render(fig)


def sweep_svg(beta: np.ndarray, series: Dict[str, np.ndarray], points: Optional[Dict[str, np.ndarray]] = None,
              title: str = "") -> bytes:
    """
    dimension curves against beta, with optional numerical estimates as markers
    """
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, values in series.items():
        ax.plot(beta, values, label=label)
    for label, values in (points or {}).items():
        finite = np.isfinite(values)
        ax.plot(beta[finite], values[finite], "o", markersize=3, label=label)
    ax.set_xlabel("beta")
    ax.set_ylabel("dimension")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _render(fig)


def scaling_svg(log_eps: np.ndarray, curves: Dict[str, np.ndarray], title: str = "") -> bytes:
    """log statistic against log epsilon per estimator"""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, values in curves.items():
        ax.plot(log_eps, values, "o-", markersize=3, label=label)
    ax.set_xlabel("log epsilon")
    ax.set_ylabel("log statistic")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _render(fig)
