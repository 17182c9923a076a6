"""Figure rendering for campaign reports.

Each function writes one PNG next to the delimited export it visualizes:
cumulative success curves, per-solenoid fired/succeeded bars, and the
decision scatter over the corral floor.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SOLENOID_CMAP = plt.get_cmap("tab10")


def render_curves(curves: dict[str, np.ndarray], out_path, title: str = "Cumulative success") -> None:
    """One line per policy: success fraction within 1..N impulses."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    markers = ("o", "s", "^", "d", "v", "*")
    for i, (label, values) in enumerate(sorted(curves.items())):
        impulses = np.arange(1, len(values) + 1)
        ax.plot(impulses, values, marker=markers[i % len(markers)], label=label)
    ax.set_xlabel("impulses")
    ax.set_ylabel("cumulative success probability")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, linestyle="--", alpha=0.5)
    ax.legend(loc="lower right")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_histogram(fired: np.ndarray, succeeded: np.ndarray, out_path,
                     title: str = "Impulses per solenoid") -> None:
    """Per-solenoid fired and succeeded counts as grouped bars."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    solenoids = np.arange(len(fired))
    width = 0.4
    ax.bar(solenoids - width / 2, fired, width, label="fired", color="#c44e52")
    ax.bar(solenoids + width / 2, succeeded, width, label="succeeded", color="#4c72b0")
    ax.set_xlabel("solenoid")
    ax.set_ylabel("count")
    ax.set_xticks(solenoids)
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _hexagon_vertices(inradius: float, rotation_deg: float) -> np.ndarray:
    circum = inradius / math.cos(math.radians(30.0))
    angles = np.radians(rotation_deg + 30.0 + 60.0 * np.arange(7))
    return np.column_stack([circum * np.cos(angles), circum * np.sin(angles)])


def render_scatter(points, out_path, inradius: float = 90.0,
                   rotation_deg: float = 15.0, title: str = "Decisions") -> None:
    """Die positions colored by the solenoid chosen there, with the corral
    outline and solenoid locations for reference."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    outline = _hexagon_vertices(inradius, rotation_deg)
    ax.plot(outline[:, 0], outline[:, 1], color="black", linewidth=1.0)
    if points:
        arr = np.asarray(points, dtype=float)
        ax.scatter(
            arr[:, 0], arr[:, 1], c=arr[:, 2].astype(int), cmap=_SOLENOID_CMAP,
            vmin=0, vmax=9, s=4, alpha=0.6, linewidths=0,
        )
        handles = [
            plt.Line2D([], [], marker="o", linestyle="", color=_SOLENOID_CMAP(sol / 9.0),
                       label=f"solenoid {sol}")
            for sol in sorted({int(p[2]) for p in points})
        ]
        ax.legend(handles=handles, loc="upper right", fontsize=7)
    ax.set_aspect("equal")
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
