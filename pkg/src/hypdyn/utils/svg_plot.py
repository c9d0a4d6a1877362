# hypdyn/utils/svg_plot.py
"""SVG-эмиттеры поверх уже вычисленной геометрии (без интерактивного интерфейса)."""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from hypdyn.classify.foliation import FoliationDescriptor  # noqa: E402
from hypdyn.tower.trace import OrbitTrace  # noqa: E402

if TYPE_CHECKING:
    from hypdyn.blaschke.model import ModelTowerState

logger = logging.getLogger(__name__)

_LEAF_COLORS = {"contracting": "tab:blue", "eventually_isometric": "tab:orange"}

# детерминированные id в SVG
plt.rcParams["svg.hashsalt"] = "hypdyn"


def _unit_circle(ax, **kw) -> None:
    t = np.linspace(0.0, 2.0 * np.pi, 361)
    ax.plot(np.cos(t), np.sin(t), color=kw.pop("color", "black"), lw=kw.pop("lw", 0.8), **kw)


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    logger.info("wrote %s", path)
    return path


def plot_regions(state: "ModelTowerState", path: Path) -> Path:
    """Для каждого уровня n: круг, дыры A_n^h (h: последний уровень), окружность |z| = r_n, c_n и v_n."""
    h = state.built
    cols = min(4, h + 1) or 1
    rows = math.ceil((h + 1) / cols) or 1
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3.2 * rows), squeeze=False)
    for ax in axes.flat:
        ax.set_axis_off()
    for n in range(h + 1):
        ax = axes.flat[n]
        lvl = state.levels[n]
        _unit_circle(ax)
        t = np.linspace(0.0, 2.0 * np.pi, 361)
        ax.plot(lvl.r * np.cos(t), lvl.r * np.sin(t), ls="--", lw=0.6, color="tab:green")
        for comp in state.region(n, h).components:
            pts = comp.points
            ax.fill(pts.real, pts.imag, color="0.6", lw=0.4, ec="0.2")
        ax.plot([lvl.critical_point], [0.0], "x", color="tab:red", ms=4)
        ax.plot([lvl.critical_value], [0.0], "+", color="tab:purple", ms=5)
        ax.set_title(f"U_{n}: a={lvl.a:g}, r={lvl.r:.4g}", fontsize=8)
        ax.set_aspect("equal")
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
    return _save(fig, path)


def plot_leaves(descriptors: Sequence[FoliationDescriptor], path: Path) -> Path:
    """Листы слоений поверхности 0 в модели круга (точки-проекции)."""
    fig, ax = plt.subplots(figsize=(5, 5))
    _unit_circle(ax)
    for desc in descriptors:
        color = _LEAF_COLORS.get(desc.kind, "black")
        for k, leaf in enumerate(desc.leaves):
            pts = np.asarray(leaf.points, dtype=complex)
            ax.plot(pts.real, pts.imag, lw=0.9, color=color, label=desc.kind if k == 0 else None)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if descriptors:
        ax.legend(loc="lower right", fontsize=7, frameon=False)
    return _save(fig, path)


def plot_trace(trace: OrbitTrace, path: Path) -> Path:
    """1 − λ_n и δ_n в логарифмическом масштабе."""
    n = np.arange(trace.levels + 1)
    defect = 1.0 - trace.lam
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    mask = np.isfinite(defect) & (defect > 0)
    if mask.any():
        ax1.semilogy(n[mask], defect[mask], ".-", lw=0.8)
    ax1.set_xlabel("n")
    ax1.set_title("1 − λ_n", fontsize=9)
    delta = trace.delta
    mask = np.isfinite(delta) & (delta > 0)
    if mask.any():
        ax2.semilogy(n[mask], delta[mask], ".-", lw=0.8, color="tab:orange")
    ax2.set_xlabel("n")
    ax2.set_title("δ_n", fontsize=9)
    fig.suptitle(trace.tower.name or "tower", fontsize=10)
    return _save(fig, path)
