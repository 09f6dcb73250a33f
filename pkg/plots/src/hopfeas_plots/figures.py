"""Figure regeneration from the simulator's CSV tables.

Each figure id is bound to one CSV schema (the exact header the simulator
writes).  Rendering is read-only over the inputs and tolerant of missing or
non-numeric cells: absent values are dropped point-wise, never raised, so
any schema-valid CSV renders.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = ("fig1_sweep", "fig2_robustness", "fig3_slip", "fig4_baseline")

SCHEMAS: dict[str, list[str]] = {
    "fig1_sweep": ["alpha", "v_td", "controller", "D_alpha", "dT_alpha", "J_over_Jideal"],
    "fig2_robustness": [
        "combo", "m", "T", "k_min", "k_max", "v_td",
        "alpha_crit", "alpha_50", "slope", "intercept", "r_squared", "proportionality",
    ],
    "fig3_slip": ["angle_deg", "alpha", "D_2D", "dT_2D", "eta"],
    "fig4_baseline": [
        "alpha", "A", "k_max_prime", "conservatism_ratio",
        "J_param_based", "J_conservative", "J_stiffness_as_state",
        "reach_param_based", "reach_conservative", "reach_stiffness_as_state",
        "alpha_infeas", "alpha_crit",
    ],
}


class SchemaMismatch(ValueError):
    """CSV header does not match the figure's documented schema."""


class MissingColumn(SchemaMismatch):
    """A required column is absent from the CSV header."""


@dataclass(frozen=True)
class FigureSpec:
    source_csv: str
    figure_id: str
    output: str


def _to_float(cell: str) -> float:
    try:
        return float(cell)
    except (TypeError, ValueError):
        return math.nan


def load_table(path, figure_id: str) -> dict[str, np.ndarray]:
    """Read and schema-check a CSV; string column 'controller' kept as-is,
    everything else parsed to float with blanks as NaN."""
    if figure_id not in SCHEMAS:
        raise ValueError(f"unknown figure id {figure_id!r}")
    expected = SCHEMAS[figure_id]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file") from None
        rows = list(reader)
    missing = [c for c in expected if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing column(s) {missing}")
    if header != expected:
        raise SchemaMismatch(f"{path}: header {header} != expected {expected}")
    table: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        cells = [r[j] if j < len(r) else "" for r in rows]
        if name == "controller":
            table[name] = np.array(cells, dtype=object)
        else:
            table[name] = np.array([_to_float(c) for c in cells])
    return table


def _finite(*cols):
    mask = np.ones(cols[0].shape, dtype=bool)
    for c in cols:
        mask &= np.isfinite(c)
    return mask


def _controller_series(table, controller: str, metric: str):
    """Median and min/max envelope across the touchdown-velocity ensemble."""
    sel = table["controller"] == controller
    alphas = np.unique(table["alpha"][sel])
    med, lo, hi = [], [], []
    for a in alphas:
        vals = table[metric][sel & (table["alpha"] == a)]
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            med.append(math.nan), lo.append(math.nan), hi.append(math.nan)
        else:
            med.append(float(np.median(vals)))
            lo.append(float(vals.min()))
            hi.append(float(vals.max()))
    return alphas, np.array(med), np.array(lo), np.array(hi)


def _fig1(table, alpha_crit: float):
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    panels = (("D_alpha", "normalized L-inf deviation"), ("dT_alpha", "liftoff-time deviation"))
    for ax, (metric, label) in zip(axes, panels):
        for controller, color in (("param_based", "tab:red"), ("stiffness_as_state", "tab:blue")):
            a, med, lo, hi = _controller_series(table, controller, metric)
            ok = _finite(med)
            ax.plot(a[ok], med[ok], color=color, label=controller.replace("_", " "))
            ax.fill_between(a[ok], lo[ok], hi[ok], color=color, alpha=0.2, linewidth=0)
        ax.axvline(alpha_crit, color="k", linestyle=":", label=f"alpha_crit = {alpha_crit:g}")
        ax.set_xscale("log")
        ax.set_xlabel("alpha")
        ax.set_ylabel(label)
    axes[0].legend(fontsize=8)
    fig.suptitle("1D stance sweep: prediction vs realization")
    return fig


def _fig2(table):
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    x, y = table["alpha_crit"], table["alpha_50"]
    ok = _finite(x, y)
    ax.loglog(x[ok], y[ok], "o", color="tab:red", label="combos")
    if ok.any():
        span = np.array([x[ok].min() * 0.8, x[ok].max() * 1.25])
        ax.loglog(span, span, "k--", linewidth=0.8, label="alpha_50 = alpha_crit")
        prop = table["proportionality"][ok][0] if np.isfinite(table["proportionality"][ok][0]) else None
        if prop is not None:
            ax.loglog(span, prop * span, color="tab:blue", linewidth=0.9,
                      label=f"slope-1 fit ({prop:.2f} alpha_crit)")
        r2 = table["r_squared"][ok][0]
        slope = table["slope"][ok][0]
        if np.isfinite(r2):
            ax.annotate(
                f"R^2 = {r2:.3f}\nslope = {slope:.2f}",
                xy=(0.05, 0.82), xycoords="axes fraction", fontsize=9,
            )
    ax.set_xlabel("analytic threshold alpha_crit")
    ax.set_ylabel("empirical 50% crossing alpha_50")
    ax.legend(fontsize=8, loc="lower right")
    fig.suptitle("Deviation-crossing scaling across task parameters")
    return fig


def _fig3(table, mu: float):
    fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.6))
    angles = [a for a in np.unique(table["angle_deg"]) if np.isfinite(a)]
    colors = {15.0: "tab:red", 20.0: "tab:orange", 30.0: "tab:purple"}
    metrics = (("D_2D", "CoM mismatch"), ("dT_2D", "timing deviation"), ("eta", "friction ratio"))
    for ax, (metric, label) in zip(axes, metrics):
        for angle in angles:
            sel = (table["angle_deg"] == angle) & _finite(table["alpha"], table[metric])
            a = table["alpha"][sel]
            v = table[metric][sel]
            order = np.argsort(a)
            color = colors.get(float(angle), "tab:gray")
            name = f"{angle:g} deg"
            # sparse angle entries are spot checks: stars instead of a line
            if a.size <= 4:
                ax.plot(a[order], v[order], "*", markersize=10, color=color, label=name)
            else:
                ax.plot(a[order], v[order], color=color, label=name)
        ax.set_xscale("log")
        ax.set_xlabel("alpha")
        ax.set_ylabel(label)
    axes[2].axhline(mu, color="red", linestyle="--", linewidth=1.0, label=f"friction cone mu = {mu:g}")
    for ax in axes:
        ax.legend(fontsize=7)
    fig.suptitle("Planar SLIP sweep: mechanism transfer")
    return fig


def _fig4(table):
    fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.6))
    alpha = table["alpha"]
    ok = np.isfinite(alpha)
    a_lo, a_hi = (alpha[ok].min(), alpha[ok].max()) if ok.any() else (0.1, 316.0)
    infeas = table["alpha_infeas"][ok][0] if ok.any() else math.nan
    crit = table["alpha_crit"][ok][0] if ok.any() else math.nan

    axA = axes[0]
    sel = _finite(alpha, table["conservatism_ratio"])
    axA.plot(alpha[sel], table["conservatism_ratio"][sel], color="tab:red")
    if math.isfinite(infeas) and math.isfinite(crit):
        axA.axvspan(a_lo, infeas, color="tab:red", alpha=0.15, label="no restriction works")
        axA.axvspan(infeas, crit, color="tab:orange", alpha=0.15, label="conservative tuning")
        axA.axvspan(crit, a_hi, color="tab:green", alpha=0.15, label="no restriction needed")
    axA.set_xscale("log")
    axA.set_xlabel("alpha")
    axA.set_ylabel("admissible-range fraction")
    axA.legend(fontsize=7)
    axA.set_title("A: minimum-conservatism restriction")

    axB = axes[1]
    for column, color, name in (
        ("J_param_based", "tab:orange", "param based"),
        ("J_conservative", "tab:red", "conservative"),
        ("J_stiffness_as_state", "tab:blue", "stiffness as state"),
    ):
        sel = _finite(alpha, table[column])
        axB.plot(alpha[sel], table[column][sel], color=color, label=name)
    axB.set_xscale("log")
    axB.set_xlabel("alpha")
    axB.set_ylabel("J / J_ideal")
    axB.legend(fontsize=7)
    axB.set_title("B: realized cost")

    axC = axes[2]
    bars = (
        ("reach_stiffness_as_state", "stiffness as state", "tab:blue"),
        ("reach_conservative", "conservative", "tab:red"),
        ("reach_param_based", "param based", "tab:orange"),
    )
    for i, (column, name, color) in enumerate(bars):
        sel = (table[column] == 1.0) & np.isfinite(alpha)
        if sel.any():
            axC.barh(i, alpha[sel].max() - alpha[sel].min(), left=alpha[sel].min(),
                     height=0.5, color=color)
        axC.text(a_lo, i + 0.33, name, fontsize=8)
    axC.set_xscale("log")
    axC.set_xlim(a_lo * 0.8, a_hi * 1.2)
    axC.set_yticks([])
    axC.set_xlabel("alpha")
    axC.set_title("C: guaranteed-realizability reach")
    return fig


def render(spec: FigureSpec, alpha_crit: float = 25.0, mu: float = 0.7):
    """Render one figure from its CSV and save to spec.output.

    alpha_crit and mu place the threshold marker (fig1) and friction-cone
    line (fig3); the CSV schemas for those figures do not carry the task
    constants.  Returns the matplotlib Figure.
    """
    table = load_table(spec.source_csv, spec.figure_id)
    if spec.figure_id == "fig1_sweep":
        fig = _fig1(table, alpha_crit)
    elif spec.figure_id == "fig2_robustness":
        fig = _fig2(table)
    elif spec.figure_id == "fig3_slip":
        fig = _fig3(table, mu)
    else:
        fig = _fig4(table)
    fig.savefig(spec.output, bbox_inches="tight")
    plt.close(fig)
    return fig
