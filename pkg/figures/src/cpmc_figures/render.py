"""The three standard figures built from one sweep table.

Each figure plots Monte Carlo curves over gamma with the limiting
values drawn as horizontal reference lines:

  fig1  gamma^4-scaled second moments against their small-gamma limits
        B0 = 16 zeta(3) and M0 = 26
  fig2  raw second moments against their large-gamma limits B_inf = 1/2
        and M_inf(alpha)
  fig3  efficiency E_hat = B_hat / M_hat against E0 and E_inf(alpha)

Error bars show one standard error where the sweep reports one (fig3
has no se column, so none are drawn).
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import Callable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reference import Constants
from .sweep_data import SweepTable

_MARKERS = ("o", "s", "^", "D", "v", "P", "X")


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    name: str
    filename: str
    title: str
    builder: Callable  # (ax, table, consts) -> dict of reference lines


def _alpha_marker(i: int) -> str:
    return _MARKERS[i % len(_MARKERS)]


def _build_scaled_moments(ax, table: SweepTable, consts: Constants) -> dict:
    first = table.rows_for_alpha(table.alphas[0])
    scale = first.gamma ** 4
    ax.errorbar(first.gamma, scale * first.B_hat, yerr=scale * first.B_se,
                marker="o", ms=3, lw=1, capsize=2, label=r"$\gamma^4 \hat B$")
    for i, alpha in enumerate(table.alphas):
        rows = table.rows_for_alpha(alpha)
        scale = rows.gamma ** 4
        ax.errorbar(rows.gamma, scale * rows.M_hat, yerr=scale * rows.M_se,
                    marker=_alpha_marker(i + 1), ms=3, lw=1, capsize=2,
                    label=rf"$\gamma^4 \hat M^{{{alpha:g}}}$")
    ax.axhline(consts.B0, color="k", ls=":", lw=1,
               label=rf"$16\zeta(3) = {consts.B0:.4f}$")
    ax.axhline(consts.M0, color="k", ls="--", lw=1,
               label=rf"${consts.M0:g}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel(r"$\gamma^4 \times$ second moment")
    return {"B0": consts.B0, "M0": consts.M0}


def _build_raw_moments(ax, table: SweepTable, consts: Constants) -> dict:
    first = table.rows_for_alpha(table.alphas[0])
    ax.errorbar(first.gamma, first.B_hat, yerr=first.B_se, marker="o", ms=3,
                lw=1, capsize=2, label=r"$\hat B$")
    lines = {"B_inf": consts.B_inf}
    for i, alpha in enumerate(table.alphas):
        rows = table.rows_for_alpha(alpha)
        ax.errorbar(rows.gamma, rows.M_hat, yerr=rows.M_se,
                    marker=_alpha_marker(i + 1), ms=3, lw=1, capsize=2,
                    label=rf"$\hat M^{{{alpha:g}}}$")
        m_inf = consts.M_inf[alpha]
        ax.axhline(m_inf, color="k", ls="--", lw=0.8)
        lines[f"M_inf[{alpha:g}]"] = m_inf
    ax.axhline(consts.B_inf, color="k", ls=":", lw=1,
               label=rf"$B_\infty = {consts.B_inf:g}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel("second moment")
    return lines


def _build_efficiency(ax, table: SweepTable, consts: Constants) -> dict:
    lines = {"E0": consts.E0}
    ax.axhline(consts.E0, color="k", ls=":", lw=1,
               label=rf"$E_0 = {consts.E0:.4f}$")
    for i, alpha in enumerate(table.alphas):
        rows = table.rows_for_alpha(alpha)
        ax.plot(rows.gamma, rows.E_hat, marker=_alpha_marker(i + 1), ms=3,
                lw=1, label=rf"$\hat E^{{{alpha:g}}}$")
        e_inf = consts.E_inf[alpha]
        ax.axhline(e_inf, color="k", ls="--", lw=0.8)
        lines[f"E_inf[{alpha:g}]"] = e_inf
    ax.set_xscale("log")
    ax.set_ylim(0.0, 1.1)
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel(r"efficiency $\hat B / \hat M^\alpha$")
    return lines


FIGURE_SPECS = (
    FigureSpec("scaled-moments", "fig1_scaled_moments",
               "Second moments, gamma^4 scaling, small-gamma limits",
               _build_scaled_moments),
    FigureSpec("raw-moments", "fig2_raw_moments",
               "Second moments with large-gamma limits",
               _build_raw_moments),
    FigureSpec("efficiency", "fig3_efficiency",
               "Relative efficiency with both limits",
               _build_efficiency),
)


def render_figure(spec: FigureSpec, table: SweepTable, consts: Constants,
                  outdir: str, fmt: str = "png") -> tuple[str, dict]:
    """Render one figure; return (written path, reference line values)."""
    consts.require_alphas(table.alphas)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    try:
        lines = spec.builder(ax, table, consts)
        ax.set_title(spec.title)
        ax.legend(fontsize=8, ncol=2)
        fig.tight_layout()
        path = os.path.join(outdir, f"{spec.filename}.{fmt}")
        fig.savefig(path)
    finally:
        plt.close(fig)
    return path, lines


def render_all(table: SweepTable, consts: Constants, outdir: str,
               source_csv: str, fmt: str = "png") -> dict:
    """Render every figure and write manifest.json; return the manifest."""
    os.makedirs(outdir, exist_ok=True)
    entries = []
    for spec in FIGURE_SPECS:
        path, lines = render_figure(spec, table, consts, outdir, fmt)
        entries.append({
            "name": spec.name,
            "file": os.path.basename(path),
            "reference_lines": lines,
        })
    manifest = {
        "source_csv": os.path.abspath(source_csv),
        "alphas": list(table.alphas),
        "rows": len(table),
        "figures": entries,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
