"""CSV tables and static figures for analysis and optimisation results.

Numbers are written with ``%``-style fixed formats (displacements 3 dp,
forces 1 dp) or as ``repr`` floats with ``full_precision``.  Neither depends
on the locale.  Column order is fixed by the ``*_COLUMNS`` constants.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .model import MemberKind, Model
from .optimizer import ConvergenceHistory, OptimizationResult
from .solver import SolveResult, iterate_cable_status

DISPLACEMENT_COLUMNS = ("node", "dx_mm", "dy_mm", "dz_mm")
REACTION_COLUMNS = ("node", "rx_N", "ry_N", "rz_N")
FORCE_COLUMNS = ("member", "kind", "axial_force_N", "cable_status")
SUMMARY_COLUMNS = ("member", "area_before_mm2", "area_after_mm2", "force_before_N", "force_after_N")


def _fmt(value: float, decimals: int, full: bool) -> str:
    value = float(value)
    if full:
        return repr(value)
    text = f"{value:.{decimals}f}"
    # avoid "-0.000" in rounded tables
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def _csv(header, rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def displacement_table(result: SolveResult, full_precision=False) -> str:
    rows = [[nid, *(_fmt(v, 3, full_precision) for v in d)]
            for nid, d in zip(result.node_ids, result.displacements)]
    return _csv(DISPLACEMENT_COLUMNS, rows)


def reaction_table(model: Model, result: SolveResult, full_precision=False) -> str:
    supported = {s.node for s in model.supports}
    rows = [[nid, *(_fmt(v, 1, full_precision) for v in r)]
            for nid, r in zip(result.node_ids, result.reactions) if nid in supported]
    return _csv(REACTION_COLUMNS, rows)


def cable_status(model: Model, result: SolveResult) -> dict[int, str]:
    state = result.cable_state
    return {cid: "active" if a else "passive" for cid, a in zip(state.cable_ids, state.active)}


def member_force_table(model: Model, result: SolveResult, full_precision=False, paper_signs=False) -> str:
    """Axial forces, tension positive (compression positive with ``paper_signs``)."""
    status = cable_status(model, result)
    sign = -1.0 if paper_signs else 1.0
    rows = [[m.id, m.kind.value, _fmt(sign * f, 1, full_precision), status.get(m.id, "")]
            for m, f in zip(model.members, result.forces)]
    return _csv(FORCE_COLUMNS, rows)


def optimization_summary(model: Model, result: OptimizationResult, full_precision=False,
                         paper_signs=False, space=None) -> str:
    """Per-member area and force before and after optimisation."""
    space = space if space is not None else result.space
    before_areas = model.areas
    after_areas = space.member_areas(result.best.x)
    before = iterate_cable_status(model).forces
    try:
        after = iterate_cable_status(model, after_areas).forces
    except (ValueError, RuntimeError):
        after = np.full(len(model.members), np.nan)
    sign = -1.0 if paper_signs else 1.0
    rows = [[m.id, _fmt(a0, 3, full_precision), _fmt(a1, 3, full_precision),
             _fmt(sign * f0, 1, full_precision), _fmt(sign * f1, 1, full_precision)]
            for m, a0, a1, f0, f1 in zip(model.members, before_areas, after_areas, before, after)]
    return _csv(SUMMARY_COLUMNS, rows)


def write_analysis(out_dir, model: Model, result: SolveResult, full_precision=False,
                   paper_signs=False) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "displacements.csv": displacement_table(result, full_precision),
        "reactions.csv": reaction_table(model, result, full_precision),
        "member_forces.csv": member_force_table(model, result, full_precision, paper_signs),
    }
    paths = []
    for name, text in files.items():
        p = out_dir / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # stable element ids so repeated runs give identical files
    plt.rcParams["svg.hashsalt"] = "scissorcable"
    return plt


def plot_convergence(history: ConvergenceHistory, path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(history.evaluations, history.best_fitness, color="tab:blue")
    ax.set_xlabel("Number of function evaluations")
    ax.set_ylabel("Best penalised weight (kg)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def plot_structure(model: Model, result: SolveResult, path, scale: float | None = None) -> Path:
    """Undeformed (grey) and deflected shape, members coloured by axial force."""
    plt = _pyplot()
    xyz = model.coordinates
    u = result.displacements
    # view plane: x-y for planar models, otherwise x against the larger remaining spread
    if model.planar or np.ptp(xyz[:, 1]) >= np.ptp(xyz[:, 2]):
        axes = (0, 1)
    else:
        axes = (0, 2)
    span = float(np.ptp(xyz[:, axes], axis=0).max()) or 1.0
    umax = float(np.abs(u).max(initial=0.0))
    if scale is None:
        scale = 0.1 * span / umax if umax > 0 else 1.0
    moved = xyz + scale * u
    status = cable_status(model, result)
    fmax = float(np.abs(result.forces).max(initial=0.0)) or 1.0
    cmap = plt.get_cmap("coolwarm")
    idx = model.node_index

    fig, ax = plt.subplots(figsize=(7, 5))
    for member, force in zip(model.members, result.forces):
        pts = [idx[n] for n in member.nodes]
        ends = [pts[0], pts[-1]]
        ax.plot(*xyz[ends][:, axes].T, color="0.8", lw=0.8)
        style = "--" if member.kind is MemberKind.CABLE else "-"
        if status.get(member.id) == "passive":
            ax.plot(*moved[ends][:, axes].T, ls=":", color="0.5", lw=0.8)
            continue
        ax.plot(*moved[ends][:, axes].T, ls=style, lw=1.6, color=cmap(0.5 + 0.5 * force / fmax))
    ax.set_aspect("equal")
    ax.set_title(f"deflected shape x{scale:.3g}, colour = axial force (red tension)")
    ax.set_xlabel("xyz"[axes[0]] + " (mm)")
    ax.set_ylabel("xyz"[axes[1]] + " (mm)")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)
