"""Matplotlib figures written next to the CSV/JSON reports.

Figures are a convenience layer: they read the same tables the CLI emits and
never feed back into any computed value.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .chain import ChainModel, joint_positions  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "tensegrity-chain",
    "svg.fonttype": "none",
}

_MARKERS = {"min": ("o", "tab:blue"), "max": ("^", "tab:red"), "saddle": ("x", "tab:green")}


def _figure(nrows=1, ncols=1, width=6.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(nrows, ncols, figsize=(width, width * 0.62 * nrows / ncols + 0.4), squeeze=False)
    return fig, ax


def save(fig, path) -> None:
    """Write ``fig``; SVG output carries no creation date so it diffs cleanly."""
    with plt.rc_context(STYLE):
        fig.savefig(path, bbox_inches="tight", metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)


def svg_text(fig) -> str:
    buf = io.StringIO()
    with plt.rc_context(STYLE):
        fig.savefig(buf, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def segment_figure(rows):
    """Torque and energy against the joint angle."""
    data = np.array([r[:6] for r in rows], dtype=float)
    fig, ax = _figure(1, 2, width=8)
    ax[0, 0].plot(data[:, 0], data[:, 1], color="tab:blue")
    ax[0, 0].set_xlabel("q [rad]")
    ax[0, 0].set_ylabel("M(q)")
    ax[0, 1].plot(data[:, 0], data[:, 3], color="tab:orange")
    ax[0, 1].set_xlabel("q [rad]")
    ax[0, 1].set_ylabel("E(q)")
    fig.tight_layout()
    return fig


def landscape_figure(landscape, cells, *, levels: int = 30):
    i, j = landscape.pair
    fig, ax = _figure(1, 1, width=5)
    a = ax[0, 0]
    E = landscape.energy
    if np.isfinite(E).any():
        cs = a.contourf(landscape.axis_j, landscape.axis_i, E, levels=levels, cmap="viridis")
        fig.colorbar(cs, ax=a, label="E")
    for kind, (marker, color) in _MARKERS.items():
        pts = [c.q for c in cells if c.kind == kind]
        if pts:
            pts = np.array(pts)
            a.scatter(pts[:, j], pts[:, i], marker=marker, color=color, label=kind, zorder=3)
    a.set_xlabel(f"q{j + 1} [rad]")
    a.set_ylabel(f"q{i + 1} [rad]")
    feas = landscape.feasible
    if feas.any():
        ii, jj = np.nonzero(feas)
        pad = 3 * (landscape.axis_i[1] - landscape.axis_i[0])
        a.set_ylim(landscape.axis_i[ii.min()] - pad, landscape.axis_i[ii.max()] + pad)
        a.set_xlim(landscape.axis_j[jj.min()] - pad, landscape.axis_j[jj.max()] + pad)
    if cells:
        a.legend(loc="upper right")
    fig.tight_layout()
    return fig


def sweep_figure(rows, Fx0=None):
    """Fx and Fy of the stable branch against the axial deflection."""
    ok = [r for r in rows if r[-1] == "ok"]
    dx = np.array([r[0] for r in ok], dtype=float)
    fx = np.array([r[2] for r in ok], dtype=float)
    fy = np.array([r[3] for r in ok], dtype=float)
    fig, ax = _figure(1, 2, width=8)
    ax[0, 0].plot(dx, fx, "o-", ms=3)
    if Fx0 is not None:
        ax[0, 0].axhline(Fx0, color="k", ls="--", lw=0.8, label="critical force")
        ax[0, 0].legend()
    ax[0, 0].set_xlabel("δx")
    ax[0, 0].set_ylabel("Fx")
    ax[0, 1].plot(dx, fy, "o-", ms=3, color="tab:orange")
    ax[0, 1].set_xlabel("δx")
    ax[0, 1].set_ylabel("Fy")
    fig.tight_layout()
    return fig


def buckling_figure(model: ChainModel, payload: dict, *, amplitude: float = 0.25):
    """Chain shapes along each mode at ``t = +-amplitude``."""
    modes = payload["modes"]
    fig, ax = _figure(len(modes), 1, width=6)
    for row, mode in zip(ax[:, 0], modes):
        alpha = np.asarray(mode["alpha"][: model.n])
        for sign, style in ((1, "-"), (-1, "--")):
            pts = joint_positions(model, sign * amplitude * alpha)
            row.plot(pts[:, 0], pts[:, 1], style + "o", ms=3)
        row.set_title(
            f"λ = {mode['eigenvalue']:.4f}   μ_eq = {mode['mu_eq']:.4f}   {mode['shape_positive']}", fontsize=9
        )
        row.set_aspect("equal")
    fig.tight_layout()
    return fig
