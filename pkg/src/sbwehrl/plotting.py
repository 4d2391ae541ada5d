"""Figures for sweep and slice outputs, rendered straight to files.

Only the CLI's ``--plot`` path imports this module, so the numerical core
never depends on matplotlib.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
FIG_WIDTH = 6.0

RC = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "mathtext.fontset": "stix",
    "savefig.dpi": 150,
}


def _figure(ncols=1):
    return plt.subplots(1, ncols, figsize=(FIG_WIDTH, FIG_WIDTH * GOLDEN))


def sweep_figure(rows, path, title=None):
    """Total, partial and mutual entropies against eta, plus 10 |S1 - S2|.

    ``rows`` are dicts with keys ``eta, s_total_numeric, s1, s2, mutual_info``.
    """
    eta = np.array([r["eta"] for r in rows])
    total = np.array([r["s_total_numeric"] for r in rows])
    s1 = np.array([r["s1"] for r in rows])
    s2 = np.array([r["s2"] for r in rows])
    mi = np.array([r["mutual_info"] for r in rows])
    with plt.rc_context(RC):
        fig, (ax, ax_diff) = _figure(2)
        ax.plot(eta, total, label=r"$S^W$")
        ax.plot(eta, s1, "--", label=r"$S^W_1$")
        ax.plot(eta, s2, ":", label=r"$S^W_2$")
        ax.plot(eta, mi, "-.", label=r"$I^W$")
        ax.set_xlabel(r"$\eta$")
        ax.set_ylabel("entropy")
        ax.legend(frameon=False)
        ax_diff.plot(eta, 10.0 * np.abs(s1 - s2), color="k")
        ax_diff.set_xlabel(r"$\eta$")
        ax_diff.set_ylabel(r"$10\,|S^W_1 - S^W_2|$")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def slice_figure(uu, vv, values, path, title=None):
    """Filled contour of a Husimi section over the ``(u1, v1)`` plane."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(FIG_WIDTH * GOLDEN + 1.0, FIG_WIDTH * GOLDEN))
        cs = ax.contourf(uu, vv, values, levels=40, cmap="viridis")
        fig.colorbar(cs, ax=ax, label="density")
        ax.set_xlabel(r"$u_1$")
        ax.set_ylabel(r"$v_1$")
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
