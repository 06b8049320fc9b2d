"""Matplotlib figure rendering for the CLI report path.

Figures are written straight to files next to the delimited output; no
interactive backend is ever required.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .simulate import TomographyDataset
from .wigner import WignerField


def save_dataset_figure(path, dataset: TomographyDataset) -> None:
    """Outcome frequencies against probe mean photon number."""
    means = dataset.probes.mean_photons
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for j in range(dataset.n_outcomes):
        ax.plot(means, dataset.frequencies[:, j], label=f"{j} clicks", lw=1.2)
    ax.set_xlabel(r"mean photon number $|\alpha|^2$")
    ax.set_ylabel("outcome frequency")
    ax.legend(fontsize=8, ncol=3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_response_figure(path, curves) -> None:
    """One or more outcome response curves on a shared probe grid."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for curve in curves:
        ax.plot(
            curve.mean_photons,
            curve.probability,
            label=f"{curve.outcome_label}-click",
            lw=1.4,
        )
    ax.set_xlabel(r"mean photon number $|\alpha|^2$")
    ax.set_ylabel("outcome probability")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_wigner_figure(path, field: WignerField, r=None, cross=None) -> None:
    """Wigner field heat map, optionally with a radial cross-section panel."""
    if r is not None and cross is not None:
        fig, (ax_map, ax_cut) = plt.subplots(1, 2, figsize=(10, 4.2))
    else:
        fig, ax_map = plt.subplots(figsize=(5.2, 4.2))
        ax_cut = None
    grid = field.grid
    vmax = float(np.max(np.abs(field.values)))
    im = ax_map.imshow(
        field.values.T,
        origin="lower",
        extent=(grid.x_min, grid.x_max, grid.p_min, grid.p_max),
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
    )
    ax_map.set_xlabel("x")
    ax_map.set_ylabel("p")
    ax_map.set_title(field.label)
    fig.colorbar(im, ax=ax_map, shrink=0.85)
    if ax_cut is not None:
        ax_cut.plot(r, cross, lw=1.4)
        ax_cut.axhline(0.0, color="0.6", lw=0.8)
        ax_cut.set_xlabel("r")
        ax_cut.set_ylabel("W(r, 0)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
