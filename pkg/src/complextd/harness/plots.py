"""Static SVG figures.  Any plotting failure is logged and swallowed."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


def plot_artifacts(art, out) -> dict:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception as exc:  # pragma: no cover - depends on the install
        log.warning("plotting unavailable: %s", exc)
        return {}
    files = {}
    out = Path(out)
    try:
        fig, (ax_m, ax_p) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
        w = art.omegas
        ax_m.plot(w, art.magnitude_mean, marker=".", label="learned")
        if art.oracle is not None:
            ax_m.plot(w, np.abs(art.oracle), ls="--", label="closed form")
            ax_m.legend()
        ax_m.axvline(np.pi, color="gray", lw=0.5)
        ax_m.set_ylabel("magnitude")
        ax_p.plot(w, art.spectrum.phases, marker=".")
        ax_p.set_ylabel("phase (rad)")
        ax_p.set_xlabel("omega (rad/step)")
        fig.tight_layout()
        files["plot_spectrum"] = out / "spectrum.svg"
        fig.savefig(files["plot_spectrum"], metadata={"Date": None})
        plt.close(fig)
        if art.reconstruction is not None:
            fig, ax = plt.subplots(figsize=(7, 3))
            ax.plot(np.arange(len(art.reconstruction)), art.reconstruction, marker=".")
            ax.set_xlabel("n (steps)")
            ax.set_ylabel("reconstructed reward")
            fig.tight_layout()
            files["plot_reconstruction"] = out / "reconstruction.svg"
            fig.savefig(files["plot_reconstruction"], metadata={"Date": None})
            plt.close(fig)
    except Exception as exc:
        log.warning("plotting failed: %s", exc)
    return files
