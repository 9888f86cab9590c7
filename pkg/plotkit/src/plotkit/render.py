"""Figure rendering: time-series panel plus spectrum panel with a marker.

Rendering is a pure function of the input files and the spec: fixed figure
geometry, fixed dpi, and no embedded timestamps, so rerunning writes an
identical file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .inputs import Table, check_hashes, read_table

FIGSIZE = (8.0, 6.4)
DPI = 150


@dataclass
class PlotSpec:
    series_paths: list[Path] = field(default_factory=list)
    spectrum_paths: list[Path] = field(default_factory=list)
    marker: float | None = None
    out_path: Path = Path("figure.png")


def render(spec: PlotSpec) -> Path:
    """Draw the requested panels and write the image; refuses mixed runs."""
    series = [read_table(p) for p in spec.series_paths]
    spectra = [read_table(p) for p in spec.spectrum_paths]
    for table, expected in [(t, "series") for t in series] + [
        (t, "spectrum") for t in spectra
    ]:
        if table.kind != expected:
            raise ValueError(
                f"{table.path}: is a {table.kind} file, passed as {expected}"
            )
    if not series and not spectra:
        raise ValueError("nothing to plot: no inputs given")
    check_hashes(series + spectra)

    panels = (1 if series else 0) + (1 if spectra else 0)
    fig, axes = plt.subplots(panels, 1, figsize=FIGSIZE)
    if panels == 1:
        axes = [axes]
    index = 0

    if series:
        ax = axes[index]
        index += 1
        for table in series:
            ax.plot(table.x, table.re, linewidth=1.0, label=table.label)
        ax.set_xlabel("t")
        ax.set_ylabel("Re C(t)")
        ax.legend(loc="upper right", fontsize=8)
        ax.set_title("(a) correlators", fontsize=10, loc="left")

    if spectra:
        ax = axes[index]
        for table in spectra:
            ax.plot(table.x, table.magnitude, linewidth=1.0, label=table.label)
        if spec.marker is not None:
            ax.axvline(spec.marker, linestyle="--", color="k", linewidth=0.8)
        ax.set_xlabel("omega")
        ax.set_ylabel("|F(omega)|")
        ax.legend(loc="upper right", fontsize=8)
        ax.set_title("(b) finite-time spectra", fontsize=10, loc="left")

    fig.tight_layout()
    out = Path(spec.out_path)
    # Suppress the writer's software tag: image bytes depend only on inputs.
    fig.savefig(out, dpi=DPI, metadata={"Software": None})
    plt.close(fig)
    return out
