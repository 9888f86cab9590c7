"""Command line for rendering workbench figures.

Example::

    plotkit --series out/series_*.csv --spectrum out/spectrum_*.csv \\
            --marker 6.2832 --out figure.png
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .inputs import HashMismatchError, InputError
from .render import PlotSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render a two-panel figure from workbench CSV outputs.",
    )
    parser.add_argument("--series", nargs="*", default=[], help="time-series CSV files")
    parser.add_argument("--spectrum", nargs="*", default=[], help="spectrum CSV files")
    parser.add_argument("--marker", type=float, default=None,
                        help="predicted frequency for the dashed marker line")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    spec = PlotSpec(
        series_paths=[Path(p) for p in args.series],
        spectrum_paths=[Path(p) for p in args.spectrum],
        marker=args.marker,
        out_path=Path(args.out),
    )
    try:
        out = render(spec)
    except (InputError, HashMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
