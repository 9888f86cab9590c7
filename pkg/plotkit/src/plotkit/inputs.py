"""Readers for the workbench CSV formats.

Two file kinds are understood, distinguished by their column header:

* time series   -- ``t,re,im,abs`` (optionally ``,stderr``)
* spectrum      -- ``omega,re,im,abs``

Comment lines ``# key=value`` carry provenance; ``config_hash`` must agree
across every input combined into one figure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class InputError(ValueError):
    """Unreadable or malformed input file."""


class HashMismatchError(ValueError):
    """Inputs come from different experiment runs."""


@dataclass
class Table:
    kind: str  # "series" or "spectrum"
    x: list[float]
    re: list[float]
    im: list[float]
    magnitude: list[float]
    label: str = ""
    config_hash: str = ""
    meta: dict = field(default_factory=dict)
    path: Path | None = None


def read_table(path: str | Path) -> Table:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc

    meta: dict = {}
    label = ""
    kind = None
    x, re, im, mag = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                if key == "label":
                    label = value
                else:
                    meta[key] = value
            continue
        if kind is None:
            head = line.split(",")
            if head[:4] == ["t", "re", "im", "abs"]:
                kind = "series"
                continue
            if head[:4] == ["omega", "re", "im", "abs"]:
                kind = "spectrum"
                continue
            raise InputError(f"{path}:{lineno}: unrecognized column header {line!r}")
        fields = line.split(",")
        if len(fields) < 4:
            raise InputError(f"{path}:{lineno}: expected at least 4 columns")
        try:
            x.append(float(fields[0]))
            re.append(float(fields[1]))
            im.append(float(fields[2]))
            mag.append(float(fields[3]))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc

    if kind is None:
        raise InputError(f"{path}: no column header found")
    if not x:
        raise InputError(f"{path}: no data rows")
    return Table(
        kind=kind,
        x=x,
        re=re,
        im=im,
        magnitude=mag,
        label=label or path.stem,
        config_hash=meta.get("config_hash", ""),
        meta=meta,
        path=path,
    )


def check_hashes(tables: list[Table]) -> str:
    """All inputs must share one config hash; returns it."""
    hashes = {t.config_hash for t in tables}
    if len(hashes) > 1:
        detail = ", ".join(
            f"{t.path.name if t.path else '?'}={t.config_hash or '(none)'}" for t in tables
        )
        raise HashMismatchError(f"inputs mix different experiment runs: {detail}")
    return next(iter(hashes)) if hashes else ""
