"""CSV tables and JSON sidecars with fixed, platform-independent formatting."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

TOOL_NAME = "dispersive-qkd"


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.8e}"
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[dict]) -> None:
    Path(path).write_text(render_csv(columns, rows), encoding="utf-8")


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_sidecar(
    csv_path: str | Path,
    command: str,
    preset: str | None,
    config: dict,
    catalog: list[dict],
    outputs: list[str],
) -> Path:
    path = sidecar_path(csv_path)
    doc = {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "preset": preset,
        "config": config,
        "catalog": catalog,
        "outputs": outputs,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    return path
