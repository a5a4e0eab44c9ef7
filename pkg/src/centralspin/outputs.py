"""CSV, JSON manifest and SVG writers plus small parsing helpers for the CLI."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

_ANGLE = re.compile(r"^\s*([+-]?(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?)\s*\*?\s*pi\s*$", re.I)


def parse_angle(value) -> float:
    """``"0.1pi"`` -> 0.1*pi, ``"pi"`` -> pi; bare numbers are radians."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    match = _ANGLE.match(text)
    if match:
        coeff = match.group(1)
        if coeff in ("", "+", "-"):
            coeff += "1"
        return float(coeff) * math.pi
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"cannot parse angle {value!r}; use radians or e.g. 0.1pi") from None


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                format_float(v) if isinstance(v, (float, np.floating)) else v for v in row
            ])
    return path


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, *, command: str, parameters: dict, outputs: Sequence[Path],
                   started: float, finished: float, seeds=None, rng=None,
                   warnings=None, metadata=None, name: str = "manifest.json") -> Path:
    """One manifest per run; every output file is listed with its checksum."""
    out_dir = Path(out_dir)
    manifest = {
        "tool_version": f"centralspin {__version__}",
        "command": command,
        "parameters": parameters,
        "seeds": list(seeds) if seeds is not None else [],
        "rng": rng,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": {Path(p).name: sha256(p) for p in outputs},
        "duration_seconds": round(finished - started, 6),
        "warnings": list(warnings or []),
        "metadata": dict(metadata or {}),
    }
    path = out_dir / name
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=False, allow_nan=True)
        fh.write("\n")
    return path


def load_config(path) -> dict:
    """Read a JSON config; a previous run's manifest is accepted too."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    if "parameters" in data and "tool_version" in data:
        data = data["parameters"]
    return data


def _ramp(value: float, lo: float, hi: float) -> str:
    if not math.isfinite(value):
        return "#808080"
    t = 0.5 if hi == lo else min(max((value - lo) / (hi - lo), 0.0), 1.0)
    # blue -> white -> red
    if t < 0.5:
        s = t / 0.5
        r, g, b = int(255 * s), int(255 * s), 255
    else:
        s = (t - 0.5) / 0.5
        r, g, b = 255, int(255 * (1 - s)), int(255 * (1 - s))
    return f"#{r:02x}{g:02x}{b:02x}"


def write_svg_heatmap(path: Path, xs, ys, grid, x_label: str, y_label: str,
                      title: str = "", lo: float = -0.5, hi: float = 0.5) -> Path:
    """Self-contained SVG: one rect per cell, a colour bar and axis labels."""
    cell_w = max(4.0, 480.0 / max(len(xs), 1))
    cell_h = max(4.0, 360.0 / max(len(ys), 1))
    left, top = 70.0, 40.0
    width = left + cell_w * len(xs) + 110
    height = top + cell_h * len(ys) + 60
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'font-family="sans-serif" font-size="12">',
        f'<text x="{left}" y="20">{title}</text>',
    ]
    for iy in range(len(ys)):
        # first y value at the bottom
        y0 = top + cell_h * (len(ys) - 1 - iy)
        for ix in range(len(xs)):
            parts.append(
                f'<rect x="{left + cell_w * ix:.2f}" y="{y0:.2f}" width="{cell_w:.2f}" '
                f'height="{cell_h:.2f}" fill="{_ramp(float(grid[iy][ix]), lo, hi)}"/>'
            )
    plot_bottom = top + cell_h * len(ys)
    plot_right = left + cell_w * len(xs)
    parts.append(f'<text x="{(left + plot_right) / 2:.0f}" y="{plot_bottom + 40:.0f}" '
                 f'text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="20" y="{(top + plot_bottom) / 2:.0f}" text-anchor="middle" '
                 f'transform="rotate(-90 20 {(top + plot_bottom) / 2:.0f})">{y_label}</text>')
    for value, anchor, xpos in ((xs[0], "start", left), (xs[-1], "end", plot_right)):
        parts.append(f'<text x="{xpos:.0f}" y="{plot_bottom + 18:.0f}" text-anchor="{anchor}">{value:g}</text>')
    parts.append(f'<text x="{left - 6:.0f}" y="{plot_bottom:.0f}" text-anchor="end">{ys[0]:g}</text>')
    parts.append(f'<text x="{left - 6:.0f}" y="{top + 10:.0f}" text-anchor="end">{ys[-1]:g}</text>')
    bar_x = plot_right + 30
    steps = 50
    bar_h = (plot_bottom - top) / steps
    for k in range(steps):
        v = hi - (hi - lo) * (k + 0.5) / steps
        parts.append(f'<rect x="{bar_x:.0f}" y="{top + k * bar_h:.2f}" width="16" '
                     f'height="{bar_h + 0.5:.2f}" fill="{_ramp(v, lo, hi)}"/>')
    parts.append(f'<text x="{bar_x + 22:.0f}" y="{top + 10:.0f}">{hi:g}</text>')
    parts.append(f'<text x="{bar_x + 22:.0f}" y="{plot_bottom:.0f}">{lo:g}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
