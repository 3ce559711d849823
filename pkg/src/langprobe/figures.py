"""Deterministic SVG rendering of grid and trajectory CSVs.

SVG is assembled by hand (no plotting library) so byte-identical inputs
produce byte-identical files: fixed float formatting, stable ordering, no
timestamps or generated ids.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

__all__ = ["FigureSpec", "render_figure"]

FIGURE_KINDS = ("grid-bars", "trajectory-lines")

PANEL_W = 200.0
PANEL_H = 150.0
MARGIN = 42.0
GAP = 26.0
EMB_COLORS = {"true": "#4878a8", "false": "#c44e52", "": "#777777"}


@dataclass
class FigureSpec:
    kind: str
    source: Path
    output: Path

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unsupported figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")
        self.source = Path(self.source)
        self.output = Path(self.output)


def _f(value: float) -> str:
    return f"{value:.2f}"


def _read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return rows


def _svg_document(width: float, height: float, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}" font-family="sans-serif" font-size="10">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _panel_axes(ox: float, oy: float, title: str) -> list[str]:
    # oy is the y pixel of value 0; the panel spans PANEL_H upward
    parts = [
        f'<line class="axis" x1="{_f(ox)}" y1="{_f(oy - PANEL_H)}" x2="{_f(ox)}" y2="{_f(oy)}" stroke="#222"/>',
        f'<line class="axis" x1="{_f(ox)}" y1="{_f(oy)}" x2="{_f(ox + PANEL_W)}" y2="{_f(oy)}" stroke="#222"/>',
        f'<text x="{_f(ox + PANEL_W / 2)}" y="{_f(oy - PANEL_H - 8)}" text-anchor="middle">{title}</text>',
    ]
    for tick in (0.0, 0.5, 1.0):
        y = oy - tick * PANEL_H
        parts.append(f'<line x1="{_f(ox - 3)}" y1="{_f(y)}" x2="{_f(ox)}" y2="{_f(y)}" stroke="#222"/>')
        parts.append(f'<text x="{_f(ox - 6)}" y="{_f(y + 3)}" text-anchor="end">{_f(tick)}</text>')
    return parts


def _render_grid_bars(rows: list[dict[str, str]]) -> str:
    """One panel per test language; one bar per (train config, embedding setting)."""
    test_langs = sorted({r["test_lang"] for r in rows})
    bar_keys = sorted({(r["train_langs"], r.get("use_lang_emb", "")) for r in rows})
    by_cell = {(r["test_lang"], r["train_langs"], r.get("use_lang_emb", "")): r for r in rows}

    width = MARGIN * 2 + len(test_langs) * PANEL_W + (len(test_langs) - 1) * GAP
    height = MARGIN * 2 + PANEL_H + 30
    body: list[str] = []
    slot = PANEL_W / len(bar_keys)
    bar_w = slot * 0.7
    for p, test_lang in enumerate(test_langs):
        ox = MARGIN + p * (PANEL_W + GAP)
        oy = MARGIN + PANEL_H
        body.extend(_panel_axes(ox, oy, f"test: {test_lang}"))
        for b, (train, setting) in enumerate(bar_keys):
            cell = by_cell.get((test_lang, train, setting))
            x = ox + b * slot + (slot - bar_w) / 2
            label_y = oy + 12 + 10 * (b % 2)
            body.append(
                f'<text x="{_f(x + bar_w / 2)}" y="{_f(label_y)}" text-anchor="middle">{train}{"+e" if setting == "true" else ""}</text>'
            )
            if cell is None or not cell.get("mean"):
                continue
            value = float(cell["mean"])
            h = value * PANEL_H
            color = EMB_COLORS.get(setting, EMB_COLORS[""])
            body.append(
                f'<rect class="bar" x="{_f(x)}" y="{_f(oy - h)}" width="{_f(bar_w)}" '
                f'height="{_f(h)}" fill="{color}"/>'
            )
    return _svg_document(width, height, body)


def _render_trajectory_lines(rows: list[dict[str, str]]) -> str:
    """One panel per feature: an accuracy polyline plus a baseline rule if present."""
    value_col = "cv_accuracy" if "cv_accuracy" in rows[0] else "uralic_accuracy"
    features = sorted({r["feature_id"] for r in rows})
    width = MARGIN * 2 + len(features) * PANEL_W + (len(features) - 1) * GAP
    height = MARGIN * 2 + PANEL_H + 30
    body: list[str] = []
    for p, feature in enumerate(features):
        frows = sorted((r for r in rows if r["feature_id"] == feature), key=lambda r: int(r["epoch"]))
        ox = MARGIN + p * (PANEL_W + GAP)
        oy = MARGIN + PANEL_H
        body.extend(_panel_axes(ox, oy, feature))
        epochs = [int(r["epoch"]) for r in frows]
        span = max(max(epochs) - min(epochs), 1)
        points = []
        for r in frows:
            x = ox + (int(r["epoch"]) - min(epochs)) / span * PANEL_W
            y = oy - float(r[value_col]) * PANEL_H
            points.append(f"{_f(x)},{_f(y)}")
            body.append(
                f'<text x="{_f(x)}" y="{_f(oy + 12)}" text-anchor="middle">{r["epoch"]}</text>'
            )
        if "baseline" in frows[0] and frows[0]["baseline"]:
            by = oy - float(frows[0]["baseline"]) * PANEL_H
            body.append(
                f'<line class="baseline" x1="{_f(ox)}" y1="{_f(by)}" x2="{_f(ox + PANEL_W)}" '
                f'y2="{_f(by)}" stroke="#888" stroke-dasharray="4,3"/>'
            )
        body.append(
            f'<polyline points="{" ".join(points)}" fill="none" stroke="#4878a8" stroke-width="1.5"/>'
        )
        if "pattern" in frows[0] and frows[0]["pattern"]:
            body.append(
                f'<text x="{_f(ox + PANEL_W / 2)}" y="{_f(oy + 26)}" text-anchor="middle">{frows[0]["pattern"]}</text>'
            )
    return _svg_document(width, height, body)


def render_figure(spec: FigureSpec) -> Path:
    """Render the CSV named by the spec into a deterministic SVG file."""
    rows = _read_rows(spec.source)
    if spec.kind == "grid-bars":
        svg = _render_grid_bars(rows)
    else:
        svg = _render_trajectory_lines(rows)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    spec.output.write_text(svg, encoding="utf-8")
    return spec.output
