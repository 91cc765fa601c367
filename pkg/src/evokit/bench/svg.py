"""Minimal self-contained SVG convergence plot (generation vs best_eval)."""

from __future__ import annotations

import math
from pathlib import Path

from .records import read_csv

WIDTH, HEIGHT = 640, 400
MARGIN = 60


class PlotError(ValueError):
    pass


def _load(run_csv: Path) -> tuple[list[float], list[float]]:
    try:
        header, rows = read_csv(run_csv)
    except (OSError, ValueError, StopIteration) as exc:
        raise PlotError(str(exc)) from exc
    for name in ("generation", "best_eval"):
        if name not in header:
            raise PlotError(f"{run_csv}: missing column {name!r}")
    if not rows:
        raise PlotError(f"{run_csv}: no data rows")
    try:
        xs = [float(r["generation"]) for r in rows]
        ys = [float(r["best_eval"]) for r in rows]
    except ValueError as exc:
        raise PlotError(f"{run_csv}: {exc}") from exc
    if not all(math.isfinite(v) for v in xs + ys):
        raise PlotError(f"{run_csv}: non-finite values")
    return xs, ys


def _scale(lo: float, hi: float, size: float, flip: bool):
    span = hi - lo if hi > lo else 1.0

    def to_px(v):
        t = (v - lo) / span
        if flip:
            t = 1.0 - t
        return MARGIN + t * size

    return to_px


def svg_convergence_plot(run_csv, out_svg) -> bool:
    """Write the plot; returns True when a log vertical scale was used."""
    xs, ys = _load(Path(run_csv))
    log_scale = all(y > 0 for y in ys)
    ys_t = [math.log10(y) for y in ys] if log_scale else ys
    fx = _scale(min(xs), max(xs), WIDTH - 2 * MARGIN, flip=False)
    fy = _scale(min(ys_t), max(ys_t), HEIGHT - 2 * MARGIN, flip=True)
    points = " ".join(f"{fx(x):.2f},{fy(y):.2f}" for x, y in zip(xs, ys_t))
    ylabel = "best_eval (log10)" if log_scale else "best_eval"
    svg = f"""<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-yscale="{'log' if log_scale else 'linear'}">
  <rect width="100%" height="100%" fill="white"/>
  <line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>
  <line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>
  <text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="14">generation</text>
  <text x="15" y="{HEIGHT / 2}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {HEIGHT / 2})">{ylabel}</text>
  <text x="{MARGIN}" y="{HEIGHT - MARGIN + 18}" font-size="11">{min(xs):g}</text>
  <text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 18}" text-anchor="end" font-size="11">{max(xs):g}</text>
  <text x="{MARGIN - 5}" y="{MARGIN + 4}" text-anchor="end" font-size="11">{max(ys):.4g}</text>
  <text x="{MARGIN - 5}" y="{HEIGHT - MARGIN}" text-anchor="end" font-size="11">{min(ys):.4g}</text>
  <polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>
</svg>
"""
    out = Path(out_svg)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    return log_scale
