"""Hand-written SVG output for chord sets.

The document is built from fixed-precision number strings only, so the same
chords and options always give the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Chord

# light to dark, one colour per birth-time quantile bin
PALETTE = ("#fdae61", "#f46d43", "#d73027", "#a50026", "#313695", "#4575b4", "#74add1", "#abd9e9")


@dataclass(frozen=True)
class RenderOptions:
    size: int = 600
    stroke_width: float = 0.004
    color_by_time: bool = False
    quantiles: int = 4
    polygon_n: int | None = None
    marker_radius: float = 0.012
    chord_color: str = "#1f3b73"
    circle_color: str = "#000000"

    def __post_init__(self):
        if self.size <= 0 or self.stroke_width <= 0:
            raise ValueError("size and stroke_width must be positive")
        if not 1 <= self.quantiles <= len(PALETTE):
            raise ValueError(f"quantiles must be in 1..{len(PALETTE)}")
        if self.polygon_n is not None and self.polygon_n < 3:
            raise ValueError("polygon_n must be >= 3")


def _num(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _point(angle: float) -> tuple[str, str]:
    # svg y axis points down
    return _num(math.cos(2 * math.pi * angle)), _num(-math.sin(2 * math.pi * angle))


def time_bins(times: Sequence[float], quantiles: int) -> list[int]:
    """Quantile bin index in 0..quantiles-1 of each birth time."""
    if not len(times):
        return []
    t = np.asarray(times, dtype=float)
    edges = np.quantile(t, np.arange(1, quantiles) / quantiles) if quantiles > 1 else np.array([])
    return np.searchsorted(edges, t, side="right").tolist()


def render_svg(chords: Sequence[Chord], times: Sequence[float] | None = None,
               options: RenderOptions | None = None) -> str:
    """Unit circle plus straight chords as an SVG document."""
    opt = options or RenderOptions()
    chords = [Chord(float(a), float(b)) for a, b in chords]
    if opt.color_by_time:
        if times is None or len(times) != len(chords):
            raise ValueError("color_by_time needs one birth time per chord")
        colors = [PALETTE[k] for k in time_bins(times, opt.quantiles)]
    else:
        colors = [opt.chord_color] * len(chords)

    sw = _num(opt.stroke_width)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{opt.size}" height="{opt.size}" '
        'viewBox="-1.05 -1.05 2.1 2.1">',
        f'<circle cx="0" cy="0" r="1" fill="none" stroke="{opt.circle_color}" stroke-width="{sw}"/>',
        f'<g fill="none" stroke-width="{sw}" stroke-linecap="round">',
    ]
    for (a, b), color in zip(chords, colors):
        x1, y1 = _point(a)
        x2, y2 = _point(b)
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}"/>')
    out.append("</g>")
    if opt.polygon_n:
        out.append(f'<g fill="{opt.circle_color}">')
        r = _num(opt.marker_radius)
        for k in range(opt.polygon_n):
            x, y = _point(k / opt.polygon_n)
            out.append(f'<circle cx="{x}" cy="{y}" r="{r}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, chords: Sequence[Chord], times: Sequence[float] | None = None,
              options: RenderOptions | None = None) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(render_svg(chords, times, options))


__all__ = ["RenderOptions", "render_svg", "write_svg", "time_bins", "PALETTE"]
