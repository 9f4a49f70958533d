"""Dependency-free SVG rendering of stability diagrams.

Axes follow the usual convention for these maps: eps horizontal, a
vertical.  Boundary curves are drawn per tongue; the wedge between a
tongue's upper and lower branches (the parametric-resonance region) can be
shaded, and a sampled grid can be underlaid as the near-boundary band
1.99 < |tr| < 2.01 to show what the contour method resolves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baseline import StabilityGrid
from .tracer import Branch, BoundaryCurve

__all__ = ["render_svg"]

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 28, 44
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class _Frame:
    width: int
    height: int
    eps_lo: float
    eps_hi: float
    a_lo: float
    a_hi: float

    def x(self, eps: float) -> float:
        span = self.eps_hi - self.eps_lo or 1.0
        return _MARGIN_L + (eps - self.eps_lo) / span * (self.width - _MARGIN_L - _MARGIN_R)

    def y(self, a: float) -> float:
        span = self.a_hi - self.a_lo or 1.0
        return self.height - _MARGIN_B - (a - self.a_lo) / span * (
            self.height - _MARGIN_T - _MARGIN_B
        )


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_svg(
    path,
    curves: list[BoundaryCurve] | None = None,
    grid: StabilityGrid | None = None,
    band: tuple[float, float] = (1.99, 2.01),
    shade: bool = True,
    title: str = "",
    width: int = 720,
    height: int = 540,
) -> None:
    """Write a stability diagram to ``path``.

    Renders whatever it is given: curves only, grid band only, or both.
    An empty call still produces a valid SVG with axes.
    """
    curves = curves or []

    eps_vals: list[float] = []
    a_vals: list[float] = []
    for c in curves:
        eps_vals.extend(p.epsilon for p in c.points)
        a_vals.extend(p.a for p in c.points)
    if grid is not None:
        eps_vals.extend([float(grid.eps_values[0]), float(grid.eps_values[-1])])
        a_vals.extend([float(grid.a_values[0]), float(grid.a_values[-1])])
    if not eps_vals:
        eps_vals = [0.0, 1.0]
        a_vals = [0.0, 1.0]
    pad_e = 0.03 * (max(eps_vals) - min(eps_vals) or 1.0)
    pad_a = 0.05 * (max(a_vals) - min(a_vals) or 1.0)
    fr = _Frame(width, height, min(eps_vals) - pad_e, max(eps_vals) + pad_e,
                min(a_vals) - pad_a, max(a_vals) + pad_a)

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )

    # sampled-grid band: cells whose |tr| lies inside [band_lo, band_hi]
    if grid is not None:
        band_lo, band_hi = band
        absv = np.abs(grid.values)
        mask = np.isfinite(grid.values) & (absv > band_lo) & (absv < band_hi)
        de = grid.eps_values[1] - grid.eps_values[0] if grid.eps_values.size > 1 else 0.02
        da = grid.a_values[1] - grid.a_values[0] if grid.a_values.size > 1 else 0.02
        ii, jj = np.nonzero(mask)
        for i, j in zip(ii, jj):
            x0 = fr.x(grid.eps_values[j] - 0.5 * de)
            x1 = fr.x(grid.eps_values[j] + 0.5 * de)
            y0 = fr.y(grid.a_values[i] + 0.5 * da)
            y1 = fr.y(grid.a_values[i] - 0.5 * da)
            parts.append(
                f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" '
                f'height="{y1 - y0:.2f}" fill="#c8c8c8"/>'
            )

    # shaded resonance wedges between upper/lower branches of each tongue
    if shade:
        by_tongue: dict[int, dict[Branch, BoundaryCurve]] = {}
        for c in curves:
            if c.tongue_index >= 1:
                by_tongue.setdefault(c.tongue_index, {})[c.branch] = c
        for n, pair in sorted(by_tongue.items()):
            if Branch.UPPER not in pair or Branch.LOWER not in pair:
                continue
            up = pair[Branch.UPPER].points
            lo = pair[Branch.LOWER].points
            pts = [(p.epsilon, p.a) for p in up] + [(p.epsilon, p.a) for p in reversed(lo)]
            path_d = "M " + " L ".join(f"{fr.x(e):.2f} {fr.y(a):.2f}" for e, a in pts) + " Z"
            color = _COLORS[(n - 1) % len(_COLORS)]
            parts.append(f'<path d="{path_d}" fill="{color}" fill-opacity="0.15" stroke="none"/>')

    # axes
    x0, x1 = _MARGIN_L, width - _MARGIN_R
    y0, y1 = height - _MARGIN_B, _MARGIN_T
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black" stroke-width="1"/>'
    )
    for t in _nice_ticks(fr.eps_lo, fr.eps_hi):
        xt = fr.x(t)
        parts.append(f'<line x1="{xt:.2f}" y1="{y0}" x2="{xt:.2f}" y2="{y0 + 4}" stroke="black"/>')
        parts.append(
            f'<text x="{xt:.2f}" y="{y0 + 17}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>'
        )
    for t in _nice_ticks(fr.a_lo, fr.a_hi):
        yt = fr.y(t)
        parts.append(f'<line x1="{x0 - 4}" y1="{yt:.2f}" x2="{x0}" y2="{yt:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 7}" y="{yt + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">&#949;</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">a</text>'
    )

    # boundary curves
    for c in curves:
        if not c.points:
            continue
        color = _COLORS[(c.tongue_index - 1) % len(_COLORS)] if c.tongue_index >= 1 else "#444444"
        d = "M " + " L ".join(f"{fr.x(p.epsilon):.2f} {fr.y(p.a):.2f}" for p in c.points)
        dash = ' stroke-dasharray="5 3"' if c.branch is Branch.LOWER else ""
        parts.append(
            f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>'
        )

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
