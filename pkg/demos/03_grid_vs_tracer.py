"""
Boundary tracing vs the grid + contour baseline
===============================================

The conventional stability map scans a 2-D grid of (a, eps), evaluates the
monodromy trace everywhere, and pulls the +-2 level sets out with marching
squares -- a quadratic amount of work spent locating 1-D curves, and thin
tongues slip between grid nodes entirely.  The tracer only ever works on
the curves themselves.  This demo runs both on the same window, overlays
them in an SVG, and prints the timing comparison.
"""

from pathlib import Path

import hillmap as hm
from hillmap.svg import render_svg

OUT = Path(__file__).resolve().parent / "demo_output"
OUT.mkdir(exist_ok=True)

COS = hm.cosine()
WINDOW = dict(a_min=-1.3, a_max=3.1, da=0.02, eps_min=0.0, eps_max=2.0, deps=0.02)

report = hm.benchmark(WINDOW, COS)
print(report.as_text())

# overlay: the grid's near-boundary band (1.99 < |tr| < 2.01, what the
# contour method can resolve) under the traced curves
grid = hm.grid_scan((WINDOW["a_min"], WINDOW["a_max"], WINDOW["da"]),
                    (WINDOW["eps_min"], WINDOW["eps_max"], WINDOW["deps"]), COS)
curves = []
for n in (1, 2, 3):
    curves += list(hm.trace_tongue(n, COS))
path = OUT / "grid_vs_tracer.svg"
render_svg(path, curves, grid=grid, shade=False,
           title="grid band (grey) vs traced boundaries")
print(f"-> {path}")

print()
print("note the thin third tongue: at this grid resolution its band is")
print("patchy, while the traced boundary resolves it at every step.")
