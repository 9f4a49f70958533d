"""
Vibrational stabilization of the inverted pendulum
==================================================

For a < 0 the unforced oscillator is exponentially unstable -- an inverted
pendulum.  Parametric forcing with the right amplitude stabilizes it: in
the (eps, a) plane a window of stability opens below the a axis (the
linearized Kapitza pendulum).  Its boundary is again the contour
|tr Theta| = 2 and is traced with the same machinery: a column scan at
eps = 1 brackets the window, then each edge is continued both ways.
"""

from pathlib import Path

import hillmap as hm
from hillmap.svg import render_svg

OUT = Path(__file__).resolve().parent / "demo_output"
OUT.mkdir(exist_ok=True)

COS = hm.cosine()

curves = hm.trace_kapitza_boundary(COS, eps_scan=1.0, a_min=-1.0)
edges = sorted({c.points[0].a for c in curves})
print(f"window edges at eps = 1.0: a = {edges[0]:.5f} and {edges[-1]:.5f}")

mid = 0.5 * (edges[0] + edges[-1])
for a, label in ((mid, "inside the window"),
                 (edges[0] - 0.2, "below it"),
                 (-0.2, "above it, inside tongue 1")):
    verdict = hm.classify(hm.Params(a, 1.0), COS)
    print(f"  a = {a:+.4f} ({label}): {verdict.label.value}")

print()
print("the window closes as eps -> 0 (no crossing to bracket):")
try:
    hm.trace_kapitza_boundary(COS, eps_scan=1e-3)
except hm.NoWindowFound as exc:
    print(f"  NoWindowFound: {exc}")

path = OUT / "kapitza_window.svg"
render_svg(path, curves, shade=False,
           title="stabilization window of the inverted pendulum")
print(f"-> {path}")
