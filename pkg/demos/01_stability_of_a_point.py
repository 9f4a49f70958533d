"""
Stability of a single parameter point
=====================================

Hill's equation theta'' + (a + eps*p(t)) theta = 0 is stable exactly when
the trace of its one-period state-transition (monodromy) matrix lies in
[-2, 2].  This demo evaluates that trace at a few points and checks the
unforced case against the closed form 2*cos(2*pi*sqrt(a)).
"""

import math

import numpy as np

import hillmap as hm

COS = hm.cosine()

print("unforced oscillator (eps = 0): trace vs closed form")
for a in (0.2, 0.25, 1.0, 2.25, -0.1):
    tr = hm.trace_objective(hm.Params(a, 0.0), COS)
    exact = (2 * math.cos(2 * math.pi * math.sqrt(a)) if a > 0
             else 2 * math.cosh(2 * math.pi * math.sqrt(-a)))
    print(f"  a = {a:5.2f}:  tr = {tr:+9.5f}   closed form {exact:+9.5f}"
          f"   |diff| = {abs(tr - exact):.1e}")

print()
print("with parametric forcing, |tr| > 2 marks parametric resonance:")
for a, eps in ((0.25, 0.2), (1.2, 0.01), (0.25, 0.0)):
    verdict = hm.classify(hm.Params(a, eps), COS)
    tr = hm.trace_objective(hm.Params(a, eps), COS)
    print(f"  (a, eps) = ({a}, {eps}):  tr = {tr:+8.4f}  -> {verdict.label.value}")

print()
print("the monodromy matrix itself is symplectic (det = 1):")
m = hm.monodromy(hm.Params(0.3, 0.7), COS)
print(np.array_str(m, precision=6))
print(f"  det = {np.linalg.det(m):.12f}")

print()
print("trace derivatives (the slope field of the boundary curves):")
b = hm.monodromy_with_sensitivities(hm.Params(0.25, 0.1), COS)
print(f"  d(tr)/da   = {b.trace_da:+.6f}")
print(f"  d(tr)/deps = {b.trace_deps:+.6f}")
print(f"  boundary slope da/deps = {-b.trace_deps / b.trace_da:+.4f}")
