"""Stability of Hill's equation with viscous damping.

The damped oscillator

    theta'' + 2*kappa*theta' + (a + eps*p(t)) theta = 0

transforms under z(t) = exp(kappa*t) * theta(t) into an undamped Hill
equation with spring constant shifted down by kappa^2,

    z'' + (a - kappa^2 + eps*p(t)) z = 0,

whose monodromy matrix Phi relates to the damped one by the similarity
exp(2*pi*kappa) * Theta = K^{-1} Phi K with the unit-determinant shear
K = [[1, 0], [kappa, 1]].  Stability of the damped system is therefore
the trace criterion on the transformed system with an enlarged threshold:

    stable  <=>  |tr Phi(2*pi, 0)| <= 2*cosh(2*pi*kappa).

Since 2*cosh(2*pi*kappa) > 2 for kappa > 0, damped tongues detach from
the a axis; each tongue's left-most point (eps0, a0) is located
numerically from the two conditions sign*tr Phi = 2*cosh(2*pi*kappa) and
d(tr Phi)/da = 0, and the boundary is then continued exactly like the
undamped case with the enlarged target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import NonFiniteState, TipNotFound
from .forcing import ForcingSpec
from .monodromy import IntegratorConfig, Params, monodromy, _bundle_raw
from .tracer import (
    Branch,
    BoundaryCurve,
    Orientation,
    TraceConfig,
    _bootstrap_from,
    _Contour,
    _make_point,
    _ode_phase,
    _ridge,
)

__all__ = [
    "DampedCriterion",
    "TongueTip",
    "damped_threshold",
    "transformed_monodromy",
    "damped_monodromy_direct",
    "is_stable_damped",
    "find_tongue_tip",
    "trace_damped_tongue",
]

TWO_PI = 2.0 * math.pi


def damped_threshold(kappa: float) -> float:
    """Stability threshold 2*cosh(2*pi*kappa) on |tr Phi|."""
    return 2.0 * math.cosh(TWO_PI * kappa)


@dataclass(frozen=True)
class DampedCriterion:
    """Trace criterion of the damped problem in transformed coordinates."""

    kappa: float

    @property
    def threshold(self) -> float:
        return damped_threshold(self.kappa)

    def effective_a(self, a: float) -> float:
        """Spring constant of the transformed (undamped) system."""
        return a - self.kappa ** 2


@dataclass(frozen=True)
class TongueTip:
    """Left-most point of a damped tongue."""

    epsilon0: float
    a0: float
    tongue_index: int
    kappa: float
    trace_at_tip: float
    d_trace_da_at_tip: float


def transformed_monodromy(
    params: Params, forcing: ForcingSpec, cfg: IntegratorConfig | None = None
) -> np.ndarray:
    """Phi(2*pi, 0): monodromy of the undamped system at a - kappa^2."""
    cfg = cfg or IntegratorConfig()
    shifted = Params(a=params.a - params.kappa ** 2, epsilon=params.epsilon, kappa=0.0)
    return monodromy(shifted, forcing, cfg)


def damped_monodromy_direct(
    params: Params, forcing: ForcingSpec, cfg: IntegratorConfig | None = None
) -> np.ndarray:
    """Theta(2*pi, 0) of the damped first-order system, integrated directly.

    Runs the Dormand-Prince 5(4) pair on the breakpoint-aligned grid.
    This is the cross-check oracle for the transformed criterion, not the
    fast path; note det Theta = exp(-4*pi*kappa), not 1.
    """
    cfg = cfg or IntegratorConfig()
    grid = _kernels.integration_grid(forcing, cfg.steps_per_period)
    y, ok, t_fail = _kernels.damped_theta(
        params.a, params.epsilon, params.kappa, grid.h, grid.t0, grid.p_stage
    )
    if not ok:
        raise NonFiniteState(t_fail, "damped_monodromy_direct")
    return np.array([[y[0], y[1]], [y[2], y[3]]])


def is_stable_damped(
    params: Params, forcing: ForcingSpec, cfg: IntegratorConfig | None = None
) -> bool:
    """|tr Phi| <= 2*cosh(2*pi*kappa), the transformed stability criterion."""
    phi = transformed_monodromy(params, forcing, cfg)
    return abs(phi[0, 0] + phi[1, 1]) <= damped_threshold(params.kappa)


def find_tongue_tip(
    n: int,
    kappa: float,
    forcing: ForcingSpec,
    cfg: IntegratorConfig | None = None,
    eps_limit: float = 4.0,
) -> TongueTip:
    """Locate the left-most point (eps0, a0) of damped tongue n.

    Inner loop: for a given eps, the extremizer a*(eps) of sign*tr Phi
    over a near n^2/4 + kappa^2, found from the sign change of the
    variational derivative tr[dPhi/da].  Outer loop: bracket and bisect
    g(eps) = sign*tr Phi(a*(eps), eps) - 2*cosh(2*pi*kappa), doubling the
    upper bracket from a small seed; g(0) = sign*(+-2) - threshold < 0.
    Raises :class:`TipNotFound` if no bracket exists below ``eps_limit``.
    """
    if n < 1:
        raise ValueError("tongue index must be >= 1")
    if kappa <= 0.0:
        raise ValueError("find_tongue_tip needs kappa > 0; undamped tips sit at (0, n^2/4)")
    cfg = cfg or IntegratorConfig()
    threshold = damped_threshold(kappa)
    sign = -1 if n % 2 else 1
    a_seed = n * n / 4.0 + kappa ** 2
    contour = _Contour(forcing, kappa, cfg, slope_steps=256)

    a_star_cache: dict[float, float] = {}

    def a_star(eps: float) -> float:
        if eps not in a_star_cache:
            center = a_seed if not a_star_cache else a_star_cache[max(a_star_cache)]
            a_star_cache[eps] = _ridge(contour, eps, center, sign)
        return a_star_cache[eps]

    def g(eps: float) -> float:
        if eps == 0.0:
            return 2.0 - threshold  # sign*tr at the undamped-like tip is exactly +-2
        return sign * contour.trace(eps, a_star(eps)) - threshold

    eps_lo, g_lo = 0.0, g(0.0)
    eps_hi = min(0.05 + 4.0 * kappa, eps_limit)
    while True:
        g_hi = g(eps_hi)
        if g_hi > 0.0:
            break
        eps_lo, g_lo = eps_hi, g_hi
        if eps_hi >= eps_limit:
            raise TipNotFound(
                f"sign*tr Phi never reaches {threshold:.6g} for eps <= {eps_limit} "
                f"(tongue {n}, kappa={kappa})"
            )
        eps_hi = min(2.0 * eps_hi, eps_limit)

    eps0 = brentq(g, eps_lo, eps_hi, xtol=1e-10)
    a0 = a_star(eps0)
    bundle = _bundle_raw(a0 - kappa ** 2, eps0, forcing, cfg)
    return TongueTip(
        epsilon0=eps0,
        a0=a0,
        tongue_index=n,
        kappa=kappa,
        trace_at_tip=float(bundle.trace),
        d_trace_da_at_tip=float(bundle.trace_da),
    )


def trace_damped_tongue(
    n: int,
    kappa: float,
    forcing: ForcingSpec,
    trace_cfg: TraceConfig | None = None,
    integ_cfg: IntegratorConfig | None = None,
    tip: TongueTip | None = None,
) -> tuple[BoundaryCurve, BoundaryCurve]:
    """Both boundary branches of damped tongue n on |tr Phi| = 2*cosh(2*pi*kappa).

    Bootstraps at eps0 + delta above/below the tip and delegates to the
    generic continuation; all recorded points satisfy the residual bound
    against the enlarged target.
    """
    trace_cfg = trace_cfg or TraceConfig()
    integ_cfg = integ_cfg or IntegratorConfig()
    if tip is None:
        tip = find_tongue_tip(n, kappa, forcing, integ_cfg)
    target = damped_threshold(kappa)
    sign = 1 if tip.trace_at_tip > 0 else -1
    contour = _Contour(forcing, kappa, integ_cfg, trace_cfg.slope_steps)

    tip_point = _make_point(contour, tip.epsilon0, tip.a0, target, Orientation.DA_DEPS)
    curves: list[BoundaryCurve] = []
    for branch in (Branch.UPPER, Branch.LOWER):
        pts = [tip_point]
        boot, _ = _bootstrap_from(contour, tip.epsilon0, tip.a0, branch, target,
                                  sign, trace_cfg)
        pts.append(boot)
        reason = _ode_phase(contour, pts, +1, target, sign, trace_cfg,
                            tip.epsilon0 + trace_cfg.bootstrap_offset)
        curves.append(BoundaryCurve(n, branch, target, sign, pts, reason))
    return curves[0], curves[1]
