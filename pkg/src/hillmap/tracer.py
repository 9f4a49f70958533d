"""Stability-boundary tracing in (eps, a) parameter space.

Instead of scanning a grid, the boundary |tr Theta(2*pi,0; a, eps)| = target
is followed directly by integrating the ODE the implicit function theorem
gives for the contour,

    da/deps = - tr[dTheta/deps] / tr[dTheta/da],

with a Dormand-Prince 5(4) driver stepping eps on a fixed output grid.
Where the boundary turns near-vertical (|da/deps| above a threshold) the
reciprocal problem deps/da is integrated instead, stepping in a.  After
every accepted step a one-step Newton correction in the transverse
variable (bisection fallback) re-anchors the point on the contour, so the
recorded residual | |tr| - target | stays below ``trace_tolerance``
instead of drifting.

Undamped tongues emanate from (eps, a) = (0, n^2/4).  The slope ODE is
0/0-indeterminate at such a tip, so branches are bootstrapped: step to
eps = delta and solve the 1-D root problem for a above (upper branch) or
below (lower branch) the tip.  High-order tongues open extremely slowly
(the n-th tongue width scales like eps^n), so near the tip the two
branches are numerically tangent; in that regime the tracer follows the
ridge of sign*tr (the collapsed boundary, still on-contour to well below
tolerance) and splits into distinct branches once the tongue interior
rises above ``open_threshold``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import (
    BothDerivativesVanish,
    BracketNotFound,
    NonFiniteState,
    NoWindowFound,
)
from .forcing import ForcingSpec
from .monodromy import IntegratorConfig, Params, _bundle_raw

__all__ = [
    "Branch",
    "Orientation",
    "BoundaryPoint",
    "BoundaryCurve",
    "TraceConfig",
    "boundary_slope",
    "bootstrap_branch",
    "trace_tongue",
    "trace_from",
    "trace_kapitza_boundary",
]

_C2, _C3, _C4, _C5 = _kernels._C[1:5]
_DEGENERATE_TOL = 1e-12


class Branch(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class Orientation(enum.Enum):
    DA_DEPS = "da/deps"   # stepping in eps, a transverse
    DEPS_DA = "deps/da"   # reciprocal: stepping in a, eps transverse


@dataclass(frozen=True)
class BoundaryPoint:
    epsilon: float
    a: float
    trace_value: float
    residual: float          # |trace_value| - target
    orientation: Orientation

    def __post_init__(self) -> None:
        # keep plain Python floats (scipy hands back numpy scalars, whose
        # repr would leak into CSV output)
        for name in ("epsilon", "a", "trace_value", "residual"):
            object.__setattr__(self, name, float(getattr(self, name)))


@dataclass
class BoundaryCurve:
    tongue_index: int        # 0 is reserved for the a < 0 stabilization-window boundary
    branch: Branch
    target: float            # 2 undamped, 2*cosh(2*pi*kappa) damped
    sign: int                # sign of the trace on this boundary
    points: list[BoundaryPoint] = field(default_factory=list)
    truncated_reason: str | None = None

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([p.epsilon for p in self.points])

    @property
    def avalues(self) -> np.ndarray:
        return np.array([p.a for p in self.points])

    def as_array(self) -> np.ndarray:
        """(k, 2) array of (eps, a) coordinates."""
        return np.column_stack([self.epsilons, self.avalues])


@dataclass(frozen=True)
class TraceConfig:
    d_epsilon: float = 0.05
    epsilon_max: float = 2.0
    trace_tolerance: float = 1e-6
    slope_switch_threshold: float = 50.0
    bootstrap_offset: float = 1e-3
    max_points: int = 1000
    # steps per period for slope-field (sensitivity) evaluations; residual
    # corrections and recorded traces always use the full IntegratorConfig
    slope_steps: int = 64
    # tongue interior height below which upper/lower branches are treated
    # as numerically tangent and the ridge is followed instead
    open_threshold: float = 1e-9
    # per-step error tolerance of the continuation driver; the transverse
    # correction re-anchors every emitted point, so this only needs to keep
    # the predictor on the right branch
    rk_tolerance: float = 1e-6

    def __post_init__(self) -> None:
        for name in (
            "d_epsilon",
            "epsilon_max",
            "trace_tolerance",
            "slope_switch_threshold",
            "bootstrap_offset",
            "max_points",
            "slope_steps",
            "open_threshold",
            "rk_tolerance",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class _SwitchOrientation(Exception):
    """Internal: the boundary turned near-vertical/horizontal mid-step."""

    def __init__(self, x: float, y: float):
        self.x = x
        self.y = y


class _Contour:
    """Trace and trace-derivative evaluations of one stability problem.

    ``kappa`` shifts the effective spring constant (a -> a - kappa^2, the
    damped-to-undamped transformation); derivatives in a are unaffected by
    the shift.  Recorded traces run at the full integrator resolution;
    slope-field derivatives run on the coarser ``slope_steps`` grid, which
    is plenty for the fifth-order pair and keeps continuation cheap.
    Kernel calls are made directly on cached grids: this sits in the inner
    loop of every trace.
    """

    def __init__(self, forcing: ForcingSpec, kappa: float, integ_cfg: IntegratorConfig,
                 slope_steps: int):
        from . import _kernels as _k
        from .monodromy import _tally

        self.forcing = forcing
        self.kappa = kappa
        self.shift = kappa * kappa
        self.cfg = integ_cfg
        self.slope_cfg = integ_cfg.with_steps(max(16, slope_steps))
        self._k = _k
        self._tally = _tally
        self._grid_full = _k.integration_grid(forcing, integ_cfg.steps_per_period)
        self._grid_slope = _k.integration_grid(forcing, self.slope_cfg.steps_per_period)
        self._symplectic = integ_cfg.scheme.value == "symplectic-euler"

    def trace(self, eps: float, a: float) -> float:
        g = self._grid_full
        if self._symplectic:
            t11, _, _, t22, ok, t_fail = self._k.se_theta(a - self.shift, eps, g.h, g.t0, g.p_mid)
        else:
            t11, _, _, t22, ok, t_fail = self._k.trap_theta(a - self.shift, eps, g.h, g.t0, g.p_node)
        if not ok:
            raise NonFiniteState(t_fail, f"trace(a={a:.6g}, eps={eps:.6g})")
        self._tally("monodromy")
        return t11 + t22

    def derivs(self, eps: float, a: float) -> tuple[float, float]:
        """(tr_a, tr_eps) at slope resolution."""
        g = self._grid_slope
        y, ok, t_fail = self._k.sensitivity_bundle(a - self.shift, eps, g.h, g.t0, g.p_stage)
        if not ok:
            raise NonFiniteState(t_fail, f"derivs(a={a:.6g}, eps={eps:.6g})")
        self._tally("bundles")
        return y[4] + y[7], y[8] + y[11]


def _make_point(contour: _Contour, eps: float, a: float, target: float,
                orientation: Orientation) -> BoundaryPoint:
    tr = contour.trace(eps, a)
    return BoundaryPoint(eps, a, tr, abs(tr) - target, orientation)


# ---------------------------------------------------------------------------
# slope field

def boundary_slope(
    params: Params,
    forcing: ForcingSpec,
    cfg: IntegratorConfig | None = None,
    threshold: float = 50.0,
) -> tuple[float, Orientation]:
    """Local slope of the boundary through (params.a, params.epsilon).

    Returns da/deps with orientation ``DA_DEPS`` while |da/deps| stays
    within ``threshold``; otherwise the reciprocal deps/da with
    ``DEPS_DA``.  Raises :class:`BothDerivativesVanish` at degenerate
    points where both trace derivatives are below 1e-12.
    """
    cfg = cfg or IntegratorConfig()
    b = _bundle_raw(params.a - params.kappa ** 2, params.epsilon, forcing, cfg)
    ga, ge = b.trace_da, b.trace_deps
    if abs(ga) < _DEGENERATE_TOL and abs(ge) < _DEGENERATE_TOL:
        raise BothDerivativesVanish(params.epsilon, params.a)
    if abs(ge) <= threshold * abs(ga):
        return -ge / ga, Orientation.DA_DEPS
    return -ga / ge, Orientation.DEPS_DA


# ---------------------------------------------------------------------------
# bootstrapping

def _ridge(contour: _Contour, eps: float, a_center: float, sign: int,
           max_offset: float = 0.5) -> float:
    """Location of the extremum of sign*tr over a near ``a_center``.

    Solves sign*tr_a = 0 by bracketing the sign change (+ to -) of the
    variational derivative.
    """

    def f(a: float) -> float:
        ta, _ = contour.derivs(eps, a)
        return sign * ta

    f0 = f(a_center)
    if f0 == 0.0:
        return a_center
    lo = hi = a_center
    flo = fhi = f0
    w = max_offset / 64.0
    while w <= max_offset * (1 + 1e-9):
        if flo <= 0.0:  # need a point left of the maximum
            cand = lo - w
            fc = f(cand)
            if fc == 0.0:
                return cand
            if fc > 0.0:
                return brentq(f, cand, lo if flo < 0 else hi, xtol=1e-12)
            lo, flo = cand, fc
        if fhi >= 0.0:  # need a point right of the maximum
            cand = hi + w
            fc = f(cand)
            if fc == 0.0:
                return cand
            if fc < 0.0:
                return brentq(f, hi if fhi > 0 else lo, cand, xtol=1e-12)
            hi, fhi = cand, fc
        if flo > 0.0 and fhi < 0.0:
            return brentq(f, lo, hi, xtol=1e-12)
        w *= 2.0
    raise BracketNotFound(
        f"no trace extremum in a within {max_offset} of {a_center} at eps={eps}"
    )


def _side_root(contour: _Contour, eps: float, a_star: float, bump: float, side: int,
               target: float, sign: int) -> float:
    """Root of sign*tr = target on one side of the ridge at ``a_star``."""

    def g(a: float) -> float:
        return sign * contour.trace(eps, a) - target

    w = max(2.0 * math.sqrt(bump / 2.0), 1e-7)
    while w <= 0.5 * (1 + 1e-9):
        cand = a_star + side * w
        if g(cand) < 0.0:
            return brentq(g, min(a_star, cand), max(a_star, cand), xtol=1e-13)
        w *= 3.0
    raise BracketNotFound(
        f"no |tr| = {target} crossing within 0.5 of the ridge a={a_star} at eps={eps}"
    )


def _bootstrap_from(contour: _Contour, eps0: float, a0: float, branch: Branch,
                    target: float, sign: int, trace_cfg: TraceConfig,
                    ) -> tuple[BoundaryPoint, bool]:
    """On-contour point at eps0 + delta; returns (point, collapsed).

    ``collapsed`` means the tongue interior is numerically tangent to the
    contour level there, so the ridge point stands in for both branches.
    """
    eps_b = eps0 + trace_cfg.bootstrap_offset
    a_star = _ridge(contour, eps_b, a0, sign)
    bump = sign * contour.trace(eps_b, a_star) - target
    if bump <= trace_cfg.open_threshold:
        return _make_point(contour, eps_b, a_star, target, Orientation.DA_DEPS), True
    side = 1 if branch is Branch.UPPER else -1
    a_root = _side_root(contour, eps_b, a_star, bump, side, target, sign)
    return _make_point(contour, eps_b, a_root, target, Orientation.DA_DEPS), False


def bootstrap_branch(
    n: int,
    branch: Branch,
    target: float,
    sign: int,
    forcing: ForcingSpec,
    trace_cfg: TraceConfig | None = None,
    integ_cfg: IntegratorConfig | None = None,
) -> BoundaryPoint:
    """First on-contour point of an undamped tongue branch.

    Steps from the degenerate tip (0, n^2/4) to eps = delta and solves
    sign*tr = target for a, bracketing above the tip for the upper branch
    and below for the lower one.  This sidesteps the 0/0 indeterminacy of
    the slope ODE at the tip.
    """
    if n < 1:
        raise ValueError("tongue index must be >= 1")
    trace_cfg = trace_cfg or TraceConfig()
    integ_cfg = integ_cfg or IntegratorConfig()
    contour = _Contour(forcing, 0.0, integ_cfg, trace_cfg.slope_steps)
    point, _ = _bootstrap_from(contour, 0.0, n * n / 4.0, branch, target, sign, trace_cfg)
    return point


# ---------------------------------------------------------------------------
# continuation driver

def _unpack(orientation: Orientation, x: float, y: float) -> tuple[float, float]:
    """(eps, a) from (stepping, transverse) coordinates."""
    if orientation is Orientation.DA_DEPS:
        return x, y
    return y, x


def _dp_step(f, x: float, y: float, h: float) -> tuple[float, float]:
    """One Dormand-Prince 5(4) step of y' = f(x, y); returns (y_next, err)."""
    k1 = f(x, y)
    k2 = f(x + _C2 * h, y + h * _kernels.A21 * k1)
    k3 = f(x + _C3 * h, y + h * (_kernels.A31 * k1 + _kernels.A32 * k2))
    k4 = f(x + _C4 * h, y + h * (_kernels.A41 * k1 + _kernels.A42 * k2 + _kernels.A43 * k3))
    k5 = f(x + _C5 * h, y + h * (_kernels.A51 * k1 + _kernels.A52 * k2
                                 + _kernels.A53 * k3 + _kernels.A54 * k4))
    k6 = f(x + h, y + h * (_kernels.A61 * k1 + _kernels.A62 * k2 + _kernels.A63 * k3
                           + _kernels.A64 * k4 + _kernels.A65 * k5))
    y5 = y + h * (_kernels.B1 * k1 + _kernels.B3 * k3 + _kernels.B4 * k4
                  + _kernels.B5 * k5 + _kernels.B6 * k6)
    k7 = f(x + h, y5)
    err = h * (_kernels.E1 * k1 + _kernels.E3 * k3 + _kernels.E4 * k4
               + _kernels.E5 * k5 + _kernels.E6 * k6 + _kernels.E7 * k7)
    return y5, abs(err)


def _rk_advance(f, x0: float, y0: float, x1: float, tol: float, depth: int = 0) -> float:
    """Advance y across [x0, x1], bisecting the interval until the embedded
    error estimate meets ``tol``."""
    y1, err = _dp_step(f, x0, y0, x1 - x0)
    if err <= tol or depth >= 16 or abs(x1 - x0) < 1e-13:
        return y1
    xm = 0.5 * (x0 + x1)
    ym = _rk_advance(f, x0, y0, xm, tol, depth + 1)
    return _rk_advance(f, xm, ym, x1, tol, depth + 1)


def _correct(contour: _Contour, orientation: Orientation, x: float, y: float,
             target: float, sign: int, tol: float) -> tuple[float, float]:
    """Newton (bisection fallback) in the transverse variable; returns (y, trace)."""
    last_step = 0.0
    for _ in range(8):
        eps, a = _unpack(orientation, x, y)
        tr = contour.trace(eps, a)
        r = sign * tr - target
        if abs(r) <= 0.2 * tol:
            return y, tr
        ta, te = contour.derivs(eps, a)
        g = sign * (ta if orientation is Orientation.DA_DEPS else te)
        if abs(g) < _DEGENERATE_TOL:
            if abs(ta) < _DEGENERATE_TOL and abs(te) < _DEGENERATE_TOL:
                raise BothDerivativesVanish(eps, a)
            break  # wrong transverse direction; bisection below
        step = -r / g
        step = max(-0.25, min(0.25, step))
        y += step
        last_step = step
    # bisection fallback around the last iterate

    def g_of(yy: float) -> float:
        e2, a2 = _unpack(orientation, x, yy)
        return sign * contour.trace(e2, a2) - target

    r0 = g_of(y)
    if abs(r0) <= tol:
        eps, a = _unpack(orientation, x, y)
        return y, contour.trace(eps, a)
    w = max(8.0 * abs(last_step), 1e-9)
    while w <= 0.5:
        lo, hi = y - w, y + w
        rlo, rhi = g_of(lo), g_of(hi)
        if rlo * r0 < 0.0:
            y = brentq(g_of, lo, y, xtol=1e-14)
            break
        if rhi * r0 < 0.0:
            y = brentq(g_of, y, hi, xtol=1e-14)
            break
        w *= 4.0
    eps, a = _unpack(orientation, x, y)
    return y, contour.trace(eps, a)


def _next_grid_value(x: float, d: float, sigma: int, limit: float) -> float:
    """Next multiple of d beyond x in direction sigma, clamped at limit."""
    if sigma > 0:
        nxt = (math.floor(x / d + 1e-9) + 1) * d
        return min(nxt, limit)
    nxt = (math.ceil(x / d - 1e-9) - 1) * d
    return max(nxt, limit)


def _continue(contour: _Contour, eps_start: float, a_start: float, sigma_eps: int,
              target: float, sign: int, trace_cfg: TraceConfig,
              eps_floor: float, eps_max: float,
              ) -> tuple[list[BoundaryPoint], str | None]:
    """Continue a boundary curve from an on-contour start point.

    Emits points on the d_epsilon grid while stepping in eps, or at
    d_epsilon spacing in a while in reciprocal mode.  Returns the emitted
    points (start not included) and a truncation reason, if any.
    """
    thr = trace_cfg.slope_switch_threshold
    tol = trace_cfg.trace_tolerance

    def slope_at(orientation: Orientation, x: float, y: float) -> float:
        eps, a = _unpack(orientation, x, y)
        ta, te = contour.derivs(eps, a)
        if abs(ta) < _DEGENERATE_TOL and abs(te) < _DEGENERATE_TOL:
            raise BothDerivativesVanish(eps, a)
        if orientation is Orientation.DA_DEPS:
            if abs(te) > thr * abs(ta):
                raise _SwitchOrientation(x, y)
            return -te / ta
        if abs(ta) > thr * abs(te):
            raise _SwitchOrientation(x, y)
        return -ta / te

    points: list[BoundaryPoint] = []
    eps, a = eps_start, a_start
    # motion continuity: the accepted (deps, da) of the latest step decides
    # stepping directions across orientation switches -- the derivative
    # ratio at a switch point sits at a near-vertical/near-horizontal
    # tangent, where its sign is unreliable
    move_eps = float(sigma_eps)
    move_a = 0.0
    orientation = Orientation.DA_DEPS
    sigma = sigma_eps
    try:
        s0 = slope_at(orientation, eps, a)
        move_a = s0 * sigma_eps
    except _SwitchOrientation:
        orientation = Orientation.DEPS_DA
        ta, te = contour.derivs(eps, a)
        # da/deps is huge here but its sign is meaningful: initial a-motion
        ratio = -te / ta if ta != 0.0 else -te
        sigma = sigma_eps if ratio >= 0 else -sigma_eps
        move_a = float(sigma)
    except BothDerivativesVanish as bdv:
        return points, str(bdv)
    except NonFiniteState as nfs:
        return points, str(nfs)

    switches = 0
    while len(points) < trace_cfg.max_points:
        if orientation is Orientation.DA_DEPS:
            limit = eps_max if sigma > 0 else eps_floor
            if (sigma > 0 and eps >= limit - 1e-12) or (sigma < 0 and eps <= limit + 1e-12):
                return points, None
            x, y = eps, a
            x_next = _next_grid_value(x, trace_cfg.d_epsilon, sigma, limit)
        else:
            x, y = a, eps
            x_next = x + sigma * trace_cfg.d_epsilon
        try:
            y_prop = _rk_advance(lambda xx, yy: slope_at(orientation, xx, yy),
                                 x, y, x_next, trace_cfg.rk_tolerance)
            y_corr, tr = _correct(contour, orientation, x_next, y_prop, target, sign, tol)
        except _SwitchOrientation as sw:
            switches += 1
            if switches > 100:
                return points, "orientation switch limit reached"
            new_orientation = (Orientation.DEPS_DA if orientation is Orientation.DA_DEPS
                               else Orientation.DA_DEPS)
            eps_sw, a_sw = _unpack(orientation, sw.x, sw.y)
            try:
                # re-anchor on the contour, transverse in the new orientation
                x_sw = eps_sw if new_orientation is Orientation.DA_DEPS else a_sw
                y_sw = a_sw if new_orientation is Orientation.DA_DEPS else eps_sw
                y_sw, _ = _correct(contour, new_orientation, x_sw, y_sw, target, sign, tol)
            except BothDerivativesVanish as bdv:
                return points, str(bdv)
            eps_new, a_new = _unpack(new_orientation, x_sw, y_sw)
            if abs(eps_new - eps) > 1e-14 or abs(a_new - a) > 1e-14:
                move_eps = eps_new - eps
                move_a = a_new - a
            eps, a = eps_new, a_new
            move = move_a if new_orientation is Orientation.DEPS_DA else move_eps
            if move != 0.0:
                sigma = 1 if move > 0 else -1
            orientation = new_orientation
            continue
        except BothDerivativesVanish as bdv:
            return points, str(bdv)
        except NonFiniteState as nfs:
            return points, str(nfs)
        if abs(abs(tr) - target) > tol:
            return points, "transverse correction failed"
        eps_new, a_new = _unpack(orientation, x_next, y_corr)
        if abs(eps_new - eps) > 1e-14 or abs(a_new - a) > 1e-14:
            move_eps = eps_new - eps
            move_a = a_new - a
        eps, a = eps_new, a_new
        if orientation is Orientation.DEPS_DA and not (eps_floor - 1e-12 <= eps <= eps_max + 1e-12):
            # a reciprocal step ran past the eps window: land the curve
            # exactly on the window edge instead of overshooting
            edge = eps_max if eps > eps_max else eps_floor
            prev = points[-1] if points else BoundaryPoint(eps_start, a_start, tr,
                                                           abs(tr) - target, orientation)
            if abs(eps - prev.epsilon) > 1e-15:
                frac = (edge - prev.epsilon) / (eps - prev.epsilon)
                a_est = prev.a + frac * (a - prev.a)
            else:
                a_est = a
            try:
                a_end, tr_end = _correct(contour, Orientation.DA_DEPS, edge, a_est,
                                         target, sign, tol)
            except (BothDerivativesVanish, NonFiniteState) as exc:
                return points, str(exc)
            if abs(abs(tr_end) - target) <= tol:
                points.append(BoundaryPoint(edge, a_end, tr_end, abs(tr_end) - target,
                                            Orientation.DA_DEPS))
            return points, None
        points.append(BoundaryPoint(eps, a, tr, abs(tr) - target, orientation))
    return points, "max_points reached"


# ---------------------------------------------------------------------------
# public tracing entry points

def _ode_phase(contour: _Contour, pts: list[BoundaryPoint], sigma_eps: int, target: float,
               sign: int, trace_cfg: TraceConfig, eps_floor: float) -> str | None:
    start = pts[-1]
    more, reason = _continue(contour, start.epsilon, start.a, sigma_eps, target, sign,
                             trace_cfg, eps_floor, trace_cfg.epsilon_max)
    pts.extend(more)
    return reason


def trace_tongue(
    n: int,
    forcing: ForcingSpec,
    trace_cfg: TraceConfig | None = None,
    integ_cfg: IntegratorConfig | None = None,
) -> tuple[BoundaryCurve, BoundaryCurve]:
    """Both boundary branches of the n-th undamped tongue.

    The curves start at the tip (0, n^2/4) -- a genuine on-contour point,
    |tr| = 2 there -- are bootstrapped at eps = delta, and then continued
    to ``epsilon_max``.  The boundary trace sign is measured at the tip
    rather than assumed; for reference it alternates as (-1)^n.
    While the tongue interior is numerically tangent to the target level
    (high n, small eps) both branches share ridge points; they split as
    soon as the interior rises above ``open_threshold``.
    """
    if n < 1:
        raise ValueError("tongue index must be >= 1")
    trace_cfg = trace_cfg or TraceConfig()
    integ_cfg = integ_cfg or IntegratorConfig()
    contour = _Contour(forcing, 0.0, integ_cfg, trace_cfg.slope_steps)
    a0 = n * n / 4.0
    target = 2.0
    probe = contour.trace(trace_cfg.bootstrap_offset, a0)
    sign = 1 if probe > 0 else -1

    tip = _make_point(contour, 0.0, a0, target, Orientation.DA_DEPS)
    upper_pts: list[BoundaryPoint] = [tip]
    lower_pts: list[BoundaryPoint] = [tip]

    boot_u, collapsed = _bootstrap_from(contour, 0.0, a0, Branch.UPPER, target, sign, trace_cfg)
    upper_reason = lower_reason = None
    if not collapsed:
        boot_l, _ = _bootstrap_from(contour, 0.0, a0, Branch.LOWER, target, sign, trace_cfg)
        upper_pts.append(boot_u)
        lower_pts.append(boot_l)
        upper_reason = _ode_phase(contour, upper_pts, +1, target, sign, trace_cfg,
                                  trace_cfg.bootstrap_offset)
        lower_reason = _ode_phase(contour, lower_pts, +1, target, sign, trace_cfg,
                                  trace_cfg.bootstrap_offset)
    else:
        # tangent regime: follow the ridge of sign*tr on the output grid
        # until the tongue opens, then split the branches
        upper_pts.append(boot_u)
        lower_pts.append(boot_u)
        eps_k = boot_u.epsilon
        a_ref = boot_u.a
        split = False
        while True:
            eps_k = _next_grid_value(eps_k, trace_cfg.d_epsilon, +1, trace_cfg.epsilon_max)
            a_star = _ridge(contour, eps_k, a_ref, sign)
            bump = sign * contour.trace(eps_k, a_star) - target
            if bump <= trace_cfg.open_threshold:
                pt = _make_point(contour, eps_k, a_star, target, Orientation.DA_DEPS)
                upper_pts.append(pt)
                lower_pts.append(pt)
                a_ref = a_star
                if eps_k >= trace_cfg.epsilon_max - 1e-12:
                    break
                continue
            a_up = _side_root(contour, eps_k, a_star, bump, +1, target, sign)
            a_lo = _side_root(contour, eps_k, a_star, bump, -1, target, sign)
            upper_pts.append(_make_point(contour, eps_k, a_up, target, Orientation.DA_DEPS))
            lower_pts.append(_make_point(contour, eps_k, a_lo, target, Orientation.DA_DEPS))
            split = True
            break
        if split:
            upper_reason = _ode_phase(contour, upper_pts, +1, target, sign, trace_cfg,
                                      trace_cfg.bootstrap_offset)
            lower_reason = _ode_phase(contour, lower_pts, +1, target, sign, trace_cfg,
                                      trace_cfg.bootstrap_offset)

    upper = BoundaryCurve(n, Branch.UPPER, target, sign, upper_pts, upper_reason)
    lower = BoundaryCurve(n, Branch.LOWER, target, sign, lower_pts, lower_reason)
    return upper, lower


def trace_from(
    start: BoundaryPoint,
    direction: int,
    target: float,
    sign: int,
    forcing: ForcingSpec,
    trace_cfg: TraceConfig | None = None,
    integ_cfg: IntegratorConfig | None = None,
    kappa: float = 0.0,
    tongue_index: int = 0,
    branch: Branch = Branch.UPPER,
) -> BoundaryCurve:
    """Generic continuation from an on-contour point.

    ``direction`` is the initial sense of travel in eps (+1 toward
    epsilon_max, -1 back toward the bootstrap offset).  Used by the damped
    module (kappa > 0 evaluates the transformed system) and for resuming
    truncated curves.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    trace_cfg = trace_cfg or TraceConfig()
    integ_cfg = integ_cfg or IntegratorConfig()
    contour = _Contour(forcing, kappa, integ_cfg, trace_cfg.slope_steps)
    tr = contour.trace(start.epsilon, start.a)
    if abs(abs(tr) - target) > trace_cfg.trace_tolerance:
        raise ValueError(
            f"start point violates the residual bound: | |tr| - {target:g} | = "
            f"{abs(abs(tr) - target):.3e} > {trace_cfg.trace_tolerance:g}"
        )
    pts = [start]
    reason = _ode_phase(contour, pts, direction, target, sign, trace_cfg,
                        trace_cfg.bootstrap_offset)
    return BoundaryCurve(tongue_index, branch, target, sign, pts, reason)


def trace_kapitza_boundary(
    forcing: ForcingSpec,
    trace_cfg: TraceConfig | None = None,
    integ_cfg: IntegratorConfig | None = None,
    eps_scan: float = 1.0,
    a_min: float = -1.0,
    scan_points: int = 400,
) -> list[BoundaryCurve]:
    """Boundary curves of the a < 0 vibrational-stabilization window.

    Scans the column eps = eps_scan over a in [a_min, 0) for sign changes
    of |tr| - 2, refines each crossing, and continues each boundary both
    ways (backward runs stop when they return to the scan column or reach
    the bootstrap offset).  Raises :class:`NoWindowFound` when the column
    shows no crossing, which is legitimate for small eps_scan: the window
    closes as eps -> 0.
    """
    trace_cfg = trace_cfg or TraceConfig()
    integ_cfg = integ_cfg or IntegratorConfig()
    if not (a_min < 0.0):
        raise ValueError("a_min must be negative")
    contour = _Contour(forcing, 0.0, integ_cfg, trace_cfg.slope_steps)
    target = 2.0

    avals = np.linspace(a_min, min(-1e-3, -abs(a_min) / scan_points), scan_points)
    fvals = np.array([abs(contour.trace(eps_scan, a)) - target for a in avals])
    crossings = np.flatnonzero(np.sign(fvals[:-1]) * np.sign(fvals[1:]) < 0)
    if crossings.size == 0:
        raise NoWindowFound(
            f"no |tr| = 2 crossing on eps = {eps_scan} for a in [{a_min}, 0); "
            "the stabilization window may be closed at this amplitude"
        )

    curves: list[BoundaryCurve] = []
    for idx, ci in enumerate(crossings):
        root = brentq(lambda a: abs(contour.trace(eps_scan, a)) - target,
                      avals[ci], avals[ci + 1], xtol=1e-13)
        tr_root = contour.trace(eps_scan, root)
        sign = 1 if tr_root > 0 else -1
        branch = Branch.LOWER if idx % 2 == 0 else Branch.UPPER
        start = _make_point(contour, eps_scan, root, target, Orientation.DA_DEPS)
        fwd = [start]
        fwd_reason = _ode_phase(contour, fwd, +1, target, sign, trace_cfg,
                                trace_cfg.bootstrap_offset)
        curves.append(BoundaryCurve(0, branch, target, sign, fwd, fwd_reason))
        back = [start]
        back_cfg = replace(trace_cfg, epsilon_max=eps_scan)
        back_more, back_reason = _continue(contour, start.epsilon, start.a, -1, target, sign,
                                           back_cfg, trace_cfg.bootstrap_offset, eps_scan)
        back.extend(back_more)
        if len(back) > 1:
            curves.append(BoundaryCurve(0, branch, target, sign, back, back_reason))
    return curves
