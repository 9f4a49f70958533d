"""Monodromy matrix of Hill's equation and its parameter sensitivities.

The equation is the harmonic oscillator with a periodically modulated
spring constant,

    theta'' + (a + eps * p(t)) theta = 0,      p(t + 2*pi) = p(t),

written in first-order form with the Hamiltonian generator
A(t) = [[0, 1], [-a - eps*p(t), 0]].  The state-transition matrix
Theta(t, 0) over one period (the monodromy matrix) decides stability:
det Theta = 1 always, so the spectrum is determined by the trace alone.
|tr| < 2 means stable (eigenvalues on the unit circle), |tr| > 2 unstable,
|tr| = 2 marginal -- the stability boundary.

``monodromy_with_sensitivities`` additionally integrates the variational
systems for dTheta/da and dTheta/deps (zero initial conditions, driven by
Theta); their traces form the slope field of the boundary curves traced in
:mod:`hillmap.tracer`.
"""

from __future__ import annotations

import enum
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._kernels import RK_PAIR, integration_grid
from .errors import NonFiniteState
from .forcing import ForcingSpec, eval_forcing

__all__ = [
    "Scheme",
    "IntegratorConfig",
    "Params",
    "SensitivityBundle",
    "generator",
    "monodromy",
    "monodromy_with_sensitivities",
    "trace_objective",
    "RK_PAIR",
    "count_evaluations",
]

TWO_PI = 2.0 * math.pi


class Scheme(enum.Enum):
    """Structure-preserving integrators for the Theta system."""

    SYMPLECTIC_EULER = "symplectic-euler"
    IMPLICIT_TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: Scheme = Scheme.SYMPLECTIC_EULER
    steps_per_period: int = 4096

    def __post_init__(self) -> None:
        if self.steps_per_period < 16:
            raise ValueError(f"steps_per_period must be >= 16, got {self.steps_per_period}")

    def with_steps(self, steps: int) -> "IntegratorConfig":
        return replace(self, steps_per_period=steps)


@dataclass(frozen=True)
class Params:
    """A point (a, eps, kappa) in parameter space.

    ``a`` may be negative (the vibrationally stabilized inverted-pendulum
    regime); ``eps`` and ``kappa`` are nonnegative.
    """

    a: float
    epsilon: float
    kappa: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "epsilon", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be >= 0")
        if self.kappa < 0.0:
            raise ValueError("kappa must be >= 0")


@dataclass(frozen=True)
class SensitivityBundle:
    theta: np.ndarray         # Theta(2*pi, 0), from the structure-preserving scheme
    d_theta_da: np.ndarray    # dTheta/da(2*pi, 0)
    d_theta_deps: np.ndarray  # dTheta/deps(2*pi, 0)

    @property
    def trace(self) -> float:
        return float(self.theta[0, 0] + self.theta[1, 1])

    @property
    def trace_da(self) -> float:
        return float(self.d_theta_da[0, 0] + self.d_theta_da[1, 1])

    @property
    def trace_deps(self) -> float:
        return float(self.d_theta_deps[0, 0] + self.d_theta_deps[1, 1])


# ---------------------------------------------------------------------------
# evaluation counting (used by the benchmark; serial use only)

class EvalCounts:
    def __init__(self) -> None:
        self.monodromy = 0
        self.bundles = 0

    @property
    def total(self) -> int:
        return self.monodromy + self.bundles


_ACTIVE_COUNTERS: list[EvalCounts] = []
_COUNTER_LOCK = threading.Lock()


@contextmanager
def count_evaluations():
    """Count monodromy / sensitivity-bundle evaluations made inside the block."""
    counts = EvalCounts()
    with _COUNTER_LOCK:
        _ACTIVE_COUNTERS.append(counts)
    try:
        yield counts
    finally:
        with _COUNTER_LOCK:
            _ACTIVE_COUNTERS.remove(counts)


def _tally(kind: str) -> None:
    if not _ACTIVE_COUNTERS:
        return
    with _COUNTER_LOCK:
        for c in _ACTIVE_COUNTERS:
            setattr(c, kind, getattr(c, kind) + 1)


# ---------------------------------------------------------------------------

def generator(params: Params, forcing: ForcingSpec, t: float) -> np.ndarray:
    """The first-order generator A(t; a, eps) = [[0, 1], [-a - eps*p(t), 0]]."""
    q = params.a + params.epsilon * eval_forcing(forcing, t)
    return np.array([[0.0, 1.0], [-q, 0.0]])


def _theta_raw(a: float, eps: float, forcing: ForcingSpec, cfg: IntegratorConfig) -> np.ndarray:
    """Monodromy of the undamped system at effective spring constant ``a``."""
    grid = integration_grid(forcing, cfg.steps_per_period)
    if cfg.scheme is Scheme.SYMPLECTIC_EULER:
        t11, t12, t21, t22, ok, t_fail = _kernels.se_theta(a, eps, grid.h, grid.t0, grid.p_mid)
    else:
        t11, t12, t21, t22, ok, t_fail = _kernels.trap_theta(a, eps, grid.h, grid.t0, grid.p_node)
    if not ok:
        raise NonFiniteState(t_fail, f"monodromy(a={a:.6g}, eps={eps:.6g})")
    _tally("monodromy")
    return np.array([[t11, t12], [t21, t22]])


def _trace_raw(a: float, eps: float, forcing: ForcingSpec, cfg: IntegratorConfig) -> float:
    m = _theta_raw(a, eps, forcing, cfg)
    return float(m[0, 0] + m[1, 1])


def monodromy(params: Params, forcing: ForcingSpec, cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Theta(2*pi, 0; a, eps) by the configured structure-preserving scheme.

    Requires ``params.kappa == 0``; damped systems go through
    :mod:`hillmap.damped`.  Raises :class:`NonFiniteState` if entries
    overflow (deeply unstable parameters).
    """
    if params.kappa != 0.0:
        raise ValueError("monodromy() expects kappa = 0; use hillmap.damped for kappa > 0")
    cfg = cfg or IntegratorConfig()
    return _theta_raw(params.a, params.epsilon, forcing, cfg)


def trace_objective(params: Params, forcing: ForcingSpec, cfg: IntegratorConfig | None = None) -> float:
    """tr Theta(2*pi, 0), the scalar whose +/-2 contours are the stability boundaries."""
    m = monodromy(params, forcing, cfg)
    return float(m[0, 0] + m[1, 1])


def _bundle_raw(a: float, eps: float, forcing: ForcingSpec, cfg: IntegratorConfig) -> SensitivityBundle:
    grid = integration_grid(forcing, cfg.steps_per_period)
    y, ok, t_fail = _kernels.sensitivity_bundle(a, eps, grid.h, grid.t0, grid.p_stage)
    if not ok:
        raise NonFiniteState(t_fail, f"sensitivities(a={a:.6g}, eps={eps:.6g})")
    theta = _theta_raw(a, eps, forcing, cfg)
    _tally("bundles")
    return SensitivityBundle(
        theta=theta,
        d_theta_da=np.array([[y[4], y[5]], [y[6], y[7]]]),
        d_theta_deps=np.array([[y[8], y[9]], [y[10], y[11]]]),
    )


def monodromy_with_sensitivities(
    params: Params, forcing: ForcingSpec, cfg: IntegratorConfig | None = None
) -> SensitivityBundle:
    """Theta together with dTheta/da and dTheta/deps over one period.

    Theta comes from the configured structure-preserving scheme.  The
    variational systems

        (dTheta/da)'   = A dTheta/da   + [[0,0],[-1,0]]    Theta
        (dTheta/deps)' = A dTheta/deps + [[0,0],[-p(t),0]] Theta

    start from zero and are integrated jointly with a driving copy of
    Theta by the Dormand-Prince 5(4) pair on the same breakpoint-aligned
    grid (the pair's own stage-consistent trajectory supplies Theta
    between grid points).  The pair in use is recorded as
    :data:`hillmap.monodromy.RK_PAIR`.
    """
    if params.kappa != 0.0:
        raise ValueError("sensitivities expect kappa = 0; use hillmap.damped for kappa > 0")
    cfg = cfg or IntegratorConfig()
    return _bundle_raw(params.a, params.epsilon, forcing, cfg)
