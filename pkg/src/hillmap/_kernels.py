"""Compiled fixed-grid integration kernels (internal).

Everything here works on a precomputed :class:`IntegrationGrid`: per-step
sizes and forcing samples for one period, with steps aligned so that
forcing breakpoints coincide with step boundaries.  The kernels then never
evaluate the forcing themselves, which keeps them generic over forcing
kinds and cheap inside tight loops.

Schemes:

* symplectic Euler (kick with the midpoint forcing sample, then drift) --
  exactly symplectic step matrices, second-order accurate traces;
* implicit trapezoid on node samples with periodic wrap -- the step
  determinants telescope, so det Theta(2*pi) = 1 up to roundoff;
* Dormand-Prince 5(4) on the same kind of grid for the variational
  (sensitivity) system and for the damped first-order system, which have
  no symplectic structure to preserve.

Overflow guard: matrix entries are checked every 64 steps against 1e150;
on overflow the kernels return ok=False and the step start time, and the
callers raise :class:`hillmap.errors.NonFiniteState`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .forcing import ForcingSpec, eval_in_segment, segments

TWO_PI = 2.0 * np.pi
OVERFLOW_LIMIT = 1e150
CHECK_EVERY = 64

# Dormand-Prince 5(4) tableau (the rk45/ode45 pair).  Stage times
# c = (0, 1/5, 3/10, 4/5, 8/9, 1, 1); the last row of A is the 5th-order
# weight vector b, making the pair FSAL.
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# b - b_hat, for the embedded 4th-order error estimate
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

RK_PAIR = "dormand-prince-5(4)"


@dataclass(frozen=True)
class IntegrationGrid:
    """Per-step data for one forcing period.

    ``p_stage[k, i]`` samples the forcing at t_k + c_i * h_k for the six
    distinct Dormand-Prince stage offsets c = (0, 1/5, 3/10, 4/5, 8/9, 1),
    always using the formula of the smooth piece the step lies in (so the
    c = 1 sample at a breakpoint is the limit from the left).
    """

    h: np.ndarray        # (N,) step sizes
    t0: np.ndarray       # (N,) step start times
    p_node: np.ndarray   # (N,) right-continuous node samples (wraps: step k right node = p_node[(k+1) % N])
    p_mid: np.ndarray    # (N,) midpoint samples
    p_stage: np.ndarray  # (N, 6) stage samples

    @property
    def n_steps(self) -> int:
        return self.h.shape[0]


@lru_cache(maxsize=64)
def integration_grid(spec: ForcingSpec, steps_per_period: int) -> IntegrationGrid:
    """Breakpoint-aligned integration grid with ~steps_per_period steps."""
    segs = segments(spec)
    h_target = TWO_PI / steps_per_period
    hs, t0s, p_node, p_mid, p_stage = [], [], [], [], []
    offsets = np.array(_C[:5] + (1.0,))
    for idx, (a0, a1) in enumerate(segs):
        length = a1 - a0
        n = max(1, int(np.ceil(length / h_target - 1e-12)))
        h = length / n
        starts = a0 + h * np.arange(n)
        hs.append(np.full(n, h))
        t0s.append(starts)
        p_node.append(np.asarray(eval_in_segment(spec, starts, idx), dtype=float))
        p_mid.append(np.asarray(eval_in_segment(spec, starts + 0.5 * h, idx), dtype=float))
        stage_t = starts[:, None] + h * offsets[None, :]
        p_stage.append(np.asarray(eval_in_segment(spec, stage_t, idx), dtype=float))
    grid = IntegrationGrid(
        h=np.ascontiguousarray(np.concatenate(hs)),
        t0=np.ascontiguousarray(np.concatenate(t0s)),
        p_node=np.ascontiguousarray(np.concatenate(p_node)),
        p_mid=np.ascontiguousarray(np.concatenate(p_mid)),
        p_stage=np.ascontiguousarray(np.vstack(p_stage)),
    )
    return grid


@njit(cache=True, nogil=True)
def se_theta(a, eps, h, t0, p_mid):
    """Symplectic Euler over one period.  Returns (t11,t12,t21,t22, ok, t_fail)."""
    t11 = 1.0
    t12 = 0.0
    t21 = 0.0
    t22 = 1.0
    n = h.shape[0]
    for k in range(n):
        q = a + eps * p_mid[k]
        hk = h[k]
        t21 -= hk * q * t11
        t22 -= hk * q * t12
        t11 += hk * t21
        t12 += hk * t22
        if k % CHECK_EVERY == 0:
            m = abs(t11) + abs(t12) + abs(t21) + abs(t22)
            if m > OVERFLOW_LIMIT or m != m:
                return t11, t12, t21, t22, False, t0[k]
    if not (np.isfinite(t11) and np.isfinite(t12) and np.isfinite(t21) and np.isfinite(t22)):
        return t11, t12, t21, t22, False, t0[n - 1]
    return t11, t12, t21, t22, True, 0.0


@njit(cache=True, nogil=True)
def trap_theta(a, eps, h, t0, p_node):
    """Implicit trapezoid over one period; node samples wrap periodically."""
    t11 = 1.0
    t12 = 0.0
    t21 = 0.0
    t22 = 1.0
    n = h.shape[0]
    for k in range(n):
        s = 0.5 * h[k]
        q0 = a + eps * p_node[k]
        q1 = a + eps * p_node[(k + 1) % n]
        # M = (I - s*A1)^{-1} (I + s*A0) with A = [[0,1],[-q,0]]
        det = 1.0 + s * s * q1
        m11 = (1.0 - s * s * q0) / det
        m12 = 2.0 * s / det
        m21 = -s * (q0 + q1) / det
        m22 = (1.0 - s * s * q1) / det
        n11 = m11 * t11 + m12 * t21
        n12 = m11 * t12 + m12 * t22
        n21 = m21 * t11 + m22 * t21
        n22 = m21 * t12 + m22 * t22
        t11, t12, t21, t22 = n11, n12, n21, n22
        if k % CHECK_EVERY == 0:
            m = abs(t11) + abs(t12) + abs(t21) + abs(t22)
            if m > OVERFLOW_LIMIT or m != m:
                return t11, t12, t21, t22, False, t0[k]
    if not (np.isfinite(t11) and np.isfinite(t12) and np.isfinite(t21) and np.isfinite(t22)):
        return t11, t12, t21, t22, False, t0[n - 1]
    return t11, t12, t21, t22, True, 0.0


@njit(cache=True, nogil=True)
def se_theta_batch(a_arr, eps_arr, h, t0, p_mid, out, ok, t_fail):
    """Symplectic Euler at many parameter points (row-per-point output)."""
    for j in range(a_arr.shape[0]):
        t11, t12, t21, t22, okj, tf = se_theta(a_arr[j], eps_arr[j], h, t0, p_mid)
        out[j, 0] = t11
        out[j, 1] = t12
        out[j, 2] = t21
        out[j, 3] = t22
        ok[j] = okj
        t_fail[j] = tf


@njit(cache=True, nogil=True)
def trap_theta_batch(a_arr, eps_arr, h, t0, p_node, out, ok, t_fail):
    for j in range(a_arr.shape[0]):
        t11, t12, t21, t22, okj, tf = trap_theta(a_arr[j], eps_arr[j], h, t0, p_node)
        out[j, 0] = t11
        out[j, 1] = t12
        out[j, 2] = t21
        out[j, 3] = t22
        ok[j] = okj
        t_fail[j] = tf


@njit(cache=True, nogil=True)
def sensitivity_bundle(a, eps, h, t0, p_stage):
    """Joint Dormand-Prince 5(4) integration of Theta and its parameter derivatives.

    State layout (12 components, row-major 2x2 blocks):
      y[0:4]  Theta
      y[4:8]  dTheta/da     (driven by  dA/da     * Theta = [[0,0],[-1,0]] Theta)
      y[8:12] dTheta/deps   (driven by  dA/deps   * Theta = [[0,0],[-p,0]] Theta)

    The driving Theta is the pair's own trajectory, so all stage values are
    internally consistent.  Returns (y, ok, t_fail).
    """
    y = np.zeros(12)
    y[0] = 1.0
    y[3] = 1.0
    k1 = np.empty(12)
    k2 = np.empty(12)
    k3 = np.empty(12)
    k4 = np.empty(12)
    k5 = np.empty(12)
    k6 = np.empty(12)
    yt = np.empty(12)
    n = h.shape[0]
    for k in range(n):
        hk = h[k]
        _joint_rhs(y, a + eps * p_stage[k, 0], p_stage[k, 0], k1)
        for i in range(12):
            yt[i] = y[i] + hk * A21 * k1[i]
        _joint_rhs(yt, a + eps * p_stage[k, 1], p_stage[k, 1], k2)
        for i in range(12):
            yt[i] = y[i] + hk * (A31 * k1[i] + A32 * k2[i])
        _joint_rhs(yt, a + eps * p_stage[k, 2], p_stage[k, 2], k3)
        for i in range(12):
            yt[i] = y[i] + hk * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _joint_rhs(yt, a + eps * p_stage[k, 3], p_stage[k, 3], k4)
        for i in range(12):
            yt[i] = y[i] + hk * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _joint_rhs(yt, a + eps * p_stage[k, 4], p_stage[k, 4], k5)
        for i in range(12):
            yt[i] = y[i] + hk * (
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            )
        _joint_rhs(yt, a + eps * p_stage[k, 5], p_stage[k, 5], k6)
        for i in range(12):
            y[i] = y[i] + hk * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        if k % CHECK_EVERY == 0:
            m = abs(y[0]) + abs(y[1]) + abs(y[2]) + abs(y[3])
            if m > OVERFLOW_LIMIT or m != m:
                return y, False, t0[k]
    for i in range(12):
        if not np.isfinite(y[i]):
            return y, False, t0[n - 1]
    return y, True, 0.0


@njit(cache=True, nogil=True, inline="always")
def _joint_rhs(y, q, p, out):
    # Theta' = A Theta
    out[0] = y[2]
    out[1] = y[3]
    out[2] = -q * y[0]
    out[3] = -q * y[1]
    # Sa' = A Sa + [[0,0],[-1,0]] Theta
    out[4] = y[6]
    out[5] = y[7]
    out[6] = -q * y[4] - y[0]
    out[7] = -q * y[5] - y[1]
    # Se' = A Se + [[0,0],[-p,0]] Theta
    out[8] = y[10]
    out[9] = y[11]
    out[10] = -q * y[8] - p * y[0]
    out[11] = -q * y[9] - p * y[1]


@njit(cache=True, nogil=True)
def damped_theta(a, eps, kappa, h, t0, p_stage):
    """Dormand-Prince 5(4) for the damped first-order system.

    Generator [[0, 1], [-a - eps*p(t), -2*kappa]]; state is the 2x2
    transition matrix, row-major.  Returns (y, ok, t_fail).
    """
    y = np.zeros(4)
    y[0] = 1.0
    y[3] = 1.0
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    k5 = np.empty(4)
    k6 = np.empty(4)
    yt = np.empty(4)
    n = h.shape[0]
    for k in range(n):
        hk = h[k]
        _damped_rhs(y, a + eps * p_stage[k, 0], kappa, k1)
        for i in range(4):
            yt[i] = y[i] + hk * A21 * k1[i]
        _damped_rhs(yt, a + eps * p_stage[k, 1], kappa, k2)
        for i in range(4):
            yt[i] = y[i] + hk * (A31 * k1[i] + A32 * k2[i])
        _damped_rhs(yt, a + eps * p_stage[k, 2], kappa, k3)
        for i in range(4):
            yt[i] = y[i] + hk * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _damped_rhs(yt, a + eps * p_stage[k, 3], kappa, k4)
        for i in range(4):
            yt[i] = y[i] + hk * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _damped_rhs(yt, a + eps * p_stage[k, 4], kappa, k5)
        for i in range(4):
            yt[i] = y[i] + hk * (
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            )
        _damped_rhs(yt, a + eps * p_stage[k, 5], kappa, k6)
        for i in range(4):
            y[i] = y[i] + hk * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        if k % CHECK_EVERY == 0:
            m = abs(y[0]) + abs(y[1]) + abs(y[2]) + abs(y[3])
            if m > OVERFLOW_LIMIT or m != m:
                return y, False, t0[k]
    for i in range(4):
        if not np.isfinite(y[i]):
            return y, False, t0[n - 1]
    return y, True, 0.0


@njit(cache=True, nogil=True, inline="always")
def _damped_rhs(y, q, kappa, out):
    out[0] = y[2]
    out[1] = y[3]
    out[2] = -q * y[0] - 2.0 * kappa * y[2]
    out[3] = -q * y[1] - 2.0 * kappa * y[3]


def warmup() -> None:
    """Trigger JIT compilation of all kernels on a tiny grid."""
    from .forcing import cosine

    g = integration_grid(cosine(), 16)
    se_theta(0.3, 0.1, g.h, g.t0, g.p_mid)
    trap_theta(0.3, 0.1, g.h, g.t0, g.p_node)
    a = np.array([0.3])
    e = np.array([0.1])
    out = np.empty((1, 4))
    ok = np.empty(1, dtype=np.bool_)
    tf = np.empty(1)
    se_theta_batch(a, e, g.h, g.t0, g.p_mid, out, ok, tf)
    trap_theta_batch(a, e, g.h, g.t0, g.p_node, out, ok, tf)
    sensitivity_bundle(0.3, 0.1, g.h, g.t0, g.p_stage)
    damped_theta(0.3, 0.1, 0.05, g.h, g.t0, g.p_stage)
