"""Grid + contour baseline: the conventional way to draw stability maps.

Evaluates tr Theta(2*pi, 0) on a rectangular (a, eps) grid and extracts
the +-2 level sets with marching squares.  This is the method the tracer
is benchmarked against and cross-validated with: scanning a 2-D grid to
find 1-D curves costs quadratically in resolution, while the tracer's
cost is linear in the number of boundary points.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NonFiniteState
from .forcing import ForcingSpec, parse_forcing
from .monodromy import (
    IntegratorConfig,
    Params,
    Scheme,
    count_evaluations,
    trace_objective,
)
from .damped import damped_threshold, transformed_monodromy
from .tracer import TraceConfig, trace_tongue

__all__ = [
    "Stability",
    "Classification",
    "StabilityGrid",
    "ContourPolyline",
    "grid_scan",
    "marching_squares",
    "classify",
    "benchmark",
    "BenchReport",
    "write_grid_csv",
    "read_grid_csv",
]

MARGINAL_BAND = 1e-9


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class Classification:
    label: Stability
    overflowed: bool = False


@dataclass
class StabilityGrid:
    """tr values sampled on a rectangular window of (a, eps) space.

    ``values[i, j]`` is tr at (a_values[i], eps_values[j]) -- tr Phi of the
    transformed system when kappa > 0.  Overflowed nodes carry signed
    infinities and are excluded from contouring.
    """

    a_values: np.ndarray
    eps_values: np.ndarray
    values: np.ndarray
    kappa: float
    forcing: ForcingSpec
    scheme: Scheme
    steps_per_period: int
    overflow_count: int = 0

    @property
    def a_range(self) -> tuple[float, float, float]:
        a = self.a_values
        return float(a[0]), float(a[-1]), float(a[1] - a[0]) if a.size > 1 else 0.0

    @property
    def eps_range(self) -> tuple[float, float, float]:
        e = self.eps_values
        return float(e[0]), float(e[-1]), float(e[1] - e[0]) if e.size > 1 else 0.0


@dataclass
class ContourPolyline:
    level: float
    points: list[tuple[float, float]] = field(default_factory=list)  # (eps, a)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points)


def _axis(rng: tuple[float, float, float]) -> np.ndarray:
    lo, hi, step = rng
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(max(n, 1))


def grid_scan(
    a_range: tuple[float, float, float],
    eps_range: tuple[float, float, float],
    forcing: ForcingSpec,
    kappa: float = 0.0,
    cfg: IntegratorConfig | None = None,
) -> StabilityGrid:
    """Evaluate the trace objective at every node of a rectangular grid.

    Ranges are (min, max, step).  For kappa > 0 the values are tr Phi of
    the transformed system (spring constant shifted by -kappa^2), matching
    the damped criterion threshold 2*cosh(2*pi*kappa).
    """
    cfg = cfg or IntegratorConfig()
    avals = _axis(a_range)
    evals = _axis(eps_range)
    aa, ee = np.meshgrid(avals, evals, indexing="ij")
    a_flat = np.ascontiguousarray(aa.ravel() - kappa * kappa)
    e_flat = np.ascontiguousarray(ee.ravel())
    grid = _kernels.integration_grid(forcing, cfg.steps_per_period)
    out = np.empty((a_flat.size, 4))
    ok = np.empty(a_flat.size, dtype=np.bool_)
    t_fail = np.empty(a_flat.size)
    if cfg.scheme is Scheme.SYMPLECTIC_EULER:
        _kernels.se_theta_batch(a_flat, e_flat, grid.h, grid.t0, grid.p_mid, out, ok, t_fail)
    else:
        _kernels.trap_theta_batch(a_flat, e_flat, grid.h, grid.t0, grid.p_node, out, ok, t_fail)
    traces = out[:, 0] + out[:, 3]
    bad = ~ok
    if np.any(bad):
        traces[bad] = np.sign(np.where(traces[bad] == 0.0, 1.0, traces[bad])) * np.inf
    return StabilityGrid(
        a_values=avals,
        eps_values=evals,
        values=traces.reshape(avals.size, evals.size),
        kappa=kappa,
        forcing=forcing,
        scheme=cfg.scheme,
        steps_per_period=cfg.steps_per_period,
        overflow_count=int(np.count_nonzero(bad)),
    )


def classify(
    params: Params,
    forcing: ForcingSpec,
    kappa: float = 0.0,
    cfg: IntegratorConfig | None = None,
) -> Classification:
    """Stable / Unstable / Marginal at one parameter point.

    Marginal means | |tr| - target | <= 1e-9.  Overflow during integration
    (deep instability) classifies as Unstable with the overflow flag set.
    """
    cfg = cfg or IntegratorConfig()
    kap = kappa if kappa else params.kappa
    try:
        if kap > 0.0:
            phi = transformed_monodromy(
                Params(params.a, params.epsilon, kap), forcing, cfg
            )
            tr = float(phi[0, 0] + phi[1, 1])
            target = damped_threshold(kap)
        else:
            tr = trace_objective(Params(params.a, params.epsilon), forcing, cfg)
            target = 2.0
    except NonFiniteState:
        return Classification(Stability.UNSTABLE, overflowed=True)
    gap = abs(tr) - target
    if abs(gap) <= MARGINAL_BAND:
        return Classification(Stability.MARGINAL)
    return Classification(Stability.STABLE if gap < 0 else Stability.UNSTABLE)


# ---------------------------------------------------------------------------
# marching squares

def _interp(level: float, v0: float, v1: float) -> float:
    # linear interpolation parameter of the level crossing on an edge
    return (level - v0) / (v1 - v0)


def marching_squares(grid: StabilityGrid, level: float) -> list[ContourPolyline]:
    """Level-set polylines of the sampled trace field.

    Standard 16-case cell classification with linear interpolation along
    cell edges; saddle cells are disambiguated by the cell-center average.
    Cells touching overflowed or non-finite nodes are skipped.  Segments
    are chained into ordered polylines; points are (eps, a) pairs.
    """
    a = grid.a_values
    e = grid.eps_values
    v = grid.values
    if a.size < 2 or e.size < 2:
        raise ValueError("marching squares needs at least a 2x2 grid")
    finite = np.isfinite(v)

    # segments as pairs of edge keys; an edge key identifies a grid edge by
    # its lower-left node and direction, so shared crossings match exactly
    segments: list[tuple[tuple, tuple, tuple[float, float], tuple[float, float]]] = []

    def edge_point(key) -> tuple[float, float]:
        kind, i, j = key
        if kind == "h":  # horizontal edge in eps direction, between (i,j) and (i,j+1)
            t = _interp(level, v[i, j], v[i, j + 1])
            return (e[j] + t * (e[j + 1] - e[j]), a[i])
        t = _interp(level, v[i, j], v[i + 1, j])
        return (e[j], a[i] + t * (a[i + 1] - a[i]))

    for i in range(a.size - 1):
        for j in range(e.size - 1):
            if not (finite[i, j] and finite[i + 1, j] and finite[i, j + 1]
                    and finite[i + 1, j + 1]):
                continue
            # corner order: 0=(i,j) 1=(i,j+1) 2=(i+1,j+1) 3=(i+1,j)
            c0 = v[i, j] > level
            c1 = v[i, j + 1] > level
            c2 = v[i + 1, j + 1] > level
            c3 = v[i + 1, j] > level
            case = (c0 << 0) | (c1 << 1) | (c2 << 2) | (c3 << 3)
            if case in (0, 15):
                continue
            bottom = ("h", i, j)
            top = ("h", i + 1, j)
            left = ("v", i, j)
            right = ("v", i, j + 1)
            pairs: list[tuple[tuple, tuple]] = []
            if case in (1, 14):
                pairs = [(bottom, left)]
            elif case in (2, 13):
                pairs = [(bottom, right)]
            elif case in (3, 12):
                pairs = [(left, right)]
            elif case in (4, 11):
                pairs = [(top, right)]
            elif case in (6, 9):
                pairs = [(bottom, top)]
            elif case in (7, 8):
                pairs = [(top, left)]
            elif case in (5, 10):
                center = 0.25 * (v[i, j] + v[i, j + 1] + v[i + 1, j] + v[i + 1, j + 1])
                # connect crossings so the center's side stays consistent
                if (center > level) == (case == 5):
                    pairs = [(bottom, right), (top, left)]
                else:
                    pairs = [(bottom, left), (top, right)]
            for k0, k1 in pairs:
                segments.append((k0, k1, edge_point(k0), edge_point(k1)))

    # chain segments whose edge keys coincide
    links: dict[tuple, list[int]] = {}
    for idx, (k0, k1, _, _) in enumerate(segments):
        links.setdefault(k0, []).append(idx)
        links.setdefault(k1, []).append(idx)

    used = [False] * len(segments)
    polylines: list[ContourPolyline] = []
    for start_idx in range(len(segments)):
        if used[start_idx]:
            continue
        used[start_idx] = True
        k0, k1, p0, p1 = segments[start_idx]
        chain_keys = [k0, k1]
        chain_pts = [p0, p1]
        # extend forward then backward
        for end in (1, 0):
            while True:
                key = chain_keys[-1] if end == 1 else chain_keys[0]
                nxt = [s for s in links.get(key, []) if not used[s]]
                if not nxt:
                    break
                sidx = nxt[0]
                used[sidx] = True
                sk0, sk1, sp0, sp1 = segments[sidx]
                other_key, other_pt = (sk1, sp1) if sk0 == key else (sk0, sp0)
                if end == 1:
                    chain_keys.append(other_key)
                    chain_pts.append(other_pt)
                else:
                    chain_keys.insert(0, other_key)
                    chain_pts.insert(0, other_pt)
        polylines.append(ContourPolyline(level=level, points=chain_pts))
    return polylines


# ---------------------------------------------------------------------------
# benchmark

@dataclass
class BenchReport:
    window: dict
    grid_nodes: int
    grid_seconds: float
    contour_seconds: float
    tracer_points: int
    tracer_monodromy_evals: int
    tracer_bundle_evals: int
    tracer_seconds: float
    speedup: float

    def as_text(self) -> str:
        lines = [
            "stability-map benchmark (serial, same integration kernels)",
            f"  window: a in [{self.window['a_min']}, {self.window['a_max']}] "
            f"step {self.window['da']}, eps in [{self.window['eps_min']}, "
            f"{self.window['eps_max']}] step {self.window['deps']}",
            f"  grid:   {self.grid_nodes} monodromy evaluations, "
            f"{self.grid_seconds:.3f} s scan + {self.contour_seconds:.3f} s contouring",
            f"  tracer: {self.tracer_points} boundary points, "
            f"{self.tracer_monodromy_evals} monodromy + "
            f"{self.tracer_bundle_evals} sensitivity evaluations, "
            f"{self.tracer_seconds:.3f} s",
            f"  speedup: {self.speedup:.1f}x",
        ]
        return "\n".join(lines)


def benchmark(
    window: dict,
    forcing: ForcingSpec,
    integ_cfg: IntegratorConfig | None = None,
    trace_cfg: TraceConfig | None = None,
    tongues: tuple[int, ...] = (1, 2, 3),
) -> BenchReport:
    """Wall-clock comparison of grid+contour against the boundary tracer.

    Both methods run serially on the same kernels.  The grid covers the
    window at the given resolution and extracts both +-2 contours; the
    tracer follows the requested tongues at d_epsilon resolution over the
    same eps span.
    """
    integ_cfg = integ_cfg or IntegratorConfig()
    trace_cfg = dataclasses.replace(trace_cfg or TraceConfig(), epsilon_max=window["eps_max"])

    t0 = time.perf_counter()
    grid = grid_scan(
        (window["a_min"], window["a_max"], window["da"]),
        (window["eps_min"], window["eps_max"], window["deps"]),
        forcing,
        0.0,
        integ_cfg,
    )
    t_grid = time.perf_counter() - t0
    t0 = time.perf_counter()
    marching_squares(grid, 2.0)
    marching_squares(grid, -2.0)
    t_contour = time.perf_counter() - t0

    n_points = 0
    t0 = time.perf_counter()
    with count_evaluations() as counts:
        for n in tongues:
            upper, lower = trace_tongue(n, forcing, trace_cfg, integ_cfg)
            n_points += len(upper.points) + len(lower.points)
    t_trace = time.perf_counter() - t0

    return BenchReport(
        window=dict(window),
        grid_nodes=int(grid.values.size),
        grid_seconds=t_grid,
        contour_seconds=t_contour,
        tracer_points=n_points,
        tracer_monodromy_evals=counts.monodromy,
        tracer_bundle_evals=counts.bundles,
        tracer_seconds=t_trace,
        speedup=(t_grid + t_contour) / t_trace if t_trace > 0 else math.inf,
    )


# ---------------------------------------------------------------------------
# CSV export

def write_grid_csv(grid: StabilityGrid, path) -> None:
    """Row-major CSV with header comments recording the full provenance."""
    a_lo, a_hi, da = grid.a_range
    e_lo, e_hi, de = grid.eps_range
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# hillmap stability grid\n")
        fh.write(f"# a_range: {a_lo!r} {a_hi!r} {da!r}\n")
        fh.write(f"# eps_range: {e_lo!r} {e_hi!r} {de!r}\n")
        fh.write(f"# forcing: {grid.forcing.describe()}\n")
        fh.write(f"# kappa: {grid.kappa!r}\n")
        fh.write(f"# scheme: {grid.scheme.value}\n")
        fh.write(f"# steps_per_period: {grid.steps_per_period}\n")
        fh.write(f"# overflow_cells: {grid.overflow_count}\n")
        fh.write("# rows: a ascending; columns: eps ascending; values: trace\n")
        for row in grid.values:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def read_grid_csv(path) -> StabilityGrid:
    header: dict[str, str] = {}
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, val = body.partition(":")
                    header[key.strip()] = val.strip()
                continue
            rows.append([float(x) for x in line.split(",")])
    a_lo, a_hi, da = (float(x) for x in header["a_range"].split())
    e_lo, e_hi, de = (float(x) for x in header["eps_range"].split())
    values = np.array(rows)
    forcing_name = header.get("forcing", "cosine")
    if forcing_name.startswith("piecewise"):
        raise ValueError("piecewise forcings cannot be reconstructed from a grid CSV")
    return StabilityGrid(
        a_values=_axis((a_lo, a_hi, da)),
        eps_values=_axis((e_lo, e_hi, de)),
        values=values,
        kappa=float(header.get("kappa", "0.0")),
        forcing=parse_forcing(forcing_name),
        scheme=Scheme(header.get("scheme", "symplectic-euler")),
        steps_per_period=int(header.get("steps_per_period", "4096")),
        overflow_count=int(header.get("overflow_cells", "0")),
    )
