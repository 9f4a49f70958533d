"""Self-describing stability-map documents and their CSV/JSON forms.

A document bundles traced boundary curves with enough metadata (forcing,
damping, integrator scheme and resolution, tool version, timing, CLI
arguments) that re-running from the metadata reproduces the curve
coordinates bit-for-bit on the same build.  Numbers are written as
shortest round-trip decimals.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any

from .forcing import ForcingSpec, cosine, piecewise, ramp, square
from .monodromy import RK_PAIR, IntegratorConfig, Params, trace_objective
from .damped import damped_threshold, transformed_monodromy
from .tracer import BoundaryCurve, BoundaryPoint, Branch, Orientation, TraceConfig

__all__ = [
    "StabilityMapDocument",
    "build_metadata",
    "write_document",
    "read_document",
    "write_curves_csv",
    "read_curves_csv",
    "verify_curves",
]


@dataclass
class StabilityMapDocument:
    metadata: dict[str, Any]
    curves: list[BoundaryCurve] = field(default_factory=list)
    grid_path: str | None = None


def _forcing_to_json(spec: ForcingSpec) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": spec.kind, "name": spec.describe()}
    if spec.duty is not None:
        out["duty"] = spec.duty
    if spec.breakpoints is not None:
        out["breakpoints"] = [[p, v] for p, v in spec.breakpoints]
    return out


def _forcing_from_json(data: dict[str, Any]) -> ForcingSpec:
    kind = data["kind"]
    if kind == "cosine":
        return cosine()
    if kind == "ramp":
        return ramp()
    if kind == "square":
        return square(data["duty"])
    return piecewise([(p, v) for p, v in data["breakpoints"]])


def build_metadata(
    forcing: ForcingSpec,
    kappa: float,
    integ_cfg: IntegratorConfig,
    trace_cfg: TraceConfig | None = None,
    elapsed_seconds: float | None = None,
    command: str | None = None,
    args: dict[str, Any] | None = None,
    extra: dict[str, Any] | None = None,
) -> dict[str, Any]:
    from . import __version__

    meta: dict[str, Any] = {
        "tool": "hillmap",
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "forcing": _forcing_to_json(forcing),
        "kappa": kappa,
        "target": damped_threshold(kappa) if kappa > 0 else 2.0,
        "scheme": integ_cfg.scheme.value,
        "steps_per_period": integ_cfg.steps_per_period,
        "rk_pair": RK_PAIR,
    }
    if trace_cfg is not None:
        meta["trace"] = {
            "d_epsilon": trace_cfg.d_epsilon,
            "epsilon_max": trace_cfg.epsilon_max,
            "trace_tolerance": trace_cfg.trace_tolerance,
            "slope_switch_threshold": trace_cfg.slope_switch_threshold,
            "bootstrap_offset": trace_cfg.bootstrap_offset,
            "slope_steps": trace_cfg.slope_steps,
        }
    if elapsed_seconds is not None:
        meta["elapsed_seconds"] = elapsed_seconds
    if command is not None:
        meta["command"] = command
    if args is not None:
        meta["args"] = args
    if extra:
        meta.update(extra)
    return meta


def _curve_to_json(curve: BoundaryCurve) -> dict[str, Any]:
    return {
        "tongue_index": curve.tongue_index,
        "branch": curve.branch.value,
        "target": curve.target,
        "sign": curve.sign,
        "truncated_reason": curve.truncated_reason,
        "points": [
            {
                "epsilon": p.epsilon,
                "a": p.a,
                "trace": p.trace_value,
                "residual": p.residual,
                "orientation": p.orientation.value,
            }
            for p in curve.points
        ],
    }


def _curve_from_json(data: dict[str, Any]) -> BoundaryCurve:
    pts = [
        BoundaryPoint(
            epsilon=d["epsilon"],
            a=d["a"],
            trace_value=d["trace"],
            residual=d["residual"],
            orientation=Orientation(d["orientation"]),
        )
        for d in data["points"]
    ]
    return BoundaryCurve(
        tongue_index=data["tongue_index"],
        branch=Branch(data["branch"]),
        target=data["target"],
        sign=data["sign"],
        points=pts,
        truncated_reason=data.get("truncated_reason"),
    )


def write_document(doc: StabilityMapDocument, path) -> None:
    payload = {
        "format": "hillmap/stability-map",
        "metadata": doc.metadata,
        "curves": [_curve_to_json(c) for c in doc.curves],
    }
    if doc.grid_path is not None:
        payload["grid"] = doc.grid_path
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def read_document(path) -> StabilityMapDocument:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "hillmap/stability-map":
        raise ValueError(f"{path} is not a hillmap stability-map document")
    return StabilityMapDocument(
        metadata=payload["metadata"],
        curves=[_curve_from_json(c) for c in payload.get("curves", [])],
        grid_path=payload.get("grid"),
    )


def forcing_from_metadata(metadata: dict[str, Any]) -> ForcingSpec:
    return _forcing_from_json(metadata["forcing"])


def write_curves_csv(curves: list[BoundaryCurve], path) -> None:
    """Flat per-point table: tongue, branch, eps, a, trace, residual."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("tongue,branch,eps,a,trace,residual\n")
        for c in curves:
            for p in c.points:
                fh.write(
                    f"{c.tongue_index},{c.branch.value},{p.epsilon!r},{p.a!r},"
                    f"{p.trace_value!r},{p.residual!r}\n"
                )


def read_curves_csv(path) -> list[BoundaryCurve]:
    """Rebuild curve skeletons from the CSV (metadata-free: target/sign unset)."""
    groups: dict[tuple[int, str], list[BoundaryPoint]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != ["tongue", "branch", "eps", "a", "trace", "residual"]:
            raise ValueError(f"unexpected curve CSV header in {path}")
        for line in fh:
            tongue, branch, eps, a, tr, res = line.strip().split(",")
            groups.setdefault((int(tongue), branch), []).append(
                BoundaryPoint(float(eps), float(a), float(tr), float(res),
                              Orientation.DA_DEPS)
            )
    return [
        BoundaryCurve(t, Branch(b), target=2.0, sign=0, points=pts)
        for (t, b), pts in groups.items()
    ]


def verify_curves(
    curves: list[BoundaryCurve],
    forcing: ForcingSpec,
    kappa: float,
    integ_cfg: IntegratorConfig,
) -> float:
    """Worst | |tr| - target | over all points, re-evaluated independently."""
    worst = 0.0
    for curve in curves:
        for p in curve.points:
            if kappa > 0:
                phi = transformed_monodromy(Params(p.a, p.epsilon, kappa), forcing, integ_cfg)
                tr = float(phi[0, 0] + phi[1, 1])
            else:
                tr = trace_objective(Params(p.a, p.epsilon), forcing, integ_cfg)
            worst = max(worst, abs(abs(tr) - curve.target))
    return worst
