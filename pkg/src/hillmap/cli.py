"""Command-line interface.

Subcommands: ``trace`` (undamped tongues + optional stabilization window),
``damped`` (tip search + damped tongues), ``grid`` (baseline scan +
contours), ``bench`` (tracer vs grid timing), ``plot`` (SVG from saved
documents), ``validate-forcing``.

Every flag can also be supplied through an environment variable with the
``HILLMAP_`` prefix (``--eps-max`` -> ``HILLMAP_EPS_MAX``) or through a
JSON config file passed as ``--config``; explicit flags win over the
environment, which wins over the config file.  Exit code 0 means every
requested artifact was produced and every boundary point passed its
independent residual re-check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .baseline import benchmark, grid_scan, marching_squares, write_grid_csv, read_grid_csv
from .damped import damped_threshold, find_tongue_tip, trace_damped_tongue
from .document import (
    StabilityMapDocument,
    build_metadata,
    read_document,
    verify_curves,
    write_curves_csv,
    write_document,
)
from .errors import HillMapError, NoWindowFound, TipNotFound
from .forcing import parse_forcing, validate
from .monodromy import IntegratorConfig, Scheme
from .svg import render_svg
from .tracer import TraceConfig, trace_kapitza_boundary, trace_tongue

ENV_PREFIX = "HILLMAP_"

# flag -> (parser kwargs, default); None defaults mean "must be given"
_COMMON = {
    "steps": (dict(type=int, help="integrator steps per forcing period"), 4096),
    "scheme": (dict(choices=["symplectic-euler", "trapezoid"],
                    help="structure-preserving scheme for the monodromy matrix"),
               "symplectic-euler"),
    "out": (dict(type=str, help="output directory"), "."),
    "serial": (dict(action="store_true", help="disable concurrency (deterministic timing)"),
               False),
}
_TRACELIKE = {
    "forcing": (dict(type=str, help="cosine | square:<duty> | ramp | piecewise:<file>"),
                "cosine"),
    "tongues": (dict(type=str, help="comma-separated tongue indices"), "1,2,3"),
    "deps-step": (dict(type=float, help="continuation output step in eps"), 0.05),
    "eps-max": (dict(type=float, help="eps extent of the trace"), 2.0),
    "svg": (dict(action="store_true", help="also render an SVG diagram"), False),
}
_FLAGS: dict[str, dict] = {
    "trace": {**_COMMON, **_TRACELIKE,
              "kapitza": (dict(action="store_true",
                               help="also trace the a<0 stabilization window"), False)},
    "damped": {**_COMMON, **_TRACELIKE,
               "kappa": (dict(type=float, help="viscous damping coefficient (> 0)"), None)},
    "grid": {**_COMMON,
             "forcing": _TRACELIKE["forcing"],
             "kappa": (dict(type=float, help="damping coefficient"), 0.0),
             "a-min": (dict(type=float), -1.0),
             "a-max": (dict(type=float), 3.0),
             "da": (dict(type=float, help="grid step in a"), 0.02),
             "eps-min": (dict(type=float), 0.0),
             "eps-max": (dict(type=float), 2.0),
             "deps": (dict(type=float, help="grid step in eps"), 0.02),
             "contours": (dict(action="store_true",
                               help="also extract +-target level sets"), False)},
    "bench": {**_COMMON,
              "forcing": _TRACELIKE["forcing"],
              "window": (dict(choices=["fig3"], help="named benchmark window"), "fig3"),
              "tongues": (dict(type=str), "1,2,3"),
              "deps-step": _TRACELIKE["deps-step"]},
    "plot": {"out": _COMMON["out"],
             "document": (dict(type=str, help="stability-map JSON document"), None),
             "grid": (dict(type=str, help="grid CSV to underlay as a band"), None),
             "out-file": (dict(type=str, help="output SVG filename"), "diagram.svg"),
             "title": (dict(type=str), "")},
    "validate-forcing": {
        "forcing": (dict(type=str, help="forcing to validate"), None)},
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hillmap",
        description="Stability maps of Hill's equation via boundary-ODE tracing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, flags in _FLAGS.items():
        p = sub.add_parser(cmd)
        p.add_argument("--config", type=str, default=None,
                       help="JSON file mirroring the flags of this subcommand")
        for name, (kwargs, _default) in flags.items():
            kw = dict(kwargs)
            if kw.get("action") == "store_true":
                p.add_argument(f"--{name}", action="store_const", const=True, default=None,
                               help=kw.get("help"))
            else:
                kw.setdefault("default", None)
                p.add_argument(f"--{name}", **kw)
    return parser


def _coerce(value, default, kwargs):
    if kwargs.get("action") == "store_true" or isinstance(default, bool):
        if isinstance(value, str):
            return value.lower() in ("1", "true", "yes", "on")
        return bool(value)
    typ = kwargs.get("type")
    return typ(value) if typ is not None and value is not None else value


def _settings(args: argparse.Namespace, cmd: str) -> dict:
    flags = _FLAGS[cmd]
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config_file = json.load(fh)
        unknown = set(config_file) - set(flags)
        if unknown:
            raise HillMapError(
                f"unknown config keys for {cmd}: {sorted(unknown)}; "
                f"valid keys: {sorted(flags)}"
            )
    else:
        config_file = {}
    out = {}
    for name, (kwargs, default) in flags.items():
        attr = name.replace("-", "_")
        value = getattr(args, attr, None)
        if value is None:
            env = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
            if env is not None:
                value = _coerce(env, default, kwargs)
            elif name in config_file:
                value = _coerce(config_file[name], default, kwargs)
            else:
                value = default
        out[name] = value
    return out


def _tongue_list(text: str) -> list[int]:
    try:
        ns = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise HillMapError(f"bad tongue list {text!r}") from exc
    if not ns or any(n < 1 for n in ns):
        raise HillMapError(f"tongue indices must be >= 1, got {text!r}")
    return ns


def _integ_cfg(s: dict) -> IntegratorConfig:
    return IntegratorConfig(Scheme(s["scheme"]), s["steps"])


def _trace_cfg(s: dict) -> TraceConfig:
    return TraceConfig(d_epsilon=s["deps-step"], epsilon_max=s["eps-max"])


def _run_many(jobs, serial: bool):
    """Run zero-argument callables, concurrently unless serial; preserves order."""
    if serial or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def cmd_trace(args: argparse.Namespace) -> int:
    s = _settings(args, "trace")
    forcing = parse_forcing(s["forcing"])
    tongues = _tongue_list(s["tongues"])
    integ = _integ_cfg(s)
    tcfg = _trace_cfg(s)
    outdir = Path(s["out"])
    outdir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    errors: list[str] = []
    curves = []
    results = _run_many(
        [lambda n=n: trace_tongue(n, forcing, tcfg, integ) for n in tongues], s["serial"]
    )
    for pair in results:
        curves.extend(pair)
    if s["kapitza"]:
        try:
            curves.extend(trace_kapitza_boundary(forcing, tcfg, integ))
        except NoWindowFound as exc:
            errors.append(f"kapitza: {exc}")
    elapsed = time.perf_counter() - t0

    worst = verify_curves(curves, forcing, 0.0, integ)
    ok = worst <= tcfg.trace_tolerance and not errors
    meta = build_metadata(
        forcing, 0.0, integ, tcfg, elapsed, "trace", dict(s),
        extra={"worst_residual_recheck": worst, "partial": bool(errors),
               "errors": errors},
    )
    doc = StabilityMapDocument(meta, curves)
    write_curves_csv(curves, outdir / "curves.csv")
    write_document(doc, outdir / "stability_map.json")
    if s["svg"]:
        render_svg(outdir / "diagram.svg", curves,
                   title=f"stability boundaries, {forcing.describe()}")
    print(f"traced {len(curves)} curves "
          f"({sum(len(c.points) for c in curves)} points) in {elapsed:.2f} s; "
          f"worst independent residual {worst:.2e}")
    for e in errors:
        print(f"warning: {e}", file=sys.stderr)
    return 0 if ok else 1


def cmd_damped(args: argparse.Namespace) -> int:
    s = _settings(args, "damped")
    if s["kappa"] is None:
        print("error: --kappa is required", file=sys.stderr)
        return 2
    kappa = float(s["kappa"])
    if kappa <= 0.0:
        print("error: kappa must be > 0; for the undamped problem use `hillmap trace`",
              file=sys.stderr)
        return 2
    forcing = parse_forcing(s["forcing"])
    tongues = _tongue_list(s["tongues"])
    integ = _integ_cfg(s)
    tcfg = _trace_cfg(s)
    outdir = Path(s["out"])
    outdir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    errors: list[str] = []
    tips_meta = []
    curves = []

    def run(n: int):
        tip = find_tongue_tip(n, kappa, forcing, integ)
        pair = trace_damped_tongue(n, kappa, forcing, tcfg, integ, tip=tip)
        return tip, pair

    for n in tongues:
        try:
            tip, pair = run(n)
        except TipNotFound as exc:
            errors.append(f"tongue {n}: {exc}")
            continue
        tips_meta.append({
            "tongue": n, "epsilon0": tip.epsilon0, "a0": tip.a0,
            "trace_at_tip": tip.trace_at_tip,
            "d_trace_da_at_tip": tip.d_trace_da_at_tip,
        })
        curves.extend(pair)
    elapsed = time.perf_counter() - t0

    worst = verify_curves(curves, forcing, kappa, integ)
    ok = worst <= tcfg.trace_tolerance and not errors
    meta = build_metadata(
        forcing, kappa, integ, tcfg, elapsed, "damped", dict(s),
        extra={"tips": tips_meta, "threshold": damped_threshold(kappa),
               "worst_residual_recheck": worst, "partial": bool(errors),
               "errors": errors},
    )
    doc = StabilityMapDocument(meta, curves)
    write_curves_csv(curves, outdir / "damped_curves.csv")
    write_document(doc, outdir / "damped_map.json")
    if s["svg"]:
        render_svg(outdir / "damped_diagram.svg", curves,
                   title=f"damped boundaries, kappa={kappa:g}, {forcing.describe()}")
    print(f"found {len(tips_meta)} tips, traced {len(curves)} curves in {elapsed:.2f} s; "
          f"worst independent residual {worst:.2e}")
    for e in errors:
        print(f"warning: {e}", file=sys.stderr)
    return 0 if ok else 1


def cmd_grid(args: argparse.Namespace) -> int:
    s = _settings(args, "grid")
    forcing = parse_forcing(s["forcing"])
    integ = _integ_cfg(s)
    outdir = Path(s["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    grid = grid_scan((s["a-min"], s["a-max"], s["da"]),
                     (s["eps-min"], s["eps-max"], s["deps"]),
                     forcing, s["kappa"], integ)
    elapsed = time.perf_counter() - t0
    write_grid_csv(grid, outdir / "grid.csv")
    msg = (f"scanned {grid.values.size} nodes in {elapsed:.2f} s "
           f"({grid.overflow_count} overflow cells)")
    if s["contours"]:
        target = damped_threshold(s["kappa"]) if s["kappa"] > 0 else 2.0
        polys = marching_squares(grid, target) + marching_squares(grid, -target)
        with open(outdir / "contours.csv", "w", encoding="utf-8") as fh:
            fh.write("polyline,level,eps,a\n")
            for i, poly in enumerate(polys):
                for e, a in poly.points:
                    fh.write(f"{i},{poly.level!r},{e!r},{a!r}\n")
        msg += f"; {len(polys)} contour polylines"
    print(msg)
    return 0


_BENCH_WINDOWS = {
    # the standard comparison window: first three tongues plus the a < 0
    # region their lower branches reach, at the usual 0.02 grid resolution
    "fig3": dict(a_min=-1.3, a_max=3.1, da=0.02, eps_min=0.0, eps_max=2.0, deps=0.02),
}


def cmd_bench(args: argparse.Namespace) -> int:
    s = _settings(args, "bench")
    forcing = parse_forcing(s["forcing"])
    integ = _integ_cfg(s)
    tongues = tuple(_tongue_list(s["tongues"]))
    window = _BENCH_WINDOWS[s["window"]]
    tcfg = TraceConfig(d_epsilon=s["deps-step"], epsilon_max=window["eps_max"])
    outdir = Path(s["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    report = benchmark(window, forcing, integ, tcfg, tongues)
    text = report.as_text()
    print(text)
    (outdir / "bench.txt").write_text(text + "\n", encoding="utf-8")
    payload = {
        "window": report.window,
        "grid_nodes": report.grid_nodes,
        "grid_seconds": report.grid_seconds,
        "contour_seconds": report.contour_seconds,
        "tracer_points": report.tracer_points,
        "tracer_monodromy_evals": report.tracer_monodromy_evals,
        "tracer_bundle_evals": report.tracer_bundle_evals,
        "tracer_seconds": report.tracer_seconds,
        "speedup": report.speedup,
        "forcing": forcing.describe(),
        "steps_per_period": integ.steps_per_period,
        "scheme": integ.scheme.value,
    }
    with open(outdir / "bench.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    s = _settings(args, "plot")
    outdir = Path(s["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    curves = []
    title = s["title"]
    if s["document"]:
        doc = read_document(s["document"])
        curves = doc.curves
        if not title:
            title = f"{doc.metadata.get('forcing', {}).get('name', '')} stability map"
    grid = read_grid_csv(s["grid"]) if s["grid"] else None
    render_svg(outdir / s["out-file"], curves, grid=grid, title=title)
    print(f"wrote {outdir / s['out-file']}")
    return 0


def cmd_validate_forcing(args: argparse.Namespace) -> int:
    s = _settings(args, "validate-forcing")
    if not s["forcing"]:
        print("error: --forcing is required", file=sys.stderr)
        return 2
    spec = parse_forcing(s["forcing"])
    validate(spec)
    print(f"{spec.describe()}: ok (zero-mean, 2*pi-periodic)")
    return 0


_DISPATCH = {
    "trace": cmd_trace,
    "damped": cmd_damped,
    "grid": cmd_grid,
    "bench": cmd_bench,
    "plot": cmd_plot,
    "validate-forcing": cmd_validate_forcing,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except HillMapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
