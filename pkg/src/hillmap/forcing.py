"""Zero-mean, 2*pi-periodic parametric forcing functions p(t).

Built-in families:

``cosine``
    p(t) = cos(t).
``square`` (duty d)
    Even duty (d = 0.5): +1 on [0, pi), -1 on [pi, 2*pi).
    Uneven duty: (1 - d) on [0, 2*pi*d), -d on [2*pi*d, 2*pi).
    Both are zero-mean with |p| <= 1.
``ramp``
    p(t) = t/pi - 1 on [0, 2*pi), a rising sawtooth from -1 to +1.
``piecewise``
    User-supplied step function from (phase, value) breakpoints; the value
    holds from its phase to the next breakpoint, wrapping past 2*pi.

All forcings have period exactly 2*pi (any frequency scaling is absorbed
into the mean spring constant).  Discontinuous forcings evaluate as
right-continuous at their breakpoints so integrators behave
deterministically when a step lands exactly on a jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DutyOutOfRange, EmptyPiecewise, ForcingError, MeanNotZero

TWO_PI = 2.0 * math.pi

#: tolerance on the mean of a user-defined piecewise forcing (exact quadrature)
MEAN_TOL = 1e-12


@dataclass(frozen=True)
class ForcingSpec:
    """Immutable description of a parametric forcing p(t).

    Construct through :func:`cosine`, :func:`square`, :func:`ramp`,
    :func:`piecewise` or :func:`parse_forcing`; those validate the
    zero-mean and range invariants up front so ``eval_forcing`` never has
    to re-check.
    """

    kind: str
    duty: float | None = None
    breakpoints: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("cosine", "square", "ramp", "piecewise"):
            raise ForcingError(f"unknown forcing kind {self.kind!r}")

    def describe(self) -> str:
        """CLI-style name: ``cosine``, ``square:0.25``, ``ramp``, ``piecewise:<k pts>``."""
        if self.kind == "square":
            return f"square:{self.duty:g}"
        if self.kind == "piecewise":
            return f"piecewise:{len(self.breakpoints or ())} breakpoints"
        return self.kind


def cosine() -> ForcingSpec:
    """Sinusoidal forcing cos(t)."""
    return ForcingSpec("cosine")


def square(duty: float = 0.5) -> ForcingSpec:
    """Square wave with the given duty cycle in (0, 1)."""
    if not (0.0 < duty < 1.0):
        raise DutyOutOfRange(duty)
    return ForcingSpec("square", duty=float(duty))


def ramp() -> ForcingSpec:
    """Rising sawtooth t/pi - 1."""
    return ForcingSpec("ramp")


def piecewise(breakpoints) -> ForcingSpec:
    """Step function from (phase, value) pairs, phases in [0, 2*pi).

    The mean over one period must vanish to within ``MEAN_TOL`` (checked
    with exact step-function quadrature).
    """
    pts = tuple((float(p), float(v)) for p, v in breakpoints)
    if not pts:
        raise EmptyPiecewise()
    for p, _ in pts:
        if not (0.0 <= p < TWO_PI):
            raise ForcingError(f"breakpoint phase {p} outside [0, 2*pi)")
        if not math.isfinite(p):
            raise ForcingError("non-finite breakpoint phase")
    pts = tuple(sorted(pts))
    phases = [p for p, _ in pts]
    if len(set(phases)) != len(phases):
        raise ForcingError("duplicate breakpoint phases")
    spec = ForcingSpec("piecewise", breakpoints=pts)
    mean = _piecewise_mean(spec)
    if abs(mean) > MEAN_TOL:
        raise MeanNotZero(mean, MEAN_TOL)
    return spec


def _piecewise_mean(spec: ForcingSpec) -> float:
    total = 0.0
    for t0, t1, val in _piecewise_segments(spec):
        total += val * (t1 - t0)
    return total / TWO_PI


def _piecewise_segments(spec: ForcingSpec):
    """Constant segments (t0, t1, value) covering [0, 2*pi]."""
    pts = spec.breakpoints or ()
    segs = []
    if pts[0][0] > 0.0:
        # the stretch before the first breakpoint wraps around from the last
        segs.append((0.0, pts[0][0], pts[-1][1]))
    for i, (p, v) in enumerate(pts):
        p_next = pts[i + 1][0] if i + 1 < len(pts) else TWO_PI
        segs.append((p, p_next, v))
    return segs


def segments(spec: ForcingSpec) -> list[tuple[float, float]]:
    """Smooth pieces (t0, t1) of one period, used to align integration grids.

    Within each piece p(t) is C-infinity; discontinuities only occur at
    piece boundaries.
    """
    if spec.kind == "cosine":
        return [(0.0, TWO_PI)]
    if spec.kind == "ramp":
        return [(0.0, TWO_PI)]
    if spec.kind == "square":
        tb = TWO_PI * spec.duty
        return [(0.0, tb), (tb, TWO_PI)]
    return [(t0, t1) for t0, t1, _ in _piecewise_segments(spec)]


def eval_in_segment(spec: ForcingSpec, t, seg_index: int):
    """Evaluate p on the closure of smooth piece ``seg_index``.

    Unlike :func:`eval_forcing` this uses the piece's own formula at its
    right endpoint (the limit from the left), which is what an integrator
    stepping inside the piece needs.
    """
    if spec.kind == "cosine":
        return np.cos(t)
    if spec.kind == "ramp":
        return np.asarray(t) / math.pi - 1.0
    if spec.kind == "square":
        hi, lo = _square_levels(spec.duty)
        return np.full_like(np.asarray(t, dtype=float), hi if seg_index == 0 else lo)
    vals = [v for _, _, v in _piecewise_segments(spec)]
    return np.full_like(np.asarray(t, dtype=float), vals[seg_index])


def _square_levels(duty: float) -> tuple[float, float]:
    # even duty keeps the +/-1 convention; uneven is (1-d)/-d, unit peak-to-peak
    if duty == 0.5:
        return 1.0, -1.0
    return 1.0 - duty, -duty


def eval_forcing(spec: ForcingSpec, t):
    """p(t mod 2*pi), right-continuous at jumps.  Accepts scalars or arrays."""
    tt = np.mod(np.asarray(t, dtype=float), TWO_PI)
    # np.mod may round to the modulus itself for tiny negative arguments
    tt = np.where(tt >= TWO_PI, 0.0, tt)
    scalar = np.ndim(t) == 0
    if spec.kind == "cosine":
        out = np.cos(tt)
    elif spec.kind == "ramp":
        out = tt / math.pi - 1.0
    elif spec.kind == "square":
        hi, lo = _square_levels(spec.duty)
        out = np.where(tt < TWO_PI * spec.duty, hi, lo)
    else:
        segs = _piecewise_segments(spec)
        edges = np.array([s[0] for s in segs] + [TWO_PI])
        vals = np.array([s[2] for s in segs])
        idx = np.clip(np.searchsorted(edges, tt, side="right") - 1, 0, len(vals) - 1)
        out = vals[idx]
    return float(out) if scalar else out


def validate(spec: ForcingSpec) -> None:
    """Re-check the forcing invariants; raises a ForcingError subclass on failure.

    Construction already validates, so this is mainly useful for specs
    deserialized from documents or for the ``validate-forcing`` command.
    """
    if spec.kind == "square":
        if spec.duty is None or not (0.0 < spec.duty < 1.0):
            raise DutyOutOfRange(spec.duty if spec.duty is not None else float("nan"))
    if spec.kind == "piecewise":
        if not spec.breakpoints:
            raise EmptyPiecewise()
        mean = _piecewise_mean(spec)
        if abs(mean) > MEAN_TOL:
            raise MeanNotZero(mean, MEAN_TOL)


def parse_forcing(text: str) -> ForcingSpec:
    """Parse a CLI/config forcing name.

    Accepted forms: ``cosine``, ``square:<duty>``, ``ramp``,
    ``piecewise:<file>`` where the file holds two whitespace-separated
    columns of (phase, value) breakpoints; ``#`` starts a comment.
    """
    text = text.strip()
    if text == "cosine":
        return cosine()
    if text == "ramp":
        return ramp()
    if text.startswith("square"):
        _, _, rest = text.partition(":")
        duty = float(rest) if rest else 0.5
        return square(duty)
    if text.startswith("piecewise:"):
        path = text.split(":", 1)[1]
        pts = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                cols = line.split()
                if len(cols) != 2:
                    raise ForcingError(f"expected two columns in {path!r}: {line!r}")
                pts.append((float(cols[0]), float(cols[1])))
        return piecewise(pts)
    raise ForcingError(
        f"unknown forcing {text!r}; use cosine, square:<duty>, ramp or piecewise:<file>"
    )


BUILTIN_FORCINGS = ("cosine", "square:0.5", "square:0.25", "ramp")
