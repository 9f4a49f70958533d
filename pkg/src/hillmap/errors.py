"""Exception types raised by hillmap."""

from __future__ import annotations


class HillMapError(Exception):
    """Base class for all hillmap errors."""


class ForcingError(HillMapError):
    """A forcing definition failed validation."""


class MeanNotZero(ForcingError):
    """Forcing mean over one period exceeds the zero-mean tolerance."""

    def __init__(self, mean: float, tol: float):
        self.mean = mean
        self.tol = tol
        super().__init__(f"forcing mean {mean:.3e} exceeds tolerance {tol:.1e}")


class DutyOutOfRange(ForcingError):
    """Square-wave duty cycle outside the open interval (0, 1)."""

    def __init__(self, duty: float):
        self.duty = duty
        super().__init__(f"duty cycle must lie in (0, 1), got {duty}")


class EmptyPiecewise(ForcingError):
    """Piecewise forcing defined with no breakpoints."""

    def __init__(self) -> None:
        super().__init__("piecewise forcing needs at least one (phase, value) breakpoint")


class NonFiniteState(HillMapError):
    """State-transition matrix entries overflowed during integration.

    ``t`` is the integration time at which overflow was detected.
    """

    def __init__(self, t: float, where: str = ""):
        self.t = t
        self.where = where
        suffix = f" in {where}" if where else ""
        super().__init__(f"state-transition matrix overflowed at t={t:.6f}{suffix}")


class BothDerivativesVanish(HillMapError):
    """Both trace derivatives vanish: degenerate (crossover) boundary point."""

    def __init__(self, epsilon: float, a: float):
        self.epsilon = epsilon
        self.a = a
        super().__init__(
            f"both trace derivatives below 1e-12 at (eps={epsilon:.6g}, a={a:.6g}); "
            "degenerate boundary point (tongue crossover?)"
        )


class BracketNotFound(HillMapError):
    """Root bracketing for a boundary point failed within the search window."""


class TipNotFound(HillMapError):
    """No damped tongue tip found within the epsilon search limit."""


class NoWindowFound(HillMapError):
    """No stabilization-window boundary crossing in the scanned column."""
