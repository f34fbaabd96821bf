"""Exception hierarchy.

Three branches matter to callers (the CLI maps them to exit codes):
input/validation problems, numerical failures, and analysis verdicts
(degenerate polarization states, missing resonances).
"""


class GyroKitError(Exception):
    """Base class for all gyrokit errors."""


class InputError(GyroKitError, ValueError):
    """Invalid input data, file content, or parameter values."""


class TouchstoneParseError(InputError):
    """Malformed Touchstone text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GridMismatchError(InputError):
    """Frequency grids of two sweeps differ."""


class OutsideValidityError(InputError):
    """Geometry outside the validity range of a closed-form model."""


class InfeasiblePhaseError(InputError):
    """Ring phase budget leaves no positive physical length."""


class UnmagnetizedError(InputError):
    """Zero magnetization vector where a direction is required."""


class NumericalError(GyroKitError, ArithmeticError):
    """A computation failed numerically."""


class CascadeSingularError(NumericalError):
    """Interior feedback matrix of a cascade is (near-)singular."""

    def __init__(self, cond: float, frequency: float | None = None):
        self.cond = cond
        self.frequency = frequency
        where = f" at frequency {frequency:g} Hz" if frequency is not None else ""
        super().__init__(f"cascade singular{where} (condition estimate {cond:.3e})")


class OnResonanceError(NumericalError):
    """Undamped permeability tensor evaluated inside the resonance guard band."""


class StepSizeError(NumericalError):
    """Fixed-step integration went unstable."""

    def __init__(self, dt: float, step: int):
        self.dt = dt
        self.step = step
        super().__init__(
            f"step size too large: dt={dt:g} s drifted |m| by more than 1% at step {step}"
        )


class GradientProbeError(NumericalError):
    """A finite-difference probe returned a non-finite value."""

    def __init__(self, coordinate: int):
        self.coordinate = coordinate
        super().__init__(f"gradient probe failed: non-finite value at coordinate {coordinate}")


class InfeasibleStartError(NumericalError):
    """Optimization started from a point with non-finite cost."""


class AnalysisError(GyroKitError):
    """An analysis has no defined answer for the given data."""


class PolarizationUndefinedError(AnalysisError):
    """Both co-circular magnitudes are zero; ellipticity undefined."""


class RotationUndefinedError(AnalysisError):
    """Co-rotating response is zero; rotation angle undefined."""


class NoResonanceError(AnalysisError):
    """Co-polarized transmission has no interior minimum."""


class TrajectoryTooShortError(AnalysisError):
    """Trajectory holds too few oscillations for frequency extraction."""
