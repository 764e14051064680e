# morrey_toolkit/core/errors.py
"""
Coded exceptions shared by every module.

Each error carries a short kebab-case ``code`` that the CLI prints and the
experiment harness records per row.
"""


class ToolkitError(Exception):
    """Base class for every failure the toolkit reports on purpose"""

    code = "toolkit-error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class EmptyQuadratureError(ToolkitError):
    """Raised when a ball does not meet the grid box"""
    code = "empty-quadrature"


class BadExponentError(ToolkitError):
    """Raised for Lebesgue exponents outside the admissible range"""
    code = "bad-exponent"


class NotADirectionError(ToolkitError):
    """Raised when a kernel is evaluated off the unit sphere"""
    code = "not-a-direction"


class NotLocallyIntegrableError(ToolkitError):
    """Raised for power functions that are not locally integrable"""
    code = "not-locally-integrable"


class SingularSampleError(ToolkitError):
    """Raised when a cell center lands on a singular point of a sampled function"""
    code = "singular-sample"


class BadRadiusError(ToolkitError):
    code = "bad-radius"


class BadRadiiError(ToolkitError):
    code = "bad-radii"


class BadAlphaError(ToolkitError):
    code = "bad-alpha"


class BadLambdaError(ToolkitError):
    code = "bad-lambda"


class BadRangeError(ToolkitError):
    code = "bad-range"


class GridMismatchError(ToolkitError):
    code = "grid-mismatch"


class KernelNotCancellingError(ToolkitError):
    """Raised when a Marcinkiewicz kernel has a nonzero sphere integral"""
    code = "kernel-not-cancelling"


class DivergentTailError(ToolkitError):
    """Raised when an improper integral over (t, ∞) diverges"""
    code = "divergent-tail"


class MarginalDivergenceError(DivergentTailError):
    """Raised when the tail exponent sits exactly on the divergence boundary"""
    code = "marginal-divergence"


class NoExtremalError(ToolkitError):
    code = "no-extremal"


class BadConfigError(ToolkitError):
    code = "bad-config"
