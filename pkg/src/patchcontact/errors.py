"""Exception types raised across the pipeline."""


class PatchContactError(Exception):
    """Base class for all package errors."""


class ValidationError(PatchContactError, ValueError):
    """Input data violate a documented invariant."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NonRealRoots(ValidationError):
    """Characteristic quartic has complex (non purely imaginary) roots."""


class DegenerateRoots(ValidationError):
    """Characteristic roots coincide (isotropic-like limit)."""


class DegenerateCompliance(ValidationError):
    """A compliance parameter used as a divisor vanishes."""


class SingularCoupling(PatchContactError, ArithmeticError):
    """Interface determinant is numerically zero."""


class PoleAtEvaluation(PatchContactError, ZeroDivisionError):
    """Evaluation point sits on a pole."""


class UnresolvedWinding(PatchContactError, ArithmeticError):
    """Argument scan could not resolve the phase increments."""


class ConvergenceError(PatchContactError, ArithmeticError):
    """A numerical procedure failed to converge."""


class ContourThroughZero(ConvergenceError):
    """A contour passes through (or too close to) a zero and nudging failed."""


class QuadratureNotConverged(ConvergenceError):
    """Adaptive quadrature exhausted its budget."""


class NewtonDiverged(ConvergenceError):
    """Newton iteration did not converge."""


class DerivativeVanished(ConvergenceError):
    """Newton iteration met a vanishing derivative."""


class RemovablePoint(ConvergenceError):
    """Newton converged onto a removable zero of H that is not a zero of G."""


class NoZeroBelowTauMax(PatchContactError):
    """No zero of G found below the requested height."""


class IndexNonzero(PatchContactError, ArithmeticError):
    """The symbol has nonzero index and admits no canonical factorization."""


class TailUnresolved(ConvergenceError):
    """The log-symbol has not decayed at the end of the quadrature range."""


class OscillationUnderResolved(ConvergenceError):
    """Transform grid too coarse for the requested log-variable range."""


class NonPositiveTau(PatchContactError, ValueError):
    """Stress vanishes or is not finite inside a fitting window."""


class MeshTooCoarse(PatchContactError):
    """Collocation patch test failed."""


class SingularSystem(PatchContactError, ArithmeticError):
    """Collocation matrix is singular."""


class EmptyOverlap(PatchContactError, ValueError):
    """Two profiles do not overlap on the requested region."""


class ParseError(PatchContactError, ValueError):
    """Configuration text cannot be parsed; ``line`` is 1-based or None."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
