"""Exception hierarchy shared by all glvortex modules."""


class GLVortexError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GLVortexError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedDegreeError(DomainError):
    """Spectral and Fredholm tools only handle the degree pair (1, 1)."""


class HypothesisError(GLVortexError):
    """The coupling constants violate a structural hypothesis.

    ``hypothesis`` is ``"H1"`` (A+, A- > 0, B^2 < A+ A-, t+- > 0) or ``"H2"`` (B < 0).
    """

    def __init__(self, hypothesis, message):
        super().__init__(f"hypothesis ({hypothesis}) violated: {message}")
        self.hypothesis = hypothesis


class SingularOperatorError(GLVortexError):
    def __init__(self, pivot_index, pivot_value):
        super().__init__(
            f"singular operator: pivot {pivot_index} is {pivot_value:.3e} after Tikhonov guard"
        )
        self.pivot_index = int(pivot_index)
        self.pivot_value = float(pivot_value)


class EigenConvergenceError(GLVortexError):
    def __init__(self, iterations, last_residual):
        super().__init__(
            f"inverse iteration did not converge in {iterations} sweeps "
            f"(last residual {last_residual:.3e})"
        )
        self.iterations = iterations
        self.last_residual = last_residual


class NewtonDivergenceError(GLVortexError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = list(trace)


class QualitativePropertyError(GLVortexError):
    def __init__(self, bound, message):
        super().__init__(f"qualitative-property violation [{bound}]: {message}")
        self.bound = bound


class OrthogonalityError(GLVortexError):
    """Right-hand side fails a solvability pairing against the kernel."""

    def __init__(self, pairing, residual, gate):
        super().__init__(
            f"unsatisfied orthogonality: pairing {pairing!r} residual {residual:.3e} exceeds gate {gate:.3e}"
        )
        self.pairing = pairing
        self.residual = residual
        self.gate = gate
