"""Exception types raised across the package."""


class GraphFTRLError(Exception):
    """Base class for all package errors."""


class DimensionError(GraphFTRLError, ValueError):
    """Objects over different arm counts were combined."""


class SizeLimitError(GraphFTRLError, ValueError):
    """An exhaustive routine was asked to handle a problem that is too large."""


class DomainError(GraphFTRLError, ValueError):
    """A function was evaluated outside its domain (e.g. a non-positive probability)."""


class InfeasibleError(GraphFTRLError, ValueError):
    """The truncated simplex is empty (gamma > 1/N)."""


class NonConvergenceError(GraphFTRLError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class FeedbackError(GraphFTRLError, ValueError):
    """A feedback record is inconsistent with the graph or cover."""


class ContractError(GraphFTRLError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(GraphFTRLError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class InvariantViolation(GraphFTRLError, AssertionError):
    """A runtime invariant monitor detected a violation."""


class MissingDataError(GraphFTRLError, ValueError):
    """A diagnostic needs trace data that was not recorded (monitors off or summary detail)."""
