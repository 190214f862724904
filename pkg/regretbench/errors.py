# Exception hierarchy of the workbench.
# Validation errors map to CLI exit code 2, numerical errors to exit code 3.


class RegretBenchError(Exception):
    "Base class of every error raised on purpose by regretbench."
    exit_code = 1


class ValidationError(RegretBenchError):
    "Raised when an input violates a documented precondition."
    exit_code = 2


class NumericalError(RegretBenchError):
    "Raised when a computation cannot deliver a trustworthy number."
    exit_code = 3


class ConfigError(ValidationError):
    pass


class BoundViolation(ValidationError):
    "Raised when an expert bid is not strictly inside (-1, 1)."
    pass


class IdenticalExperts(ValidationError):
    "Raised when the two experts agree on every state."
    pass


class InvalidWalk(ValidationError):
    "Raised when consecutive vertices of a walk are not joined by an edge."
    pass


class NotClosedWalk(ValidationError):
    pass


class DepthExceeded(ValidationError):
    "Raised when cycle enumeration is requested above the configured depth."
    pass


class UnsupportedDepth(ValidationError):
    "Raised when no closed-form indifference solution exists for the depth."
    pass


class FinalDataViolation(ValidationError):
    "Raised when final-time data fails a structural condition."
    pass


class GridOutOfRange(ValidationError):
    "Raised when the reachable regret region leaves the value grid."
    pass


class NumericalDegeneracy(NumericalError):
    "Raised when an iterative solver stalls beyond its iteration cap."
    pass


class FoliationViolation(NumericalError):
    "Raised when the level-set field stops being monotone in y."
    pass


class DerivativeUnavailable(NumericalError):
    "Raised when a solution refuses to evaluate derivatives at a point."
    pass


class UnboundedEstimate(NumericalError):
    "Raised when a sampled supremum is not finite."
    pass


class PolicyError(NumericalError):
    "Raised when a policy fails during a game; carries the step index."

    def __init__(self, message, step):
        super().__init__(f"step {step}: {message}")
        self.step = step


class DomainTruncationWarning(UserWarning):
    "Issued when a heat-kernel window reaches the edge of the data domain."
    pass
