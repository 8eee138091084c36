"""Exception hierarchy shared by all modules."""


class FGCoupledError(Exception):
    """Base class for every error raised by this package."""


class InputError(FGCoupledError, ValueError):
    """Malformed arguments: shape mismatch, point outside its space, incomparable pair."""


class ConfigError(FGCoupledError, ValueError):
    """Invalid configuration: inadmissible constants, unknown builtin, grid too large."""


class ProblemSyntaxError(InputError):
    """Problem file could not be parsed."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EstimationError(FGCoupledError, RuntimeError):
    """Contraction constants are not certifiable from the sampled pairs."""


class DivergenceError(FGCoupledError, RuntimeError):
    """Step distance exceeded the divergence cutoff."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration
