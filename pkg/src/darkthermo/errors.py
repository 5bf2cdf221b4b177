"""Exception hierarchy shared by all darkthermo modules."""


class DarkThermoError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(DarkThermoError, ValueError):
    """A physical or numerical parameter is outside its allowed range."""


class DegenerateSteadyStateError(DarkThermoError):
    """The Liouvillian has more than one stationary state.

    Attributes
    ----------
    condition : float
        1-norm condition number of the trace-augmented system.
    null_dimension : int
        Estimated dimension of the stationary manifold.
    """

    def __init__(self, message, condition=float("inf"), null_dimension=2, batch_index=None):
        super().__init__(message)
        self.condition = condition
        self.null_dimension = null_dimension
        self.batch_index = batch_index


class ConvergenceError(DarkThermoError):
    """An MCMC run failed the split-chain R-hat criterion."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class TemperatureUnboundedError(DarkThermoError):
    """The spectrum carries no upper constraint on the temperature.

    ``lower_bound_mk`` is the one-sided 95 % bound from the posterior and
    ``result`` holds the full :class:`~darkthermo.thermometry.FitResult`.
    """

    def __init__(self, message, lower_bound_mk, result=None):
        super().__init__(message)
        self.lower_bound_mk = lower_bound_mk
        self.result = result


class DegenerateFitError(DarkThermoError):
    """Least-squares normal equations are singular."""

    def __init__(self, message, unconstrained=()):
        super().__init__(message)
        self.unconstrained = tuple(unconstrained)


class FitBoundError(DarkThermoError):
    """Best fit sits on a parameter bound (e.g. no visible relaxation)."""


class ParseError(DarkThermoError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
