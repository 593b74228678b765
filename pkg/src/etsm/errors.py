"""Exception hierarchy shared by every module of the package."""


class EtsmError(Exception):
    """Base class for all errors raised by :mod:`etsm`."""


class ValidationError(EtsmError, ValueError):
    """Input data violates a structural invariant."""


class ConfigurationError(EtsmError, ValueError):
    """A parameter or option is outside its allowed range or inconsistent."""


class ParseError(EtsmError, ValueError):
    """A file cell could not be parsed. Carries the offending location."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DomainError(EtsmError, ValueError):
    """A numeric argument lies outside the domain of a function."""


class UnsupportedMetricError(ConfigurationError):
    """A parameter's metric kind cannot be used by the requested operation."""


class DichotomyViolationError(EtsmError, RuntimeError):
    """Iteration did not end in a clean split into exactly two groups."""

    def __init__(self, message, n_components=None, histogram=None, t_used=None,
                 max_delta=None, members=None):
        super().__init__(message)
        self.n_components = n_components
        self.histogram = histogram
        self.t_used = t_used
        self.max_delta = max_delta
        self.members = members
