"""Exception types shared across the package.

Three failure categories are distinguished so callers (and the CLI exit
codes) can react appropriately: bad arguments, bad configuration documents,
and numerical breakdown inside an otherwise valid computation.
"""


class InputError(ValueError):
    """An argument violates an operation's precondition or domain."""


class ConfigError(ValueError):
    """A configuration document is malformed or fails validation.

    ``path`` locates the offending field (e.g. ``"xi[1]"``), or the
    parse position for syntax errors.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, factorization failure).

    ``diagnostics`` is a free-form dict with whatever the failing routine
    knew (matrix size, condition estimates, jitter level, ...).
    """

    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        if self.diagnostics:
            detail = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)
