"""Exception types shared across the package."""


class FrontlabError(Exception):
    """Base class for all frontlab errors."""


class ConfigError(FrontlabError):
    """Invalid, incomplete, or inconsistent experiment configuration."""


class ValidationError(FrontlabError):
    """Input data violates a documented precondition."""


class NumericsError(FrontlabError):
    """A solver failed to converge or produced non-finite output.

    Carries a ``diagnostics`` dict (residual norms, iteration counts, ...)
    so callers can report what went wrong without re-running.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
