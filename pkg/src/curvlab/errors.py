"""Exception hierarchy shared by every curvlab module."""


class CurvlabError(Exception):
    pass


class DimensionError(CurvlabError, ValueError):
    pass


class MetricError(CurvlabError, ValueError):
    pass


class ValidationError(CurvlabError, ValueError):
    pass


class FrameError(CurvlabError, ValueError):
    pass


class DomainError(CurvlabError, ValueError):
    pass


class RankError(CurvlabError, ValueError):
    pass


class PreconditionError(CurvlabError):
    pass


class ConfigurationError(CurvlabError):
    pass


class SolverError(CurvlabError):
    """Iterative solver failed; ``diagnostics`` carries the last state."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InternalConsistencyError(CurvlabError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ExprSyntaxError(CurvlabError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass
