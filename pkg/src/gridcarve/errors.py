"""Exception hierarchy. Each family carries the CLI exit code it maps to."""


class GridcarveError(Exception):
    exit_code = 1


class ConfigError(GridcarveError):
    exit_code = 2


class ExprError(GridcarveError):
    """Base for expression parse/evaluation failures."""

    exit_code = 2


class ExprSyntaxError(ExprError):
    def __init__(self, message, source="", position=None):
        self.source = source
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError):
    """Division by zero, sqrt of a negative or any other non-finite evaluation."""

    exit_code = 3


class GeometryError(GridcarveError):
    exit_code = 3


class MeshError(GridcarveError):
    exit_code = 4


class EmptyInteriorError(MeshError):
    pass


class DisconnectedInteriorError(MeshError):
    pass


class SolverError(GridcarveError):
    exit_code = 5


class NonConvergenceError(SolverError):
    def __init__(self, message, field=None, report=None):
        super().__init__(message)
        self.field = field
        self.report = report


class SingularMatrixError(SolverError):
    pass


class DegenerateCoefficientError(SolverError):
    pass


class TimestepError(GridcarveError):
    exit_code = 6
