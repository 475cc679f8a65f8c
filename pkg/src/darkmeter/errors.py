"""Exception and warning types raised across darkmeter."""

from __future__ import annotations


class DarkmeterError(Exception):
    """Base class for all darkmeter errors."""


class StructureError(DarkmeterError, ValueError):
    """Count series does not follow the shutter block structure."""

    def __init__(self, message: str, index: int | None = None, t_start: int | None = None):
        super().__init__(message)
        self.index = index
        self.t_start = t_start


class EmptyResultError(DarkmeterError, ValueError):
    """No usable samples remain after applying the protocol."""


class InsufficientDataError(DarkmeterError, ValueError):
    pass


class DegeneratePriorError(DarkmeterError, ValueError):
    pass


class ConvergenceError(DarkmeterError, RuntimeError):
    """Evidence was requested from an MCMC run that failed its diagnostics."""


class IdentifiabilityError(DarkmeterError, ValueError):
    def __init__(self, message: str, columns: list[str]):
        super().__init__(message)
        self.columns = columns


class QuadratureError(DarkmeterError, ArithmeticError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularityError(DarkmeterError, ZeroDivisionError):
    pass


class DomainError(DarkmeterError, ValueError):
    pass


class ConfigError(DarkmeterError, ValueError):
    """Invalid configuration document; ``field`` names the offending path."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field is not None:
            where.append(f"field '{self.field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        return prefix + super().__str__()


class ExtrapolationWarning(UserWarning):
    """Density requested outside the range covered by the draws."""


class EmptyPositivePartWarning(UserWarning):
    pass


class FewDrawsWarning(UserWarning):
    pass


class FormatError(DarkmeterError, ValueError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line
