"""Exception types shared across the package."""


class ConstrualIrlError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(ConstrualIrlError, ValueError):
    """An input violates a documented precondition or type invariant."""


class GridParseError(ConstrualIrlError, ValueError):
    """A grid file is malformed. Carries 1-based line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class CompileError(ConstrualIrlError, ValueError):
    """A grid cannot be compiled to an MDP (e.g. a goal is sealed off even
    under full awareness)."""


class ConvergenceError(ConstrualIrlError, RuntimeError):
    """A fixed-point solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} sweeps)")


class IngestError(ConstrualIrlError, ValueError):
    """A human-judgment summary file is malformed. Carries the 1-based data
    row number when known."""

    def __init__(self, message, row=None):
        self.row = row
        where = f" (row {row})" if row is not None else ""
        super().__init__(message + where)


class ConfigError(ConstrualIrlError, ValueError):
    """An experiment configuration is missing, malformed, or inconsistent."""


class UndefinedCorrelationError(ConstrualIrlError, ValueError):
    """Pearson correlation is undefined (zero variance in an input vector)."""
