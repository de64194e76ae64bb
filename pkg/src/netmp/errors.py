"""Exception types shared across the package."""


class NetmpError(Exception):
    """Base class for package-specific errors."""


class GraphParseError(NetmpError, ValueError):
    """Malformed edge-list input; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConvergenceError(NetmpError, RuntimeError):
    """An iteration that must converge did not; carries the last estimate."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (last estimate {estimate!r})")
        self.estimate = estimate


class UpdateDomainError(NetmpError, ArithmeticError):
    """A message update produced a payload outside its kind constraints."""

    def __init__(self, edge: int, message: str):
        super().__init__(f"directed edge {edge}: {message}")
        self.edge = edge


class SingularUpdateError(UpdateDomainError):
    """A message update hit a (near-)zero denominator."""
