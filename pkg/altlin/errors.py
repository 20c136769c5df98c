"""
Exception hierarchy shared by every altlin module
"""

from typing import List, Optional, Tuple


class AltlinError(Exception):
    """Base class for all altlin errors"""


class ShapeMismatchError(AltlinError, ValueError):
    """Operands have incompatible shapes or dimensions"""


class NumericFailureError(AltlinError, ArithmeticError):
    """A numerical kernel failed (SVD/CG non-convergence, non-finite data)"""


class SolverMisuseError(AltlinError, ValueError):
    """A solver or model function was used outside its preconditions"""


class DivergenceError(AltlinError):
    """
    Raised when a solver produces a non-finite or exploding objective.

    The partial trace up to (and including) the offending iteration is
    attached as ``trace`` so callers can still persist it.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(AltlinError):
    """Experiment configuration is invalid; ``problems`` lists every issue"""

    def __init__(self, problems: List[Tuple[str, str]], path: Optional[str] = None):
        self.problems = list(problems)
        self.path = path
        where = f" in {path}" if path else ""
        lines = [f"{loc}: {msg}" for loc, msg in self.problems]
        super().__init__(f"{len(self.problems)} configuration problem(s){where}:\n  " + "\n  ".join(lines))
