from typing import Optional


class ToricRadiiError(Exception):
    """Base class for every error raised by toric-radii"""


class DomainError(ToricRadiiError, ValueError):
    """Argument outside the domain of an operation"""


class ValueNotAttainedError(DomainError):
    """Target value lies outside the image of a monotone function"""


class RootNotBracketedError(ToricRadiiError, ValueError):
    """Endpoints of a bracket do not straddle a sign change"""

    def __init__(self, lo: float, hi: float, f_lo: float, f_hi: float):
        self.lo = lo
        self.hi = hi
        self.f_lo = f_lo
        self.f_hi = f_hi
        super().__init__(
            f"root not bracketed: f({lo!r})={f_lo!r}, f({hi!r})={f_hi!r}"
        )


class QuadratureError(ToricRadiiError, ArithmeticError):
    """Quadrature did not reach its tolerance within the node budget"""

    def __init__(self, message: str, estimate: float, error_bound: float,
                 evaluations: Optional[int] = None):
        self.estimate = estimate
        self.error_bound = error_bound
        self.evaluations = evaluations
        super().__init__(
            f"{message} (estimate={estimate!r}, error_bound={error_bound!r})"
        )


class ShapeError(ToricRadiiError, ValueError):
    """Boundary has the wrong convexity or symmetry for the operation"""


class InternalInconsistencyError(ToricRadiiError, RuntimeError):
    """Two independent evaluations of the same fact disagree"""
