import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..utils.exceptions import DomainError

Scalar = Union[float, Fraction]

# p is a plain float; math.inf is the distinguished infinity value
INFINITY = math.inf
INFINITY_LABEL = "inf"


def is_infinite(p: float) -> bool:
    return math.isinf(p) and p > 0


def validate_p(p: Any, minimum: float = 1.0) -> float:
    """Validate an exponent p (p >= minimum or infinity)"""
    try:
        value = float(p)
    except (TypeError, ValueError):
        raise DomainError(f"p must be a number or 'inf', got {p!r}")
    if math.isnan(value) or value < minimum:
        raise DomainError(f"p must satisfy p >= {minimum:g} or p = inf, got {p!r}")
    return value


def parse_p(text: str) -> float:
    """Parse an exponent from text: decimals, fractions like 9/2, or inf"""
    token = text.strip().lower()
    if token in ("inf", "infinity", "∞", "+inf"):
        return INFINITY
    try:
        if "/" in token:
            return validate_p(float(Fraction(token)))
        return validate_p(float(token))
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"invalid p value: {text!r}")


def format_p(p: float) -> Union[float, str]:
    return INFINITY_LABEL if is_infinite(p) else p


def significant(value: float, digits: int = 12) -> float:
    """Round a float to a number of significant digits"""
    if value == 0 or not math.isfinite(value):
        return float(value)
    return float(f"{value:.{digits}g}")


def is_exact(value: Any) -> bool:
    return isinstance(value, Rational)


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration interval, tolerances and endpoint singularity flags"""
    lower: float
    upper: float
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    singular_left: bool = False
    singular_right: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(
                f"quadrature interval must satisfy lower < upper, "
                f"got [{self.lower}, {self.upper}]"
            )
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")


class Shape(Enum):
    CONVEX = "convex"
    CONCAVE = "concave"


@dataclass(frozen=True)
class Classification:
    shape: Shape
    degenerate: bool = False

    @property
    def is_concave(self) -> bool:
        """Straight-line boundaries count as concave too"""
        return self.shape == Shape.CONCAVE or self.degenerate


@dataclass(frozen=True)
class CurvePoint:
    v: float
    x: float
    y: float


@dataclass(eq=False)
class ToricBoundary:
    """Decreasing boundary curve of a toric domain.

    The curve runs from the y-axis at ``v_range[0]`` to the x-axis at
    ``v_range[1]``. ``position`` and ``slope`` are the closed-form
    evaluators; ``params``/``points``/``slopes`` are the dense samples used to
    bracket one-dimensional searches. ``solve_slope`` optionally returns the
    exact parameter where the slope equals a target, which keeps polygons and
    rational curves in exact arithmetic.
    """
    label: str
    v_range: Tuple[Scalar, Scalar]
    position: Callable[[Any], Tuple[Any, Any]]
    slope: Callable[[Any], float]
    params: np.ndarray
    points: np.ndarray
    slopes: np.ndarray
    symmetric: bool = False
    area: float = 0.0
    classification: Optional[Classification] = None
    solve_slope: Optional[Callable[[Any], Any]] = None
    exact: bool = False
    diagonal_param: Optional[Scalar] = None

    @property
    def samples(self) -> List[CurvePoint]:
        return [
            CurvePoint(float(v), float(x), float(y))
            for v, (x, y) in zip(self.params, self.points)
        ]

    @property
    def shape(self) -> Optional[Shape]:
        return self.classification.shape if self.classification else None

    @property
    def x_intercept(self) -> Scalar:
        return self.position(self.v_range[1])[0]

    @property
    def y_intercept(self) -> Scalar:
        return self.position(self.v_range[0])[1]


@dataclass(frozen=True)
class WeightEntry:
    address: str
    weight: Scalar


@dataclass
class WeightExpansion:
    """Weights sorted descending, with the bookkeeping of pruned branches"""
    entries: List[WeightEntry] = field(default_factory=list)
    truncation_bound: float = 0.0
    pruned_area: float = 0.0
    max_pruned_weight: float = 0.0

    @property
    def weights(self) -> List[Scalar]:
        return [entry.weight for entry in self.entries]

    def weight_at(self, address: str) -> Optional[Scalar]:
        for entry in self.entries:
            if entry.address == address:
                return entry.weight
        return None

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class CapacityTable:
    values: List[Scalar]
    domain_label: str

    def __getitem__(self, k: int) -> Scalar:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)


class ScalarKind(Enum):
    EXACT = "exact-rational"
    FLOAT = "float"


@dataclass(frozen=True)
class PackingVector:
    """Vector (c; a_1, ..., a_N) acted on by Cremona moves"""
    head: Scalar
    tail: Tuple[Scalar, ...]
    kind: ScalarKind = ScalarKind.EXACT
    epsilon: float = 0.0
    padded: bool = False

    @classmethod
    def of(cls, head: Any, tail: Sequence[Any],
           epsilon: float = 1e-9) -> 'PackingVector':
        """Build a vector, choosing exact arithmetic when every entry is rational"""
        values = [head, *tail]
        if all(is_exact(value) for value in values):
            return cls(Fraction(head), tuple(Fraction(a) for a in tail),
                       ScalarKind.EXACT, 0.0)
        return cls(float(head), tuple(float(a) for a in tail),
                   ScalarKind.FLOAT, epsilon)

    @property
    def size(self) -> int:
        return len(self.tail)

    def with_entries(self, head: Scalar, tail: Sequence[Scalar],
                     padded: Optional[bool] = None) -> 'PackingVector':
        return PackingVector(head, tuple(tail), self.kind, self.epsilon,
                             self.padded if padded is None else padded)

    def is_ordered(self) -> bool:
        entries = (self.head,) + self.tail
        slack = self.epsilon
        return all(a + slack >= b for a, b in zip(entries, entries[1:]))

    def __str__(self) -> str:
        tail = ", ".join(str(a) for a in self.tail)
        return f"({self.head}; {tail})"


class Outcome(Enum):
    EMBEDDABLE = "embeddable"
    NOT_EMBEDDABLE = "not-embeddable"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        return {
            Outcome.EMBEDDABLE: 0,
            Outcome.NOT_EMBEDDABLE: 1,
            Outcome.INCONCLUSIVE: 3,
        }[self]


@dataclass
class Verdict:
    outcome: Outcome
    trace: List[PackingVector] = field(default_factory=list)
    reason: str = ""

    @property
    def embeddable(self) -> bool:
        return self.outcome == Outcome.EMBEDDABLE

    def to_dict(self) -> Dict[str, Any]:
        return {
            'outcome': self.outcome.value,
            'reason': self.reason,
            'trace': [
                [str(vector.head), [str(a) for a in vector.tail]]
                for vector in self.trace
            ],
        }


@dataclass(frozen=True)
class Ellipsoid:
    a: Scalar
    b: Scalar

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"ellipsoid axes must be positive, got ({self.a}, {self.b})")

    @property
    def volume(self) -> Scalar:
        """Area of the moment triangle"""
        return self.a * self.b / 2


@dataclass(frozen=True)
class PhasePoint:
    x: Tuple[float, float]
    y: Tuple[float, float]

    def as_array(self) -> np.ndarray:
        return np.array([self.x[0], self.x[1], self.y[0], self.y[1]], dtype=float)

    @classmethod
    def from_array(cls, state: Sequence[float]) -> 'PhasePoint':
        return cls((float(state[0]), float(state[1])),
                   (float(state[2]), float(state[3])))


@dataclass
class Trajectory:
    """States of an integrated flow, one row (x1, x2, y1, y2) per time"""
    times: np.ndarray
    states: np.ndarray
    truncated: bool = False
    reason: str = ""

    @property
    def final(self) -> PhasePoint:
        return PhasePoint.from_array(self.states[-1])


class Regime(Enum):
    RIGID = "rigid"
    TORICALLY_RIGID = "torically-rigid"
    NON_RIGID = "non-rigid"


@dataclass(frozen=True)
class ReportRow:
    domain: str
    p: float
    r_inner: float
    r_outer: float
    regime: Regime
    inner_regime: Regime
    c1: float
    c2: float

    def __post_init__(self):
        if self.r_inner > self.r_outer * (1 + 1e-9):
            raise DomainError(
                f"inner radius {self.r_inner} exceeds outer radius {self.r_outer}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'domain': self.domain,
            'p': format_p(self.p),
            'r_inner': self.r_inner,
            'r_outer': self.r_outer,
            'regime': self.regime.value,
            'inner_regime': self.inner_regime.value,
            'c1': self.c1,
            'c2': self.c2,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ReportRow':
        p = data['p']
        return cls(
            domain=data['domain'],
            p=INFINITY if p == INFINITY_LABEL else float(p),
            r_inner=float(data['r_inner']),
            r_outer=float(data['r_outer']),
            regime=Regime(data['regime']),
            inner_regime=Regime(data['inner_regime']),
            c1=float(data['c1']),
            c2=float(data['c2']),
        )
