import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..models.domain_models import (
    Ellipsoid, Outcome, Regime, ToricBoundary, Verdict, is_exact, is_infinite,
    validate_p,
)
from ..utils.exceptions import DomainError, InternalInconsistencyError
from ..utils.numerics import beta
from .ech_capacity_service import EchCapacityService
from .toric_domain_service import ToricDomainService

logger = logging.getLogger(__name__)

B1_WEIGHTS = (
    Fraction(1, 2),
    Fraction(1, 6), Fraction(1, 6),
    Fraction(1, 12), Fraction(1, 12),
    Fraction(1, 20), Fraction(1, 20),
    Fraction(1, 30), Fraction(1, 30), Fraction(1, 30), Fraction(1, 30),
)


class SymplecticSumService:
    """Moment region, capacities and radii of the symplectic lp-sum B_p"""

    def __init__(self, toric_service: Optional[ToricDomainService] = None,
                 ech_service: Optional[EchCapacityService] = None,
                 curve_samples: int = 4096,
                 k_max: int = 50):
        self.toric_service = toric_service or ToricDomainService()
        self.ech_service = ech_service or EchCapacityService(self.toric_service)
        self.curve_samples = curve_samples
        self.k_max = k_max
        self._union_cache: Dict[Tuple[int, int], List[Fraction]] = {}

    def bp_boundary(self, p: float, n_samples: Optional[int] = None) -> ToricBoundary:
        """Curve x^(p/2) + y^(p/2) = 1, or the unit square at p = inf"""
        p = validate_p(p, minimum=0.0)
        if p == 0.0:
            raise DomainError("p must be positive")
        n = self.curve_samples if n_samples is None else n_samples
        if n < 3:
            raise DomainError(f"n_samples must be at least 3, got {n}")
        if is_infinite(p):
            return self.toric_service.polygon_boundary([(0, 1), (1, 1), (1, 0)],
                                                       label="B_inf")

        exact = p == 1.0
        power = 2.0 / p
        bend = power - 1.0

        if exact:
            def position(s):
                return s * s, (1 - s) * (1 - s)
        else:
            def position(s):
                s = float(s)
                return s ** power, (1.0 - s) ** power

        def slope(s):
            s = float(s)
            if bend == 0:
                return -1.0
            if s <= 0.0:
                return -math.inf if bend > 0 else 0.0
            if s >= 1.0:
                return 0.0 if bend > 0 else -math.inf
            return -((1.0 - s) / s) ** bend

        solve_slope = None
        if bend > 0:
            def solve_slope(target):
                steepness = -target
                if exact:
                    return 1 / (1 + Fraction(steepness))
                if steepness == math.inf:
                    return 0.0
                return 1.0 / (1.0 + steepness ** (1.0 / bend))

        params = np.linspace(0.0, 1.0, n)
        points = np.array([[float(c) for c in position(s)] for s in params])
        slopes = np.array([slope(s) for s in params])
        v_range = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
        return ToricBoundary(
            label=f"B_{p:g}", v_range=v_range, position=position, slope=slope,
            params=params, points=points, slopes=slopes, symmetric=True,
            area=self._region_area(p), solve_slope=solve_slope, exact=exact,
            diagonal_param=Fraction(1, 2) if exact else 0.5,
        )

    def bp_inner_radius(self, p: float) -> float:
        p = validate_p(p)
        if is_infinite(p):
            return 1.0
        return min(1.0, 2.0 ** (1.0 - 2.0 / p))

    def bp_outer_radius(self, p: float) -> float:
        p = validate_p(p)
        if is_infinite(p):
            return 2.0
        if p >= 2.0:
            return 2.0 ** (1.0 - 2.0 / p)
        return (1.0 + 2.0 ** (p / (p - 2.0))) ** (1.0 - 2.0 / p)

    def bp_volume(self, p: float) -> float:
        return self._region_area(validate_p(p))

    @staticmethod
    def _region_area(p: float) -> float:
        if is_infinite(p):
            return 1.0
        return beta(2.0 / p, 2.0 / p) / p

    def bp_capacities(self, p: float) -> Tuple[float, float]:
        """Closed-form (c1, c2) of B_p"""
        return self.bp_inner_radius(p), self.bp_outer_radius(p)

    def bp_tangent_intercept(self, p: float, n: int) -> float:
        """Closed-form x-intercept of the slope -1/n supporting line, 1 <= p <= 2"""
        p = validate_p(p)
        if is_infinite(p) or p > 2.0:
            raise DomainError("supporting-line intercepts need 1 <= p <= 2")
        if p == 2.0:
            return 1.0
        q = n ** (p / (2.0 - p))
        return (q / (1.0 + q)) ** ((2.0 - p) / p)

    def bp_flex_inequalities(self, p: float) -> Dict[str, float]:
        """Both sides of the volume and tail inequalities for 1 <= p < 2"""
        p = validate_p(p)
        if is_infinite(p) or p >= 2.0:
            raise DomainError("flexibility inequalities concern 1 <= p < 2")
        x1, x2, x4 = (self.bp_tangent_intercept(p, n) for n in (1, 2, 4))
        result = {
            'volume': self.bp_volume(p),
            'half_c2_squared': 0.5 * x2 ** 2,
            'tail_gap': x4 - x2,
            'w2': x2 - x1,
        }
        result['holds'] = float(result['volume'] <= result['half_c2_squared']
                                and result['tail_gap'] <= result['w2'])
        return result

    def b1_weights(self, count: int) -> List[Fraction]:
        """Leading weights of the B_1 moment region, exact"""
        if count < 0:
            raise DomainError(f"count must be non-negative, got {count}")
        if count <= len(B1_WEIGHTS):
            return list(B1_WEIGHTS[:count])
        boundary = self.bp_boundary(1.0, n_samples=65)
        min_weight = Fraction(1, 40)
        while True:
            expansion = self.toric_service.weight_expansion(boundary, min_weight)
            if len(expansion) >= count:
                return [Fraction(w) for w in expansion.weights[:count]]
            min_weight /= 2

    def b1_into_ellipsoid(self, e: Ellipsoid, k_max: Optional[int] = None,
                          n_weights: int = 11) -> Verdict:
        """B_1 into E(a, b) iff min(a, b) >= 1/2 and max(a, b) >= 2/3"""
        k_max = self.k_max if k_max is None else k_max
        low, high = min(e.a, e.b), max(e.a, e.b)
        embeddable = low >= Fraction(1, 2) and high >= Fraction(2, 3)
        if not embeddable:
            return Verdict(Outcome.NOT_EMBEDDABLE,
                           reason=f"E({e.a}, {e.b}) misses min >= 1/2 or max >= 2/3")

        exact = is_exact(e.a) and is_exact(e.b)
        slack = 0 if exact else 1e-12 * float(high)
        ellipsoid = self.ech_service.ellipsoid_sequence(e.a, e.b, k_max)
        union = self._b1_union_sequence(n_weights, k_max)
        for k in range(1, k_max + 1):
            if union[k] > ellipsoid[k] + slack:
                raise InternalInconsistencyError(
                    f"c_{k} of the B_1 balls ({union[k]}) exceeds c_{k}(E) ({ellipsoid[k]})"
                )
        return Verdict(Outcome.EMBEDDABLE,
                       reason=f"closed form holds; capacities dominate up to k={k_max}")

    def _b1_union_sequence(self, n_weights: int, k_max: int) -> List[Fraction]:
        key = (n_weights, k_max)
        if key not in self._union_cache:
            weights = self.b1_weights(n_weights)
            self._union_cache[key] = self.ech_service.union_sequence(weights, k_max)
        return self._union_cache[key]

    def regimes(self, p: float) -> Tuple[Regime, Regime]:
        """Rigidity of the (inner, outer) embedding problems of B_p"""
        p = validate_p(p)
        outer = Regime.NON_RIGID if p < 2.0 else Regime.RIGID
        return Regime.RIGID, outer
