import heapq
import logging
import math
from typing import List, Optional, Sequence, Tuple

from ..models.domain_models import CapacityTable, Scalar, ToricBoundary
from ..utils.exceptions import DomainError
from .toric_domain_service import ToricDomainService

logger = logging.getLogger(__name__)


def ball_degree(k: int) -> int:
    """The d with d(d+1)/2 <= k < (d+1)(d+2)/2"""
    return (math.isqrt(8 * k + 1) - 1) // 2


class EchCapacityService:
    """ECH capacities of balls, ball unions, ellipsoids and concave domains"""

    def __init__(self, toric_service: Optional[ToricDomainService] = None):
        self.toric_service = toric_service or ToricDomainService()

    def ball_capacity(self, a: Scalar, k: int) -> Scalar:
        if k < 0:
            raise DomainError(f"capacity index must be non-negative, got {k}")
        return ball_degree(k) * a

    def union_capacity(self, weights: Sequence[Scalar], k: int) -> Scalar:
        """c_k of a disjoint union of balls by DP over (ball, budget)"""
        if k < 0:
            raise DomainError(f"capacity index must be non-negative, got {k}")
        if k == 0:
            return 0 * (weights[0] if weights else 0)
        if not weights:
            raise DomainError("union_capacity needs at least one ball when k > 0")

        return self.union_sequence(weights, k)[k]

    def union_sequence(self, weights: Sequence[Scalar], k_max: int) -> List[Scalar]:
        """c_0 .. c_k_max of a ball union in one DP pass"""
        if not weights:
            raise DomainError("union_sequence needs at least one ball")
        # a ball given budget 0 contributes nothing, so k_max balls suffice
        usable = list(weights[:max(k_max, 1)])
        zero = 0 * usable[0]
        best: List[Scalar] = [zero] * (k_max + 1)
        for w in usable:
            ladder = [ball_degree(i) * w for i in range(k_max + 1)]
            best = [
                max(best[budget - i] + ladder[i] for i in range(budget + 1))
                for budget in range(k_max + 1)
            ]
        return best

    def ellipsoid_capacity(self, a: Scalar, b: Scalar, k: int) -> Scalar:
        """(k+1)-th smallest a*m + b*n over non-negative integers"""
        if not (a > 0 and b > 0):
            raise DomainError(f"ellipsoid axes must be positive, got ({a}, {b})")
        if k < 0:
            raise DomainError(f"capacity index must be non-negative, got {k}")
        return self.ellipsoid_sequence(a, b, k)[k]

    def ellipsoid_sequence(self, a: Scalar, b: Scalar, k_max: int) -> List[Scalar]:
        # lattice sweep in increasing order; (m, n) pushed once each
        zero = 0 * a
        heap = [(zero, 0, 0)]
        seen = {(0, 0)}
        values: List[Scalar] = []
        while len(values) <= k_max:
            value, m, n = heapq.heappop(heap)
            values.append(value)
            for step in ((m + 1, n), (m, n + 1)):
                if step not in seen:
                    seen.add(step)
                    heapq.heappush(heap, (a * step[0] + b * step[1], step[0], step[1]))
        return values

    def concave_capacity(self, b: ToricBoundary, k: int,
                         min_weight: Optional[Scalar] = None) -> Tuple[float, float]:
        """Bracket (lower, upper) on c_k of a concave toric domain"""
        expansion = self.toric_service.weight_expansion(b, min_weight)
        lower = self.union_capacity(expansion.weights, k) if k > 0 else 0
        if expansion.pruned_area <= 0 or k == 0:
            return lower, lower
        slack = min(k * expansion.max_pruned_weight,
                    math.sqrt(2.0 * k) * expansion.truncation_bound)
        logger.debug(f"{b.label}: c_{k} bracket width {slack:.3g}")
        return lower, float(lower) + slack

    def capacity_table(self, label: str, k_max: int,
                       weights: Optional[Sequence[Scalar]] = None,
                       ellipsoid: Optional[Tuple[Scalar, Scalar]] = None) -> CapacityTable:
        """c_0 .. c_k_max of a ball union or of an ellipsoid"""
        if ellipsoid is not None:
            values = self.ellipsoid_sequence(ellipsoid[0], ellipsoid[1], k_max)
        elif weights is not None:
            values = self.union_sequence(weights, k_max)
        else:
            raise DomainError("capacity_table needs weights or ellipsoid axes")
        return CapacityTable(values=list(values), domain_label=label)
