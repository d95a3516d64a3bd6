import logging
import math
from typing import Any, List, Optional, Sequence, Tuple

from ..models.domain_models import (
    Outcome, PackingVector, Scalar, ScalarKind, ToricBoundary, Verdict,
    is_infinite, validate_p,
)
from ..utils.exceptions import DomainError, ShapeError
from .lagrangian_sum_service import FLEXIBLE_THRESHOLD, LagrangianSumService
from .toric_domain_service import ToricDomainService

logger = logging.getLogger(__name__)


class BallPackingService:
    """Cremona reduction of packing vectors and the flexibility criterion"""

    def __init__(self, toric_service: Optional[ToricDomainService] = None,
                 lagrangian_service: Optional[LagrangianSumService] = None,
                 tie_epsilon: float = 1e-9,
                 max_moves: int = 10_000,
                 curve_samples: int = 257):
        self.toric_service = toric_service or ToricDomainService()
        self.lagrangian_service = lagrangian_service or LagrangianSumService()
        self.tie_epsilon = tie_epsilon
        self.max_moves = max_moves
        self.curve_samples = curve_samples

    @staticmethod
    def _sign(value: Scalar, vector: PackingVector) -> int:
        """Sign of a difference; float kind treats |value| <= eps as a tie"""
        eps = vector.epsilon if vector.kind == ScalarKind.FLOAT else 0
        if value > eps:
            return 1
        if value < -eps:
            return -1
        return 0

    @staticmethod
    def _padded(vector: PackingVector) -> PackingVector:
        if vector.size >= 3:
            return vector
        zero = 0 * vector.head
        tail = list(vector.tail) + [zero] * (3 - vector.size)
        return vector.with_entries(vector.head, tail, padded=True)

    def cremona_move(self, vector: PackingVector) -> PackingVector:
        """Order, apply the Cremona transform, order again"""
        vector = self._padded(vector)
        tail = sorted(vector.tail, reverse=True)
        c = vector.head
        a1, a2, a3 = tail[:3]
        moved = [c - a2 - a3, c - a1 - a3, c - a1 - a2] + tail[3:]
        return vector.with_entries(2 * c - a1 - a2 - a3, sorted(moved, reverse=True))

    def is_reduced(self, vector: PackingVector) -> bool:
        vector = self._padded(vector)
        tail = sorted(vector.tail, reverse=True)
        if self._sign(vector.head - tail[0], vector) < 0:
            return False
        if self._sign(min(tail), vector) < 0:
            return False
        return self._sign(vector.head - sum(tail[:3]), vector) >= 0

    def pack_decision(self, c: Any, balls: Sequence[Any],
                      max_moves: Optional[int] = None) -> Verdict:
        """Decide whether the balls embed disjointly into B(c).

        A positive verdict on a truncated weight list certifies only the
        truncated union.
        """
        budget = self.max_moves if max_moves is None else max_moves
        if not c > 0 or any(a < 0 for a in balls):
            raise DomainError("packing needs c > 0 and non-negative ball sizes")
        vector = PackingVector.of(c, sorted(balls, reverse=True), self.tie_epsilon)
        trace: List[PackingVector] = [vector]

        volume = self._sign(vector.head ** 2 - sum(a * a for a in vector.tail), vector)
        if volume < 0:
            return Verdict(Outcome.NOT_EMBEDDABLE, trace, "volume of the balls exceeds B(c)")
        if volume == 0 and vector.kind == ScalarKind.FLOAT:
            return self._inconclusive(trace, "volume test within tolerance")
        if vector.tail and self._sign(vector.head - vector.tail[0], vector) < 0:
            return Verdict(Outcome.NOT_EMBEDDABLE, trace, "largest ball exceeds B(c)")

        for move in range(budget + 1):
            state = self._reduction_state(vector)
            if state == 'reduced':
                logger.debug(f"reduced after {move} Cremona moves: {vector}")
                return Verdict(Outcome.EMBEDDABLE, trace,
                               f"reduced after {move} Cremona move(s)")
            if state == 'tie':
                return self._inconclusive(trace, "reduction test within tolerance")
            if state == 'negative':
                return Verdict(Outcome.NOT_EMBEDDABLE, trace,
                               "negative entry in an ordered image")
            if move == budget:
                break
            vector = self.cremona_move(vector)
            trace.append(vector)
            if self._sign(vector.head - vector.tail[0], vector) < 0:
                return Verdict(Outcome.NOT_EMBEDDABLE, trace,
                               "ordered image has a ball larger than its target")

        return self._inconclusive(trace, f"no reduced vector within {budget} Cremona moves")

    def _reduction_state(self, vector: PackingVector) -> str:
        vector = self._padded(vector)
        entries = (vector.head,) + vector.tail
        if self._sign(min(entries), vector) < 0:
            return 'negative'
        defect = self._sign(vector.head - sum(vector.tail[:3]), vector)
        if defect > 0:
            return 'reduced'
        if defect == 0:
            return 'reduced' if vector.kind == ScalarKind.EXACT else 'tie'
        return 'continue'

    @staticmethod
    def _inconclusive(trace: List[PackingVector], reason: str) -> Verdict:
        logger.warning(f"Inconclusive packing decision: {reason}")
        return Verdict(Outcome.INCONCLUSIVE, trace, reason)

    def symmetric_packing_vector(self, weights: Sequence[Any], n: int) -> PackingVector:
        """(w1 + w2; w1, w2, w2, w3, w3, ...) truncated to n balls"""
        if len(weights) < 2 or n < 2:
            raise DomainError("need at least two weights")
        tail = list(weights[:n])
        return PackingVector.of(tail[0] + tail[1], tail, self.tie_epsilon)

    def flex_check(self, b: ToricBoundary) -> Verdict:
        """Sufficient criterion for embedding a symmetric concave domain into B(c2)"""
        toric = self.toric_service
        if not b.symmetric:
            raise ShapeError(f"{b.label}: flexibility criterion needs a symmetric domain")
        classification = toric.classify(b)
        if not classification.is_concave:
            raise ShapeError(f"{b.label}: flexibility criterion needs a concave domain")
        if classification.degenerate:
            return Verdict(Outcome.EMBEDDABLE, reason="domain is a ball")

        _, c2 = toric.c1_c2_symmetric(b)
        ball_volume = float(c2) ** 2 / 2.0
        volume_ok = b.area <= ball_volume * (1.0 + 1e-12)

        tau_1 = float(toric.subdomain_tau(b, "1"))
        tau_11 = float(toric.subdomain_tau(b, "11"))
        tau_111 = float(toric.subdomain_tau(b, "111"))
        tail_ok = tau_1 >= tau_11 + tau_111 - 1e-9 * float(c2)

        summary = (f"c2={float(c2):.10g}, vol={b.area:.10g} vs {ball_volume:.10g}, "
                   f"tau1={tau_1:.6g} vs tau11+tau111={tau_11 + tau_111:.6g}")
        if volume_ok and tail_ok:
            return Verdict(Outcome.EMBEDDABLE, reason=f"embeds into B(c2): {summary}")
        failed = [name for name, ok in (("volume", volume_ok), ("tau", tail_ok)) if not ok]
        return self._inconclusive([], f"criterion silent ({', '.join(failed)} hypothesis fails): {summary}")

    def lagrangian_wd(self, p: float) -> Tuple[float, float]:
        """(w2(p), d(p)) from the x-intercepts of slopes -1, -1/2 and -1/4"""
        p = validate_p(p)
        if is_infinite(p):
            x1 = 4.0
            x2 = 6.0 * math.sin(math.pi / 3.0)
            x4 = 10.0 * math.sin(math.pi / 5.0)
            return x2 - x1, x4 - x2
        if p < FLEXIBLE_THRESHOLD:
            raise DomainError(f"w2 and d are defined for p >= 9/2, got {p}")
        b = self.lagrangian_service.boundary_curve(p, self.curve_samples)
        x1, x2, x4 = (float(self.toric_service.tangent_intercept(b, n)) for n in (1, 2, 4))
        return x2 - x1, x4 - x2
