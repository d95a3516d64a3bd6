import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from ..models.domain_models import (
    Classification, Scalar, Shape, ToricBoundary, WeightEntry, WeightExpansion,
    is_exact,
)
from ..utils.exceptions import DomainError, ShapeError
from ..utils.numerics import DEFAULT_ROOT_TOL, find_root_monotone

logger = logging.getLogger(__name__)

# (1,1) row-sum shears applied to the two remainders of a carved region
SHEAR_OFF_Y_AXIS = (1, 1, 0, 1)
SHEAR_OFF_X_AXIS = (1, 0, 1, 1)
IDENTITY = (1, 0, 0, 1)


@dataclass(frozen=True)
class _Region:
    """Piece of the original curve seen through an integer affine map"""
    address: str
    matrix: Tuple[int, int, int, int]
    shift: Tuple[Scalar, Scalar]
    v0: Scalar
    v1: Scalar
    start: Tuple[Scalar, Scalar]
    end: Tuple[Scalar, Scalar]

    def apply(self, point: Tuple[Scalar, Scalar]) -> Tuple[Scalar, Scalar]:
        m00, m01, m10, m11 = self.matrix
        x, y = point
        return m00 * x + m01 * y + self.shift[0], m10 * x + m11 * y + self.shift[1]

    @property
    def direction(self) -> Tuple[int, int]:
        """Coefficients (alpha, beta) of X + Y = alpha x + beta y + const"""
        m00, m01, m10, m11 = self.matrix
        return m00 + m10, m01 + m11

    @property
    def empty(self) -> bool:
        return not self.v0 < self.v1


def _compose(shear: Tuple[int, int, int, int],
             matrix: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
    s00, s01, s10, s11 = shear
    m00, m01, m10, m11 = matrix
    return (s00 * m00 + s01 * m10, s00 * m01 + s01 * m11,
            s10 * m00 + s11 * m10, s10 * m01 + s11 * m11)


class ToricDomainService:
    """Convexity, tau, supporting lines and weight expansions of toric domains"""

    def __init__(self, root_tol: float = DEFAULT_ROOT_TOL,
                 min_weight_ratio: float = 1e-4,
                 polygon_subdivisions: int = 8,
                 max_regions: int = 200_000):
        self.root_tol = root_tol
        self.min_weight_ratio = min_weight_ratio
        self.polygon_subdivisions = polygon_subdivisions
        self.max_regions = max_regions

    # ------------------------------------------------------------------
    # construction of polygonal domains
    # ------------------------------------------------------------------
    def polygon_boundary(self, vertices: Sequence[Tuple[Any, Any]],
                         label: str = "polygon") -> ToricBoundary:
        """Polygonal boundary from (0, a) on the y-axis to (a', 0) on the x-axis"""
        points = [(x, y) for x, y in vertices]
        if len(points) < 2:
            raise DomainError("a polygonal boundary needs at least two vertices")
        if points[0][0] != 0 or points[-1][1] != 0:
            raise DomainError("polygon must start on the y-axis and end on the x-axis")
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if x1 < x0 or y1 > y0 or (x1 == x0 and y1 == y0):
                raise DomainError("polygon vertices must move right and down")

        exact = all(is_exact(x) and is_exact(y) for x, y in points)
        if exact:
            points = [(Fraction(x), Fraction(y)) for x, y in points]
        edges = len(points) - 1
        edge_slopes: List[Any] = []
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if x1 == x0:
                edge_slopes.append(-math.inf)
            else:
                edge_slopes.append((y1 - y0) / (x1 - x0))

        def position(v):
            i = min(max(int(math.floor(v)), 0), edges - 1)
            fraction = v - i
            (x0, y0), (x1, y1) = points[i], points[i + 1]
            return x0 + (x1 - x0) * fraction, y0 + (y1 - y0) * fraction

        def slope(v):
            i = min(max(int(math.floor(v)), 0), edges - 1)
            return float(edge_slopes[i])

        def solve_slope(target):
            # supporting vertex of alpha x + beta y for target = -alpha / beta
            for i, edge_slope in enumerate(edge_slopes):
                if edge_slope != -math.inf and edge_slope >= target:
                    return i
            return edges

        steps = self.polygon_subdivisions
        params = np.linspace(0.0, float(edges), edges * steps + 1)
        sample_points = np.array([[float(c) for c in position(Fraction(i, steps) if exact else i / steps)]
                                  for i in range(edges * steps + 1)])
        slopes = np.array([slope(v) for v in params])

        symmetric = [(y, x) for x, y in reversed(points)] == points
        diagonal = None
        if symmetric:
            for i, ((x0, y0), (x1, y1)) in enumerate(zip(points, points[1:])):
                if x0 <= y0 and x1 >= y1:
                    gap = (x1 - x0) - (y1 - y0)
                    diagonal = i + ((y0 - x0) / gap if gap != 0 else 0)
                    break

        area = 0.5 * abs(sum(float(x0) * float(y1) - float(x1) * float(y0)
                             for (x0, y0), (x1, y1) in zip(points, points[1:])))
        return ToricBoundary(
            label=label, v_range=(0, edges), position=position, slope=slope,
            params=params, points=sample_points, slopes=slopes,
            symmetric=symmetric, area=area, solve_slope=solve_slope,
            exact=exact, diagonal_param=diagonal,
        )

    def triangle_boundary(self, c: Any) -> ToricBoundary:
        """Moment triangle of the ball B(c)"""
        return self.polygon_boundary([(0, c), (c, 0)], label=f"B({c})")

    def ellipsoid_boundary(self, a: Any, b: Any) -> ToricBoundary:
        """Moment triangle of the ellipsoid E(a, b)"""
        return self.polygon_boundary([(0, b), (a, 0)], label=f"E({a},{b})")

    # ------------------------------------------------------------------
    # classification
    # ------------------------------------------------------------------
    def classify(self, b: ToricBoundary) -> Classification:
        """Convex or concave from the monotonicity of the sampled slopes"""
        if b.classification is not None:
            return b.classification
        slopes = np.clip(np.asarray(b.slopes, dtype=float), -1e300, 1e300)
        finite = slopes[np.abs(slopes) < 1e300]
        scale = max(1.0, float(np.max(np.abs(finite)))) if finite.size else 1.0
        steps = np.diff(slopes)
        tol = 1e-9 * scale
        rising = bool(np.all(steps >= -tol))
        falling = bool(np.all(steps <= tol))
        if rising and falling:
            result = Classification(Shape.CONVEX, degenerate=True)
        elif rising:
            result = Classification(Shape.CONCAVE)
        elif falling:
            result = Classification(Shape.CONVEX)
        else:
            raise ShapeError(f"{b.label}: not a convex/concave toric domain")
        b.classification = result
        logger.debug(f"{b.label} classified as {result.shape.value}"
                     f"{' (degenerate)' if result.degenerate else ''}")
        return result

    def _require_concave(self, b: ToricBoundary) -> None:
        if not self.classify(b).is_concave:
            raise ShapeError(f"{b.label}: operation needs a concave toric domain")

    # ------------------------------------------------------------------
    # one-dimensional searches along the curve
    # ------------------------------------------------------------------
    def _slope_param(self, b: ToricBoundary, target: Any, v0: Any, v1: Any) -> Any:
        """Parameter in [v0, v1] minimising alpha x + beta y with target = -alpha/beta"""
        if b.solve_slope is not None:
            v = b.solve_slope(target)
            return min(max(v, v0), v1)
        target = float(target)
        if b.slope(v0) >= target:
            return v0
        if b.slope(v1) <= target:
            return v1

        params = b.params
        window = (params > v0) & (params < v1)
        inner = params[window]
        above = np.nonzero(b.slopes[window] >= target)[0]
        lo, hi = v0, v1
        if above.size:
            j = above[0]
            hi = inner[j]
            if j > 0:
                lo = inner[j - 1]
        elif inner.size:
            lo = inner[-1]
        return find_root_monotone(lambda v: b.slope(v) - target, lo, hi, tol=self.root_tol)

    def slope_point(self, b: ToricBoundary, target: float) -> Any:
        """Parameter where the boundary has the given slope"""
        self._require_concave(b)
        return self._slope_param(b, target, *b.v_range)

    def diagonal_param(self, b: ToricBoundary) -> Any:
        if b.diagonal_param is not None:
            return b.diagonal_param
        lo, hi = b.v_range

        def gap(v):
            x, y = b.position(v)
            return float(x) - float(y)

        return find_root_monotone(gap, lo, hi, tol=self.root_tol)

    # ------------------------------------------------------------------
    # tau, supporting lines and the weight recursion
    # ------------------------------------------------------------------
    def _root_region(self, b: ToricBoundary) -> _Region:
        lo, hi = b.v_range
        zero = Fraction(0) if b.exact else 0.0
        return _Region("", IDENTITY, (zero, zero), lo, hi, b.position(lo), b.position(hi))

    def _carve(self, b: ToricBoundary, region: _Region) -> Tuple[Any, Scalar, Tuple]:
        """Touching parameter, tau and touching point of a region"""
        alpha, beta = region.direction
        target = Fraction(-alpha, beta) if b.exact else -alpha / beta
        v_star = self._slope_param(b, target, region.v0, region.v1)
        if v_star == region.v0:
            point = region.start
        elif v_star == region.v1:
            point = region.end
        else:
            point = b.position(v_star)
        x, y = region.apply(point)
        return v_star, x + y, point

    def _children(self, region: _Region, v_star: Any, tau: Scalar,
                  point: Tuple) -> List[_Region]:
        s0, s1 = region.shift
        children = []
        if v_star < region.v1:
            children.append(_Region(
                region.address + "1", _compose(SHEAR_OFF_Y_AXIS, region.matrix),
                (s0 - tau + s1, s1), v_star, region.v1, point, region.end,
            ))
        if v_star > region.v0:
            children.append(_Region(
                region.address + "2", _compose(SHEAR_OFF_X_AXIS, region.matrix),
                (s0, s0 + s1 - tau), region.v0, v_star, region.start, point,
            ))
        return children

    def _region_area(self, b: ToricBoundary, region: _Region) -> float:
        """Inscribed-chord area of a region; never below the true area"""
        params = b.params
        window = (params > float(region.v0)) & (params < float(region.v1))
        m00, m01, m10, m11 = region.matrix
        s0, s1 = float(region.shift[0]), float(region.shift[1])
        curve = np.vstack([
            [[float(c) for c in region.start]],
            b.points[window],
            [[float(c) for c in region.end]],
        ])
        xs = m00 * curve[:, 0] + m01 * curve[:, 1] + s0
        ys = m10 * curve[:, 0] + m11 * curve[:, 1] + s1
        xs = np.concatenate([[0.0], xs])
        ys = np.concatenate([[0.0], ys])
        return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))

    def tau(self, b: ToricBoundary) -> Scalar:
        """Largest c with the triangle T(c) inside the region"""
        self._require_concave(b)
        return self._carve(b, self._root_region(b))[1]

    def tangent_intercept(self, b: ToricBoundary, n: int) -> Scalar:
        """x-intercept of the supporting line of slope -1/n"""
        self._require_concave(b)
        if n < 1:
            raise DomainError(f"n must be a positive integer, got {n}")
        target = Fraction(-1, n) if b.exact else -1.0 / n
        v = self._slope_param(b, target, *b.v_range)
        x, y = b.position(v)
        return x + n * y

    def subdomain_tau(self, b: ToricBoundary, address: str) -> Scalar:
        """tau of the node at a tree address, 0 for an empty node"""
        self._require_concave(b)
        region = self._root_region(b)
        for step in address:
            if step not in "12":
                raise DomainError(f"addresses are strings over {{1,2}}, got {address!r}")
            v_star, tau, point = self._carve(b, region)
            matches = [child for child in self._children(region, v_star, tau, point)
                       if child.address.endswith(step)]
            if not matches:
                return Fraction(0) if b.exact else 0.0
            region = matches[0]
        if region.empty:
            return Fraction(0) if b.exact else 0.0
        return self._carve(b, region)[1]

    def weight_expansion(self, b: ToricBoundary,
                         min_weight: Optional[Scalar] = None) -> WeightExpansion:
        """Recursive ball decomposition, pruned below min_weight"""
        self._require_concave(b)
        root = self._root_region(b)
        if min_weight is None:
            min_weight = self.min_weight_ratio * self._carve(b, root)[1]
        if not min_weight > 0:
            raise DomainError("min_weight must be positive")

        entries: List[WeightEntry] = []
        pruned_area = 0.0
        max_pruned = 0.0
        stack = [root]
        visited = 0
        while stack:
            region = stack.pop()
            visited += 1
            if visited > self.max_regions:
                logger.warning(f"{b.label}: weight expansion stopped after "
                               f"{self.max_regions} regions")
                for leftover in [region, *stack]:
                    pruned_area += self._region_area(b, leftover)
                    max_pruned = math.inf
                break
            v_star, tau, point = self._carve(b, region)
            if tau < min_weight:
                pruned_area += self._region_area(b, region)
                max_pruned = max(max_pruned, float(tau))
                continue
            entries.append(WeightEntry(region.address, tau))
            stack.extend(self._children(region, v_star, tau, point))

        entries.sort(key=lambda entry: (-entry.weight, len(entry.address), entry.address))
        logger.info(f"{b.label}: {len(entries)} weights above {float(min_weight):.3g}, "
                    f"pruned area {pruned_area:.3g}")
        return WeightExpansion(
            entries=entries,
            truncation_bound=math.sqrt(2.0 * pruned_area),
            pruned_area=pruned_area,
            max_pruned_weight=max_pruned,
        )

    def c1_c2_symmetric(self, b: ToricBoundary) -> Tuple[Scalar, Scalar]:
        """First two ECH capacities of a symmetric convex or concave domain"""
        if not b.symmetric:
            raise ShapeError(f"{b.label}: c1/c2 formulas need a symmetric domain")
        classification = self.classify(b)
        a = b.x_intercept
        diagonal = b.position(self.diagonal_param(b))[0]
        if not classification.is_concave:
            return a, 2 * diagonal
        end_slope = b.slope(b.v_range[1])
        if end_slope <= -0.5:
            return 2 * diagonal, a
        return 2 * diagonal, self.tangent_intercept(b, 2)
