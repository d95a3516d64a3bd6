import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..models.domain_models import (
    INFINITY, Regime, ToricBoundary, is_infinite, validate_p,
)
from ..utils.exceptions import DomainError, ValueNotAttainedError
from ..utils.numerics import (
    DEFAULT_ABS_TOL, DEFAULT_NODE_BUDGET, DEFAULT_REL_TOL, DEFAULT_ROOT_TOL,
    find_root_monotone, integrate_batch, ln_gamma, beta,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
FLEXIBLE_THRESHOLD = 4.5
# below this u - 1 the ratio under the root equals its limit p/2 to double precision
_LOG_DELTA_FLOOR = math.log(1e-14)


def turning_radii(p: float, v) -> Tuple[np.ndarray, np.ndarray]:
    """Roots r- <= r+ of r^2 (1 - r^p)^(2/p) = v^2, vectorised over v"""
    v = np.asarray(v, dtype=float)
    with np.errstate(divide='ignore'):
        log_v = np.log(v)
    vp = np.exp(p * log_v)
    disc = np.sqrt(np.maximum(0.25 - vp, 0.0))
    upper = np.exp(np.log(0.5 + disc) / p)
    # 1/2 - disc rewritten as v^p / (1/2 + disc) to keep small roots accurate
    lower = np.where(v > 0, np.exp(log_v - np.log(0.5 + disc) / p), 0.0)
    return np.minimum(lower, upper), upper


class LagrangianSumService:
    """Action integral, toric boundary and radii of the Lagrangian lp-sum"""

    def __init__(self, abs_tol: float = DEFAULT_ABS_TOL,
                 rel_tol: float = DEFAULT_REL_TOL,
                 node_budget: int = DEFAULT_NODE_BUDGET,
                 root_tol: float = DEFAULT_ROOT_TOL,
                 curve_samples: int = 4096):
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.node_budget = node_budget
        self.root_tol = root_tol
        self.curve_samples = curve_samples

    def area_p(self, p: float) -> float:
        """Area of the unit lp disc, 4 Γ(1+1/p)^2 / Γ(1+2/p)"""
        p = validate_p(p)
        if is_infinite(p):
            return 4.0
        return 4.0 * math.exp(2.0 * ln_gamma(1.0 + 1.0 / p) - ln_gamma(1.0 + 2.0 / p))

    def volume(self, p: float) -> float:
        """4-volume of the lp-sum, equal to the area of its moment region"""
        p = validate_p(p)
        if is_infinite(p):
            return math.pi ** 2
        return math.pi ** 2 / p * beta(2.0 / p, 2.0 / p)

    def v_max(self, p: float) -> float:
        p = validate_p(p)
        return 1.0 if is_infinite(p) else 4.0 ** (-1.0 / p)

    def _check_v(self, p: float, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        top = self.v_max(p)
        slack = 4.0 * np.finfo(float).eps * top
        if np.any(v < -slack) or np.any(v > top + slack):
            raise DomainError(f"v must lie in [0, {top!r}] for p={p}")
        return np.clip(v, 0.0, top)

    def _require_finite(self, p: float) -> float:
        p = validate_p(p)
        if is_infinite(p):
            raise DomainError("p = inf has closed forms; the action integral needs finite p")
        return p

    def g_many(self, p: float, v) -> np.ndarray:
        """Action integral g_p at every v of an array"""
        p = self._require_finite(p)
        v = self._check_v(p, v)
        flat = v.ravel()
        lower, upper = turning_radii(p, flat)

        def integrand(r, rows):
            vv = flat[rows, None]
            rp = np.exp(p * np.log(r))
            value = np.exp((2.0 / p) * np.log1p(-rp)) - (vv / r) ** 2
            return np.sqrt(np.maximum(value, 0.0))

        values = integrate_batch(integrand, lower, upper,
                                 abs_tol=self.abs_tol, rel_tol=self.rel_tol,
                                 singular_left=True, singular_right=True,
                                 node_budget=self.node_budget)
        return (2.0 * values).reshape(v.shape)

    def g(self, p: float, v: float) -> float:
        return float(self.g_many(p, [v])[0])

    def g_prime_limits(self, p: float) -> Tuple[float, float]:
        """Limits of g_p' at v -> 0 and at the right endpoint"""
        p = self._require_finite(p)
        return -math.pi, -math.sqrt(2.0 / p) * math.pi

    def g_prime_many(self, p: float, v) -> np.ndarray:
        """g_p' on an array, endpoints replaced by their limits"""
        p = self._require_finite(p)
        v = self._check_v(p, v)
        flat = v.ravel()
        top = self.v_max(p)
        with np.errstate(divide='ignore'):
            log_v = np.log(flat)
        log_half_p = math.log(p / 2.0)

        def log_root(log_x, rows):
            # log of sqrt((u - 1) / (u^(2/p) - 1)), u = (1/4 + x^2) / (v^p + x^2),
            # kept in log space so neither x -> 0 nor x -> inf overflows
            lv = log_v[rows, None]
            with np.errstate(divide='ignore', invalid='ignore'):
                log_gap = np.log(np.maximum(0.25 - np.exp(p * lv), 0.0))
                log_delta = log_gap - np.logaddexp(p * lv, 2.0 * log_x)
                tiny = log_delta < _LOG_DELTA_FLOOR
                log_u = np.logaddexp(0.0, np.where(tiny, 0.0, log_delta))
                power = (2.0 / p) * log_u
                log_expm1 = np.where(power > 1.0,
                                     power + np.log1p(-np.exp(-np.maximum(power, 1.0))),
                                     np.log(np.expm1(np.minimum(power, 1.0))))
                log_ratio = np.where(tiny, log_half_p, log_delta - log_expm1)
            return 0.5 * log_ratio

        def near(y, rows):
            # x = y^(p/2) on [0, 1]
            log_y = np.log(y)
            log_x = 0.5 * p * log_y
            weight = log_root(log_x, rows) + log_x - log_y + log_half_p
            return np.exp(weight) / (0.25 + np.exp(2.0 * log_x))

        def far(t, rows):
            # x = 1/t on [1, inf)
            log_x = -np.log(t)
            return np.exp(log_root(log_x, rows)) / (0.25 * t * t + 1.0)

        interior = (flat > 0) & (flat < top)
        rows = np.nonzero(interior)[0]
        result = np.where(flat <= 0, -math.pi, -math.sqrt(2.0 / p) * math.pi)
        if rows.size:
            def restrict(fn):
                return lambda x, sub: fn(x, rows[sub])
            zeros = np.zeros(rows.size)
            ones = np.ones(rows.size)
            total = (
                integrate_batch(restrict(near), zeros, ones, abs_tol=self.abs_tol,
                                rel_tol=self.rel_tol, node_budget=self.node_budget)
                + integrate_batch(restrict(far), zeros, ones, abs_tol=self.abs_tol,
                                  rel_tol=self.rel_tol, node_budget=self.node_budget)
            )
            result[rows] = -(2.0 / p) * total
        return result.reshape(v.shape)

    def g_prime(self, p: float, v: float) -> float:
        """Derivative of g_p at an interior point"""
        p = self._require_finite(p)
        top = self.v_max(p)
        if not 0.0 < v < top:
            raise DomainError(
                f"g_prime needs 0 < v < {top!r}; use g_prime_limits for the endpoints"
            )
        return float(self.g_prime_many(p, [v])[0])

    def g_prime_inverse(self, p: float, s: float) -> float:
        """The v with g_p'(v) = s"""
        p = self._require_finite(p)
        if p == 2.0:
            raise DomainError("derivative not injective on this side: g_2' is constant")
        left, right = self.g_prime_limits(p)
        low, high = min(left, right), max(left, right)
        edge = 1e-12 * math.pi
        if s < low - edge or s > high + edge:
            raise ValueNotAttainedError(
                f"value not attained: g_p' maps onto [{low!r}, {high!r}] for p={p}"
            )
        top = self.v_max(p)
        if abs(s - left) <= edge:
            return 0.0
        if abs(s - right) <= edge:
            return top

        def residual(v):
            return float(self.g_prime_many(p, [v])[0]) - s

        return find_root_monotone(residual, 0.0, top, tol=self.root_tol)

    def boundary_curve(self, p: float, n_samples: Optional[int] = None) -> ToricBoundary:
        """Moment-region boundary of the lp-sum, from (0, a) to (a, 0)"""
        p = validate_p(p)
        n = self.curve_samples if n_samples is None else n_samples
        if n < 3:
            raise DomainError(f"n_samples must be at least 3, got {n}")
        if is_infinite(p):
            return self._boundary_infinity(n)

        top = self.v_max(p)
        params = np.linspace(-top, top, n)
        magnitudes, inverse = np.unique(np.abs(params), return_inverse=True)
        g_values = self.g_many(p, magnitudes)[inverse]
        g_slopes = self.g_prime_many(p, magnitudes)[inverse]
        g_values[np.abs(params) >= top] = 0.0

        forward = params >= 0
        x = np.where(forward, TWO_PI * params + g_values, g_values)
        y = np.where(forward, g_values, -TWO_PI * params + g_values)
        slopes = np.where(forward, g_slopes / (TWO_PI + g_slopes),
                          (TWO_PI + g_slopes) / g_slopes)

        def position(v):
            magnitude = min(abs(float(v)), top)
            value = 0.0 if magnitude >= top else self.g(p, magnitude)
            if v >= 0:
                return TWO_PI * magnitude + value, value
            return value, TWO_PI * magnitude + value

        def slope(v):
            derivative = float(self.g_prime_many(p, [min(abs(float(v)), top)])[0])
            if v >= 0:
                return derivative / (TWO_PI + derivative)
            return (TWO_PI + derivative) / derivative

        logger.info(f"Built lp-sum boundary for p={p} with {n} samples")
        return ToricBoundary(
            label=f"Omega_{p:g}", v_range=(-top, top), position=position, slope=slope,
            params=params, points=np.column_stack([x, y]), slopes=slopes,
            symmetric=True, area=self.volume(p), diagonal_param=0.0,
        )

    def _boundary_infinity(self, n: int) -> ToricBoundary:
        params = np.linspace(-1.0, 1.0, n)
        angle = np.arccos(params)
        root = np.sqrt(1.0 - params ** 2)
        x = 2.0 * (root + params * (math.pi - angle))
        y = 2.0 * (root - params * angle)
        with np.errstate(divide='ignore'):
            slopes = -angle / (math.pi - angle)

        def position(v):
            v = float(v)
            a = math.acos(v)
            r = math.sqrt(max(1.0 - v * v, 0.0))
            return 2.0 * (r + v * (math.pi - a)), 2.0 * (r - v * a)

        def slope(v):
            a = math.acos(float(v))
            if a >= math.pi:
                return -math.inf
            return -a / (math.pi - a)

        return ToricBoundary(
            label="Omega_inf", v_range=(-1.0, 1.0), position=position, slope=slope,
            params=params, points=np.column_stack([x, y]), slopes=slopes,
            symmetric=True, area=self.volume(INFINITY), diagonal_param=0.0,
        )

    def _flexible_outer(self, p: float) -> float:
        v0 = self.g_prime_inverse(p, -TWO_PI / 3.0)
        value = 0.0 if v0 >= self.v_max(p) else self.g(p, v0)
        return TWO_PI * v0 + 3.0 * value

    def radius_branches(self, p: float) -> Dict[str, float]:
        """Every closed-form branch evaluated at p, for continuity checks"""
        p = self._require_finite(p)
        vertex = TWO_PI * self.v_max(p)
        area = self.area_p(p)
        branches = {
            'inner_low': vertex,
            'inner_high': area,
            'outer_low': area,
            'outer_middle': vertex,
        }
        if p >= FLEXIBLE_THRESHOLD:
            branches['outer_high'] = self._flexible_outer(p)
        return branches

    def inner_radius(self, p: float) -> float:
        p = validate_p(p)
        if is_infinite(p):
            return 4.0
        if p <= 2.0:
            return TWO_PI * self.v_max(p)
        return self.area_p(p)

    def outer_radius(self, p: float) -> float:
        p = validate_p(p)
        if is_infinite(p):
            return 3.0 * math.sqrt(3.0)
        if p <= 2.0:
            return self.area_p(p)
        if p <= FLEXIBLE_THRESHOLD:
            return TWO_PI * self.v_max(p)
        return self._flexible_outer(p)

    def capacities(self, p: float) -> Tuple[float, float]:
        """Closed-form first and second ECH capacities of the toric model"""
        p = validate_p(p)
        if is_infinite(p):
            return 4.0, 3.0 * math.sqrt(3.0)
        if p <= 2.0:
            return TWO_PI * self.v_max(p), self.area_p(p)
        return self.area_p(p), self.outer_radius(p)

    def regimes(self, p: float) -> Tuple[Regime, Regime]:
        """Rigidity of the (inner, outer) embedding problems"""
        p = validate_p(p)
        inner = Regime.RIGID if p <= 2.0 else Regime.TORICALLY_RIGID
        if p < 2.0:
            outer = Regime.TORICALLY_RIGID
        elif p <= FLEXIBLE_THRESHOLD:
            outer = Regime.RIGID
        else:
            outer = Regime.NON_RIGID
        return inner, outer
