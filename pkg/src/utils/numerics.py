"""
Quadrature, root finding and special functions shared by every service.

The quadrature is a level-refined tanh-sinh rule applied after an optional
polynomial warp of [0, 1] that flattens inverse-square-root endpoint
behaviour. It is vectorised over many intervals at once: the integrand
receives a 2-d array of abscissae (one row per interval) plus the indices of
the rows still being refined.
"""

import logging
import math
import sys
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from ..models.domain_models import QuadratureSpec
from .exceptions import (
    DomainError, QuadratureError, RootNotBracketedError, ValueNotAttainedError,
)

logger = logging.getLogger(__name__)

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-10
DEFAULT_NODE_BUDGET = 1_000_000
DEFAULT_ROOT_TOL = 1e-13

_HALF_PI = math.pi / 2.0
_T_MAX = 6.5
_FIRST_STEP = 0.5
_MAX_LEVEL = 16
_MIN_LEVEL = 2
_EPS = sys.float_info.epsilon

BatchIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def _level_nodes(level: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tanh-sinh nodes on [0, 1] added at a refinement level.

    Returns (distance to 0, distance to 1, weight per unit step). Distances are
    computed directly so nodes stay distinct from the endpoints.
    """
    h = _FIRST_STEP / 2 ** level
    count = int(math.ceil(_T_MAX / h))
    if level == 0:
        k = np.arange(0, count + 1)
    else:
        k = np.arange(1, count + 1, 2)
    t = k * h
    z = _HALF_PI * np.sinh(t)
    e = np.exp(-2.0 * z)
    edge = e / (1.0 + e)
    weight = _HALF_PI * np.cosh(t) * 2.0 * e / (1.0 + e) ** 2

    positive = t > 0
    s_lo = np.concatenate([edge, 1.0 - edge[positive]])
    s_hi = np.concatenate([1.0 - edge, edge[positive]])
    w = np.concatenate([weight, weight[positive]])
    for array in (s_lo, s_hi, w):
        array.setflags(write=False)
    return s_lo, s_hi, w


def _warp(s_lo: np.ndarray, s_hi: np.ndarray, singular_left: bool,
          singular_right: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Endpoint-flattening map of [0, 1]: distances to both ends and Jacobian"""
    if singular_left and singular_right:
        return (s_lo ** 2 * (3.0 - 2.0 * s_lo), s_hi ** 2 * (3.0 - 2.0 * s_hi),
                6.0 * s_lo * s_hi)
    if singular_left:
        return s_lo ** 2, s_hi * (2.0 - s_hi), 2.0 * s_lo
    if singular_right:
        return s_lo * (2.0 - s_lo), s_hi ** 2, 2.0 * s_hi
    return s_lo, s_hi, np.ones_like(s_lo)


def integrate_batch(f: BatchIntegrand, lower, upper,
                    abs_tol: float = DEFAULT_ABS_TOL,
                    rel_tol: float = DEFAULT_REL_TOL,
                    singular_left: bool = False,
                    singular_right: bool = False,
                    node_budget: int = DEFAULT_NODE_BUDGET) -> np.ndarray:
    """Integrate f over many intervals [lower[i], upper[i]] at once.

    ``f(x, rows)`` receives abscissae of shape (len(rows), n) and the indices
    of the intervals they belong to. Zero-width intervals integrate to 0.
    """
    lower, upper = np.broadcast_arrays(np.atleast_1d(np.asarray(lower, dtype=float)),
                                       np.atleast_1d(np.asarray(upper, dtype=float)))
    width = upper - lower
    if np.any(width < 0):
        raise DomainError("integration bounds must satisfy lower <= upper")

    result = np.zeros(lower.shape, dtype=float)
    errors = np.full(lower.shape, np.inf)
    sums = np.zeros(lower.shape, dtype=float)
    active = width > 0
    evaluations = 0

    for level in range(_MAX_LEVEL + 1):
        rows = np.nonzero(active)[0]
        if rows.size == 0:
            return result

        s_lo, s_hi, w = _level_nodes(level)
        phi_lo, phi_hi, dphi = _warp(s_lo, s_hi, singular_left, singular_right)
        a = lower[rows, None]
        b = upper[rows, None]
        span = width[rows, None]
        x = np.where(phi_lo <= phi_hi, a + span * phi_lo, b - span * phi_hi)
        weights = w * dphi
        inside = (x > a) & (x < b) & (weights > 0)

        with np.errstate(all='ignore'):
            fx = np.asarray(f(x, rows), dtype=float)
        values = np.where(inside, fx, 0.0)
        if not np.all(np.isfinite(values)):
            bad = rows[~np.all(np.isfinite(values), axis=1)][0]
            raise QuadratureError(
                f"integrand not finite inside [{lower[bad]}, {upper[bad]}]",
                estimate=float(result[bad]), error_bound=math.inf,
                evaluations=evaluations)

        evaluations += x.shape[1]
        h = _FIRST_STEP / 2 ** level
        sums[rows] += (values * weights).sum(axis=1) * span[:, 0]
        estimate = h * sums[rows]

        if level >= _MIN_LEVEL:
            err = np.abs(estimate - result[rows])
            errors[rows] = err
            done = err <= np.maximum(abs_tol, rel_tol * np.abs(estimate))
            active[rows[done]] = False
        result[rows] = estimate
        logger.debug(f"tanh-sinh level {level}: {int(active.sum())} of "
                     f"{lower.size} intervals still refining")

        if evaluations > node_budget and active.any():
            worst = np.nonzero(active)[0][0]
            raise QuadratureError("quadrature node budget exhausted",
                                  estimate=float(result[worst]),
                                  error_bound=float(errors[worst]),
                                  evaluations=evaluations)

    if active.any():
        worst = np.nonzero(active)[0][0]
        raise QuadratureError("quadrature did not converge",
                              estimate=float(result[worst]),
                              error_bound=float(errors[worst]),
                              evaluations=evaluations)
    return result


def integrate(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec,
              node_budget: int = DEFAULT_NODE_BUDGET) -> float:
    """Integrate a numpy-vectorised f over spec.lower..spec.upper"""
    values = integrate_batch(
        lambda x, rows: f(x), spec.lower, spec.upper,
        abs_tol=spec.abs_tol, rel_tol=spec.rel_tol,
        singular_left=spec.singular_left, singular_right=spec.singular_right,
        node_budget=node_budget,
    )
    return float(values[0])


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = DEFAULT_ROOT_TOL, ftol: float = 0.0,
                       max_iter: int = 200) -> float:
    """Brent's method on a bracket [lo, hi] with f(lo) * f(hi) <= 0"""
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise RootNotBracketedError(a, b, fa, fb)

    c, fc = a, fa
    d = e = b - a
    for iteration in range(max_iter):
        if fb * fc > 0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb

        tol1 = 2.0 * _EPS * abs(b) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= tol1 or fb == 0 or abs(fb) <= ftol:
            logger.debug(f"brent converged after {iteration} iterations at {b!r}")
            return b

        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = m
                e = m
        else:
            d = m
            e = m

        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, m)
        fb = f(b)

    if fb == 0:
        return b
    if fb * fc > 0:
        c = a
    lo, hi = sorted((b, c))
    raise ValueNotAttainedError(
        f"brent did not converge in {max_iter} iterations; root lies in [{lo!r}, {hi!r}]"
    )


# Lanczos approximation, g = 7, nine terms
_LANCZOS_G = 7
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(z: float) -> float:
    series = _LANCZOS_COEFFICIENTS[0]
    for i, coefficient in enumerate(_LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (z + i)
    return series


def ln_gamma(x: float) -> float:
    """log Γ(x) for x > 0"""
    if x <= 0:
        raise ValueError(f"ln_gamma requires x > 0, got {x}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - ln_gamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_series(z))


def gamma(x: float) -> float:
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * _lanczos_series(z)


def beta(a: float, b: float) -> float:
    """Euler beta function B(a, b) for a, b > 0"""
    return math.exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
