import logging
import math
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from ..models.domain_models import PhasePoint, Trajectory, is_infinite, validate_p
from ..utils.exceptions import DomainError
from ..utils.numerics import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, integrate_batch
from .lagrangian_sum_service import LagrangianSumService, turning_radii

logger = logging.getLogger(__name__)


class HamiltonianFlowService:
    """Integrable structure of H_p = |x|^p + |y|^p: flows, invariants, action"""

    def __init__(self, lagrangian_service: Optional[LagrangianSumService] = None,
                 axis_guard: float = 1e-3,
                 abs_tol: float = DEFAULT_ABS_TOL,
                 rel_tol: float = DEFAULT_REL_TOL,
                 show_progress: bool = False):
        self.lagrangian_service = lagrangian_service or LagrangianSumService()
        self.axis_guard = axis_guard
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.show_progress = show_progress

    @staticmethod
    def _finite_p(p: float) -> float:
        p = validate_p(p)
        if is_infinite(p):
            raise DomainError("H_p needs finite p")
        return p

    def hamiltonian(self, p: float, z: PhasePoint) -> float:
        p = self._finite_p(p)
        return math.hypot(*z.x) ** p + math.hypot(*z.y) ** p

    @staticmethod
    def angular_momentum(z: PhasePoint) -> float:
        return z.y[0] * z.x[1] - z.y[1] * z.x[0]

    @staticmethod
    def _vector_field(p: float, state: np.ndarray) -> np.ndarray:
        x, y = state[:2], state[2:]
        nx, ny = np.hypot(*x), np.hypot(*y)
        dx = p * ny ** (p - 2.0) * y
        dy = -p * nx ** (p - 2.0) * x
        return np.concatenate([dx, dy])

    def integrate_flow(self, p: float, z0: PhasePoint, t_end: float,
                       dt: float = 1e-3, stride: int = 1) -> Trajectory:
        """Classical RK4 on the Hamiltonian vector field of H_p.

        For p != 2 the field is only smooth off the axes |x| = 0 and
        |y| = 0; the trajectory stops once either norm drops below the
        guard radius.
        """
        p = self._finite_p(p)
        if p < 2.0:
            raise DomainError(f"the flow of H_p needs p >= 2, got {p}")
        if not (t_end >= 0 and dt > 0):
            raise DomainError(f"need t_end >= 0 and dt > 0, got ({t_end}, {dt})")

        guarded = p != 2.0
        steps = int(math.ceil(t_end / dt - 1e-9))
        state = z0.as_array()
        times, states = [0.0], [state.copy()]

        def too_close(s: np.ndarray) -> bool:
            return guarded and min(np.hypot(*s[:2]), np.hypot(*s[2:])) < self.axis_guard

        if too_close(state):
            logger.warning(f"Initial point {z0} lies within the axis guard")
            return Trajectory(np.array(times), np.array(states), True,
                              "initial point within the axis guard")

        field = self._vector_field
        t = 0.0
        for step in tqdm(range(1, steps + 1), desc=f"RK4 p={p:g}",
                         disable=not self.show_progress):
            h = min(dt, t_end - t)
            k1 = field(p, state)
            k2 = field(p, state + 0.5 * h * k1)
            k3 = field(p, state + 0.5 * h * k2)
            k4 = field(p, state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            if too_close(state):
                times.append(t)
                states.append(state.copy())
                logger.warning(f"Trajectory truncated at t={t:.6g}: axis approach")
                return Trajectory(np.array(times), np.array(states), True,
                                  f"axis approach at t={t:.6g}")
            if step % stride == 0 or step == steps:
                times.append(t)
                states.append(state.copy())

        return Trajectory(np.array(times), np.array(states))

    @staticmethod
    def harmonic_solution(z0: PhasePoint, t: float) -> PhasePoint:
        """Closed-form flow of H_2: rotation by angle 2t"""
        c, s = math.cos(2.0 * t), math.sin(2.0 * t)
        x0, y0 = np.array(z0.x), np.array(z0.y)
        return PhasePoint.from_array(np.concatenate([c * x0 + s * y0, -s * x0 + c * y0]))

    def r_pm(self, p: float, v: float) -> Tuple[float, float]:
        p = self._finite_p(p)
        top = 4.0 ** (-1.0 / p)
        if not (0.0 <= v <= top):
            raise DomainError(f"v must lie in [0, {top!r}] for p={p}")
        lower, upper = turning_radii(p, [v])
        return float(lower[0]), float(upper[0])

    def action_oracle(self, p: float, v: float) -> float:
        """2 * integral of sqrt((1 - r^p)^(2/p) - v^2/r^2) between r- and r+.

        Evaluated through r = c + h sin(theta), which removes the square-root
        endpoint behaviour, as a check independent of g.
        """
        r_minus, r_plus = self.r_pm(p, v)
        centre, half = 0.5 * (r_plus + r_minus), 0.5 * (r_plus - r_minus)
        if half <= 0.0:
            return 0.0

        def integrand(theta, rows):
            r = centre + half * np.sin(theta)
            with np.errstate(divide='ignore', invalid='ignore'):
                scaled = r * np.exp(np.log1p(-np.exp(p * np.log(r))) / p)
                value = np.sqrt(np.maximum(scaled ** 2 - v * v, 0.0)) / r
            return np.where(r > 0, value, 0.0) * half * np.cos(theta)

        value = integrate_batch(integrand, [-0.5 * math.pi], [0.5 * math.pi],
                                abs_tol=self.abs_tol, rel_tol=self.rel_tol,
                                node_budget=self.lagrangian_service.node_budget)
        return 2.0 * float(value[0])
