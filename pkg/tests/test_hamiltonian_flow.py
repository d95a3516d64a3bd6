#!/usr/bin/env python3
"""
Tests for the Hamiltonian H_p, its flow, the turning radii and the action oracle
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.models.domain_models import INFINITY, PhasePoint
from src.services.hamiltonian_flow_service import HamiltonianFlowService
from src.services.lagrangian_sum_service import LagrangianSumService
from src.utils.exceptions import DomainError


class TestInvariants:
    """Test H_p and V at single points"""

    def setup_method(self):
        """Setup test fixtures"""
        self.service = HamiltonianFlowService()

    def test_hamiltonian(self):
        """Test H_p on simple points"""
        assert self.service.hamiltonian(2.0, PhasePoint((1.0, 0.0), (0.0, 1.0))) == pytest.approx(2.0)
        assert self.service.hamiltonian(4.0, PhasePoint((0.5, 0.0), (0.5, 0.0))) == pytest.approx(0.125)

    def test_hamiltonian_on_boundary(self):
        """Test H_p = 1 on the boundary of the lp-sum"""
        p = 3.0
        for t in np.linspace(0.1, 0.9, 5):
            rx, ry = t ** (1.0 / p), (1.0 - t) ** (1.0 / p)
            z = PhasePoint((rx * math.cos(1.0), rx * math.sin(1.0)), (0.0, ry))
            assert self.service.hamiltonian(p, z) == pytest.approx(1.0, abs=1e-14)

    def test_angular_momentum(self):
        """Test V = y1 x2 - y2 x1"""
        assert self.service.angular_momentum(PhasePoint((1.0, 0.0), (0.0, 1.0))) == -1.0
        assert self.service.angular_momentum(PhasePoint((1.0, 2.0), (2.0, 4.0))) == 0.0

    def test_angular_momentum_rotation_invariant(self):
        """Test V is unchanged by a simultaneous rotation"""
        z = PhasePoint((0.3, -0.7), (0.9, 0.2))
        c, s = math.cos(0.8), math.sin(0.8)
        rotated = PhasePoint((c * 0.3 + s * 0.7, s * 0.3 - c * 0.7),
                             (c * 0.9 - s * 0.2, s * 0.9 + c * 0.2))
        assert self.service.angular_momentum(rotated) == pytest.approx(
            self.service.angular_momentum(z), abs=1e-14)

    def test_infinite_p(self):
        """Test H_inf is not defined here"""
        with pytest.raises(DomainError):
            self.service.hamiltonian(INFINITY, PhasePoint((1.0, 0.0), (0.0, 1.0)))


class TestFlow:
    """Test RK4 integration of the Hamiltonian flow"""

    def setup_method(self):
        """Setup test fixtures"""
        self.service = HamiltonianFlowService()
        self.z0 = PhasePoint((0.8, 0.1), (-0.2, 0.7))

    def test_harmonic_rotation(self):
        """Test the p = 2 flow against the closed-form rotation"""
        trajectory = self.service.integrate_flow(2.0, self.z0, 5.0, 1e-3)
        for t, state in zip(trajectory.times[::500], trajectory.states[::500]):
            exact = self.service.harmonic_solution(self.z0, t).as_array()
            assert np.max(np.abs(state - exact)) <= 1e-8 * max(t, 1.0)

    @pytest.mark.parametrize("p", [4.0, 6.0])
    def test_conservation(self, p):
        """Test H_p and V are conserved"""
        trajectory = self.service.integrate_flow(p, self.z0, 2.0, 1e-3)
        assert not trajectory.truncated
        h0 = self.service.hamiltonian(p, self.z0)
        v0 = self.service.angular_momentum(self.z0)
        for state in trajectory.states:
            z = PhasePoint.from_array(state)
            assert abs(self.service.hamiltonian(p, z) - h0) <= 1e-6
            assert abs(self.service.angular_momentum(z) - v0) <= 1e-6

    def test_stride_and_final_time(self):
        """Test sampling stride and the final time"""
        trajectory = self.service.integrate_flow(4.0, self.z0, 1.0, 1e-3, stride=100)
        assert len(trajectory.times) == 11
        assert trajectory.times[-1] == pytest.approx(1.0)

    def test_axis_guard(self):
        """Test a start inside the guard radius truncates at once"""
        z0 = PhasePoint((1e-4, 0.0), (1.0, 0.0))
        trajectory = self.service.integrate_flow(4.0, z0, 1.0, 1e-3)
        assert trajectory.truncated
        assert len(trajectory.states) == 1

    def test_p_below_two(self):
        """Test the flow needs p >= 2"""
        with pytest.raises(DomainError):
            self.service.integrate_flow(1.5, self.z0, 1.0, 1e-3)


class TestActionOracle:
    """Test the turning radii and the independent action integral"""

    def setup_method(self):
        """Setup test fixtures"""
        self.lagrangian = LagrangianSumService()
        self.service = HamiltonianFlowService(self.lagrangian)

    def test_r_pm_endpoints(self):
        """Test the roots at v = 0 and at the double root"""
        assert self.service.r_pm(3.0, 0.0) == pytest.approx((0.0, 1.0))
        top = 4.0 ** (-1.0 / 3.0)
        lower, upper = self.service.r_pm(3.0, top)
        assert lower == pytest.approx(0.5 ** (1.0 / 3.0), abs=1e-7)
        assert upper == pytest.approx(0.5 ** (1.0 / 3.0), abs=1e-7)

    def test_r_pm_residual(self):
        """Test both roots solve r^2 (1 - r^p)^(2/p) = v^2"""
        p, v = 6.0, 0.4
        lower, upper = self.service.r_pm(p, v)
        for r in (lower, upper):
            assert r ** 2 * (1.0 - r ** p) ** (2.0 / p) == pytest.approx(v * v, abs=1e-12)
        assert lower ** p + upper ** p == pytest.approx(1.0, abs=1e-12)

    def test_r_pm_range(self):
        """Test v outside [0, 4^(-1/p)] is rejected"""
        with pytest.raises(DomainError):
            self.service.r_pm(3.0, 0.9)

    def test_oracle_at_zero(self):
        """Test the action at v = 0 is A(p)/2"""
        assert self.service.action_oracle(4.0, 0.0) == pytest.approx(
            self.lagrangian.area_p(4.0) / 2.0, abs=1e-8)

    def test_oracle_p2(self):
        """Test p = 2, v = 0.1 gives pi/2 - pi/10"""
        assert self.service.action_oracle(2.0, 0.1) == pytest.approx(
            math.pi / 2.0 - math.pi / 10.0, abs=1e-8)

    @pytest.mark.parametrize("p", [1.5, 3.0, 10.0])
    def test_oracle_matches_g(self, p):
        """Test the oracle against g_p on a grid"""
        grid = np.linspace(0.0, self.lagrangian.v_max(p), 10)
        oracle = [self.service.action_oracle(p, v) for v in grid]
        np.testing.assert_allclose(oracle, self.lagrangian.g_many(p, grid), atol=1e-8)
        assert np.all(np.diff(oracle) < 0)


if __name__ == "__main__":
    pytest.main([__file__])
