#!/usr/bin/env python3
"""
Tests for quadrature, root finding and special functions
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.models.domain_models import QuadratureSpec
from src.utils.exceptions import (
    DomainError, QuadratureError, RootNotBracketedError, ValueNotAttainedError,
)
from src.utils.numerics import (
    beta, find_root_monotone, gamma, integrate, integrate_batch, ln_gamma,
)


class TestQuadrature:
    """Test the tanh-sinh quadrature"""

    def test_polynomial(self):
        """Test a smooth integrand"""
        value = integrate(lambda x: x ** 3, QuadratureSpec(0.0, 2.0))
        assert value == pytest.approx(4.0, abs=1e-12)

    def test_inverse_square_root_left(self):
        """Test an integrable singularity at the left end"""
        spec = QuadratureSpec(0.0, 1.0, singular_left=True)
        assert integrate(lambda x: 1.0 / np.sqrt(x), spec) == pytest.approx(2.0, abs=1e-9)

    def test_square_root_both_ends(self):
        """Test square-root behaviour at both ends"""
        spec = QuadratureSpec(-1.0, 1.0, singular_left=True, singular_right=True)
        value = integrate(lambda x: np.sqrt(1.0 - x * x), spec)
        assert value == pytest.approx(math.pi / 2.0, abs=1e-10)

    def test_batch_intervals(self):
        """Test several intervals at once, including a zero-width one"""
        lower = np.array([0.0, 0.0, 1.0])
        upper = np.array([1.0, 2.0, 1.0])

        def f(x, rows):
            return np.cos(x)

        values = integrate_batch(f, lower, upper)
        np.testing.assert_allclose(values, [math.sin(1.0), math.sin(2.0), 0.0], atol=1e-12)

    def test_rows_are_reported(self):
        """Test the integrand sees the indices of its intervals"""
        scales = np.array([1.0, 2.0, 3.0])

        def f(x, rows):
            return scales[rows, None] * np.ones_like(x)

        values = integrate_batch(f, np.zeros(3), np.ones(3))
        np.testing.assert_allclose(values, scales, atol=1e-12)

    def test_non_finite_integrand(self):
        """Test a NaN integrand raises QuadratureError"""
        with pytest.raises(QuadratureError):
            integrate(lambda x: np.full_like(x, np.nan), QuadratureSpec(0.0, 1.0))

    def test_reversed_bounds(self):
        """Test a batch with lower above upper is rejected"""
        with pytest.raises(DomainError):
            integrate_batch(lambda x, rows: x, np.array([1.0]), np.array([0.0]))

    def test_invalid_spec(self):
        """Test an empty interval is rejected"""
        with pytest.raises(DomainError):
            QuadratureSpec(1.0, 1.0)


class TestRootFinding:
    """Test the bracketing root finder"""

    def test_square_root_of_two(self):
        """Test a simple monotone root"""
        root = find_root_monotone(lambda x: x * x - 2.0, 0.0, 2.0)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_decreasing_function(self):
        """Test a decreasing function"""
        root = find_root_monotone(lambda x: math.cos(x), 0.0, 3.0)
        assert root == pytest.approx(math.pi / 2.0, abs=1e-12)

    def test_endpoint_root(self):
        """Test a root sitting on the bracket"""
        assert find_root_monotone(lambda x: x - 1.0, 1.0, 2.0) == 1.0

    def test_not_bracketed(self):
        """Test a bracket without a sign change"""
        with pytest.raises(RootNotBracketedError) as info:
            find_root_monotone(lambda x: x * x + 1.0, -1.0, 1.0)
        assert "root not bracketed" in str(info.value)

    def test_iteration_limit(self):
        """Test running out of iterations raises with the final bracket"""
        with pytest.raises(ValueNotAttainedError) as info:
            find_root_monotone(lambda x: x ** 3 - 0.3, 0.0, 1.0, max_iter=2)
        assert "root lies in" in str(info.value)


class TestSpecialFunctions:
    """Test gamma, log-gamma and beta"""

    def test_gamma_integers(self):
        """Test gamma at integers is a factorial"""
        assert gamma(5.0) == pytest.approx(24.0, rel=1e-13)
        assert ln_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-13)

    def test_gamma_half(self):
        """Test gamma(1/2) = sqrt(pi)"""
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)

    def test_gamma_matches_math(self):
        """Test gamma against the standard library on a grid"""
        for x in (0.1, 0.7, 1.3, 2.5, 7.25, 30.0):
            assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-11)

    def test_beta(self):
        """Test beta(2, 3) = 1/12 and symmetry"""
        assert beta(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-13)
        assert beta(0.4, 1.7) == pytest.approx(beta(1.7, 0.4), rel=1e-14)


if __name__ == "__main__":
    pytest.main([__file__])
