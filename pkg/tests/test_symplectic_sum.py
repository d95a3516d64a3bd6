#!/usr/bin/env python3
"""
Tests for the symplectic lp-sum B_p
"""

import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.models.domain_models import INFINITY, Ellipsoid, Outcome, Regime, Shape
from src.services.symplectic_sum_service import B1_WEIGHTS, SymplecticSumService
from src.services.toric_domain_service import ToricDomainService
from src.utils.exceptions import DomainError


class TestBoundary:
    """Test the B_p moment region"""

    def setup_method(self):
        """Setup test fixtures"""
        self.toric = ToricDomainService()
        self.service = SymplecticSumService(self.toric, curve_samples=129)

    def test_b1_is_exact(self):
        """Test p = 1 keeps rational arithmetic"""
        boundary = self.service.bp_boundary(1.0)
        assert boundary.exact
        assert boundary.position(Fraction(1, 3)) == (Fraction(1, 9), Fraction(4, 9))
        assert self.toric.classify(boundary).shape == Shape.CONCAVE

    def test_b2_is_a_triangle(self):
        """Test p = 2 gives x + y = 1"""
        boundary = self.service.bp_boundary(2.0)
        np.testing.assert_allclose(boundary.points.sum(axis=1), 1.0, atol=1e-12)
        assert self.toric.classify(boundary).degenerate

    def test_convex_above_two(self):
        """Test p > 2 bulges outward"""
        assert self.toric.classify(self.service.bp_boundary(4.0)).shape == Shape.CONVEX

    def test_infinity_is_the_square(self):
        """Test B_inf is the unit square"""
        boundary = self.service.bp_boundary(INFINITY)
        assert boundary.area == pytest.approx(1.0)
        assert self.toric.classify(boundary).shape == Shape.CONVEX

    def test_area_is_volume(self):
        """Test the region area against the sampled curve"""
        boundary = self.service.bp_boundary(3.0, n_samples=4001)
        # close the region through the origin
        x = np.concatenate([[0.0], boundary.points[:, 0]])
        y = np.concatenate([[0.0], boundary.points[:, 1]])
        sampled = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        assert boundary.area == pytest.approx(sampled, rel=1e-5)

    def test_below_one(self):
        """Test 0 < p < 1 still gives a concave region"""
        boundary = self.service.bp_boundary(0.5)
        assert self.toric.classify(boundary).shape == Shape.CONCAVE
        assert boundary.area == pytest.approx(1.0 / 70.0, rel=1e-10)

    def test_invalid_p(self):
        """Test p <= 0 is rejected"""
        for p in (0.0, -1.0):
            with pytest.raises(DomainError):
                self.service.bp_boundary(p)


class TestRadii:
    """Test closed-form radii, capacities and intercepts of B_p"""

    def setup_method(self):
        """Setup test fixtures"""
        self.toric = ToricDomainService()
        self.service = SymplecticSumService(self.toric, curve_samples=129)

    def test_known_values(self):
        """Test the radii at p = 1, 2, 4 and inf"""
        assert self.service.bp_capacities(1.0) == pytest.approx((0.5, 2.0 / 3.0))
        assert self.service.bp_capacities(2.0) == pytest.approx((1.0, 1.0))
        assert self.service.bp_capacities(4.0) == pytest.approx((1.0, math.sqrt(2.0)))
        assert self.service.bp_capacities(INFINITY) == (1.0, 2.0)

    def test_outer_form_below_two(self):
        """Test the outer radius at p = 1.5"""
        p = 1.5
        expected = (1.0 + 2.0 ** (p / (p - 2.0))) ** (1.0 - 2.0 / p)
        assert self.service.bp_outer_radius(p) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("p", np.linspace(1.0, 20.0, 9))
    def test_pipeline_matches_closed_form(self, p):
        """Test c1 and c2 from the boundary against the closed forms"""
        c1, c2 = self.toric.c1_c2_symmetric(self.service.bp_boundary(p))
        e1, e2 = self.service.bp_capacities(p)
        assert float(c1) == pytest.approx(e1, abs=1e-8)
        assert float(c2) == pytest.approx(e2, abs=1e-8)

    def test_volume(self):
        """Test vol(B_1) = 1/6 and vol(B_2) = 1/2"""
        assert self.service.bp_volume(1.0) == pytest.approx(1.0 / 6.0, rel=1e-13)
        assert self.service.bp_volume(2.0) == pytest.approx(0.5, rel=1e-13)

    def test_tangent_intercepts(self):
        """Test the closed form against the boundary search"""
        assert self.service.bp_tangent_intercept(1.0, 2) == pytest.approx(2.0 / 3.0)
        boundary = self.service.bp_boundary(1.5)
        for n in (1, 2, 4):
            searched = float(self.toric.tangent_intercept(boundary, n))
            assert self.service.bp_tangent_intercept(1.5, n) == pytest.approx(searched, abs=1e-10)
        with pytest.raises(DomainError):
            self.service.bp_tangent_intercept(3.0, 2)

    def test_flex_inequalities(self):
        """Test both inequalities hold on [1, 2)"""
        for p in np.linspace(1.0, 2.0, 20, endpoint=False):
            sides = self.service.bp_flex_inequalities(p)
            assert sides['volume'] <= sides['half_c2_squared']
            assert sides['tail_gap'] <= sides['w2']
            assert sides['holds'] == 1.0
        with pytest.raises(DomainError):
            self.service.bp_flex_inequalities(2.0)

    def test_regimes(self):
        """Test the rigidity labels of B_p"""
        assert self.service.regimes(1.5) == (Regime.RIGID, Regime.NON_RIGID)
        assert self.service.regimes(3.0) == (Regime.RIGID, Regime.RIGID)
        assert self.service.regimes(INFINITY) == (Regime.RIGID, Regime.RIGID)


class TestB1IntoEllipsoids:
    """Test the B_1 weights and the ellipsoid decision"""

    def setup_method(self):
        """Setup test fixtures"""
        self.service = SymplecticSumService(k_max=50)

    def test_eleven_weights(self):
        """Test the leading eleven weights"""
        assert self.service.b1_weights(11) == list(B1_WEIGHTS)
        assert self.service.b1_weights(3) == [Fraction(1, 2), Fraction(1, 6), Fraction(1, 6)]

    def test_more_weights(self):
        """Test weights beyond the stored list come from the expansion"""
        weights = self.service.b1_weights(13)
        assert len(weights) == 13
        assert weights[:11] == list(B1_WEIGHTS)
        assert all(w < Fraction(1, 30) for w in weights[11:])

    def test_boundary_point(self):
        """Test E(1/2, 2/3) is embeddable in exact arithmetic"""
        verdict = self.service.b1_into_ellipsoid(Ellipsoid(Fraction(1, 2), Fraction(2, 3)))
        assert verdict.outcome == Outcome.EMBEDDABLE

    def test_axes_in_either_order(self):
        """Test the decision is symmetric in a and b"""
        verdict = self.service.b1_into_ellipsoid(Ellipsoid(0.667, 0.5))
        assert verdict.embeddable

    def test_not_embeddable(self):
        """Test axes just below the threshold"""
        assert self.service.b1_into_ellipsoid(Ellipsoid(0.5, 0.66)).outcome == Outcome.NOT_EMBEDDABLE
        assert self.service.b1_into_ellipsoid(Ellipsoid(0.49, 5.0)).outcome == Outcome.NOT_EMBEDDABLE

    def test_grid(self):
        """Test the closed form and capacity cross-check on a grid around (1/2, 2/3)"""
        for a in np.linspace(0.45, 0.55, 20):
            for b in np.linspace(0.6, 0.75, 20):
                verdict = self.service.b1_into_ellipsoid(Ellipsoid(float(a), float(b)))
                assert verdict.embeddable == (min(a, b) >= 0.5 and max(a, b) >= 2.0 / 3.0)


if __name__ == "__main__":
    pytest.main([__file__])
