"""Single-segment geometry, torque, stiffness and energy."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensegrity_chain.errors import DegenerateConfiguration
from tensegrity_chain.segment import (
    SegmentGeometry,
    SpringControl,
    equivalent_stiffness,
    monotonicity_margin,
    segment_energy,
    segment_torque,
    spring_lengths,
    symmetric_torque,
    torque_derivative,
)

UNIT = SegmentGeometry(1.0, 1.0)
UNIT_SPRINGS = SpringControl.symmetric(1.0, 1.0)


def anchor_oracle(a, b, q):
    """Spring lengths from explicit anchor coordinates.

    The fixed triangle has its base vertices at (-b, +a) and (-b, -a); the
    moving triangle's base vertices start at (b, +a) and (b, -a) and turn
    about the shared apex at the origin by q.
    """
    R = np.array([[math.cos(q), -math.sin(q)], [math.sin(q), math.cos(q)]])
    upper = np.linalg.norm(R @ [b, a] - np.array([-b, a]))
    lower = np.linalg.norm(R @ [b, -a] - np.array([-b, -a]))
    return upper, lower


def finite_difference(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


class TestGeometry:
    def test_derived_constants(self):
        g = SegmentGeometry(1.0, 2.0)
        assert g.c == pytest.approx(math.sqrt(5))
        assert g.beta == pytest.approx(math.atan(0.5))
        assert g.q_limit == pytest.approx(math.pi - 2 * math.atan(0.5) - 1e-9)

    @pytest.mark.parametrize("a, b", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.nan, 1.0)])
    def test_invalid(self, a, b):
        with pytest.raises(ValueError):
            SegmentGeometry(a, b)

    def test_invalid_springs(self):
        with pytest.raises(ValueError):
            SpringControl(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            SpringControl(1.0, -1.0, 1.0, 1.0)


class TestSpringLengths:
    def test_flat_mechanism(self):
        assert spring_lengths(UNIT, 0.0) == pytest.approx((2.0, 2.0))

    def test_boundary_is_degenerate(self):
        with pytest.raises(DegenerateConfiguration):
            spring_lengths(UNIT, math.pi / 2)

    def test_just_inside_boundary(self):
        L1, L2 = spring_lengths(UNIT, math.pi / 2 - 1e-6)
        assert L1 > 0
        assert L2 == pytest.approx(2 * math.sqrt(2), rel=1e-9)

    def test_anchor_oracle_example(self):
        g = SegmentGeometry(1.0, 2.0)
        np.testing.assert_allclose(spring_lengths(g, 0.3), anchor_oracle(1.0, 2.0, 0.3), rtol=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(a=st.floats(0.05, 3.0), b=st.floats(0.1, 3.0), frac=st.floats(-0.99, 0.99))
    def test_anchor_oracle(self, a, b, frac):
        g = SegmentGeometry(a, b)
        q = frac * g.q_limit
        np.testing.assert_allclose(spring_lengths(g, q), anchor_oracle(a, b, q), rtol=1e-9, atol=1e-12)


class TestTorque:
    @pytest.mark.parametrize("a, b, k, L0", [(1, 1, 1, 1), (0.5, 1, 2, 0.3), (2, 1, 1, 3)])
    def test_zero_at_straight(self, a, b, k, L0):
        assert symmetric_torque(SegmentGeometry(a, b), SpringControl.symmetric(k, L0), 0.0) == 0.0

    def test_general_and_symmetric_forms_agree(self):
        assert segment_torque(UNIT, UNIT_SPRINGS, 0.2) == pytest.approx(
            symmetric_torque(UNIT, UNIT_SPRINGS, 0.2), abs=1e-12
        )

    def test_forms_agree_on_dense_grid(self):
        g = SegmentGeometry(0.7, 1.3)
        s = SpringControl.symmetric(1.5, 0.8)
        for q in np.linspace(-0.99, 0.99, 401) * g.q_limit:
            assert segment_torque(g, s, q) == pytest.approx(symmetric_torque(g, s, q), abs=1e-12)

    @pytest.mark.parametrize("q", [0.1, 0.5, 1.0])
    def test_odd_symmetry(self, q):
        assert symmetric_torque(UNIT, UNIT_SPRINGS, q) == pytest.approx(-symmetric_torque(UNIT, UNIT_SPRINGS, -q))

    def test_asymmetric_controls_rejected_by_closed_form(self):
        with pytest.raises(ValueError):
            symmetric_torque(UNIT, SpringControl(1, 1, 2, 1), 0.1)

    def test_asymmetric_torque_from_energy(self):
        s = SpringControl(1.0, 0.5, 2.0, 1.5)
        for q in (-0.7, 0.0, 0.4):
            dE = finite_difference(lambda x: segment_energy(UNIT, s, x), q)
            assert dE == pytest.approx(-segment_torque(UNIT, s, q), rel=1e-6, abs=1e-9)


class TestTorqueDerivative:
    def test_unit_case(self):
        assert torque_derivative(UNIT, UNIT_SPRINGS, 0.0) == pytest.approx(-1.0, abs=1e-15)

    def test_non_monotonic_regime(self):
        g = SegmentGeometry(0.5, 1.0)
        d = torque_derivative(g, SpringControl.symmetric(1.0, 0.0), 0.0)
        assert d == pytest.approx(2 * g.c**2 * math.cos(2 * g.beta))
        assert d > 0

    def test_matches_finite_difference(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            g = SegmentGeometry(rng.uniform(0.2, 2), rng.uniform(0.5, 2))
            s = SpringControl.symmetric(rng.uniform(0.5, 2), rng.uniform(0, 3))
            q = rng.uniform(-0.9, 0.9) * g.q_limit
            fd = finite_difference(lambda x: symmetric_torque(g, s, x), q)
            assert fd == pytest.approx(torque_derivative(g, s, q), rel=1e-6, abs=1e-8)


class TestMonotonicity:
    def test_monotonic(self):
        assert monotonicity_margin(UNIT, UNIT_SPRINGS) == pytest.approx(1.0)

    def test_non_monotonic(self):
        assert monotonicity_margin(SegmentGeometry(0.5, 1.0), UNIT_SPRINGS) == pytest.approx(-0.5)

    def test_sign_agrees_with_stiffness(self):
        for ratio in np.linspace(0.2, 2.0, 20):
            for L0 in np.linspace(0.0, 3.0, 20):
                g = SegmentGeometry(ratio, 1.0)
                s = SpringControl.symmetric(1.0, L0)
                m = monotonicity_margin(g, s)
                if abs(m) > 1e-6:
                    assert np.sign(m) == np.sign(-torque_derivative(g, s, 0.0))


class TestEquivalentStiffness:
    def test_unit_case(self):
        assert equivalent_stiffness(UNIT, UNIT_SPRINGS) == pytest.approx(-1.0)

    def test_thin_triangle(self):
        assert equivalent_stiffness(SegmentGeometry(0.0, 1.0), SpringControl.symmetric(1.0, 0.0)) == pytest.approx(2.0)

    def test_equals_torque_derivative(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            g = SegmentGeometry(rng.uniform(0, 2), rng.uniform(0.2, 3))
            s = SpringControl.symmetric(rng.uniform(0.1, 5), rng.uniform(0, 4))
            K = equivalent_stiffness(g, s)
            assert K == pytest.approx(torque_derivative(g, s, 0.0), rel=1e-12, abs=1e-12)


class TestEnergy:
    def test_unstretched(self):
        assert segment_energy(UNIT, SpringControl.symmetric(1.0, 2.0), 0.0) == 0.0

    def test_unit_case(self):
        assert segment_energy(UNIT, UNIT_SPRINGS, 0.0) == pytest.approx(1.0)

    def test_gradient_is_minus_torque(self):
        rng = np.random.default_rng(4)
        g = SegmentGeometry(0.8, 1.2)
        s = SpringControl.symmetric(1.3, 0.9)
        for q in rng.uniform(-0.9, 0.9, size=20) * g.q_limit:
            dE = finite_difference(lambda x: segment_energy(g, s, x), q)
            assert dE == pytest.approx(-symmetric_torque(g, s, q), rel=1e-6, abs=1e-9)
