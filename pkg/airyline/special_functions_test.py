import math

import numpy
import pytest
import scipy.special

from airyline.errors import DomainError
from airyline.special_functions import (
    AI_0,
    AI_PRIME_0,
    ANCHOR_SPACING,
    ASYMPTOTIC_RADIUS,
    SERIES_RADIUS,
    airy,
    airy_ai,
    anchor_table,
)

FIRST_ZERO = -2.338107410459767


def test_values_at_zero():
    value = airy_ai(0.0)
    assert value.ai == pytest.approx(0.3550280538878172, abs=1e-15)
    assert value.ai_prime == pytest.approx(-0.2588194037928068, abs=1e-15)
    assert AI_0 == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-15)
    assert AI_PRIME_0 == pytest.approx(-(3 ** (-1 / 3)) / math.gamma(1 / 3), rel=1e-15)


@pytest.mark.parametrize(
    "x,ai,ai_prime",
    [
        (1.0, 0.13529241631288141, -0.15914744129679328),
        (-1.0, 0.53556088329235212, -0.010160567116645209),
    ],
)
def test_reference_values(x, ai, ai_prime):
    value = airy_ai(x)
    assert value.ai == pytest.approx(ai, abs=1e-14)
    assert value.ai_prime == pytest.approx(ai_prime, abs=1e-14)


def test_first_zero():
    assert abs(airy_ai(FIRST_ZERO).ai) < 1e-10


def test_decay_at_ten():
    assert 0 < airy_ai(10.0).ai < 1e-9


def test_agrees_with_scipy_on_the_positive_axis():
    x = numpy.linspace(0.0, 25.0, 1001)
    ai, ai_prime = airy(x)
    expected_ai, expected_ai_prime, _, _ = scipy.special.airy(x)
    numpy.testing.assert_allclose(ai, expected_ai, rtol=1e-10, atol=0)
    numpy.testing.assert_allclose(ai_prime, expected_ai_prime, rtol=1e-10, atol=0)


def test_agrees_with_scipy_on_the_negative_axis():
    x = numpy.linspace(-30.0, 0.0, 1201)
    ai, ai_prime = airy(x)
    expected_ai, expected_ai_prime, _, _ = scipy.special.airy(x)
    numpy.testing.assert_allclose(ai, expected_ai, rtol=0, atol=1e-11)
    numpy.testing.assert_allclose(ai_prime, expected_ai_prime, rtol=0, atol=1e-10)


@pytest.mark.parametrize(
    "edge", [-ASYMPTOTIC_RADIUS, -SERIES_RADIUS, SERIES_RADIUS, ASYMPTOTIC_RADIUS]
)
def test_branches_agree_at_switch_points(edge):
    below, above = numpy.nextafter(edge, -math.inf), numpy.nextafter(edge, math.inf)
    ai, ai_prime = airy(numpy.array([below, edge, above]))
    if edge > 0:
        assert numpy.ptp(ai) <= 1e-11 * ai[1]
        assert numpy.ptp(ai_prime) <= 1e-11 * abs(ai_prime[1])
    else:
        assert numpy.ptp(ai) <= 1e-11
        assert numpy.ptp(ai_prime) <= 1e-11


def test_strictly_decreasing_and_bounded_on_positive_axis():
    ai, _ = airy(numpy.linspace(0.0, 20.0, 401))
    assert numpy.all(numpy.diff(ai) < 0)
    assert numpy.all(ai > 0)
    assert numpy.all(ai <= AI_0)


def test_underflow_is_zero_not_nan():
    ai, ai_prime = airy(numpy.array([200.0, 1e6]))
    assert numpy.all(ai == 0.0)
    assert numpy.all(ai_prime == 0.0)


def test_finite_everywhere():
    ai, ai_prime = airy(numpy.linspace(-500.0, 500.0, 2001))
    assert numpy.all(numpy.isfinite(ai))
    assert numpy.all(numpy.isfinite(ai_prime))


def test_shape_is_preserved():
    ai, ai_prime = airy(numpy.zeros((2, 3)))
    assert ai.shape == (2, 3)
    assert ai_prime.shape == (2, 3)
    assert numpy.all(ai == AI_0)


@pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
def test_non_finite_input(x):
    with pytest.raises(DomainError):
        airy_ai(x)
    with pytest.raises(DomainError):
        airy(numpy.array([0.0, x]))


def test_anchor_table():
    grid, ai, ai_prime = anchor_table()
    assert grid[0] == -ASYMPTOTIC_RADIUS
    assert grid[-1] == ASYMPTOTIC_RADIUS
    numpy.testing.assert_allclose(numpy.diff(grid), ANCHOR_SPACING)
    assert anchor_table() is anchor_table()
    with pytest.raises(ValueError):
        ai[0] = 1.0
    expected_ai, expected_ai_prime, _, _ = scipy.special.airy(grid)
    numpy.testing.assert_allclose(ai, expected_ai, rtol=1e-11, atol=1e-13)
    numpy.testing.assert_allclose(ai_prime, expected_ai_prime, rtol=1e-11, atol=1e-12)


def test_ode_residual():
    x = numpy.linspace(-10.0, 5.0, 301)
    h = 1e-4
    ai, _ = airy(x)
    above, _ = airy(x + h)
    below, _ = airy(x - h)
    second = (above - 2 * ai + below) / h**2
    assert numpy.max(numpy.abs(second - x * ai)) <= 1e-4


def test_oscillation_amplitude_on_negative_axis():
    x = numpy.linspace(-200.0, -1.0, 4001)
    ai, _ = airy(x)
    assert numpy.all(numpy.abs(ai) <= 0.7 * numpy.abs(x) ** -0.25)
