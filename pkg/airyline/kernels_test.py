import math

import numpy
import pytest
import scipy.integrate
import scipy.special

from airyline.errors import DomainError
from airyline.kernels import (
    DIAGONAL_BAND,
    ProjectionSide,
    SpaceTimePoint,
    diagonal_tail,
    extended_kernel_block,
    k2,
    k2_by_quadrature,
    k2_ext,
    k2_ext_estimate,
    k2_matrix,
    semigroup_block,
    time_gap,
)

AI_PRIME_0_SQUARED = 0.066987483779663987


def test_k2_at_origin():
    assert k2(0.0, 0.0) == pytest.approx(AI_PRIME_0_SQUARED, abs=1e-15)


@pytest.mark.parametrize("x,y", [(0.3, -1.7), (2.0, 5.0), (-4.0, -3.0)])
def test_k2_symmetric(x, y):
    assert k2(x, y) == k2(y, x)


def test_k2_decays():
    value = k2(8.0, 8.0)
    assert 0 < value < 1e-10


def test_k2_closed_form_off_diagonal():
    x, y = 1.0, -1.0
    (ai_x, aip_x, _, _), (ai_y, aip_y, _, _) = scipy.special.airy(x), scipy.special.airy(y)
    expected = (ai_x * aip_y - aip_x * ai_y) / (x - y)
    assert k2(x, y) == pytest.approx(expected, abs=1e-14)


def test_k2_diagonal_band_matches_closed_form():
    x = 0.7
    y = x + 0.9 * DIAGONAL_BAND
    (ai_x, aip_x, _, _), (ai_y, aip_y, _, _) = scipy.special.airy(x), scipy.special.airy(y)
    closed = (ai_x * aip_y - aip_x * ai_y) / (x - y)
    assert k2(x, y) == pytest.approx(closed, abs=1e-11)
    assert k2(x, x) == pytest.approx(k2(x + 1e-9, x), abs=1e-10)


def test_k2_matrix_shape():
    assert k2_matrix([0.0, 1.0, 2.0], [0.5, -0.5]).shape == (3, 2)


def test_k2_against_defining_integral():
    grid = numpy.linspace(-6.0, 4.0, 20)
    closed = k2_matrix(grid, grid)
    integral = k2_by_quadrature(grid, grid)
    assert numpy.max(numpy.abs(closed - integral)) <= 1e-9


@pytest.mark.parametrize("x,y", [(0.0, 0.0), (-1.0, 0.5)])
def test_k2_against_scipy_quad(x, y):
    def integrand(lam):
        return scipy.special.airy(x + lam)[0] * scipy.special.airy(y + lam)[0]

    expected, _ = scipy.integrate.quad(integrand, 0, 40, limit=400, epsabs=1e-13, epsrel=1e-12)
    assert k2(x, y) == pytest.approx(expected, abs=1e-10)


def test_diagonal_tail():
    assert diagonal_tail(0.0) == pytest.approx(0.030629383078988447, abs=1e-15)
    expected, _ = scipy.integrate.quad(
        lambda x: float(k2_matrix([x], [x])[0, 0]),
        -2.0,
        30.0,
        limit=400,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    assert diagonal_tail(-2.0) == pytest.approx(expected, abs=1e-9)
    assert diagonal_tail(6.0) < 1e-6
    assert 0.0 <= diagonal_tail(40.0) < 1e-100


def test_k2_ext_reduces_to_k2_at_equal_times():
    assert k2_ext(3.0, 0.4, 3.0, -0.2) == k2(0.4, -0.2)


def test_k2_ext_depends_on_gaps_only():
    c = 3.7
    assert k2_ext(1.0 + c, 0.3, 0.0 + c, -0.4) == k2_ext(1.0, 0.3, 0.0, -0.4)
    assert k2_ext(0.0 + c, 0.3, 2.0 + c, -0.4) == k2_ext(0.0, 0.3, 2.0, -0.4)


def test_time_gap_snaps():
    assert time_gap(1.0 + 3.7, 0.0 + 3.7) == time_gap(1.0, 0.0)
    assert time_gap(1e-15, 0.0) == 0.0
    with pytest.raises(DomainError):
        time_gap(math.inf, 0.0)


def test_k2_ext_damped():
    later = k2_ext(5.0, 0.0, 0.0, 0.0)
    sooner = k2_ext(1.0, 0.0, 0.0, 0.0)
    assert 0 < later < sooner < k2(0.0, 0.0)


def test_k2_ext_against_scipy_quad():
    gap, x, y = 1.5, 0.2, -0.6

    def integrand(lam):
        ai_x, ai_y = scipy.special.airy(x + lam)[0], scipy.special.airy(y + lam)[0]
        return math.exp(-gap * lam) * ai_x * ai_y

    expected, _ = scipy.integrate.quad(integrand, 0, 40, limit=400, epsabs=1e-13, epsrel=1e-12)
    estimate = k2_ext_estimate(gap, x, 0.0, y)
    assert estimate.value == pytest.approx(expected, abs=1e-10)
    assert estimate.error_estimate <= 1e-10


def test_k2_ext_backward_branch_against_scipy_quad():
    gap, x, y = 2.0, 0.5, -1.0

    def integrand(mu):
        return math.exp(-gap * mu) * scipy.special.airy(x - mu)[0] * scipy.special.airy(y - mu)[0]

    expected, _ = scipy.integrate.quad(integrand, 0, 25, limit=800, epsabs=1e-13, epsrel=1e-12)
    assert k2_ext(0.0, x, gap, y) == pytest.approx(-expected, abs=1e-10)


def test_gauss_laguerre_path_matches_panels():
    xs = numpy.array([0.0, 0.5, 2.0])
    fast, _ = extended_kernel_block(3.0, xs, 0.0, xs)
    below = numpy.append(xs, -0.01)
    panels, _ = extended_kernel_block(3.0, below, 0.0, below)
    numpy.testing.assert_allclose(fast, panels[:3, :3], atol=1e-10)


def test_semigroup_sides():
    assert semigroup_block(2.0, ProjectionSide.NEGATIVE, 0.5, -0.5) == k2_ext(2.0, 0.5, 0.0, -0.5)
    assert semigroup_block(2.0, "pos", 0.5, -0.5) == -k2_ext(0.0, 0.5, 2.0, -0.5)
    assert semigroup_block(0.0, "neg", 0.5, -0.5) == k2(0.5, -0.5)


def test_semigroup_positive_side_damped():
    near = semigroup_block(1.0, ProjectionSide.POSITIVE, -1.0, -1.0)
    far = semigroup_block(10.0, ProjectionSide.POSITIVE, -1.0, -1.0)
    assert 0 < far < near


def test_semigroup_errors():
    with pytest.raises(DomainError, match="gap 0"):
        semigroup_block(0.0, ProjectionSide.POSITIVE, 0.0, 0.0)
    with pytest.raises(DomainError):
        semigroup_block(-1.0, ProjectionSide.NEGATIVE, 0.0, 0.0)
    with pytest.raises(ValueError):
        semigroup_block(1.0, "sideways", 0.0, 0.0)


def test_non_finite_arguments():
    with pytest.raises(DomainError):
        k2(math.nan, 0.0)
    with pytest.raises(DomainError):
        k2_ext(0.0, math.inf, 1.0, 0.0)
    with pytest.raises(DomainError):
        SpaceTimePoint(0.0, math.nan)


def test_diagonal_continuity():
    for x in numpy.linspace(-5.0, 5.0, 11):
        for h in (1e-3, -1e-3, 1e-5, 1e-7):
            assert abs(k2(x, x + h) - k2(x, x)) <= 10 * abs(h)


def test_gram_matrix_is_positive_semidefinite():
    points = numpy.random.default_rng(12).uniform(-6.0, 4.0, 12)
    eigenvalues = numpy.linalg.eigvalsh(k2_matrix(points, points))
    assert eigenvalues.min() >= -1e-10


def test_discretised_projection_has_spectrum_in_unit_interval():
    nodes, weights = scipy.special.roots_legendre(48)
    lower, upper = -8.0, 2.0
    x = 0.5 * (upper - lower) * nodes + 0.5 * (upper + lower)
    root = numpy.sqrt(0.5 * (upper - lower) * weights)
    eigenvalues = numpy.linalg.eigvalsh(root[:, None] * k2_matrix(x, x) * root[None, :])
    assert eigenvalues.min() >= -1e-8
    assert eigenvalues.max() <= 1 + 1e-8
