"""
Double-precision Airy function Ai and its derivative on the real line.

Three regimes:

- ``|x| <= SERIES_RADIUS``: Maclaurin series of the two ODE solutions.
- ``SERIES_RADIUS < |x| <= ASYMPTOTIC_RADIUS``: one Taylor step of
  ``y'' = x y`` from the nearest node of an anchor table.
- ``|x| > ASYMPTOTIC_RADIUS``: asymptotic expansions with exponential
  (x > 0) or trigonometric (x < 0) prefactors.

Positive anchors are propagated backward from the asymptotic values at
``ASYMPTOTIC_RADIUS``, the direction in which Ai is the dominant solution.
Negative anchors are propagated from the series values at ``-SERIES_RADIUS``.
"""

from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy

from airyline.errors import DomainError

logger = logging.getLogger(__name__)

AI_0 = 0.35502805388781723926
AI_PRIME_0 = -0.25881940379280679840

SERIES_RADIUS = 2.0
ASYMPTOTIC_RADIUS = 9.0
ANCHOR_SPACING = 0.25

_SERIES_TERMS = 25
_TAYLOR_TERMS = 30
_ASYMPTOTIC_TERMS = 34

_SQRT_PI = math.sqrt(math.pi)
_LOG_TINY = math.log(numpy.finfo(float).tiny)


@dataclass(frozen=True)
class AiryValue:
    ai: float
    ai_prime: float


def _asymptotic_coefficients():
    u = [1.0]
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        u.append(
            u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        )
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, len(u))]
    return numpy.array(u), numpy.array(v)


_U, _V = _asymptotic_coefficients()


def _maclaurin(x: numpy.ndarray):
    x3 = x * x * x
    f_term = numpy.ones_like(x)
    g_term = x.copy()
    fp_term = x * x / 2
    gp_term = numpy.ones_like(x)
    f, g, fp, gp = f_term.copy(), g_term.copy(), fp_term.copy(), gp_term.copy()
    for k in range(1, _SERIES_TERMS):
        f_term = f_term * x3 / ((3 * k - 1) * (3 * k))
        g_term = g_term * x3 / ((3 * k) * (3 * k + 1))
        gp_term = gp_term * x3 / ((3 * k - 2) * (3 * k))
        f += f_term
        g += g_term
        gp += gp_term
        if k >= 2:
            fp_term = fp_term * x3 / ((3 * k - 3) * (3 * k - 1))
            fp += fp_term
    return AI_0 * f + AI_PRIME_0 * g, AI_0 * fp + AI_PRIME_0 * gp


def _taylor_step(x0, y0, yp0, h):
    """
    Advances (y, y') of a solution of y'' = x y from x0 to x0 + h.
    """
    a_prev, a_curr = numpy.zeros_like(y0), y0  # a_{n-1}, a_n
    a_next = yp0
    y = y0.copy()
    yp = numpy.zeros_like(y0)
    h_pow = numpy.ones_like(h)  # h^(n-1)
    for n in range(1, _TAYLOR_TERMS):
        # a_next is a_n here; a_curr is a_{n-1}, a_prev is a_{n-2}
        yp += n * a_next * h_pow
        h_pow = h_pow * h
        y += a_next * h_pow
        a_prev, a_curr, a_next = (
            a_curr,
            a_next,
            (x0 * a_curr + a_prev) / ((n + 1) * n),
        )
    return y, yp


def _asymptotic_positive(x: numpy.ndarray):
    with numpy.errstate(over="ignore"):
        zeta = 2.0 / 3.0 * x**1.5
    inv = -1.0 / zeta
    powers = inv[None, :] ** numpy.arange(_ASYMPTOTIC_TERMS)[:, None]
    su = _U[:_ASYMPTOTIC_TERMS] @ powers
    sv = _V[:_ASYMPTOTIC_TERMS] @ powers
    quarter = x**0.25
    log_scale = -zeta - math.log(2 * _SQRT_PI)
    underflow = log_scale - numpy.log(quarter) < _LOG_TINY
    scale = numpy.where(underflow, 0.0, numpy.exp(numpy.maximum(log_scale, _LOG_TINY)))
    return scale / quarter * su, -scale * quarter * sv


def _asymptotic_negative(x: numpy.ndarray):
    z = -x
    with numpy.errstate(over="ignore"):
        zeta = 2.0 / 3.0 * z**1.5
    phase = numpy.where(numpy.isfinite(zeta), zeta - math.pi / 4, 0.0)
    cos, sin = numpy.cos(phase), numpy.sin(phase)
    inv = 1.0 / numpy.where(numpy.isfinite(zeta), zeta, 1.0)
    even = numpy.arange(0, _ASYMPTOTIC_TERMS, 2)
    odd = even + 1
    signs = (-1.0) ** numpy.arange(len(even))
    p_even = inv[None, :] ** even[:, None]
    p_odd = inv[None, :] ** odd[:, None]
    u_even = (signs * _U[even]) @ p_even
    u_odd = (signs * _U[odd]) @ p_odd
    v_even = (signs * _V[even]) @ p_even
    v_odd = (signs * _V[odd]) @ p_odd
    quarter = z**0.25
    ai = (cos * u_even + sin * u_odd) / (_SQRT_PI * quarter)
    ai_prime = quarter * (sin * v_even - cos * v_odd) / _SQRT_PI
    return ai, ai_prime


@lru_cache(maxsize=None)
def anchor_table():
    """
    Ai and Ai' on the grid ``-ASYMPTOTIC_RADIUS, ..., ASYMPTOTIC_RADIUS``
    with spacing ``ANCHOR_SPACING``. Built once, read-only afterwards.
    """
    count = int(round(ASYMPTOTIC_RADIUS / ANCHOR_SPACING))
    grid = numpy.arange(-count, count + 1) * ANCHOR_SPACING
    ai = numpy.empty_like(grid)
    ai_prime = numpy.empty_like(grid)

    central = numpy.abs(grid) <= SERIES_RADIUS
    ai[central], ai_prime[central] = _maclaurin(grid[central])

    step = numpy.array([-ANCHOR_SPACING])
    top = numpy.array([ASYMPTOTIC_RADIUS])
    y, yp = _asymptotic_positive(top)
    ai[-1], ai_prime[-1] = y[0], yp[0]
    for i in range(len(grid) - 2, -1, -1):
        if grid[i] <= SERIES_RADIUS:
            break
        y, yp = _taylor_step(numpy.array([grid[i + 1]]), y, yp, step)
        ai[i], ai_prime[i] = y[0], yp[0]

    start = numpy.searchsorted(grid, -SERIES_RADIUS)
    y, yp = ai[start : start + 1].copy(), ai_prime[start : start + 1].copy()
    for i in range(start - 1, -1, -1):
        y, yp = _taylor_step(numpy.array([grid[i + 1]]), y, yp, step)
        ai[i], ai_prime[i] = y[0], yp[0]

    logger.debug("built Airy anchor table with %d nodes", len(grid))
    grid.setflags(write=False)
    ai.setflags(write=False)
    ai_prime.setflags(write=False)
    return grid, ai, ai_prime


def airy(x):
    """
    Vectorised Ai and Ai'. Accepts scalars or arrays, returns two float
    arrays of the same shape.

    >>> ai, ai_prime = airy(numpy.linspace(-5, 5, 11))
    """
    x = numpy.asarray(x, dtype=float)
    if not numpy.all(numpy.isfinite(x)):
        raise DomainError("Airy function requires finite arguments")

    flat = x.ravel()
    ai = numpy.empty_like(flat)
    ai_prime = numpy.empty_like(flat)

    series = numpy.abs(flat) <= SERIES_RADIUS
    right = flat > ASYMPTOTIC_RADIUS
    left = flat < -ASYMPTOTIC_RADIUS
    band = ~(series | right | left)

    if series.any():
        ai[series], ai_prime[series] = _maclaurin(flat[series])
    if right.any():
        ai[right], ai_prime[right] = _asymptotic_positive(flat[right])
    if left.any():
        ai[left], ai_prime[left] = _asymptotic_negative(flat[left])
    if band.any():
        grid, grid_ai, grid_ai_prime = anchor_table()
        index = numpy.rint((flat[band] - grid[0]) / ANCHOR_SPACING).astype(int)
        x0 = grid[index]
        ai[band], ai_prime[band] = _taylor_step(
            x0, grid_ai[index].copy(), grid_ai_prime[index].copy(), flat[band] - x0
        )

    return ai.reshape(x.shape), ai_prime.reshape(x.shape)


def airy_ai(x: float) -> AiryValue:
    """
    Ai(x) and Ai'(x) for a single finite real x.

    >>> airy_ai(0.0)
    AiryValue(ai=0.3550280538878172, ai_prime=-0.2588194037928068)
    """
    if not math.isfinite(x):
        raise DomainError(f"Airy function requires a finite argument, got {x}")
    ai, ai_prime = airy(numpy.array([x], dtype=float))
    return AiryValue(float(ai[0]), float(ai_prime[0]))
