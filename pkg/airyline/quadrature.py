"""
Gauss rules and the interval maps used for Nyström discretisation.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
import math
from typing import Optional

import numpy

from airyline.errors import ConfigError, DomainError

MAX_NODES = 2048
MIN_WIDTH = 1e-12
UNIT_DISK_SLACK = 1e-12


@dataclass(frozen=True)
class IntervalSpec:
    """
    An interval ``(lower, upper)`` on the line at a fixed time, with the
    generating-function weight ``weight_z`` attached to its particle count.
    ``upper`` may be ``math.inf``; ``lower`` must be finite.
    """

    time: float
    lower: float
    upper: float
    weight_z: complex = 0j

    def __post_init__(self):
        if not math.isfinite(self.time):
            raise ConfigError(f"interval time must be finite, got {self.time}")
        if not math.isfinite(self.lower):
            raise ConfigError(
                f"interval lower endpoint must be finite (M0 < inf), got {self.lower}"
            )
        if math.isnan(self.upper) or self.upper == -math.inf:
            raise ConfigError(f"invalid upper endpoint {self.upper}")
        if not self.upper > self.lower:
            raise ConfigError(
                f"interval ({self.lower}, {self.upper}) must have lower < upper"
            )
        if self.upper - self.lower < MIN_WIDTH:
            raise ConfigError(
                f"interval ({self.lower}, {self.upper}) is degenerate "
                + f"(width below {MIN_WIDTH})"
            )
        z = complex(self.weight_z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ConfigError(f"weight z must be finite, got {z}")
        if abs(z) > 1.0 + UNIT_DISK_SLACK:
            raise ConfigError(f"|z| exceeds 1: z = {z}")
        object.__setattr__(self, "weight_z", z)

    @property
    def semi_infinite(self) -> bool:
        return math.isinf(self.upper)

    def effective_upper(self, truncation_L: Optional[float] = None) -> float:
        if not self.semi_infinite:
            return self.upper
        if truncation_L is None or truncation_L <= 0:
            raise DomainError("semi-infinite intervals need a positive truncation length")
        return self.lower + truncation_L

    def overlaps(self, other: "IntervalSpec") -> bool:
        return self.lower < other.upper and other.lower < self.upper

    def shifted(self, c: float) -> "IntervalSpec":
        return replace(self, time=self.time + c)

    def with_z(self, z: complex) -> "IntervalSpec":
        return replace(self, weight_z=z)

    def __str__(self):
        upper = "inf" if self.semi_infinite else f"{self.upper:g}"
        return f"({self.lower:g}, {upper}) at t={self.time:g}"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: numpy.ndarray
    weights: numpy.ndarray
    parent: Optional[IntervalSpec] = None
    lower: float = -1.0
    upper: float = 1.0

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values) -> float:
        return numpy.dot(self.weights, values)


def _legendre_with_derivative(n: int, x: numpy.ndarray):
    p_prev = numpy.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    if n == 0:
        return p_prev, numpy.zeros_like(x)
    derivative = n * (x * p - p_prev) / (x * x - 1.0)
    return p, derivative


@lru_cache(maxsize=None)
def _gauss_legendre_cached(n: int):
    k = numpy.arange(1, n + 1)
    x = numpy.cos(numpy.pi * (4 * k - 1) / (4 * n + 2))
    for _ in range(100):
        p, dp = _legendre_with_derivative(n, x)
        step = p / dp
        x = x - step
        if numpy.max(numpy.abs(step)) < 1e-16:
            break
    _, dp = _legendre_with_derivative(n, x)
    weights = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1]
    weights = weights[::-1]
    # exact symmetry about 0
    x = 0.5 * (x - x[::-1])
    weights = 0.5 * (weights + weights[::-1])
    x.setflags(write=False)
    weights.setflags(write=False)
    return x, weights


def gauss_legendre(n: int) -> QuadratureRule:
    """
    n-point Gauss-Legendre rule on [-1, 1]: Newton iteration on the
    three-term recurrence, started from Chebyshev-like guesses.
    Exact for polynomials up to degree 2n - 1.

    >>> rule = gauss_legendre(5)
    >>> rule.integrate(rule.nodes**8)  # 2/9
    """
    if not isinstance(n, (int, numpy.integer)) or not 1 <= n <= MAX_NODES:
        raise DomainError(f"Gauss-Legendre order must be in [1, {MAX_NODES}], got {n}")
    nodes, weights = _gauss_legendre_cached(int(n))
    return QuadratureRule(nodes, weights)


def map_interval(
    rule: QuadratureRule, spec: IntervalSpec, truncation_L: Optional[float] = None
) -> QuadratureRule:
    """
    Affine map of a [-1, 1] rule onto ``spec``. Semi-infinite intervals are
    truncated to ``[lower, lower + truncation_L]``.
    """
    upper = spec.effective_upper(truncation_L)
    half = 0.5 * (upper - spec.lower)
    nodes = spec.lower + half * (numpy.asarray(rule.nodes) + 1.0)
    weights = half * numpy.asarray(rule.weights)
    return QuadratureRule(nodes, weights, parent=spec, lower=spec.lower, upper=upper)


def composite_gauss_legendre(edges, n: int) -> QuadratureRule:
    """
    n-point Gauss-Legendre on every panel ``[edges[i], edges[i+1]]``.
    """
    edges = numpy.asarray(edges, dtype=float)
    base = gauss_legendre(n)
    left = edges[:-1, None]
    half = 0.5 * numpy.diff(edges)[:, None]
    nodes = (left + half * (base.nodes[None, :] + 1.0)).ravel()
    weights = (half * base.weights[None, :]).ravel()
    return QuadratureRule(nodes, weights, lower=float(edges[0]), upper=float(edges[-1]))
