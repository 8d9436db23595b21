"""
Point and block evaluation of the Airy2 kernel and the extended Airy2 kernel.

Blocks are the unit of work: for a fixed time gap every entry of
``K_ext(s, xs; t, ys)`` shares one quadrature rule in the spectral variable,
so a block is ``Ai(X + λ) · diag(w) · Ai(Y + λ)ᵀ`` and costs one matrix product.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import logging
import math
from typing import Tuple

import numpy

from airyline.errors import AccuracyError, DomainError
from airyline.quadrature import composite_gauss_legendre
from airyline.special_functions import airy

logger = logging.getLogger(__name__)

DIAGONAL_BAND = 1e-4
KERNEL_TOLERANCE = 1e-10
DAMPING_CUTOFF = 1e-16
GAP_RESOLUTION = 2.0**-40

PANEL_NODES = 16
MAX_REFINEMENTS = 4
MAX_SPECTRAL_NODES = 400_000
_CHUNK = 4096

LAGUERRE_MIN_GAP = 2.0
LAGUERRE_ORDERS = (64, 128)


class ProjectionSide(str, Enum):
    """
    Which spectral half of the Airy Hamiltonian a semigroup block acts on.

    NEGATIVE is ``e^{-gap H} K2`` (the range of K2), POSITIVE is
    ``e^{-gap H} (I - K2)``.
    """

    NEGATIVE = "neg"
    POSITIVE = "pos"


@dataclass(frozen=True)
class SpaceTimePoint:
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise DomainError(f"space-time point must be finite, got ({self.t}, {self.x})")


@dataclass(frozen=True)
class KernelEstimate:
    value: float
    error_estimate: float


def _finite_array(values, name: str) -> numpy.ndarray:
    array = numpy.atleast_1d(numpy.asarray(values, dtype=float))
    if not numpy.all(numpy.isfinite(array)):
        raise DomainError(f"{name} must be finite")
    return array


def time_gap(s: float, t: float) -> float:
    """
    ``s - t`` snapped to a grid of ``GAP_RESOLUTION``, so the kernel depends
    on the gap alone and a global time shift leaves it bit-identical.
    """
    if not (math.isfinite(s) and math.isfinite(t)):
        raise DomainError(f"times must be finite, got s={s}, t={t}")
    return round((s - t) / GAP_RESOLUTION) * GAP_RESOLUTION


def k2_diagonal(x) -> numpy.ndarray:
    """K2(x, x) = Ai'(x)² - x Ai(x)²."""
    x = _finite_array(x, "x")
    ai, ai_prime = airy(x)
    return ai_prime * ai_prime - x * ai * ai


def diagonal_tail(u: float) -> float:
    """
    ∫_u^∞ K2(x, x) dx in closed form: the expected number of particles of
    the Airy2 point process in (u, ∞).
    """
    ai, ai_prime = airy(_finite_array(u, "u"))
    u = float(u)
    value = (
        2.0 / 3.0 * u * u * ai[0] * ai[0]
        - 2.0 / 3.0 * u * ai_prime[0] * ai_prime[0]
        - ai[0] * ai_prime[0] / 3.0
    )
    return float(max(value, 0.0))


def k2_matrix(xs, ys) -> numpy.ndarray:
    """
    ``[K2(x, y)]`` for all x in ``xs`` and y in ``ys``.

    Off the diagonal band the closed form
    ``(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)`` is used; within
    ``DIAGONAL_BAND`` a Taylor expansion in ``x - y`` about the midpoint
    (odd orders vanish).
    """
    xs = _finite_array(xs, "x")
    ys = _finite_array(ys, "y")
    ai_x, aip_x = airy(xs)
    ai_y, aip_y = airy(ys)

    diff = xs[:, None] - ys[None, :]
    near = numpy.abs(diff) <= DIAGONAL_BAND
    safe = numpy.where(near, 1.0, diff)
    out = (ai_x[:, None] * aip_y[None, :] - aip_x[:, None] * ai_y[None, :]) / safe

    if near.any():
        rows, cols = numpy.nonzero(near)
        mid = 0.5 * (xs[rows] + ys[cols])
        d = diff[rows, cols]
        p, q = airy(mid)
        diagonal = q * q - mid * p * p
        curvature = 2.0 / 3.0 * mid * q * q - 2.0 / 3.0 * mid * mid * p * p + p * q / 3.0
        out[rows, cols] = diagonal + 0.25 * d * d * curvature

    return out


def k2(x: float, y: float) -> float:
    """
    The Airy2 kernel K2(x, y) = ∫_0^∞ Ai(x+λ) Ai(y+λ) dλ.

    >>> k2(0.0, 0.0)  # Ai'(0)²
    0.06698748377966...
    """
    return float(k2_matrix([x], [y])[0, 0])


def _envelope_log(argument: float) -> float:
    if argument <= 0:
        return 0.0
    return -2.0 / 3.0 * argument**1.5


def _truncation_length(gap: float, floor_x: float, floor_y: float, direction: int) -> float:
    """
    Smallest Λ beyond which ``e^{-λ gap} |Ai(x + dir λ) Ai(y + dir λ)|`` stays
    below ``DAMPING_CUTOFF`` for every x ≥ floor_x, y ≥ floor_y.
    """
    target = math.log(DAMPING_CUTOFF)

    def log_bound(lam):
        return (
            -lam * gap
            + _envelope_log(floor_x + direction * lam)
            + _envelope_log(floor_y + direction * lam)
        )

    if direction < 0 and gap <= 0:
        raise DomainError("the s < t branch needs a strictly positive time gap")

    upper = 1.0
    while log_bound(upper) > target:
        upper *= 2.0
        if upper > 1e8:
            raise AccuracyError("spectral integral does not decay", error_estimate=math.inf)
    lower = 0.0
    for _ in range(40):
        middle = 0.5 * (lower + upper)
        if log_bound(middle) > target:
            lower = middle
        else:
            upper = middle
    return upper


def _panel_edges(length: float, floor: float, direction: int) -> numpy.ndarray:
    """
    Panel boundaries on [0, length], each panel at most one local Airy
    wavelength 2π / |a|^{1/2} wide (and never wider than 1).
    """
    edges = [0.0]
    while edges[-1] < length:
        start = edges[-1]
        probe = start if direction > 0 else start + 1.0
        argument = floor + direction * probe
        width = 1.0
        if argument < 0:
            width = min(1.0, 2.0 * math.pi / math.sqrt(-argument))
        edges.append(min(start + width, length))
        if len(edges) * PANEL_NODES > MAX_SPECTRAL_NODES:
            raise AccuracyError(
                f"spectral rule would exceed {MAX_SPECTRAL_NODES} nodes "
                + f"(integration length {length:.3g})",
                error_estimate=math.inf,
            )
    return numpy.array(edges)


def _refine(edges: numpy.ndarray, level: int) -> numpy.ndarray:
    if level == 0:
        return edges
    pieces = 2**level
    fractions = numpy.arange(pieces) / pieces
    left = edges[:-1, None]
    width = numpy.diff(edges)[:, None]
    inner = (left + width * fractions[None, :]).ravel()
    return numpy.append(inner, edges[-1])


def _spectral_product(xs, ys, lam, weights, direction: int) -> numpy.ndarray:
    same = xs.shape == ys.shape and numpy.array_equal(xs, ys)
    out = numpy.zeros((len(xs), len(ys)))
    for start in range(0, len(lam), _CHUNK):
        part = slice(start, start + _CHUNK)
        shift = direction * lam[part]
        a, _ = airy(xs[:, None] + shift[None, :])
        b = a if same else airy(ys[:, None] + shift[None, :])[0]
        out += (a * weights[part][None, :]) @ b.T
    return out


@lru_cache(maxsize=None)
def _laguerre(order: int):
    nodes, weights = numpy.polynomial.laguerre.laggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _laguerre_block(gap: float, xs, ys, tol: float):
    values = []
    for order in LAGUERRE_ORDERS:
        nodes, weights = _laguerre(order)
        values.append(_spectral_product(xs, ys, nodes / gap, weights / gap, +1))
    error = float(numpy.max(numpy.abs(values[1] - values[0])))
    if error <= tol:
        return values[1], error
    logger.debug("Gauss-Laguerre disagreement %.2e at gap %g, using panels", error, gap)
    return None


def damped_spectral_block(
    gap: float, xs, ys, direction: int, tol: float = KERNEL_TOLERANCE
) -> Tuple[numpy.ndarray, float]:
    """
    ``∫_0^∞ e^{-λ gap} Ai(x + dir λ) Ai(y + dir λ) dλ`` for all pairs, with
    an error estimate from panel doubling.

    ``direction=+1`` is the range of K2 (non-oscillatory once x + λ > 0),
    ``direction=-1`` its complement (oscillatory, damped only by the gap).
    """
    xs = _finite_array(xs, "x")
    ys = _finite_array(ys, "y")
    if gap < 0:
        raise DomainError(f"time gap must be nonnegative, got {gap}")

    if direction > 0 and gap >= LAGUERRE_MIN_GAP and min(xs.min(), ys.min()) >= 0:
        fast = _laguerre_block(gap, xs, ys, tol)
        if fast is not None:
            return fast

    floor_x, floor_y = float(xs.min()), float(ys.min())
    length = _truncation_length(gap, floor_x, floor_y, direction)
    edges = _panel_edges(length, min(floor_x, floor_y), direction)

    previous = None
    error = math.inf
    for level in range(MAX_REFINEMENTS + 1):
        rule = composite_gauss_legendre(_refine(edges, level), PANEL_NODES)
        weights = rule.weights * numpy.exp(-gap * rule.nodes)
        current = _spectral_product(xs, ys, rule.nodes, weights, direction)
        if previous is not None:
            error = float(numpy.max(numpy.abs(current - previous)))
            if error <= tol:
                logger.debug(
                    "spectral block gap=%g dir=%+d: %d nodes, error %.2e",
                    gap,
                    direction,
                    len(rule.nodes),
                    error,
                )
                return current, error
        previous = current
    raise AccuracyError(
        f"spectral quadrature (gap {gap:g}) did not reach tolerance {tol:g}",
        value=previous,
        error_estimate=error,
    )


def k2_by_quadrature(xs, ys, tol: float = KERNEL_TOLERANCE) -> numpy.ndarray:
    """The defining integral of K2, evaluated by quadrature."""
    values, _ = damped_spectral_block(0.0, xs, ys, +1, tol)
    return values


def extended_kernel_block(
    s: float, xs, t: float, ys, tol: float = KERNEL_TOLERANCE
) -> Tuple[numpy.ndarray, float]:
    """
    ``[K_ext(s, x; t, y)]`` for x in ``xs`` and y in ``ys`` plus an absolute
    error estimate.

    For s ≥ t: ``∫_0^∞ e^{-λ(s-t)} Ai(x+λ) Ai(y+λ) dλ`` (K2 itself at s = t).
    For s < t: ``-∫_0^∞ e^{-μ(t-s)} Ai(x-μ) Ai(y-μ) dμ``.
    """
    gap = time_gap(s, t)
    if gap == 0:
        return k2_matrix(xs, ys), 0.0
    if gap > 0:
        return damped_spectral_block(gap, xs, ys, +1, tol)
    values, error = damped_spectral_block(-gap, xs, ys, -1, tol)
    return -values, error


def k2_ext_estimate(s: float, x: float, t: float, y: float) -> KernelEstimate:
    values, error = extended_kernel_block(s, [x], t, [y])
    return KernelEstimate(float(values[0, 0]), error)


def k2_ext(s: float, x: float, t: float, y: float) -> float:
    """
    The extended Airy2 kernel at (s, x; t, y).

    >>> k2_ext(1.0, 0.0, 1.0, 0.0) == k2(0.0, 0.0)
    True
    """
    return k2_ext_estimate(s, x, t, y).value


def semigroup_matrix(
    gap: float, side: ProjectionSide, xs, ys, tol: float = KERNEL_TOLERANCE
) -> Tuple[numpy.ndarray, float]:
    side = ProjectionSide(side)
    if not math.isfinite(gap) or gap < 0:
        raise DomainError(f"semigroup gap must be finite and nonnegative, got {gap}")
    if side is ProjectionSide.NEGATIVE:
        return extended_kernel_block(gap, xs, 0.0, ys, tol)
    if gap == 0:
        raise DomainError("e^{-gap H}(I - K2) has no kernel at gap 0 (identity part)")
    values, error = extended_kernel_block(0.0, xs, gap, ys, tol)
    return -values, error


def semigroup_block(gap: float, side: ProjectionSide, x: float, y: float) -> float:
    """
    Kernel of ``e^{-gap H} K2`` (NEGATIVE) or ``e^{-gap H} (I - K2)``
    (POSITIVE) at (x, y). At gap 0 the POSITIVE operator is I - K2, whose
    identity part has no kernel, so that case raises ``DomainError``.
    """
    values, _ = semigroup_matrix(gap, side, [x], [y])
    return float(values[0, 0])
