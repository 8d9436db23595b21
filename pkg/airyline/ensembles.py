"""
Monte Carlo side: avoiding Brownian line ensembles on a uniform time grid,
Gibbs window resampling, the parabolic shift between Airy and Gibbs
coordinates, and a random-matrix sampler for the Tracy-Widom edge.

Avoidance is imposed at grid times only. Curves are indexed from the top,
``values[..., 0, :]`` being the highest.
"""

from dataclasses import dataclass, replace
from enum import Enum
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy
import scipy.linalg

from airyline.checks import Check, match_sample
from airyline.errors import ConfigError, DomainError, InfeasibleError, NumericError
from airyline.util.parallel import parallel_map
from airyline.util.rng import RngStream

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

INFEASIBLE_ACCEPTANCE = 1e-6
PILOT_PROPOSALS = 200_000
MAX_PROPOSALS = 50_000_000
PROPOSAL_CHUNK = 16_384
SAMPLE_CHUNK = 2_500
GUE_CHUNK = 5_000
MIN_GUE_N = 50
MAX_GUE_N = 2000


class Method(str, Enum):
    REJECTION = "rejection"
    MCMC = "mcmc"


class Direction(str, Enum):
    TO_GIBBS = "to_gibbs"
    TO_AIRY = "to_airy"


class Coordinates(str, Enum):
    GIBBS = "gibbs"
    AIRY = "airy"


@dataclass(frozen=True)
class UniformGrid:
    """
    ``start + step * i`` for i = 0..intervals. Samplers only look at
    ``step``, so shifting ``start`` leaves every draw unchanged.
    """

    start: float
    step: float
    intervals: int

    def __post_init__(self):
        if not isinstance(self.intervals, (int, numpy.integer)) or self.intervals < 1:
            raise DomainError(f"a grid needs at least 2 points, got {self.intervals} intervals")
        if not (math.isfinite(self.start) and math.isfinite(self.step) and self.step > 0):
            raise DomainError("grid start and step must be finite with step > 0")

    @staticmethod
    def between(a: float, b: float, intervals: int) -> "UniformGrid":
        if not b > a:
            raise DomainError(f"grid needs a < b, got [{a}, {b}]")
        return UniformGrid(float(a), (b - a) / intervals, int(intervals))

    @property
    def points(self) -> numpy.ndarray:
        return self.start + self.step * numpy.arange(self.intervals + 1)

    @property
    def offsets(self) -> numpy.ndarray:
        return self.step * numpy.arange(self.intervals + 1)

    def shifted(self, shift: float) -> "UniformGrid":
        return replace(self, start=self.start + shift)

    def __len__(self):
        return self.intervals + 1


def as_grid(grid) -> UniformGrid:
    if isinstance(grid, UniformGrid):
        return grid
    points = numpy.asarray(grid, dtype=float)
    if points.ndim != 1 or len(points) < 2:
        raise DomainError("a grid needs at least 2 points")
    candidate = UniformGrid.between(points[0], points[-1], len(points) - 1)
    if not numpy.allclose(candidate.points, points, rtol=0, atol=1e-9 * candidate.step):
        raise DomainError("ensembles live on uniform grids")
    return candidate


@dataclass(frozen=True)
class McmcSchedule:
    """
    Heat-bath schedule. ``thinning=None`` measures the integrated
    autocorrelation time of the top curve's midpoint over a pilot run and
    thins by twice that (never below ``min_thinning``).
    """

    burn_in: int = 100_000
    thinning: Optional[int] = None
    chains: int = 32
    min_thinning: int = 10
    pilot_sweeps: int = 2_000

    def __post_init__(self):
        if self.burn_in < 0 or self.chains < 1 or self.min_thinning < 1:
            raise ConfigError("MCMC schedule needs burn_in >= 0, chains >= 1, thinning >= 1")
        if self.thinning is not None and self.thinning < 1:
            raise ConfigError(f"thinning must be positive, got {self.thinning}")


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """
    k curves on a uniform grid with barriers ``upper`` (f) above and
    ``lower`` (g) below, strictly ordered at every grid time.
    """

    grid: UniformGrid
    values: numpy.ndarray
    upper: numpy.ndarray
    lower: numpy.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.grid):
            raise ConfigError(f"values must have shape (k, {len(self.grid)})")
        if not _ordered(self.values[None], self.upper[None], self.lower[None])[0]:
            raise ConfigError("curves must be strictly ordered between the barriers")

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def entrance(self) -> numpy.ndarray:
        return self.values[:, 0]

    @property
    def exit(self) -> numpy.ndarray:
        return self.values[:, -1]


@dataclass(frozen=True, eq=False)
class EnsembleBatch:
    """
    Independent (rejection) or thinned-chain (mcmc) samples of one
    avoiding ensemble, ``values`` of shape (samples, k, grid points).
    """

    grid: UniformGrid
    values: numpy.ndarray
    upper: numpy.ndarray
    lower: numpy.ndarray
    acceptance_rate: float
    method: Method
    thinning: Optional[int] = None

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, index: int) -> PathEnsemble:
        return PathEnsemble(self.grid, self.values[index], self.upper, self.lower)

    @property
    def k(self) -> int:
        return self.values.shape[1]

    def marginal(self, curve: int, index: int) -> numpy.ndarray:
        """Values of curve ``curve`` (1 = top) at grid index ``index``."""
        return self.values[:, curve - 1, index]

    def ordering_violations(self) -> int:
        ordered = _ordered(self.values, self.upper[None], self.lower[None])
        return int(numpy.count_nonzero(~ordered))


def _ordered(values, upper, lower) -> numpy.ndarray:
    rows, _, width = values.shape
    upper = numpy.broadcast_to(upper, (rows, width))
    lower = numpy.broadcast_to(lower, (rows, width))
    stacked = numpy.concatenate([upper[:, None, :], values, lower[:, None, :]], axis=1)
    with numpy.errstate(invalid="ignore"):
        return numpy.all(numpy.diff(stacked, axis=1) < 0, axis=(1, 2))


def _barrier(value, grid: UniformGrid, default: float) -> numpy.ndarray:
    if value is None:
        return numpy.full(len(grid), default)
    if callable(value):
        value = [value(s) for s in grid.points]
    array = numpy.asarray(value, dtype=float)
    if array.ndim == 0:
        array = numpy.full(len(grid), float(array))
    if array.shape != (len(grid),) or numpy.any(numpy.isnan(array)):
        raise ConfigError(f"barrier must be a number, a callable or {len(grid)} grid values")
    return array


def _boundary(entrance, exit, upper, lower) -> Tuple[numpy.ndarray, numpy.ndarray]:
    entrance = numpy.atleast_1d(numpy.asarray(entrance, dtype=float))
    exit = numpy.atleast_1d(numpy.asarray(exit, dtype=float))
    if entrance.ndim != 1 or entrance.shape != exit.shape or len(entrance) == 0:
        raise ConfigError("entrance and exit need the same number k >= 1 of curves")
    if not (numpy.all(numpy.isfinite(entrance)) and numpy.all(numpy.isfinite(exit))):
        raise ConfigError("entrance and exit values must be finite")
    if numpy.any(numpy.diff(entrance) >= 0) or numpy.any(numpy.diff(exit) >= 0):
        raise ConfigError("entrance and exit must be strictly decreasing (curve 1 on top)")
    if not (upper[0] > entrance[0] and entrance[-1] > lower[0]):
        raise ConfigError("entrance data must lie strictly between the barriers f(a) and g(a)")
    if not (upper[-1] > exit[0] and exit[-1] > lower[-1]):
        raise ConfigError("exit data must lie strictly between the barriers f(b) and g(b)")
    if not numpy.all(upper > lower):
        raise ConfigError("barrier f must lie strictly above g")
    return entrance, exit


def _bridges(entrance, exit, offsets, generator) -> numpy.ndarray:
    """
    Brownian bridges with diffusion coefficient 1 pinned at ``entrance`` and
    ``exit`` (arrays of any common shape), sampled time by time from the
    exact conditional Gaussians.
    """
    paths = numpy.empty(entrance.shape + (len(offsets),))
    paths[..., 0] = entrance
    paths[..., -1] = exit
    total = offsets[-1]
    current = entrance
    for index in range(1, len(offsets) - 1):
        h = offsets[index] - offsets[index - 1]
        remaining = total - offsets[index - 1]
        mean = current + h / remaining * (exit - current)
        deviation = math.sqrt(h * (remaining - h) / remaining)
        current = mean + deviation * generator.standard_normal(entrance.shape)
        paths[..., index] = current
    return paths


def sample_bridge(x: float, y: float, grid, rng: RngStream) -> numpy.ndarray:
    """
    One Brownian bridge from (a, x) to (b, y) on ``grid``.

    >>> sample_bridge(0.0, 0.0, UniformGrid.between(0, 1, 64), RngStream(1))
    """
    if isinstance(grid, UniformGrid):
        offsets = grid.offsets
    else:
        points = numpy.asarray(grid, dtype=float)
        if points.ndim != 1 or len(points) < 2 or numpy.any(numpy.diff(points) <= 0):
            raise DomainError("a bridge needs an increasing grid of at least 2 points")
        offsets = points - points[0]
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"bridge endpoints must be finite, got {x}, {y}")
    return _bridges(numpy.array(float(x)), numpy.array(float(y)), offsets, rng.generator)


def _rejection(entrance, exit, upper, lower, offsets, generator):
    """
    Exact avoiding ensembles for every row of ``entrance`` (rows may carry
    different boundary data): propose independent bridges, keep the first
    strictly ordered proposal per row.
    """
    rows = entrance.shape[0]
    out = numpy.empty(entrance.shape + (len(offsets),))
    pending = numpy.arange(rows)
    proposals = 0
    accepted = 0
    rate = 1.0
    while pending.size:
        expected = math.ceil(1.5 / max(rate, INFEASIBLE_ACCEPTANCE))
        copies = int(min(max(1, expected), max(1, PROPOSAL_CHUNK // pending.size)))
        source = numpy.repeat(pending, copies)
        candidates = _bridges(entrance[source], exit[source], offsets, generator)
        ok = _ordered(candidates, upper[source], lower[source]).reshape(pending.size, copies)
        proposals += source.size
        accepted += int(numpy.count_nonzero(ok))
        rate = accepted / proposals
        hit = ok.any(axis=1)
        first = numpy.argmax(ok, axis=1)
        chosen = candidates.reshape((pending.size, copies) + candidates.shape[1:])
        out[pending[hit]] = chosen[numpy.nonzero(hit)[0], first[hit]]
        pending = pending[~hit]
        if proposals >= PILOT_PROPOSALS and rate < INFEASIBLE_ACCEPTANCE:
            raise InfeasibleError(
                f"rejection acceptance {rate:.2e} over {proposals} proposals is below "
                + f"{INFEASIBLE_ACCEPTANCE:g}; use method='mcmc'"
            )
        needed = proposals + pending.size / max(rate, INFEASIBLE_ACCEPTANCE)
        if pending.size and needed > MAX_PROPOSALS:
            raise InfeasibleError(
                f"rejection would need more than {MAX_PROPOSALS} proposals "
                + f"(acceptance {rate:.2e}); use method='mcmc'"
            )
    if rate < 100 * INFEASIBLE_ACCEPTANCE:
        logger.warning("rejection acceptance %.2e is close to the infeasibility floor", rate)
    return out, rate


def _heat_bath(state, upper, lower, step, sweeps, generator, trace=None):
    """
    ``sweeps`` checkerboard sweeps of single-site heat-bath updates: every
    interior value is redrawn from its Brownian conditional given its time
    neighbours and kept iff the ordering still holds. Sites of equal
    ``(curve + time) % 2`` never interact, so each half-sweep is one array
    update. Returns the new state and the acceptance rate.
    """
    _, curves, width = state.shape
    if width <= 2 or sweeps == 0:
        return state, 1.0
    deviation = math.sqrt(step / 2.0)
    curve_index = numpy.arange(curves)[:, None]
    time_index = numpy.arange(width)[None, :]
    interior = (time_index > 0) & (time_index < width - 1)
    masks = [interior & ((curve_index + time_index) % 2 == parity) for parity in (0, 1)]
    sites = 0
    accepted = 0
    middle = width // 2
    for _ in range(sweeps):
        for mask in masks:
            proposal = state.copy()
            proposal[:, :, 1:-1] = 0.5 * (state[:, :, :-2] + state[:, :, 2:])
            proposal += deviation * generator.standard_normal(state.shape)
            above = numpy.concatenate([upper[:, None, :], state[:, :-1, :]], axis=1)
            below = numpy.concatenate([state[:, 1:, :], lower[:, None, :]], axis=1)
            ok = mask & (proposal < above) & (proposal > below)
            sites += state.shape[0] * int(numpy.count_nonzero(mask))
            accepted += int(numpy.count_nonzero(ok))
            state = numpy.where(ok, proposal, state)
        if trace is not None:
            trace.append(state[:, 0, middle].copy())
    return state, accepted / max(sites, 1)


def integrated_autocorrelation(trace: numpy.ndarray) -> float:
    """
    Integrated autocorrelation time of a (sweeps, chains) trace, summing the
    chain-averaged autocorrelation up to its first negative value.
    """
    centred = trace - trace.mean(axis=0)
    length = centred.shape[0]
    spectrum = numpy.fft.rfft(centred, n=2 * length, axis=0)
    correlation = numpy.fft.irfft(spectrum * numpy.conj(spectrum), axis=0)[:length].mean(axis=1)
    if correlation[0] <= 0:
        return 1.0
    correlation = correlation / correlation[0]
    negative = numpy.nonzero(correlation < 0)[0]
    cut = negative[0] if negative.size else length
    return float(max(1.0, 2.0 * numpy.sum(correlation[:cut]) - 1.0))


def _interpolation(entrance, exit, offsets) -> numpy.ndarray:
    fraction = offsets / offsets[-1]
    return entrance[..., None] * (1.0 - fraction) + exit[..., None] * fraction


def _mcmc(entrance, exit, upper, lower, grid: UniformGrid, samples, generator, schedule):
    chains = schedule.chains
    start = _interpolation(entrance, exit, grid.offsets)
    state = numpy.broadcast_to(start, (chains,) + start.shape).copy()
    chain_upper = numpy.broadcast_to(upper, (chains, len(upper)))
    chain_lower = numpy.broadcast_to(lower, (chains, len(lower)))
    if not numpy.all(_ordered(state, chain_upper, chain_lower)):
        raise ConfigError("linear interpolation of the boundary data crosses a barrier")

    state, _ = _heat_bath(state, chain_upper, chain_lower, grid.step, schedule.burn_in, generator)
    thinning = schedule.thinning
    if thinning is None:
        trace = []
        state, _ = _heat_bath(
            state, chain_upper, chain_lower, grid.step, schedule.pilot_sweeps, generator, trace
        )
        tau = integrated_autocorrelation(numpy.array(trace))
        thinning = max(schedule.min_thinning, int(math.ceil(2 * tau)))
        logger.debug("measured autocorrelation time %.1f sweeps, thinning %d", tau, thinning)

    collected = []
    rates = []
    while len(collected) * chains < samples:
        state, rate = _heat_bath(state, chain_upper, chain_lower, grid.step, thinning, generator)
        rates.append(rate)
        collected.append(state.copy())
    values = numpy.concatenate(collected, axis=0)[:samples]
    logger.debug(
        "mcmc: %d chains, burn-in %d, thinning %d, %d samples",
        chains,
        schedule.burn_in,
        thinning,
        samples,
    )
    return values, float(numpy.mean(rates)), thinning


def sample_avoiding_ensembles(
    entrance: Sequence[float],
    exit: Sequence[float],
    grid,
    rng: RngStream,
    samples: int = 1,
    f=None,
    g=None,
    method: Method = Method.REJECTION,
    schedule: Optional[McmcSchedule] = None,
    threads: Optional[int] = None,
) -> EnsembleBatch:
    """
    ``samples`` draws of k Brownian bridges from ``entrance`` to ``exit``
    conditioned on ``f > curve_1 > ... > curve_k > g`` at every grid time.

    Rejection samples are exact and drawn in chunks, chunk i from
    ``rng.child(i)``. MCMC samples come from ``schedule.chains`` heat-bath
    chains.
    """
    grid = as_grid(grid)
    method = Method(method)
    upper = _barrier(f, grid, math.inf)
    lower = _barrier(g, grid, -math.inf)
    entrance, exit = _boundary(entrance, exit, upper, lower)
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")

    if method is Method.MCMC:
        schedule = schedule or McmcSchedule()
        values, rate, thinning = _mcmc(
            entrance, exit, upper, lower, grid, samples, rng.generator, schedule
        )
        return EnsembleBatch(grid, values, upper, lower, rate, method, thinning)

    chunks = [
        (index, min(SAMPLE_CHUNK, samples - start))
        for index, start in enumerate(range(0, samples, SAMPLE_CHUNK))
    ]

    def draw(chunk):
        index, size = chunk
        generator = rng.child(index).generator
        return _rejection(
            numpy.broadcast_to(entrance, (size, len(entrance))),
            numpy.broadcast_to(exit, (size, len(exit))),
            numpy.broadcast_to(upper, (size, len(upper))),
            numpy.broadcast_to(lower, (size, len(lower))),
            grid.offsets,
            generator,
        )

    results = parallel_map(draw, chunks, threads)
    values = numpy.concatenate([r[0] for r in results], axis=0)
    rate = float(numpy.mean([r[1] for r in results]))
    logger.debug("rejection: %d samples, acceptance %.3f", samples, rate)
    return EnsembleBatch(grid, values, upper, lower, rate, method)


def sample_avoiding_ensemble(
    entrance: Sequence[float],
    exit: Sequence[float],
    f=None,
    g=None,
    grid=None,
    rng: Optional[RngStream] = None,
    method: Method = Method.REJECTION,
    schedule: Optional[McmcSchedule] = None,
) -> PathEnsemble:
    """
    One (f, g)-avoiding Brownian line ensemble.

    >>> grid = UniformGrid.between(0, 1, 64)
    >>> sample_avoiding_ensemble([1, -1], [1, -1], grid=grid, rng=RngStream(3))
    """
    if grid is None or rng is None:
        raise DomainError("an ensemble needs a grid and an RngStream")
    batch = sample_avoiding_ensembles(
        entrance, exit, grid, rng, 1, f, g, method, schedule, threads=1
    )
    return batch[0]


def parabolic_shift(values, grid, direction: Direction, c: float = 0.0) -> numpy.ndarray:
    """
    Pointwise change between Airy coordinates A and Gibbs coordinates
    ``L = (A - x²)/√2 + c``; ``to_airy`` applies ``A = √2 (L - c) + x²``.
    """
    direction = Direction(direction)
    points = grid.points if isinstance(grid, UniformGrid) else numpy.asarray(grid, dtype=float)
    values = numpy.asarray(values, dtype=float)
    square = points * points
    with numpy.errstate(invalid="ignore"):
        if direction is Direction.TO_GIBBS:
            return (values - square) / SQRT2 + c
        return SQRT2 * (values - c) + square


@dataclass(frozen=True)
class GibbsWindow:
    """
    Curves ``first_curve..last_curve`` (1 = top) on grid indices
    ``start..stop``; the endpoints are kept, the interior is resampled.
    """

    first_curve: int
    last_curve: int
    start: int
    stop: int

    def validate(self, k: int, width: int):
        if not 1 <= self.first_curve <= self.last_curve <= k:
            raise ConfigError(f"window curves {self.first_curve}..{self.last_curve} not in 1..{k}")
        if not 0 < self.start < self.stop < width - 1:
            raise ConfigError(
                f"window times {self.start}..{self.stop} must lie strictly inside 0..{width - 1}"
            )
        if self.stop - self.start < 2:
            raise ConfigError("window must contain an interior grid time")

    @property
    def center(self) -> int:
        return (self.start + self.stop) // 2

    @staticmethod
    def default(k: int, intervals: int) -> "GibbsWindow":
        return GibbsWindow(1, k, intervals // 4, 3 * intervals // 4)


def _to_gibbs(batch: EnsembleBatch, c: float):
    return (
        parabolic_shift(batch.values, batch.grid, Direction.TO_GIBBS, c),
        parabolic_shift(batch.upper, batch.grid, Direction.TO_GIBBS, c),
        parabolic_shift(batch.lower, batch.grid, Direction.TO_GIBBS, c),
    )


def resample_window(
    batch: EnsembleBatch,
    window: GibbsWindow,
    rng: RngStream,
    method: Method = Method.REJECTION,
    schedule: Optional[McmcSchedule] = None,
    coordinates: Coordinates = Coordinates.GIBBS,
    c: float = 0.0,
    threads: Optional[int] = None,
) -> EnsembleBatch:
    """
    Redraws the window of every sample from the avoiding-bridge law given
    everything outside it. Values outside the window are copied unchanged.
    In Airy coordinates the window is resampled in Gibbs coordinates through
    the parabolic shift with constant ``c``.
    """
    method = Method(method)
    coordinates = Coordinates(coordinates)
    window.validate(batch.k, len(batch.grid))
    if coordinates is Coordinates.AIRY:
        values, upper_barrier, lower_barrier = _to_gibbs(batch, c)
    else:
        values, upper_barrier, lower_barrier = batch.values, batch.upper, batch.lower

    top, bottom = window.first_curve - 1, window.last_curve
    columns = slice(window.start, window.stop + 1)
    rows = len(batch)
    if top > 0:
        upper = values[:, top - 1, columns]
    else:
        upper = numpy.broadcast_to(upper_barrier[columns], (rows, window.stop - window.start + 1))
    if bottom < batch.k:
        lower = values[:, bottom, columns]
    else:
        lower = numpy.broadcast_to(lower_barrier[columns], (rows, window.stop - window.start + 1))
    current = values[:, top:bottom, columns]
    offsets = batch.grid.step * numpy.arange(window.stop - window.start + 1)

    chunks = [
        (index, slice(start, min(start + SAMPLE_CHUNK, rows)))
        for index, start in enumerate(range(0, rows, SAMPLE_CHUNK))
    ]

    def redraw(chunk):
        index, part = chunk
        generator = rng.child(index).generator
        if method is Method.REJECTION:
            return _rejection(
                current[part, :, 0],
                current[part, :, -1],
                upper[part],
                lower[part],
                offsets,
                generator,
            )
        steps = (schedule or McmcSchedule(burn_in=1_000)).burn_in
        return _heat_bath(
            numpy.array(current[part]), upper[part], lower[part], batch.grid.step, steps, generator
        )

    results = parallel_map(redraw, chunks, threads)
    fresh = numpy.concatenate([r[0] for r in results], axis=0)
    rate = float(numpy.mean([r[1] for r in results]))

    if coordinates is Coordinates.AIRY:
        interior = batch.grid.points[window.start + 1 : window.stop]
        fresh = parabolic_shift(fresh[:, :, 1:-1], interior, Direction.TO_AIRY, c)
    else:
        fresh = fresh[:, :, 1:-1]
    out = batch.values.copy()
    out[:, top:bottom, window.start + 1 : window.stop] = fresh
    return replace(batch, values=out, acceptance_rate=rate)


@dataclass(frozen=True)
class GibbsReport:
    ks_stat: float
    p_value: float
    acceptance_rate: float
    base_acceptance_rate: float
    repeat_ks_stat: float
    repeat_p_value: float
    outside_identical: bool
    ordering_violations: int
    samples: int
    method: Method
    thinning: Optional[int] = None

    @property
    def success(self) -> bool:
        return self.outside_identical and self.ordering_violations == 0

    def to_dict(self) -> dict:
        return {
            "ks_stat": self.ks_stat,
            "p_value": self.p_value,
            "acceptance_rate": self.acceptance_rate,
            "base_acceptance_rate": self.base_acceptance_rate,
            "repeat_ks_stat": self.repeat_ks_stat,
            "repeat_p_value": self.repeat_p_value,
            "outside_identical": self.outside_identical,
            "ordering_violations": self.ordering_violations,
            "samples": self.samples,
            "method": self.method.value,
            "thinning": self.thinning,
        }


def _outside_identical(before: EnsembleBatch, after: EnsembleBatch, window: GibbsWindow) -> bool:
    outside = numpy.ones(before.values.shape[1:], dtype=bool)
    outside[window.first_curve - 1 : window.last_curve, window.start + 1 : window.stop] = False
    return bool(numpy.array_equal(before.values[:, outside], after.values[:, outside]))


def spread(k: int) -> numpy.ndarray:
    """``k - 1, k - 3, ..., 1 - k``: evenly spaced boundary values."""
    return numpy.arange(k - 1, -k, -2, dtype=float)


def gibbs_resample_check(
    k: int = 2,
    intervals: int = 64,
    samples: int = 10_000,
    rng: Optional[RngStream] = None,
    window: Optional[GibbsWindow] = None,
    method: Method = Method.REJECTION,
    schedule: Optional[McmcSchedule] = None,
    alpha: float = 0.01,
    threads: Optional[int] = None,
) -> GibbsReport:
    """
    Samples the k-curve ensemble on [0, 1] with boundary values ``spread(k)``
    and no barriers, resamples a window twice, and compares the top window
    curve at the window's centre before and after each resampling with a
    two-sample Kolmogorov-Smirnov test.
    """
    rng = rng or RngStream(0)
    method = Method(method)
    grid = UniformGrid.between(0.0, 1.0, intervals)
    window = window or GibbsWindow.default(k, intervals)
    boundary = spread(k)
    base = sample_avoiding_ensembles(
        boundary,
        boundary,
        grid,
        rng.child(0),
        samples,
        method=method,
        schedule=schedule,
        threads=threads,
    )
    once = resample_window(base, window, rng.child(1), method, schedule, threads=threads)
    twice = resample_window(once, window, rng.child(2), method, schedule, threads=threads)

    def probe(ensembles: EnsembleBatch) -> numpy.ndarray:
        return ensembles.marginal(window.first_curve, window.center)

    first = match_sample(probe(base), probe(once), alpha)
    repeat = match_sample(probe(once), probe(twice), alpha)
    report = GibbsReport(
        ks_stat=first.result["stat"],
        p_value=first.result["p"],
        acceptance_rate=once.acceptance_rate,
        base_acceptance_rate=base.acceptance_rate,
        repeat_ks_stat=repeat.result["stat"],
        repeat_p_value=repeat.result["p"],
        outside_identical=(
            _outside_identical(base, once, window) and _outside_identical(once, twice, window)
        ),
        ordering_violations=sum(b.ordering_violations() for b in (base, once, twice)),
        samples=samples,
        method=method,
        thinning=base.thinning,
    )
    logger.info(
        "gibbs check: KS %.4f (p=%.3f), acceptance %.3f",
        report.ks_stat,
        report.p_value,
        report.acceptance_rate,
    )
    return report


def sample_shifted_avoiding_ensemble(
    entrance: Sequence[float],
    exit: Sequence[float],
    grid,
    rng: RngStream,
    c: float = 0.0,
    f=None,
    g=None,
    samples: int = 1,
    method: Method = Method.REJECTION,
    schedule: Optional[McmcSchedule] = None,
    threads: Optional[int] = None,
) -> EnsembleBatch:
    """
    Avoiding ensemble with boundary data and barriers given in Airy
    coordinates: mapped to Gibbs coordinates by the parabolic shift with
    constant ``c``, sampled there, and mapped back.
    """
    grid = as_grid(grid)
    points = grid.points
    upper = _barrier(f, grid, math.inf)
    lower = _barrier(g, grid, -math.inf)
    entrance = numpy.asarray(entrance, dtype=float)
    exit = numpy.asarray(exit, dtype=float)
    batch = sample_avoiding_ensembles(
        parabolic_shift(entrance, points[0], Direction.TO_GIBBS, c),
        parabolic_shift(exit, points[-1], Direction.TO_GIBBS, c),
        grid,
        rng,
        samples,
        parabolic_shift(upper, grid, Direction.TO_GIBBS, c),
        parabolic_shift(lower, grid, Direction.TO_GIBBS, c),
        method,
        schedule,
        threads,
    )
    values = parabolic_shift(batch.values, grid, Direction.TO_AIRY, c)
    values[:, :, 0] = entrance
    values[:, :, -1] = exit
    return replace(batch, values=values, upper=upper, lower=lower)


def shift_gibbs_window(
    batch: EnsembleBatch,
    window: GibbsWindow,
    shift: float,
    rng: RngStream,
    method: Method = Method.REJECTION,
    coordinates: Coordinates = Coordinates.GIBBS,
    c: float = 0.0,
    tolerance: Optional[float] = None,
) -> Check:
    """
    Horizontal-shift equivariance of window resampling: resampling the
    shifted data under the same stream must give the shifted resample.
    Exact in Gibbs coordinates; in Airy coordinates up to ``tolerance``.
    """
    coordinates = Coordinates(coordinates)
    if tolerance is None:
        tolerance = 0.0 if coordinates is Coordinates.GIBBS else 1e-9
    options = {"coordinates": coordinates, "c": c, "threads": 1}
    direct = resample_window(batch, window, rng.fresh(), method, **options)
    moved = replace(batch, grid=batch.grid.shifted(shift))
    shifted = resample_window(moved, window, rng.fresh(), method, **options)
    deviation = float(numpy.max(numpy.abs(shifted.values - direct.values)))
    result = {"max_deviation": deviation, "shift": shift}
    if deviation > tolerance:
        return Check.Fail(
            f"shifted resample deviates by {deviation:.3e}", **result
        ).named("shift_gibbs_window", coordinates=coordinates.value, tolerance=tolerance)
    return Check.Pass(**result).named(
        "shift_gibbs_window", coordinates=coordinates.value, tolerance=tolerance
    )


def _top_eigenvalues(n: int, count: int, generator) -> numpy.ndarray:
    diagonal = generator.standard_normal((count, n))
    degrees = 2.0 * numpy.arange(n - 1, 0, -1)
    off_diagonal = numpy.sqrt(generator.chisquare(degrees, size=(count, n - 1)) / 2.0)
    top = numpy.empty(count)
    for row in range(count):
        try:
            top[row] = scipy.linalg.eigvalsh_tridiagonal(
                diagonal[row],
                off_diagonal[row],
                select="i",
                select_range=(n - 1, n - 1),
                lapack_driver="stebz",
            )[0]
        except (numpy.linalg.LinAlgError, ValueError) as error:
            raise NumericError(f"tridiagonal bisection failed: {error}") from error
    return top


def gue_edge_sample(
    N: int, samples: int, rng: RngStream, threads: Optional[int] = None
) -> numpy.ndarray:
    """
    Rescaled largest eigenvalues ``(λ_max - 2√N) N^{1/6}`` of N×N GUE
    matrices, sampled through the β = 2 tridiagonal model (standard normal
    diagonal, χ_{2(N-i)}/√2 off-diagonal) and Sturm-sequence bisection.
    Chunk i draws from ``rng.child(i)``.
    """
    if not MIN_GUE_N <= N <= MAX_GUE_N:
        raise DomainError(f"N must be in [{MIN_GUE_N}, {MAX_GUE_N}], got {N}")
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    chunks = [
        (index, min(GUE_CHUNK, samples - start))
        for index, start in enumerate(range(0, samples, GUE_CHUNK))
    ]
    tops = parallel_map(
        lambda chunk: _top_eigenvalues(N, chunk[1], rng.child(chunk[0]).generator), chunks, threads
    )
    top = numpy.concatenate(tops)
    return (top - 2.0 * math.sqrt(N)) * N ** (1.0 / 6.0)
