"""
Fredholm determinants of the extended Airy2 kernel on counting configurations.

A counting configuration places disjoint intervals at finitely many times and
attaches a weight z to each. Its generating function
``E[Π z^N] = det(I - (1 - z) K_ext)`` is computed by Nyström discretisation:
Gauss-Legendre nodes on every interval, one dense block per pair of times,
and an LU determinant.
"""

from dataclasses import dataclass, field, replace
import itertools
import logging
import math
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy
import scipy.interpolate
import scipy.linalg

from airyline.errors import AccuracyError, ConfigError, DomainError, NumericError
from airyline.kernels import KERNEL_TOLERANCE, diagonal_tail, extended_kernel_block, time_gap
from airyline.quadrature import (
    MAX_NODES,
    IntervalSpec,
    QuadratureRule,
    gauss_legendre,
    map_interval,
)
from airyline.util.parallel import parallel_map

logger = logging.getLogger(__name__)

MIN_NODES = 4
START_NODES = 16
START_TRUNCATION = 8.0
MAX_TRUNCATION = 256.0
MIN_TOLERANCE = 1e-12
DEFAULT_TOLERANCE = 1e-10
MAX_K = 64
NEGATIVE_PROBABILITY = -1e-8
F2_TABLE_RANGE = (-8.0, 5.0)
F2_TABLE_STEP = 0.1

IntervalKey = Tuple[int, int]


@dataclass(frozen=True)
class CountingConfig:
    """
    Intervals grouped by strictly increasing times. Intervals sharing a time
    are sorted by their lower endpoint and pairwise disjoint.

    >>> config = CountingConfig.from_intervals([
    ...     IntervalSpec(0.0, -1.0, 1.0, 0.5),
    ...     IntervalSpec(1.0, 0.0, math.inf, 0.0),
    ... ])
    """

    times: Tuple[float, ...] = ()
    intervals: Tuple[Tuple[IntervalSpec, ...], ...] = ()

    def __post_init__(self):
        if len(self.times) != len(self.intervals):
            raise ConfigError("every time needs its own (nonempty) interval group")
        for earlier, later in zip(self.times, self.times[1:]):
            if not later > earlier:
                raise ConfigError(f"times must be strictly increasing, got {earlier} then {later}")
        for time, group in zip(self.times, self.intervals):
            if not group:
                raise ConfigError(f"no intervals at time {time}")
            for spec in group:
                if spec.time != time:
                    raise ConfigError(f"interval {spec} filed under time {time}")
            for first, second in itertools.combinations(group, 2):
                if first.overlaps(second):
                    raise ConfigError(
                        f"intervals {first} and {second} overlap; "
                        + "intervals at a common time must be disjoint"
                    )

    @staticmethod
    def from_intervals(specs: Iterable[IntervalSpec]) -> "CountingConfig":
        """
        Groups intervals by time. Times closer than the kernel's gap
        resolution are merged into the first one seen.
        """
        groups: Dict[float, List[IntervalSpec]] = {}
        for spec in specs:
            for time in groups:
                if time_gap(spec.time, time) == 0:
                    groups[time].append(replace(spec, time=time))
                    break
            else:
                groups[spec.time] = [spec]
        times = tuple(sorted(groups))
        intervals = tuple(
            tuple(sorted(groups[time], key=lambda spec: spec.lower)) for time in times
        )
        return CountingConfig(times, intervals)

    @property
    def specs(self) -> List[Tuple[IntervalKey, IntervalSpec]]:
        return [
            ((i, a), spec)
            for i, group in enumerate(self.intervals)
            for a, spec in enumerate(group)
        ]

    @property
    def is_empty(self) -> bool:
        return not self.times

    @property
    def lower_bound(self) -> float:
        """M0, the smallest lower endpoint."""
        if self.is_empty:
            return math.inf
        return min(spec.lower for _, spec in self.specs)

    @property
    def real_weights(self) -> bool:
        return all(
            spec.weight_z.imag == 0 and 0 <= spec.weight_z.real <= 1 for _, spec in self.specs
        )

    def spec(self, key: IntervalKey) -> IntervalSpec:
        i, a = key
        try:
            return self.intervals[i][a]
        except IndexError as error:
            raise DomainError(f"no interval {a} at time index {i}") from error

    def shifted(self, c: float) -> "CountingConfig":
        return CountingConfig.from_intervals(spec.shifted(c) for _, spec in self.specs)

    def with_weights(self, weights: Mapping[IntervalKey, complex]) -> "CountingConfig":
        unknown = set(weights) - {key for key, _ in self.specs}
        if unknown:
            raise ConfigError(f"no interval with key(s) {sorted(unknown)} in this configuration")
        return CountingConfig(
            self.times,
            tuple(
                tuple(
                    spec.with_z(weights.get((i, a), spec.weight_z)) for a, spec in enumerate(group)
                )
                for i, group in enumerate(self.intervals)
            ),
        )

    def with_all_weights(self, z: complex) -> "CountingConfig":
        return self.with_weights({key: z for key, _ in self.specs})

    def __add__(self, other: "CountingConfig") -> "CountingConfig":
        return CountingConfig.from_intervals(
            [spec for _, spec in self.specs] + [spec for _, spec in other.specs]
        )


@dataclass(frozen=True)
class Segment:
    """Rows ``start:stop`` of a discretisation belong to one interval."""

    key: IntervalKey
    start: int
    stop: int
    rule: QuadratureRule


@dataclass(frozen=True, eq=False)
class BlockKernelMatrix:
    """
    Nyström discretisation of ``Q K_ext``.

    ``kernel`` is ``√w_p K_ext √w_q`` without weights, ``matrix`` the same with
    the (1 - z) factors applied: on both sides as √(1 - z) when ``symmetrized``,
    on the rows otherwise. Both conventions give the same ``det(I - matrix)``.
    """

    config: CountingConfig
    kernel: numpy.ndarray
    matrix: numpy.ndarray
    segments: Tuple[Segment, ...]
    time_slices: Tuple[slice, ...]
    symmetrized: bool
    kernel_error: float = 0.0

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def node_index(self) -> Dict[Tuple[int, int, int], int]:
        return {
            (*segment.key, p): segment.start + p
            for segment in self.segments
            for p in range(segment.stop - segment.start)
        }

    @property
    def blocks(self) -> List[List[numpy.ndarray]]:
        return [[self.matrix[rows, cols] for cols in self.time_slices] for rows in self.time_slices]

    def block(self, i: int, j: int) -> numpy.ndarray:
        return self.matrix[self.time_slices[i], self.time_slices[j]]

    def reweighted(self, config: CountingConfig) -> "BlockKernelMatrix":
        """Same nodes and kernel, weights taken from ``config``."""
        return _weighted(config, self.kernel, self.segments, self.time_slices, self.kernel_error)

    def restricted(self, time_indices: Sequence[int]) -> "BlockKernelMatrix":
        """
        The sub-discretisation on a subset of times, sharing nodes and kernel
        entries with this one.
        """
        time_indices = list(time_indices)
        rows = numpy.concatenate(
            [
                numpy.arange(self.time_slices[i].start, self.time_slices[i].stop)
                for i in time_indices
            ]
        )
        config = CountingConfig(
            tuple(self.config.times[i] for i in time_indices),
            tuple(self.config.intervals[i] for i in time_indices),
        )
        segments = []
        slices = []
        offset = 0
        for new_i, i in enumerate(time_indices):
            block_start = offset
            for segment in self.segments:
                if segment.key[0] == i:
                    size = segment.stop - segment.start
                    segments.append(
                        Segment((new_i, segment.key[1]), offset, offset + size, segment.rule)
                    )
                    offset += size
            slices.append(slice(block_start, offset))
        kernel = self.kernel[numpy.ix_(rows, rows)]
        return _weighted(config, kernel, tuple(segments), tuple(slices), self.kernel_error)


@dataclass(frozen=True)
class GenFunValue:
    value: complex
    error_estimate: float
    nodes_used: int
    history: Tuple[complex, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "error_estimate": self.error_estimate,
            "nodes_used": self.nodes_used,
        }


def truncation_length(lower: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    Smallest L in 8, 16, 32, ... whose discarded tail ``∫_{lower+L}^∞ K2(x,x) dx``
    stays below tol / 10.
    """
    length = START_TRUNCATION
    while diagonal_tail(lower + length) >= tol / 10:
        length *= 2
        if length > MAX_TRUNCATION:
            raise AccuracyError(
                f"no truncation length certifies the tail above {lower}",
                error_estimate=diagonal_tail(lower + length / 2),
            )
    return length


def _weight_factors(config: CountingConfig, segments: Sequence[Segment], symmetrized: bool):
    size = segments[-1].stop if segments else 0
    dtype = float if symmetrized else complex
    factors = numpy.empty(size, dtype=dtype)
    for segment in segments:
        one_minus_z = 1.0 - config.spec(segment.key).weight_z
        if symmetrized:
            one_minus_z = math.sqrt(one_minus_z.real)
        factors[segment.start : segment.stop] = one_minus_z
    return factors


def _weighted(config, kernel, segments, time_slices, kernel_error) -> BlockKernelMatrix:
    symmetrized = config.real_weights
    factors = _weight_factors(config, segments, symmetrized)
    if symmetrized:
        matrix = factors[:, None] * kernel * factors[None, :]
    else:
        matrix = factors[:, None] * kernel
    return BlockKernelMatrix(
        config, kernel, matrix, segments, time_slices, symmetrized, kernel_error
    )


def build_block_matrix(
    config: CountingConfig,
    nodes_per_interval: int,
    truncation_L: Optional[float] = None,
    tol: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
) -> BlockKernelMatrix:
    """
    Discretises every interval with ``nodes_per_interval`` Gauss-Legendre
    nodes and fills block (i, j) with ``K_ext(t_i, ·; t_j, ·)``. Blocks are
    computed concurrently.

    Semi-infinite intervals are truncated to ``truncation_L`` when given,
    otherwise to their certified ``truncation_length``.
    """
    if not MIN_NODES <= nodes_per_interval <= MAX_NODES:
        raise DomainError(
            f"nodes per interval must be in [{MIN_NODES}, {MAX_NODES}], got {nodes_per_interval}"
        )
    base = gauss_legendre(nodes_per_interval)

    segments = []
    time_slices = []
    nodes_by_time = []
    offset = 0
    for i, group in enumerate(config.intervals):
        start = offset
        for a, spec in enumerate(group):
            length = None
            if spec.semi_infinite:
                length = truncation_L
                if length is None:
                    length = truncation_length(spec.lower, tol)
            rule = map_interval(base, spec, length)
            segments.append(Segment((i, a), offset, offset + len(rule), rule))
            offset += len(rule)
        time_slices.append(slice(start, offset))
        nodes_by_time.append(
            numpy.concatenate([s.rule.nodes for s in segments if s.key[0] == i])
        )

    kernel = numpy.zeros((offset, offset))
    pairs = [(i, j) for i in range(len(config.times)) for j in range(len(config.times))]

    def block(pair):
        i, j = pair
        return extended_kernel_block(
            config.times[i], nodes_by_time[i], config.times[j], nodes_by_time[j], KERNEL_TOLERANCE
        )

    kernel_error = 0.0
    for (i, j), (values, error) in zip(pairs, parallel_map(block, pairs, threads)):
        kernel[time_slices[i], time_slices[j]] = values
        kernel_error = max(kernel_error, error)

    if segments:
        root_weights = numpy.sqrt(numpy.concatenate([s.rule.weights for s in segments]))
        kernel = root_weights[:, None] * kernel * root_weights[None, :]

    if not numpy.all(numpy.isfinite(kernel)):
        raise NumericError("kernel matrix has non-finite entries")

    return _weighted(config, kernel, tuple(segments), tuple(time_slices), kernel_error)


def fredholm_det(matrix) -> complex:
    """
    ``det(I - M)`` by LU factorisation with partial pivoting.

    >>> fredholm_det(numpy.array([[0.5]]))
    (0.5+0j)
    """
    if isinstance(matrix, BlockKernelMatrix):
        matrix = matrix.matrix
    matrix = numpy.atleast_2d(numpy.asarray(matrix))
    if matrix.size == 0:
        return 1.0 + 0j
    if matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"determinant needs a square matrix, got shape {matrix.shape}")
    if not numpy.all(numpy.isfinite(matrix)):
        raise NumericError("matrix has non-finite entries")
    system = numpy.eye(matrix.shape[0], dtype=matrix.dtype) - matrix
    lu, pivots = scipy.linalg.lu_factor(system, check_finite=False)
    swaps = numpy.count_nonzero(pivots != numpy.arange(len(pivots)))
    value = numpy.prod(numpy.diag(lu)) * (-1.0) ** swaps
    if not numpy.isfinite(value):
        raise NumericError("determinant overflowed")
    return complex(value)


def converge(
    config: CountingConfig,
    evaluate: Callable[[BlockKernelMatrix], numpy.ndarray],
    tol: float = DEFAULT_TOLERANCE,
    start: int = START_NODES,
    threads: Optional[int] = None,
):
    """
    Doubles the nodes per interval from ``start`` until ``evaluate`` changes
    by less than ``tol`` (max norm) between two levels.

    Returns ``(values, error_estimate, discretisation, history)``.
    """
    if not tol >= MIN_TOLERANCE:
        raise DomainError(f"tolerance must be at least {MIN_TOLERANCE}, got {tol}")
    history = []
    previous = None
    error = math.inf
    n = start
    while n <= MAX_NODES:
        discretisation = build_block_matrix(config, n, tol=tol, threads=threads)
        values = numpy.asarray(evaluate(discretisation))
        history.append(values)
        if previous is not None:
            error = float(numpy.max(numpy.abs(values - previous)))
            logger.debug("%d nodes per interval: change %.3e", n, error)
            if error < tol:
                return values, error, discretisation, history
        previous = values
        n *= 2
    logger.warning("node doubling stopped at %d nodes per interval, error %.3e", MAX_NODES, error)
    raise AccuracyError(
        f"Fredholm determinant did not converge to {tol:g}", value=previous, error_estimate=error
    )


def _trivial(config: CountingConfig) -> bool:
    return config.is_empty or all(spec.weight_z == 1 for _, spec in config.specs)


def generating_function(
    config: CountingConfig, tol: float = DEFAULT_TOLERANCE, threads: Optional[int] = None
) -> GenFunValue:
    """
    ``E[Π z^N]`` over the configuration's intervals, as ``det(I - Q K_ext)``.
    """
    if not tol >= MIN_TOLERANCE:
        raise DomainError(f"tolerance must be at least {MIN_TOLERANCE}, got {tol}")
    if _trivial(config):
        return GenFunValue(1.0 + 0j, 0.0, 0)
    values, error, discretisation, history = converge(
        config, lambda d: numpy.array([fredholm_det(d)]), tol, threads=threads
    )
    result = GenFunValue(
        complex(values[0]), error, discretisation.dimension, tuple(complex(h[0]) for h in history)
    )
    logger.info(
        "generating function %s (error %.2e, %d nodes)",
        result.value,
        result.error_estimate,
        result.nodes_used,
    )
    return result


def gap_probability(
    config: CountingConfig, tol: float = DEFAULT_TOLERANCE, threads: Optional[int] = None
) -> float:
    """
    Probability that no interval of the configuration holds a particle.
    """
    if any(spec.weight_z != 0 for _, spec in config.specs):
        raise ConfigError("gap probabilities need every weight z = 0")
    result = generating_function(config, tol, threads)
    if abs(result.value.imag) > 1e-10:
        raise NumericError(f"gap probability has imaginary part {result.value.imag:.3e}")
    probability = result.value.real
    slack = max(result.error_estimate, tol)
    if probability < -slack or probability > 1 + slack:
        raise NumericError(f"gap probability {probability} outside [0, 1]")
    return min(max(probability, 0.0), 1.0)


def tracy_widom_f2(s: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    The GUE Tracy-Widom distribution function F2(s) = det(I - K2) on (s, ∞).

    >>> tracy_widom_f2(-2.0)
    0.4132...
    """
    if not -10.0 <= s <= 10.0:
        raise DomainError(f"F2 is evaluated on [-10, 10], got {s}")
    config = CountingConfig((0.0,), ((IntervalSpec(0.0, s, math.inf, 0j),),))
    return gap_probability(config, tol)


def tracy_widom_cdf(
    tol: float = DEFAULT_TOLERANCE, threads: Optional[int] = None
) -> Callable[[numpy.ndarray], numpy.ndarray]:
    """
    F2 as a vectorised callable for ``scipy.stats.kstest``: a cubic spline
    through F2 tabulated on [-8, 5] in steps of 0.1, 0 below the table and
    1 above it.
    """
    lower, upper = F2_TABLE_RANGE
    points = numpy.linspace(lower, upper, int(round((upper - lower) / F2_TABLE_STEP)) + 1)
    values = parallel_map(lambda s: tracy_widom_f2(float(s), tol), points, threads)
    spline = scipy.interpolate.CubicSpline(points, values)

    def tracy_widom_f2_table(s):
        s = numpy.asarray(s, dtype=float)
        inside = numpy.clip(spline(numpy.clip(s, lower, upper)), 0.0, 1.0)
        return numpy.where(s < lower, 0.0, numpy.where(s > upper, 1.0, inside))

    return tracy_widom_f2_table


def _circle_size(k_max: int) -> int:
    if not 0 <= k_max <= MAX_K:
        raise DomainError(f"k_max must be in [0, {MAX_K}], got {k_max}")
    return 1 << int(math.ceil(math.log2(4 * (k_max + 1))))


def _probabilities(values: numpy.ndarray) -> numpy.ndarray:
    if numpy.min(values) < NEGATIVE_PROBABILITY:
        raise NumericError(
            f"negative probability {numpy.min(values):.3e}; increase resolution or k_max"
        )
    return numpy.clip(values, 0.0, None)


def count_distribution(
    config: CountingConfig,
    target: IntervalKey,
    k_max: int,
    tol: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
) -> numpy.ndarray:
    """
    ``P[N_target = k, other counts weighted by their z]`` for k = 0..k_max by
    inverse FFT of the generating function on the unit circle.
    """
    size = _circle_size(k_max)
    config.spec(target)
    circle = numpy.exp(2j * math.pi * numpy.arange(size) / size)

    def evaluate(discretisation: BlockKernelMatrix):
        return numpy.array(
            [
                fredholm_det(discretisation.reweighted(config.with_weights({target: z})))
                for z in circle
            ]
        )

    values, error, discretisation, _ = converge(config, evaluate, tol, threads=threads)
    logger.info(
        "count distribution of %s from %d circle points (error %.2e, %d nodes)",
        config.spec(target),
        size,
        error,
        discretisation.dimension,
    )
    coefficients = numpy.fft.fft(values).real / size
    return _probabilities(coefficients[: k_max + 1])


def joint_count_distribution(
    config: CountingConfig,
    targets: Tuple[IntervalKey, IntervalKey],
    k_max: int,
    tol: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
) -> numpy.ndarray:
    """
    ``P[N_first = a, N_second = b]`` for a, b = 0..k_max by two-dimensional
    Fourier inversion.
    """
    first, second = targets
    if first == second:
        raise DomainError("joint distribution needs two different intervals")
    config.spec(first)
    config.spec(second)
    size = _circle_size(k_max)
    circle = numpy.exp(2j * math.pi * numpy.arange(size) / size)

    def evaluate(discretisation: BlockKernelMatrix):
        grid = numpy.empty((size, size), dtype=complex)
        for p, z in enumerate(circle):
            for q, w in enumerate(circle):
                weights = config.with_weights({first: z, second: w})
                grid[p, q] = fredholm_det(discretisation.reweighted(weights))
        return grid

    values, error, _, _ = converge(config, evaluate, tol, threads=threads)
    logger.info("joint count distribution on a %dx%d circle grid (error %.2e)", size, size, error)
    coefficients = numpy.fft.fft2(values).real / (size * size)
    return _probabilities(coefficients[: k_max + 1, : k_max + 1])
