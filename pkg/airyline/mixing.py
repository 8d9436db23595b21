"""
Decay of correlations along the time axis.

Two measurements, both as ``DecayCurve``:

- the mixing remainder ``R(z, T) = det_joint - det_left · det_right`` of a
  counting configuration and its copy shifted by T, with the factorised
  determinants taken on the same nodes as the joint one;
- the trace norm of ``P e^{-yH} K2`` and ``P e^{-yH} (I - K2)`` on a window
  ``[a, a + L]`` as y grows.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy
import pandas
import scipy.linalg

from airyline.errors import ConfigError, DomainError, NumericError
from airyline.fredholm import (
    DEFAULT_TOLERANCE,
    BlockKernelMatrix,
    CountingConfig,
    IntervalKey,
    build_block_matrix,
    converge,
    count_distribution,
    fredholm_det,
    joint_count_distribution,
)
from airyline.kernels import KERNEL_TOLERANCE, ProjectionSide, semigroup_matrix
from airyline.quadrature import IntervalSpec, gauss_legendre, map_interval
from airyline.util.parallel import parallel_map

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 12.0
DEFAULT_TRACE_NODES = 64
DEFAULT_K_MAX = 6
BLOCK_NORM_NODES = 32


@dataclass(frozen=True)
class DecayCurve:
    """
    Magnitudes measured along an increasing parameter (a shift T or a
    semigroup time y). ``columns`` carries per-point audit values.
    """

    parameter: Tuple[float, ...]
    magnitude: Tuple[float, ...]
    columns: Dict[str, Tuple] = field(default_factory=dict, compare=False)
    name: str = "parameter"

    def __post_init__(self):
        if len(self.parameter) != len(self.magnitude):
            raise DomainError("parameter and magnitude must have equal length")
        for earlier, later in zip(self.parameter, self.parameter[1:]):
            if not later > earlier:
                raise DomainError("curve parameters must be strictly increasing")
        if any(not m >= 0 for m in self.magnitude):
            raise NumericError("curve magnitudes must be nonnegative")
        for key, values in self.columns.items():
            if len(values) != len(self.parameter):
                raise DomainError(f"column {key} has the wrong length")

    def __len__(self):
        return len(self.parameter)

    def to_frame(self, magnitude: str = "magnitude") -> pandas.DataFrame:
        frame = pandas.DataFrame({self.name: self.parameter, magnitude: self.magnitude})
        for key, values in self.columns.items():
            frame[key] = list(values)
        return frame


@dataclass(frozen=True)
class MixingExperiment:
    """
    A base configuration on times t_1 < ... < t_m and a ladder of shifts T,
    each larger than t_m - t_1 so the shifted copy lies strictly later.
    ``shifted_weights`` overrides the copy's z values by interval key.

    >>> MixingExperiment(reference, (1, 2, 4, 8, 16))
    """

    base_config: CountingConfig
    shifts: Tuple[float, ...]
    shifted_weights: Mapping[IntervalKey, complex] = field(default_factory=dict)
    tol: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.base_config.is_empty:
            raise ConfigError("a mixing experiment needs a nonempty base configuration")
        object.__setattr__(self, "shifts", tuple(float(t) for t in self.shifts))
        for earlier, later in zip(self.shifts, self.shifts[1:]):
            if not later > earlier:
                raise ConfigError(f"shifts must be increasing, got {earlier} then {later}")
        for shift in self.shifts:
            self.check_shift(shift)
        self.base_config.with_weights(self.shifted_weights)

    @property
    def span(self) -> float:
        return self.base_config.times[-1] - self.base_config.times[0]

    def check_shift(self, shift: float):
        if not (math.isfinite(shift) and shift > self.span):
            raise DomainError(
                f"shift {shift} must exceed the configuration's time span {self.span}"
            )

    def right(self, shift: float) -> CountingConfig:
        return self.base_config.with_weights(self.shifted_weights).shifted(shift)

    def joint(self, shift: float) -> CountingConfig:
        self.check_shift(shift)
        return self.base_config + self.right(shift)


@dataclass(frozen=True)
class MixingPoint:
    shift: float
    remainder: complex
    det_joint: complex
    det_left: complex
    det_right: complex
    error_estimate: float
    nodes_used: int


def _split(discretisation: BlockKernelMatrix, m: int):
    joint = fredholm_det(discretisation)
    left = fredholm_det(discretisation.restricted(range(m)))
    right = fredholm_det(discretisation.restricted(range(m, 2 * m)))
    return numpy.array([joint - left * right, joint, left, right])


def mixing_point(
    experiment: MixingExperiment, shift: float, threads: Optional[int] = None
) -> MixingPoint:
    config = experiment.joint(shift)
    m = len(experiment.base_config.times)
    values, error, discretisation, _ = converge(
        config, lambda d: _split(d, m), experiment.tol, threads=threads
    )
    remainder, joint, left, right = (complex(v) for v in values)
    logger.info("R(T=%g) = %s (error %.2e)", shift, remainder, error)
    return MixingPoint(shift, remainder, joint, left, right, error, discretisation.dimension)


def mixing_remainder(
    experiment: MixingExperiment, shift: float, threads: Optional[int] = None
) -> complex:
    """
    ``R(z, T)``: the joint determinant of the base configuration and its
    T-shifted copy minus the product of the two single-cluster determinants.
    """
    return mixing_point(experiment, shift, threads).remainder


def mixing_sweep(experiment: MixingExperiment, threads: Optional[int] = None) -> DecayCurve:
    """
    ``|R(z, T)|`` for every shift of the experiment, with the joint and
    factorised determinants as audit columns.
    """
    if len(experiment.shifts) < 3:
        raise ConfigError("a mixing sweep needs at least 3 shifts")
    points = parallel_map(
        lambda shift: mixing_point(experiment, shift, threads=1), experiment.shifts, threads
    )
    return DecayCurve(
        tuple(p.shift for p in points),
        tuple(abs(p.remainder) for p in points),
        {
            "R_re": tuple(p.remainder.real for p in points),
            "R_im": tuple(p.remainder.imag for p in points),
            "det_joint": tuple(p.det_joint for p in points),
            "det_left": tuple(p.det_left for p in points),
            "det_right": tuple(p.det_right for p in points),
            "error_estimate": tuple(p.error_estimate for p in points),
        },
        name="T",
    )


def _pair_config(first: IntervalSpec, second: IntervalSpec):
    config = CountingConfig.from_intervals([first, second])
    keys = {spec: key for key, spec in config.specs}
    return config, (keys[first], keys[second])


def _moments(joint: numpy.ndarray):
    counts = numpy.arange(joint.shape[0])
    first = joint.sum(axis=1)
    second = joint.sum(axis=0)
    mean_first = counts @ first
    mean_second = counts @ second
    return counts @ joint @ counts - mean_first * mean_second, first, second


def count_covariance(
    first: IntervalSpec,
    second: IntervalSpec,
    k_max: int = DEFAULT_K_MAX,
    tol: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
) -> float:
    """
    ``Cov(N_first, N_second)`` from the joint count distribution. Passing the
    same interval twice gives the variance.
    """
    first, second = first.with_z(0), second.with_z(0)
    if first == second:
        config = CountingConfig.from_intervals([first])
        probabilities = count_distribution(config, (0, 0), k_max, tol, threads)
        counts = numpy.arange(len(probabilities))
        mean = counts @ probabilities
        return float(counts**2 @ probabilities - mean * mean)
    config, targets = _pair_config(first, second)
    joint = joint_count_distribution(config, targets, k_max, tol, threads)
    covariance, _, _ = _moments(joint)
    return float(covariance)


def event_mixing(
    first: IntervalSpec,
    second: IntervalSpec,
    shifts: Sequence[float],
    k_max: int = DEFAULT_K_MAX,
    tol: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
) -> DecayCurve:
    """
    ``max_{a,b} |P[N_first = a, N_{second + T} = b] - P[N_first = a] P[N_second = b]|``
    along the shifts, with the count covariance as an audit column.
    """
    first = first.with_z(0)

    def defect(shift):
        moved = second.with_z(0).shifted(shift)
        config, targets = _pair_config(first, moved)
        joint = joint_count_distribution(config, targets, k_max, tol, threads=1)
        covariance, left, right = _moments(joint)
        return float(numpy.max(numpy.abs(joint - numpy.outer(left, right)))), float(covariance)

    results = parallel_map(defect, shifts, threads)
    return DecayCurve(
        tuple(float(t) for t in shifts),
        tuple(r[0] for r in results),
        {"covariance": tuple(r[1] for r in results)},
        name="T",
    )


def offdiagonal_block_norms(
    experiment: MixingExperiment,
    nodes_per_interval: int = BLOCK_NORM_NODES,
    threads: Optional[int] = None,
) -> DecayCurve:
    """
    Spectral norms of the blocks coupling the base cluster to its shifted
    copy, for every shift of the experiment.
    """
    m = len(experiment.base_config.times)

    def norms(shift):
        matrix = build_block_matrix(
            experiment.joint(shift), nodes_per_interval, tol=experiment.tol, threads=1
        )
        lower = max(
            scipy.linalg.norm(matrix.block(i, j), 2) for i in range(m, 2 * m) for j in range(m)
        )
        upper = max(
            scipy.linalg.norm(matrix.block(i, j), 2) for i in range(m) for j in range(m, 2 * m)
        )
        return float(lower), float(upper)

    results = parallel_map(norms, experiment.shifts, threads)
    return DecayCurve(
        experiment.shifts,
        tuple(max(r) for r in results),
        {
            "later_to_earlier": tuple(r[0] for r in results),
            "earlier_to_later": tuple(r[1] for r in results),
        },
        name="T",
    )


def trace_norm_offdiag(
    a: float,
    y: float,
    side: ProjectionSide,
    L: float = DEFAULT_WINDOW,
    nodes: int = DEFAULT_TRACE_NODES,
) -> float:
    """
    Trace norm of the semigroup-weighted projection ``e^{-yH} K2``
    (``side="neg"``) or ``e^{-yH} (I - K2)`` (``side="pos"``) on ``[a, a + L]``,
    as the sum of singular values of its square-root-weighted Nyström matrix.
    """
    if not (math.isfinite(a) and math.isfinite(L) and L > 0):
        raise DomainError(f"window [a, a + L] must be finite and nonempty, got a={a}, L={L}")
    if not (math.isfinite(y) and y > 0):
        raise DomainError(f"semigroup time y must be positive, got {y}")
    rule = map_interval(gauss_legendre(nodes), IntervalSpec(0.0, a, a + L))
    kernel, _ = semigroup_matrix(y, side, rule.nodes, rule.nodes, KERNEL_TOLERANCE)
    root = numpy.sqrt(rule.weights)
    matrix = root[:, None] * kernel * root[None, :]
    try:
        singular = scipy.linalg.svd(matrix, compute_uv=False, lapack_driver="gesvd")
    except (numpy.linalg.LinAlgError, ValueError) as error:
        raise NumericError(f"singular value decomposition failed: {error}") from error
    return float(numpy.sum(singular))


def trace_decay(
    a: float,
    side: ProjectionSide,
    ys: Sequence[float],
    L: float = DEFAULT_WINDOW,
    nodes: int = DEFAULT_TRACE_NODES,
    threads: Optional[int] = None,
) -> DecayCurve:
    """
    ``trace_norm_offdiag`` along ``ys``. The window is certified by
    recomputing on ``[a, a + 2L]`` with twice the nodes; the change is the
    ``window_change`` column.
    """
    side = ProjectionSide(side)

    def measure(y):
        norm = trace_norm_offdiag(a, y, side, L, nodes)
        wider = trace_norm_offdiag(a, y, side, 2 * L, 2 * nodes)
        return norm, abs(wider - norm)

    results = parallel_map(measure, ys, threads)
    ys = tuple(float(y) for y in ys)
    curve = DecayCurve(
        ys,
        tuple(r[0] for r in results),
        {
            "y_times_norm": tuple(y * r[0] for y, r in zip(ys, results)),
            "window_change": tuple(r[1] for r in results),
        },
        name="y",
    )
    logger.info(
        "trace decay a=%g side=%s: largest window change %.2e",
        a,
        side.value,
        max(curve.columns["window_change"]),
    )
    return curve


def fit_decay_rate(curve: DecayCurve) -> float:
    """
    Least-squares slope of log(magnitude) against log(parameter), over the
    points where both are positive. Reported only.
    """
    parameter = numpy.asarray(curve.parameter, dtype=float)
    magnitude = numpy.asarray(curve.magnitude, dtype=float)
    usable = (parameter > 0) & (magnitude > 0)
    if numpy.count_nonzero(usable) < 2:
        raise DomainError("fitting a decay rate needs two positive points")
    slope, _ = numpy.polyfit(numpy.log(parameter[usable]), numpy.log(magnitude[usable]), 1)
    return float(slope)
