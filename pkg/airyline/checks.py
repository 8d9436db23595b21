from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy
import scipy.stats


@dataclass
class Check:
    """
    Outcome of one statistical or regression check.
    Truthy when it passed.
    """

    name: Optional[str] = None
    success: bool = True
    message: Optional[str] = None
    args: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)

    @staticmethod
    def Fail(message: str, **kwargs):
        return Check(success=False, message=message, result=kwargs)

    @staticmethod
    def Pass(message: Optional[str] = None, **kwargs):
        return Check(success=True, message=message, result=kwargs)

    def named(self, name: str, **args) -> "Check":
        self.name = name
        self.args = {key: coerce_to_json(value) for key, value in args.items()}
        return self

    def to_dict(self):
        return {
            "name": self.name,
            "success": self.success,
            "message": self.message,
            "args": self.args,
            "result": {key: coerce_to_json(value) for key, value in self.result.items()},
        }

    def __repr__(self) -> str:
        if self.success:
            return f"Pass({self.name})"
        return f"Fail({self.name}: {self.message})"

    def __bool__(self):
        return self.success


def coerce_to_json(arg):
    if callable(arg):
        return getattr(arg, "__name__", repr(arg))
    if isinstance(arg, numpy.integer):
        return int(arg)
    if isinstance(arg, numpy.floating):
        return float(arg)
    if isinstance(arg, numpy.bool_):
        return bool(arg)
    if isinstance(arg, complex):
        return [arg.real, arg.imag]
    if isinstance(arg, numpy.ndarray):
        return arg.tolist()
    return arg


def match_sample(sample, reference, alpha: float = 0.01) -> Check:
    """
    checks if ``sample`` is from the same distribution as ``reference``
    using a two-sample kolmogorov-smirnov test.

    Examples:
        >>> match_sample(before_resampling, after_resampling)
    """
    stat, p = scipy.stats.ks_2samp(numpy.asarray(sample), numpy.asarray(reference))
    result = {"stat": float(stat), "p": float(p)}
    if p < alpha:
        return Check.Fail("kolmogorov-smirnov-test rejected", **result).named(
            "match_sample", alpha=alpha
        )
    return Check.Pass(**result).named("match_sample", alpha=alpha)


def match_cdf(sample, cdf: Callable, alpha: float = 0.01) -> Check:
    """
    one-sample kolmogorov-smirnov test of ``sample`` against ``cdf``.
    """
    stat, p = scipy.stats.kstest(numpy.asarray(sample), cdf)
    result = {"stat": float(stat), "p": float(p)}
    if p < alpha:
        return Check.Fail("kolmogorov-smirnov-test rejected", **result).named(
            "match_cdf", cdf=cdf, alpha=alpha
        )
    return Check.Pass(**result).named("match_cdf", cdf=cdf, alpha=alpha)


def max_cdf_deviation(sample, points, reference_values) -> float:
    """
    Largest ``|empirical CDF(s) - reference(s)|`` over ``points``.
    """
    sample = numpy.sort(numpy.asarray(sample))
    empirical = numpy.searchsorted(sample, numpy.asarray(points), side="right") / len(sample)
    return float(numpy.max(numpy.abs(empirical - numpy.asarray(reference_values))))


def within(value: float, expected: float, tolerance: float, name: str) -> Check:
    drift = abs(value - expected)
    result = {"value": value, "expected": expected, "drift": drift}
    if not drift <= tolerance:
        return Check.Fail(
            f"{name} drifted by {drift:.3e}, tolerance {tolerance:.1e}", **result
        ).named(name, tolerance=tolerance)
    return Check.Pass(**result).named(name, tolerance=tolerance)
