"""
Command-line entry point. One subcommand per computation; every command
builds a ``RunConfig`` (from flags, optionally on top of a ``--config``
JSON document), runs, and emits CSV, JSON or SVG.

    airyline tw2 --from -6 --to 3 --step 0.1 --out tw2.csv
    airyline mixing --config reference.json --shifts 1,2,4,8,16
"""

import argparse
from dataclasses import replace
import logging
import math
from pathlib import Path
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy
import pandas

from airyline import __version__
from airyline.checks import match_cdf, max_cdf_deviation
from airyline.config import DEFAULT_SEED, RunConfig, parse_config
from airyline.ensembles import Method, gibbs_resample_check, gue_edge_sample
from airyline.errors import (
    AccuracyError,
    AiryLineError,
    ConfigError,
    DomainError,
    IoError,
    NumericError,
)
from airyline.fredholm import (
    DEFAULT_TOLERANCE,
    count_distribution,
    generating_function,
    tracy_widom_cdf,
    tracy_widom_f2,
)
from airyline.golden import GOLDEN_PATH, load_golden, record_golden, run_golden
from airyline.kernels import ProjectionSide, k2_ext_estimate
from airyline.mixing import (
    DEFAULT_K_MAX,
    MixingExperiment,
    count_covariance,
    event_mixing,
    fit_decay_rate,
    mixing_sweep,
    offdiagonal_block_norms,
    trace_decay,
)
from airyline.output import Format, Plot, Result, emit
from airyline.quadrature import IntervalSpec
from airyline.special_functions import airy_ai
from airyline.util.parallel import THREADS_ENV, parallel_map
from airyline.util.rng import RngStream

logger = logging.getLogger(__name__)

TW2_CHECK_POINTS = (-3.0, -2.0, -1.0, 0.0, 1.0)
COUNTS_K_MAX = 16
COVARIANCE_SHIFTS = (1.0, 2.0, 4.0, 8.0, 16.0)
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as error:
        message = f"expected comma-separated numbers, got {text!r}"
        raise argparse.ArgumentTypeError(message) from error


def _param(run: RunConfig, key: str, kind: Callable):
    value = run.params[key]
    try:
        if kind is float and isinstance(value, bool):
            raise TypeError(value)
        return kind(value)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"{run.command} parameter {key!r} has invalid value {value!r}") from error


def _tolerance(run: RunConfig) -> float:
    return run.tolerance if run.tolerance is not None else DEFAULT_TOLERANCE


def _require_counting(run: RunConfig):
    if run.counting is None:
        raise ConfigError(f"{run.command} needs --config with 'intervals'")
    return run.counting


def run_airy(run: RunConfig, threads: Optional[int]) -> Result:
    x = _param(run, "x", float)
    value = airy_ai(x)
    return Result(pandas.DataFrame({"x": [x], "ai": [value.ai], "ai_prime": [value.ai_prime]}))


def run_kernel(run: RunConfig, threads: Optional[int]) -> Result:
    s, x, t, y = (_param(run, key, float) for key in ("s", "x", "t", "y"))
    estimate = k2_ext_estimate(s, x, t, y)
    return Result(
        pandas.DataFrame(
            {
                "s": [s],
                "x": [x],
                "t": [t],
                "y": [y],
                "value": [estimate.value],
                "error_estimate": [estimate.error_estimate],
            }
        )
    )


def run_genfun(run: RunConfig, threads: Optional[int]) -> Result:
    value = generating_function(_require_counting(run), _tolerance(run), threads)
    return Result(pandas.DataFrame([value.to_dict()]))


def run_tw2(run: RunConfig, threads: Optional[int]) -> Result:
    start, stop, step = (_param(run, key, float) for key in ("from", "to", "step"))
    if not (step > 0 and stop >= start):
        raise ConfigError(f"tw2 needs from <= to and step > 0, got {start}, {stop}, {step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    points = [round(start + i * step, 12) for i in range(count)]
    tolerance = _tolerance(run)
    values = parallel_map(lambda s: tracy_widom_f2(s, tolerance), points, threads)
    return Result(
        pandas.DataFrame({"s": points, "F2": values}),
        plot=Plot("s", ("F2",), logy=_param(run, "log", bool), title="F2(s)"),
    )


def run_counts(run: RunConfig, threads: Optional[int]) -> Result:
    counting = _require_counting(run)
    k_max = run.k_max if run.k_max is not None else COUNTS_K_MAX
    probabilities = count_distribution(counting, run.target, k_max, _tolerance(run), threads)
    counts = numpy.arange(len(probabilities))
    return Result(
        pandas.DataFrame({"k": counts, "probability": probabilities}),
        plot=Plot("k", ("probability",), title=str(counting.spec(run.target))),
        summary={
            "total": float(probabilities.sum()),
            "mean": float(counts @ probabilities),
        },
    )


def _shifted_weights(run: RunConfig) -> Dict:
    if not run.shifted_z:
        return {}
    keys = [key for key, _ in run.counting.specs]
    if len(keys) != len(run.shifted_z):
        raise ConfigError(
            f"shifted_z has {len(run.shifted_z)} values for {len(keys)} intervals"
        )
    return dict(zip(keys, run.shifted_z))


def _decay_rate(curve) -> Optional[float]:
    try:
        return fit_decay_rate(curve)
    except DomainError:
        return None


def _real_parts(frame: pandas.DataFrame, columns: Sequence[str]) -> pandas.DataFrame:
    for column in columns:
        values = numpy.asarray(frame[column], dtype=complex)
        frame[column] = values.real
        if numpy.any(values.imag != 0):
            frame[f"{column}_im"] = values.imag
    return frame


def run_mixing(run: RunConfig, threads: Optional[int]) -> Result:
    counting = _require_counting(run)
    if not run.shifts:
        raise ConfigError("mixing needs shifts (--shifts or 'shifts' in the config)")
    experiment = MixingExperiment(counting, run.shifts, _shifted_weights(run), _tolerance(run))
    curve = mixing_sweep(experiment, threads)
    full = curve.to_frame("abs_R")
    frame = full[["T", "R_re", "R_im", "abs_R", "det_joint", "det_left", "det_right"]].copy()
    frame = _real_parts(frame, ("det_joint", "det_left", "det_right"))
    summary = {
        "decay_rate": _decay_rate(curve),
        "max_error_estimate": max(curve.columns["error_estimate"]),
    }
    if _param(run, "block_norms", bool):
        norms = offdiagonal_block_norms(experiment, threads=threads)
        summary["block_norms"] = list(norms.magnitude)
        summary["block_norm_decay_rate"] = _decay_rate(norms)
    log = _param(run, "log", bool)
    return Result(
        frame,
        plot=Plot("T", ("abs_R",), logx=log, logy=log, title="|R(z, T)|"),
        summary=summary,
    )


def _interval_param(run: RunConfig, key: str) -> IntervalSpec:
    value = run.params[key]
    try:
        lower, upper = (float(v) for v in value)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"{run.command} {key} must be [lower, upper], got {value!r}") from error
    return IntervalSpec(0.0, lower, upper)


def run_covariance(run: RunConfig, threads: Optional[int]) -> Result:
    first, second = _interval_param(run, "first"), _interval_param(run, "second")
    shifts = run.shifts or COVARIANCE_SHIFTS
    if not all(shift > 0 for shift in shifts):
        raise ConfigError(f"covariance shifts must be positive, got {list(shifts)}")
    k_max = run.k_max if run.k_max is not None else DEFAULT_K_MAX
    tolerance = _tolerance(run)
    curve = event_mixing(first, second, shifts, k_max, tolerance, threads)
    frame = pandas.DataFrame(
        {"T": curve.parameter, "Cov": curve.columns["covariance"], "event_defect": curve.magnitude}
    )
    equal_time = None
    if first == second or first.upper <= second.lower or second.upper <= first.lower:
        equal_time = count_covariance(first, second, k_max, tolerance, threads)
    log = _param(run, "log", bool)
    return Result(
        frame,
        plot=Plot("T", ("event_defect",), logx=log, logy=log, title="count mixing"),
        summary={
            "equal_time_covariance": equal_time,
            "decay_rate": _decay_rate(curve),
        },
    )


def run_trace_decay(run: RunConfig, threads: Optional[int]) -> Result:
    side = _param(run, "side", ProjectionSide)
    ys = run.params["ys"]
    if isinstance(ys, str):
        ys = _float_list(ys)
    curve = trace_decay(
        _param(run, "a", float),
        side,
        [float(y) for y in ys],
        _param(run, "L", float),
        _param(run, "nodes", int),
        threads,
    )
    frame = curve.to_frame("trace_norm")[["y", "trace_norm", "y_times_norm"]]
    return Result(
        frame,
        plot=Plot(
            "y", ("trace_norm",), logx=True, logy=True, title=f"trace norm, side={side.value}"
        ),
        summary={
            "decay_rate": _decay_rate(curve),
            "window_change": max(curve.columns["window_change"]),
        },
    )


def run_gibbs_check(run: RunConfig, threads: Optional[int]) -> Result:
    report = gibbs_resample_check(
        k=_param(run, "k", int),
        intervals=_param(run, "grid", int),
        samples=_param(run, "samples", int),
        rng=RngStream(run.seed),
        method=_param(run, "method", Method),
        threads=threads,
    )
    document = report.to_dict()
    failure = None
    if not report.success:
        failure = NumericError(
            f"gibbs resampling broke the ordering {report.ordering_violations} time(s) "
            f"or changed values outside the window"
        )
    return Result(pandas.DataFrame([document]), document=document, failure=failure)


def run_gue_edge(run: RunConfig, threads: Optional[int]) -> Result:
    n, samples = _param(run, "n", int), _param(run, "samples", int)
    values = gue_edge_sample(n, samples, RngStream(run.seed), threads)
    reference = parallel_map(tracy_widom_f2, TW2_CHECK_POINTS, threads)
    deviation = max_cdf_deviation(values, TW2_CHECK_POINTS, reference)
    ks = match_cdf(values, tracy_widom_cdf(_tolerance(run), threads))
    summary = {
        "mean": float(numpy.mean(values)),
        "variance": float(numpy.var(values, ddof=1)) if len(values) > 1 else 0.0,
        "max_cdf_deviation": deviation,
        "ks_stat": ks.result["stat"],
        "ks_p_value": ks.result["p"],
    }
    frame = pandas.DataFrame({"index": numpy.arange(len(values)).astype(object), "sample": values})
    row = pandas.DataFrame([{"index": "summary", "sample": math.nan, **summary}])
    logger.info(
        "GUE edge N=%d: mean %.4f, variance %.4f, max CDF deviation from F2 %.4f, %r",
        n,
        summary["mean"],
        summary["variance"],
        deviation,
        ks,
    )
    return Result(
        pandas.concat([frame, row], ignore_index=True),
        document={"summary": summary, "samples": values.tolist()},
        summary=summary,
    )


def run_golden_command(run: RunConfig, threads: Optional[int]) -> Result:
    path = run.params["file"]
    if _param(run, "record", bool):
        if path is None:
            raise ConfigError("golden --record needs --file")
        recorded = record_golden(load_golden(path), Path(path), _tolerance(run), threads)
        frame = pandas.DataFrame([value.to_dict() for value in recorded])
        return Result(frame.drop(columns=["args"]))

    checks = run_golden(Path(path) if path else GOLDEN_PATH, threads)
    frame = pandas.DataFrame(
        [
            {
                "name": check.name,
                "value": check.result["value"],
                "expected": check.result["expected"],
                "drift": check.result["drift"],
                "tolerance": check.args["tolerance"],
                "success": check.success,
            }
            for check in checks
        ]
    )
    failed = [check for check in checks if not check]
    failure = None
    if failed:
        failure = AccuracyError(
            f"{len(failed)} golden value(s) drifted: {', '.join(c.name for c in failed)}",
            error_estimate=max(c.result["drift"] for c in failed),
        )
    return Result(frame, document={"checks": [c.to_dict() for c in checks]}, failure=failure)


COMMANDS: Dict[str, Callable[[RunConfig, Optional[int]], Result]] = {
    "airy": run_airy,
    "kernel": run_kernel,
    "genfun": run_genfun,
    "tw2": run_tw2,
    "counts": run_counts,
    "mixing": run_mixing,
    "covariance": run_covariance,
    "trace-decay": run_trace_decay,
    "gibbs-check": run_gibbs_check,
    "gue-edge": run_gue_edge,
    "golden": run_golden_command,
}

DEFAULT_FORMATS = {"gibbs-check": Format.JSON}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=[f.value for f in Format], help="output format")
    common.add_argument("--seed", type=int, help=f"random seed (default: {DEFAULT_SEED})")
    common.add_argument(
        "--tolerance", type=float, help=f"target accuracy (default: {DEFAULT_TOLERANCE})"
    )
    common.add_argument(
        "--threads", type=int, help=f"worker cap (default: ${THREADS_ENV} or the CPU count)"
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="airyline",
        description="Fredholm determinants, mixing and Gibbs checks for the Airy line ensemble.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)
    keep = argparse.SUPPRESS

    def command(name: str, summary: str, epilog: Optional[str] = None) -> argparse.ArgumentParser:
        return commands.add_parser(
            name, parents=[common], help=summary, description=summary, epilog=epilog
        )

    airy = command("airy", "Ai(x) and Ai'(x) in full precision")
    airy.add_argument("--x", type=float, default=keep)

    kernel = command("kernel", "extended Airy2 kernel value K(s, x; t, y) and its error estimate")
    for name in ("s", "x", "t", "y"):
        kernel.add_argument(f"--{name}", type=float, default=keep)

    command("genfun", "generating function E[prod z^N] of a configuration (needs --config)")

    tw2 = command("tw2", "Tracy-Widom F2 on a grid of s")
    tw2.add_argument("--from", dest="from", type=float, default=keep, help="first s (default: -6)")
    tw2.add_argument("--to", type=float, default=keep, help="last s (default: 3)")
    tw2.add_argument("--step", type=float, default=keep, help="grid step (default: 0.1)")
    tw2.add_argument("--log", action="store_true", default=keep, help="log-scale the SVG plot")

    counts = command("counts", "distribution of the count in the target interval (needs --config)")
    counts.add_argument("--k-max", dest="k_max", type=int, default=keep)

    mixing = command(
        "mixing",
        "mixing remainder R(z, T) along a ladder of shifts (needs --config)",
        epilog="CSV columns: T,R_re,R_im,abs_R,det_joint,det_left,det_right. When a "
        "determinant has a nonzero imaginary part (complex z), det_joint_im, det_left_im "
        "and det_right_im follow, in that order, for the columns that need them.",
    )
    mixing.add_argument("--shifts", type=_float_list, default=keep, help="e.g. 1,2,4,8,16")
    mixing.add_argument(
        "--linear", dest="log", action="store_false", default=keep, help="linear SVG axes"
    )
    mixing.add_argument(
        "--block-norms",
        dest="block_norms",
        action="store_true",
        default=keep,
        help="add the cross-cluster block norms to the summary (JSON output)",
    )

    covariance = command(
        "covariance",
        "count covariance and event mixing of two intervals as one is shifted in time",
        epilog="CSV columns: T,Cov,event_defect. Cov is Cov(N_first, N_second + T) with its "
        "sign; event_defect is max |P[a, b] - P[a] P[b]| over counts up to --k-max.",
    )
    covariance.add_argument(
        "--first", type=_float_list, default=keep, help="lower,upper (default: -1,1)"
    )
    covariance.add_argument(
        "--second", type=_float_list, default=keep, help="lower,upper (default: -1,1)"
    )
    covariance.add_argument("--shifts", type=_float_list, default=keep, help="default: 1,2,4,8,16")
    covariance.add_argument("--k-max", dest="k_max", type=int, default=keep, help="default: 6")
    covariance.add_argument(
        "--linear", dest="log", action="store_false", default=keep, help="linear SVG axes"
    )

    trace = command("trace-decay", "trace norm of the semigroup-weighted projection as y grows")
    trace.add_argument("--a", type=float, default=keep, help="left end of the window (default: -4)")
    trace.add_argument("--side", choices=[s.value for s in ProjectionSide], default=keep)
    trace.add_argument("--ys", type=_float_list, default=keep, help="e.g. 1,2,4,8,16")
    trace.add_argument("--L", type=float, default=keep, help="window length (default: 12)")
    trace.add_argument("--nodes", type=int, default=keep)

    gibbs = command("gibbs-check", "Gibbs resampling invariance of avoiding Brownian bridges")
    gibbs.add_argument("--k", type=int, default=keep, help="number of curves (default: 2)")
    gibbs.add_argument("--grid", type=int, default=keep, help="grid intervals (default: 64)")
    gibbs.add_argument("--samples", type=int, default=keep)
    gibbs.add_argument("--method", choices=[m.value for m in Method], default=keep)

    gue = command("gue-edge", "rescaled largest GUE eigenvalues from the tridiagonal model")
    gue.add_argument("--n", type=int, default=keep, help="matrix size (default: 400)")
    gue.add_argument("--samples", type=int, default=keep)

    golden = command("golden", "re-evaluate the golden values and report drift")
    golden.add_argument("--file", default=keep, help="golden file (default: the bundled one)")
    golden.add_argument(
        "--record", action="store_true", default=keep, help="rewrite --file with current values"
    )

    return parser


def _read_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise IoError(f"cannot read {path}: {error.strerror or error}") from error
    return parse_config(text)


GLOBAL_OPTIONS = {
    "command",
    "config",
    "out",
    "format",
    "seed",
    "tolerance",
    "threads",
    "verbose",
    "quiet",
    "shifts",
    "k_max",
}


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Flags win over the ``--config`` document, which wins over the defaults.
    """
    options = vars(args)
    params = {key: value for key, value in options.items() if key not in GLOBAL_OPTIONS}
    if args.config:
        run = _read_config(args.config)
        if run.command != args.command:
            raise ConfigError(f"{args.config} configures {run.command!r}, not {args.command!r}")
        run = replace(run, params={**run.params, **params})
    else:
        run = RunConfig(args.command, params)
    overrides = {
        "seed": args.seed,
        "tolerance": args.tolerance,
        "threads": args.threads,
        "output": args.out,
        "shifts": tuple(options["shifts"]) if "shifts" in options else None,
        "k_max": options.get("k_max"),
    }
    return replace(run, **{key: value for key, value in overrides.items() if value is not None})


def _format(args: argparse.Namespace, run: RunConfig) -> Format:
    if args.format:
        return Format(args.format)
    if run.output:
        suffix = Path(run.output).suffix.lstrip(".").lower()
        if suffix in {f.value for f in Format}:
            return Format(suffix)
    return DEFAULT_FORMATS.get(run.command, Format.CSV)


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        run = run_config_from_args(args)
        logger.debug("running %s with %s", run.command, run.params)
        result = COMMANDS[run.command](run, run.threads)
        emit(result, _format(args, run), run.output)
        if result.failure is not None:
            raise result.failure
    except AiryLineError as error:
        print(f"error[{error.category}]: {error}", file=sys.stderr)
        return error.exit_code
    return 0
