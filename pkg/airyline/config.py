"""
Run configuration: JSON documents for the config-driven commands and the
defaults every command starts from.

    {
      "command": "mixing",
      "intervals": [{"time": 0, "lower": -1, "upper": 1, "z": [0.5, 0]}],
      "shifts": [1, 2, 4, 8, 16]
    }
"""

from dataclasses import dataclass, field
import json
import math
import re
from typing import Any, Dict, List, Optional, Tuple

from airyline.errors import ConfigError, ParseError
from airyline.fredholm import CountingConfig
from airyline.quadrature import IntervalSpec

DEFAULT_SEED = 20140101

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "airy": {"x": 0.0},
    "kernel": {"s": 0.0, "x": 0.0, "t": 0.0, "y": 0.0},
    "genfun": {},
    "tw2": {"from": -6.0, "to": 3.0, "step": 0.1, "log": False},
    "counts": {},
    "mixing": {"log": True, "block_norms": False},
    "covariance": {"first": [-1.0, 1.0], "second": [-1.0, 1.0], "log": True},
    "trace-decay": {
        "a": -4.0,
        "side": "pos",
        "ys": [1.0, 2.0, 4.0, 8.0, 16.0],
        "L": 12.0,
        "nodes": 64,
    },
    "gibbs-check": {"k": 2, "grid": 64, "samples": 10_000, "method": "rejection"},
    "gue-edge": {"n": 400, "samples": 200_000},
    "golden": {"file": None, "record": False},
}

CONFIG_KEYS = {
    "command",
    "intervals",
    "target",
    "k_max",
    "shifts",
    "shifted_z",
    "tolerance",
    "seed",
    "threads",
    "output",
    "params",
}
INTERVAL_KEYS = {"time", "lower", "upper", "z"}
COUNTING_COMMANDS = {"genfun", "counts", "mixing"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    seed: int = DEFAULT_SEED
    tolerance: Optional[float] = None
    threads: Optional[int] = None
    counting: Optional[CountingConfig] = None
    target: Optional[Tuple[int, int]] = None
    k_max: Optional[int] = None
    shifts: Tuple[float, ...] = ()
    shifted_z: Tuple[complex, ...] = ()

    def __post_init__(self):
        if self.command not in COMMAND_DEFAULTS:
            raise ConfigError(f"unknown command {self.command!r}")
        unknown = set(self.params) - set(COMMAND_DEFAULTS[self.command])
        if unknown:
            names = ", ".join(sorted(unknown))
            raise ConfigError(f"unknown parameter(s) for {self.command}: {names}")
        object.__setattr__(self, "params", {**COMMAND_DEFAULTS[self.command], **self.params})
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _locate(text: str, key: str) -> Tuple[Optional[int], Optional[int]]:
    match = re.search(f'"{re.escape(key)}"', text)
    if match is None:
        return None, None
    line = text.count("\n", 0, match.start()) + 1
    column = match.start() - (text.rfind("\n", 0, match.start()) + 1) + 1
    return line, column


def _field_error(message: str, path: str, text: str) -> ParseError:
    return ParseError(message, path, *_locate(text, path.rsplit(".", 1)[-1]))


def _number(value, path: str, text: str, allow_inf: bool = False) -> float:
    if isinstance(value, str) and allow_inf and value.strip().lower() in ("inf", "+inf", "-inf"):
        return -math.inf if value.strip().startswith("-") else math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _field_error(f"expected a number, got {value!r}", path, text)
    return float(value)


def _complex(value, path: str, text: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(_number(value[0], path, text), _number(value[1], path, text))
    raise _field_error(f"expected [re, im], got {value!r}", path, text)


def _interval(raw, index: int, text: str) -> IntervalSpec:
    path = f"intervals[{index}]"
    if not isinstance(raw, dict):
        raise ParseError("expected an object", path)
    unknown = set(raw) - INTERVAL_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ParseError(f"unknown key {key!r}", path, *_locate(text, key))
    for key in ("time", "lower", "upper"):
        if key not in raw:
            raise ParseError(f"missing key {key!r}", path)
    try:
        return IntervalSpec(
            _number(raw["time"], f"{path}.time", text),
            _number(raw["lower"], f"{path}.lower", text, allow_inf=True),
            _number(raw["upper"], f"{path}.upper", text, allow_inf=True),
            _complex(raw.get("z", 0.0), f"{path}.z", text),
        )
    except ParseError:
        raise
    except ConfigError as error:
        raise ConfigError(f"{path}: {error}") from error


def parse_config(text: str) -> RunConfig:
    """
    Parses and validates a JSON run configuration. Syntax errors carry
    line and column; schema violations name the offending field; interval
    invariants (disjointness, M0, |z| <= 1) raise ``ConfigError``.

    >>> parse_config('{"command": "tw2"}').params["step"]
    0.1
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(error.msg, line=error.lineno, column=error.colno) from error
    if not isinstance(document, dict):
        raise ParseError("configuration must be a JSON object")

    unknown = set(document) - CONFIG_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ParseError(f"unknown key {key!r}", key, *_locate(text, key))
    if "command" not in document:
        raise ParseError("missing key 'command'", "command")
    command = document["command"]
    if command not in COMMAND_DEFAULTS:
        raise _field_error(f"unknown command {command!r}", "command", text)

    params = document.get("params", {})
    if not isinstance(params, dict):
        raise _field_error("expected an object", "params", text)
    unknown = set(params) - set(COMMAND_DEFAULTS[command])
    if unknown:
        key = sorted(unknown)[0]
        raise _field_error(f"unknown parameter {key!r} for {command}", f"params.{key}", text)

    counting = None
    if "intervals" in document:
        raw = document["intervals"]
        if not isinstance(raw, list):
            raise _field_error("expected a list", "intervals", text)
        counting = CountingConfig.from_intervals(
            _interval(item, i, text) for i, item in enumerate(raw)
        )
    elif command in COUNTING_COMMANDS:
        raise ParseError(f"{command} needs 'intervals'", "intervals")

    target = None
    if "target" in document:
        raw = document["target"]
        if not (isinstance(raw, list) and len(raw) == 2 and all(isinstance(v, int) for v in raw)):
            raise _field_error("expected [time_index, interval_index]", "target", text)
        target = (raw[0], raw[1])
        if counting is None:
            raise ParseError("a target needs 'intervals'", "target")
        counting.spec(target)
    elif command == "counts":
        raise ParseError("counts needs 'target'", "target")

    shifts: List[float] = [_number(v, "shifts", text) for v in document.get("shifts", [])]
    if command == "mixing" and not shifts:
        raise ParseError("mixing needs 'shifts'", "shifts")
    shifted_z = [_complex(v, "shifted_z", text) for v in document.get("shifted_z", [])]

    k_max = document.get("k_max")
    if k_max is not None and (not isinstance(k_max, int) or isinstance(k_max, bool)):
        raise _field_error(f"expected an integer, got {k_max!r}", "k_max", text)
    seed = document.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise _field_error(f"expected an integer, got {seed!r}", "seed", text)
    tolerance = document.get("tolerance")
    if tolerance is not None:
        tolerance = _number(tolerance, "tolerance", text)
    output = document.get("output")
    if output is not None and not isinstance(output, str):
        raise _field_error(f"expected a path, got {output!r}", "output", text)
    threads = document.get("threads")
    if threads is not None and (not isinstance(threads, int) or isinstance(threads, bool)):
        raise _field_error(f"expected an integer, got {threads!r}", "threads", text)

    return RunConfig(
        command=command,
        params=params,
        output=output,
        seed=seed,
        tolerance=tolerance,
        threads=threads,
        counting=counting,
        target=target,
        k_max=k_max,
        shifts=tuple(shifts),
        shifted_z=tuple(shifted_z),
    )
