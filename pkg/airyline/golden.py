"""
Golden-value regression: reference numbers stored with the tolerance they
were generated at, and a runner that reports the drift of each one.
"""

from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from airyline.checks import Check, within
from airyline.errors import IoError, ParseError
from airyline.fredholm import DEFAULT_TOLERANCE, tracy_widom_f2
from airyline.kernels import diagonal_tail, k2, k2_ext
from airyline.special_functions import airy_ai
from airyline.util.parallel import parallel_map

logger = logging.getLogger(__name__)

GOLDEN_PATH = Path(__file__).parent / "data" / "golden.json"

OPERATIONS: Dict[str, Callable[..., float]] = {
    "ai": lambda x: airy_ai(x).ai,
    "ai_prime": lambda x: airy_ai(x).ai_prime,
    "k2": k2,
    "k2_ext": k2_ext,
    "diagonal_tail": diagonal_tail,
    "tracy_widom_f2": tracy_widom_f2,
}


@dataclass(frozen=True)
class GoldenValue:
    name: str
    op: str
    args: Tuple[float, ...]
    expected: float
    tolerance: float

    def evaluate(self) -> float:
        return float(OPERATIONS[self.op](*self.args))

    def check(self) -> Check:
        return within(self.evaluate(), self.expected, self.tolerance, self.name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "op": self.op,
            "args": list(self.args),
            "expected": self.expected,
            "tolerance": self.tolerance,
        }


def _read(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise IoError(f"cannot read {path}: {error.strerror or error}") from error
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(error.msg, str(path), error.lineno, error.colno) from error


def load_golden(path: Optional[Path] = None) -> List[GoldenValue]:
    document = _read(Path(path or GOLDEN_PATH))
    values = []
    for index, entry in enumerate(document.get("values", [])):
        field = f"values[{index}]"
        try:
            value = GoldenValue(
                str(entry["name"]),
                str(entry["op"]),
                tuple(float(a) for a in entry["args"]),
                float(entry["expected"]),
                float(entry["tolerance"]),
            )
        except (KeyError, TypeError, ValueError) as error:
            raise ParseError(f"malformed golden entry: {error}", field) from error
        if value.op not in OPERATIONS:
            raise ParseError(f"unknown golden operation {value.op!r}", f"{field}.op")
        values.append(value)
    return values


def run_golden(path: Optional[Path] = None, threads: Optional[int] = None) -> List[Check]:
    """
    Re-evaluates every golden value. One ``Check`` per value, carrying
    ``value``, ``expected`` and ``drift``.
    """
    values = load_golden(path)
    checks = parallel_map(lambda value: value.check(), values, threads)
    failed = [check for check in checks if not check]
    if failed:
        logger.warning("%d of %d golden values drifted", len(failed), len(checks))
    else:
        logger.info("all %d golden values within tolerance", len(checks))
    return checks


def record_golden(
    values: Sequence[GoldenValue],
    path: Path,
    tolerance: float = DEFAULT_TOLERANCE,
    threads: Optional[int] = None,
) -> List[GoldenValue]:
    """
    Writes ``values`` to ``path`` with ``expected`` replaced by the current
    evaluation, keeping each value's tolerance.
    """
    current = parallel_map(lambda value: value.evaluate(), values, threads)
    recorded = [
        GoldenValue(v.name, v.op, v.args, fresh, v.tolerance) for v, fresh in zip(values, current)
    ]
    document = {
        "generated_with": {"tolerance": tolerance},
        "values": [value.to_dict() for value in recorded],
    }
    try:
        Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    except OSError as error:
        raise IoError(f"cannot write {path}: {error.strerror or error}") from error
    logger.info("recorded %d golden values to %s", len(recorded), path)
    return recorded
