from dataclasses import dataclass, field
from enum import Enum
import io
import json
import logging
import sys
from typing import Optional, Tuple

import matplotlib
from matplotlib.figure import Figure
import pandas

from airyline.checks import coerce_to_json
from airyline.errors import DomainError, IoError

logger = logging.getLogger(__name__)


class Format(str, Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


@dataclass(frozen=True)
class Plot:
    x: str
    y: Tuple[str, ...]
    logx: bool = False
    logy: bool = False
    title: Optional[str] = None


@dataclass
class Result:
    """
    What a command produced: a table, optionally a JSON document that
    replaces the table's records, and optionally a line plot of the table.
    """

    frame: pandas.DataFrame
    document: Optional[dict] = None
    plot: Optional[Plot] = None
    summary: dict = field(default_factory=dict)
    failure: Optional[Exception] = None


def _render_csv(result: Result) -> str:
    return result.frame.to_csv(index=False)


def _render_json(result: Result) -> str:
    if result.document is not None:
        document = result.document
    else:
        document = {"rows": result.frame.to_dict(orient="records")}
        if result.summary:
            document["summary"] = result.summary
    return json.dumps(document, indent=2, default=coerce_to_json) + "\n"


def _render_svg(result: Result) -> str:
    plot = result.plot
    if plot is None:
        plot = Plot(result.frame.columns[0], tuple(result.frame.columns[1:2]))
    figure = Figure(figsize=(6, 4))
    axes = figure.add_subplot()
    for column in plot.y:
        axes.plot(
            result.frame[plot.x], result.frame[column], marker="o", markersize=3, label=column
        )
    if plot.logx:
        axes.set_xscale("log")
    if plot.logy:
        axes.set_yscale("log")
    axes.set_xlabel(plot.x)
    if plot.title:
        axes.set_title(plot.title)
    if len(plot.y) > 1:
        axes.legend()
    buffer = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "airyline", "svg.fonttype": "none"}):
        figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


_RENDERERS = {Format.CSV: _render_csv, Format.JSON: _render_json, Format.SVG: _render_svg}


def render(result: Result, format: Format) -> str:
    try:
        format = Format(format)
    except ValueError as error:
        raise DomainError(f"unknown output format {format!r}") from error
    return _RENDERERS[format](result)


def emit(result: Result, format: Format = Format.CSV, path: Optional[str] = None) -> str:
    """
    Writes ``result`` as CSV, JSON or SVG to ``path`` (stdout when omitted).
    Equal results render to identical bytes.

    >>> emit(Result(pandas.DataFrame({"s": [0.0], "F2": [0.5]})), "csv")
    s,F2
    0.0,0.5
    's,F2\\n0.0,0.5\\n'
    """
    text = render(result, format)
    if path is None or path == "-":
        sys.stdout.write(text)
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as error:
        raise IoError(f"cannot write {path}: {error.strerror or error}") from error
    logger.info("wrote %s to %s", Format(format).value, path)
    return text
