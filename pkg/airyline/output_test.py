# pylint: disable=redefined-outer-name

import json

import pandas
import pytest

from airyline.errors import DomainError, IoError
from airyline.output import Format, Plot, Result, emit, render


@pytest.fixture
def curve() -> Result:
    frame = pandas.DataFrame(
        {"T": [1.0, 2.0, 4.0], "abs_R": [0.1, 0.025, 0.00625], "R_re": [-0.1, -0.025, -0.00625]}
    )
    plot = Plot("T", ("abs_R",), logx=True, logy=True, title="mixing")
    return Result(frame, plot=plot, summary={"decay_rate": -2.0})


def test_csv(curve: Result):
    text = render(curve, Format.CSV)
    assert text.splitlines()[0] == "T,abs_R,R_re"
    assert text.splitlines()[1] == "1.0,0.1,-0.1"
    assert text.endswith("\n")


def test_json_rows_keep_column_order(curve: Result):
    document = json.loads(render(curve, "json"))
    assert list(document) == ["rows", "summary"]
    assert list(document["rows"][0]) == ["T", "abs_R", "R_re"]
    assert document["summary"] == {"decay_rate": -2.0}


def test_json_document_replaces_rows():
    result = Result(pandas.DataFrame(), document={"ks_stat": 0.01, "z": 0.5j})
    assert json.loads(render(result, Format.JSON)) == {"ks_stat": 0.01, "z": [0.0, 0.5]}


def test_svg_is_deterministic(curve: Result):
    first = render(curve, Format.SVG)
    assert first.lstrip().startswith("<?xml")
    assert "<svg" in first
    assert "<dc:date>" not in first
    assert render(curve, Format.SVG) == first


def test_svg_without_plot():
    result = Result(pandas.DataFrame({"x": [0.0, 1.0], "ai": [0.355, 0.135]}))
    assert "<svg" in render(result, "svg")


def test_unknown_format(curve: Result):
    with pytest.raises(DomainError):
        render(curve, "xlsx")


def test_emit_to_stdout(curve: Result, capsys):
    text = emit(curve)
    assert capsys.readouterr().out == text
    assert emit(curve, Format.CSV, "-") == text


def test_emit_to_file(curve: Result, tmp_path):
    path = tmp_path / "mixing.csv"
    text = emit(curve, Format.CSV, str(path))
    assert path.read_bytes() == text.encode("utf-8")
    assert b"\r\n" not in path.read_bytes()


def test_emit_unwritable(curve: Result, tmp_path):
    with pytest.raises(IoError) as error:
        emit(curve, Format.CSV, str(tmp_path / "missing" / "mixing.csv"))
    assert error.value.exit_code == 8
