import json

import pytest

from airyline.errors import IoError, ParseError
from airyline.golden import GOLDEN_PATH, GoldenValue, load_golden, record_golden, run_golden


def test_bundled_values_pass():
    checks = run_golden(threads=1)
    assert len(checks) == len(load_golden())
    assert all(checks), [check for check in checks if not check]
    assert {check.name for check in checks} >= {"ai(0)", "k2(0,0)", "F2(-2)"}


def test_bundled_file_is_found():
    assert GOLDEN_PATH.is_file()
    assert all(value.tolerance > 0 for value in load_golden())


def test_drift_is_reported(tmp_path):
    path = tmp_path / "golden.json"
    document = {
        "values": [
            {"name": "ai(0)", "op": "ai", "args": [0.0], "expected": 0.36, "tolerance": 1e-14},
            {
                "name": "k2(0,0)",
                "op": "k2",
                "args": [0.0, 0.0],
                "expected": 0.066987483779663987,
                "tolerance": 1e-13,
            },
        ]
    }
    path.write_text(json.dumps(document))
    drifted, kept = run_golden(path, threads=1)
    assert not drifted
    assert drifted.result["drift"] == pytest.approx(0.36 - 0.35502805388781724)
    assert kept


def test_record_rewrites_expected_values(tmp_path):
    stale = [GoldenValue("ai(1)", "ai", (1.0,), 0.0, 1e-13)]
    path = tmp_path / "golden.json"
    recorded = record_golden(stale, path, threads=1)
    assert recorded[0].expected == pytest.approx(0.13529241631288141, abs=1e-13)
    assert load_golden(path) == recorded
    assert all(run_golden(path, threads=1))


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        '{"values": [{"name": "x", "op": "ai"}]}',
        '{"values": [{"name": "x", "op": "gamma", "args": [1], "expected": 1, "tolerance": 1}]}',
    ],
)
def test_malformed_files(tmp_path, text):
    path = tmp_path / "golden.json"
    path.write_text(text)
    with pytest.raises(ParseError):
        load_golden(path)


def test_missing_file(tmp_path):
    with pytest.raises(IoError):
        load_golden(tmp_path / "absent.json")
    with pytest.raises(IoError):
        record_golden([], tmp_path / "absent" / "golden.json")
