# pylint: disable=redefined-outer-name

import json

import pandas
import pytest

from airyline.cli import _real_parts, build_parser, main, run_config_from_args
from airyline.kernels import k2


@pytest.fixture
def write_config(tmp_path):
    def write(document) -> str:
        path = tmp_path / "run.json"
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return str(path)

    return write


EDGE_COUNTS = {
    "command": "counts",
    "intervals": [{"time": 0, "lower": -2, "upper": "inf"}],
    "target": [0, 0],
    "k_max": 4,
}

STALE_AI = {"name": "ai(0)", "op": "ai", "args": [0], "expected": 0.3, "tolerance": 1e-14}

REFERENCE_MIXING = {
    "command": "mixing",
    "intervals": [{"time": 0, "lower": -1, "upper": 1, "z": [0.5, 0]}],
    "shifts": [1, 2, 4, 8, 16],
}


def test_airy(capsys):
    assert main(["airy", "--x", "0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,ai,ai_prime"
    assert lines[1].startswith("0.0,0.355028053887817")


def test_kernel_at_equal_times(capsys):
    argv = ["kernel", "--s", "1", "--x", "0.5", "--t", "1", "--y", "-0.5", "--format", "json"]
    assert main(argv) == 0
    row = json.loads(capsys.readouterr().out)["rows"][0]
    assert list(row) == ["s", "x", "t", "y", "value", "error_estimate"]
    assert row["value"] == k2(0.5, -0.5)


def test_tw2(capsys):
    assert main(["tw2", "--from", "-1", "--to", "0", "--step", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "s,F2"
    assert [line.split(",")[0] for line in lines[1:]] == ["-1.0", "-0.5", "0.0"]
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert values == sorted(values)


def test_tw2_svg_by_suffix(tmp_path):
    path = tmp_path / "tw2.svg"
    assert main(["tw2", "--from", "-1", "--to", "0", "--step", "0.5", "--out", str(path)]) == 0
    assert "<svg" in path.read_text()


def test_counts(write_config, capsys):
    assert main(["counts", "--config", write_config(EDGE_COUNTS)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,probability"
    assert len(lines) == 6


def test_counts_k_max_flag_wins(write_config, capsys):
    assert main(["counts", "--config", write_config(EDGE_COUNTS), "--k-max", "2"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_genfun(write_config, capsys):
    document = {"command": "genfun", "intervals": [{"time": 0, "lower": -1, "upper": 1, "z": 0.5}]}
    assert main(["genfun", "--config", write_config(document)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "value_re,value_im,error_estimate,nodes_used"


def test_flags_override_config(write_config):
    args = build_parser().parse_args(
        [
            "mixing",
            "--config",
            write_config(REFERENCE_MIXING),
            "--shifts",
            "2,4,8",
            "--seed",
            "3",
            "--linear",
        ]
    )
    run = run_config_from_args(args)
    assert run.shifts == (2.0, 4.0, 8.0)
    assert run.seed == 3
    assert run.params["log"] is False
    assert run.counting.spec((0, 0)).weight_z == 0.5


def test_defaults_without_config():
    run = run_config_from_args(build_parser().parse_args(["trace-decay", "--side", "neg"]))
    assert run.params["side"] == "neg"
    assert run.params["a"] == -4.0
    assert run.output is None


@pytest.mark.slow
def test_mixing(write_config, capsys):
    assert main(["mixing", "--config", write_config(REFERENCE_MIXING)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "T,R_re,R_im,abs_R,det_joint,det_left,det_right"
    assert len(lines) == 6


def test_real_parts_appends_imaginary_columns():
    frame = pandas.DataFrame({"T": [1.0], "det_joint": [0.5 + 0.25j], "det_left": [0.5 + 0j]})
    frame = _real_parts(frame, ("det_joint", "det_left"))
    assert list(frame.columns) == ["T", "det_joint", "det_left", "det_joint_im"]
    assert frame["det_joint"][0] == 0.5
    assert frame["det_joint_im"][0] == 0.25


@pytest.mark.slow
def test_mixing_with_complex_z(write_config, capsys):
    interval = {"time": 0, "lower": -1, "upper": 1, "z": [0, 0.5]}
    document = {**REFERENCE_MIXING, "intervals": [interval]}
    assert main(["mixing", "--config", write_config(document), "--shifts", "2,4,8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    fixed = "T,R_re,R_im,abs_R,det_joint,det_left,det_right"
    assert lines[0] == fixed + ",det_joint_im,det_left_im,det_right_im"
    assert len(lines) == 4


def test_mixing_help_lists_imaginary_columns(capsys):
    with pytest.raises(SystemExit):
        main(["mixing", "--help"])
    assert "det_joint_im" in capsys.readouterr().out


def test_covariance(capsys):
    argv = ["covariance", "--shifts", "1,8", "--k-max", "2", "--format", "json"]
    assert main(argv) == 0
    document = json.loads(capsys.readouterr().out)
    near, far = document["rows"]
    assert list(near) == ["T", "Cov", "event_defect"]
    assert far["event_defect"] < near["event_defect"]
    assert abs(far["Cov"]) < abs(near["Cov"])
    assert document["summary"]["equal_time_covariance"] > 0


def test_covariance_csv(capsys):
    argv = ["covariance", "--first=-2,-1", "--second=0,1", "--shifts", "1,2,4", "--k-max", "0"]
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "T,Cov,event_defect"
    assert [line.split(",")[0] for line in lines[1:]] == ["1.0", "2.0", "4.0"]


def test_trace_decay(capsys):
    assert main(["trace-decay", "--ys", "1,2,4", "--nodes", "32", "--L", "8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "y,trace_norm,y_times_norm"
    norms = [float(line.split(",")[1]) for line in lines[1:]]
    assert norms == sorted(norms, reverse=True)


def test_gibbs_check_is_reproducible(capsys):
    argv = ["gibbs-check", "--grid", "16", "--samples", "500", "--seed", "42"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    report = json.loads(first)
    assert list(report)[:3] == ["ks_stat", "p_value", "acceptance_rate"]
    assert report["ordering_violations"] == 0


def test_gue_edge(capsys):
    argv = ["gue-edge", "--n", "60", "--samples", "20", "--seed", "7"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    lines = first.splitlines()
    assert lines[0] == "index,sample,mean,variance,max_cdf_deviation,ks_stat,ks_p_value"
    assert len(lines) == 22
    assert lines[-1].startswith("summary,,")
    assert main(argv) == 0
    assert capsys.readouterr().out == first


def test_golden(capsys):
    assert main(["golden", "--threads", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,value,expected,drift,tolerance,success"
    assert all(line.endswith("True") for line in lines[1:])


def test_golden_drift_exits_with_accuracy_error(write_config, capsys):
    document = {"values": [STALE_AI]}
    assert main(["golden", "--file", write_config(document)]) == 5
    assert capsys.readouterr().err.startswith("error[accuracy]: 1 golden value(s) drifted: ai(0)")


def test_golden_record(write_config, capsys):
    document = {"values": [STALE_AI]}
    path = write_config(document)
    assert main(["golden", "--file", path, "--record"]) == 0
    assert main(["golden", "--file", path]) == 0
    capsys.readouterr()


@pytest.mark.parametrize(
    "argv,code,category",
    [
        (["genfun"], 3, "config"),
        (["tw2", "--step", "0"], 3, "config"),
        (["airy", "--x", "nan"], 4, "domain"),
        (["kernel", "--x", "inf"], 4, "domain"),
        (["golden", "--record"], 3, "config"),
        (["covariance", "--shifts", "0,1"], 3, "config"),
        (["covariance", "--first", "1"], 3, "config"),
        (["airy", "--config", "/nonexistent/run.json"], 8, "io"),
        (["airy", "--out", "/nonexistent/dir/airy.csv"], 8, "io"),
    ],
)
def test_errors(capsys, argv, code, category):
    assert main(argv) == code
    assert capsys.readouterr().err.startswith(f"error[{category}]: ")


def test_config_errors(write_config, capsys):
    assert main(["airy", "--config", write_config('{"command": "airy",\n "x": }')]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["airy", "--config", write_config({"command": "tw2"})]) == 3
    assert "configures 'tw2'" in capsys.readouterr().err
    bad_side = write_config({"command": "trace-decay", "params": {"side": "up"}})
    assert main(["trace-decay", "--config", bad_side]) == 3


def test_usage_errors():
    with pytest.raises(SystemExit) as error:
        main([])
    assert error.value.code == 2
    with pytest.raises(SystemExit) as error:
        main(["tw2", "--step", "fast"])
    assert error.value.code == 2
    with pytest.raises(SystemExit) as error:
        main(["--version"])
    assert error.value.code == 0
