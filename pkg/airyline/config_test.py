import math
import textwrap

import pytest

from airyline.config import COMMAND_DEFAULTS, DEFAULT_SEED, RunConfig, parse_config
from airyline.errors import ConfigError, ParseError


MIXING = textwrap.dedent(
    """\
    {
      "command": "mixing",
      "intervals": [
        {"time": 0, "lower": -1, "upper": 1, "z": [0.5, 0]},
        {"time": 1, "lower": "-inf", "upper": -2, "z": 0}
      ],
      "shifts": [2, 4, 8],
      "shifted_z": [[0, 1], 0.25],
      "seed": 7,
      "threads": 2
    }
    """
)


def test_defaults():
    config = parse_config('{"command": "tw2"}')
    assert config.params == {"from": -6.0, "to": 3.0, "step": 0.1, "log": False}
    assert config.seed == DEFAULT_SEED
    assert config.tolerance is None
    assert config.counting is None


def test_covariance_defaults():
    config = parse_config('{"command": "covariance", "shifts": [1, 2]}')
    assert config.params["first"] == [-1.0, 1.0]
    assert config.k_max is None
    assert config.shifts == (1.0, 2.0)
    assert parse_config('{"command": "covariance", "k_max": 3}').k_max == 3


def test_params_override_defaults():
    config = parse_config('{"command": "trace-decay", "params": {"side": "neg", "L": 8}}')
    assert config.params["side"] == "neg"
    assert config.params["L"] == 8
    assert config.params["ys"] == COMMAND_DEFAULTS["trace-decay"]["ys"]


def test_mixing_document():
    config = parse_config(MIXING.replace('"-inf"', '-3'))
    assert config.command == "mixing"
    assert config.shifts == (2.0, 4.0, 8.0)
    assert config.shifted_z == (1j, 0.25)
    assert config.seed == 7
    assert config.threads == 2
    assert config.counting.times == (0.0, 1.0)
    assert config.counting.spec((0, 0)).weight_z == 0.5


def test_semi_infinite_intervals():
    text = '{"command": "genfun", "intervals": [{"time": 0, "lower": -2, "upper": "inf"}]}'
    spec = parse_config(text).counting.spec((0, 0))
    assert spec.upper == math.inf
    assert spec.weight_z == 0


def test_semi_infinite_below_is_rejected():
    with pytest.raises(ConfigError, match="M0"):
        parse_config(MIXING)


def test_overlap_names_both_intervals():
    text = textwrap.dedent(
        """\
        {"command": "genfun", "intervals": [
          {"time": 0, "lower": -1, "upper": 1},
          {"time": 0, "lower": 0.5, "upper": 2}
        ]}
        """
    )
    with pytest.raises(ConfigError) as error:
        parse_config(text)
    assert "(-1, 1) at t=0" in str(error.value)
    assert "(0.5, 2) at t=0" in str(error.value)


def test_weight_outside_unit_disk():
    text = '{"command": "genfun", "intervals": [{"time": 0, "lower": 0, "upper": 1, "z": [1, 1]}]}'
    with pytest.raises(ConfigError, match="exceeds 1"):
        parse_config(text)


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as error:
        parse_config('{\n  "command": "tw2",\n  oops\n}')
    assert error.value.line == 3
    assert error.value.column == 3
    assert "line 3, column 3" in str(error.value)


def test_unknown_key_has_position():
    with pytest.raises(ParseError) as error:
        parse_config('{"command": "tw2",\n "colour": 1}')
    assert error.value.field == "colour"
    assert error.value.line == 2
    assert error.value.column == 2


def test_unknown_interval_key():
    text = '{"command": "genfun", "intervals": [{"time": 0, "lower": 0, "upper": 1, "weight": 1}]}'
    with pytest.raises(ParseError, match="weight"):
        parse_config(text)


def test_unknown_parameter():
    with pytest.raises(ParseError, match="colour"):
        parse_config('{"command": "tw2", "params": {"colour": "red"}}')
    with pytest.raises(ConfigError, match="colour"):
        RunConfig("tw2", {"colour": "red"})


@pytest.mark.parametrize(
    "text,field",
    [
        ('{"command": "counts", "intervals": [{"time": 0, "lower": 0, "upper": 1}]}', "target"),
        ('{"command": "genfun"}', "intervals"),
        ('{"command": "mixing", "intervals": [{"time": 0, "lower": 0, "upper": 1}]}', "shifts"),
        ('{"command": "tw2", "seed": 1.5}', "seed"),
        ('{"command": "tw2", "k_max": true}', "k_max"),
        ('{"command": "tw2", "target": [0, 0]}', "target"),
        ('{"command": "tw2", "output": 3}', "output"),
        ('{"params": {}}', "command"),
        ('{"command": "launch"}', "command"),
    ],
)
def test_schema_errors_name_the_field(text, field):
    with pytest.raises(ParseError) as error:
        parse_config(text)
    assert error.value.field == field


def test_non_numeric_bound():
    text = '{"command": "genfun", "intervals": [{"time": 0, "lower": "zero", "upper": 1}]}'
    with pytest.raises(ParseError) as error:
        parse_config(text)
    assert error.value.field == "intervals[0].lower"
    assert error.value.line == 1


def test_document_must_be_object():
    with pytest.raises(ParseError):
        parse_config("[1, 2]")


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("tw2", tolerance=0.0)
    with pytest.raises(ConfigError):
        RunConfig("tw2", threads=0)
    with pytest.raises(ConfigError):
        RunConfig("tw2", seed=-1)
    with pytest.raises(ConfigError):
        RunConfig("launch")
