# pylint: disable=redefined-outer-name

import math

import pytest

from airyline.fredholm import CountingConfig
from airyline.quadrature import IntervalSpec
from airyline.util.rng import RngStream


reference_interval = IntervalSpec(0.0, -1.0, 1.0, 0.5)
reference_config = CountingConfig.from_intervals([reference_interval])
two_time_config = CountingConfig.from_intervals(
    [IntervalSpec(0.0, -1.0, 1.0, 0.5), IntervalSpec(1.0, -1.0, 1.0, 0.5)]
)
edge_config = CountingConfig.from_intervals([IntervalSpec(0.0, -2.0, math.inf, 0.0)])
split_config = CountingConfig.from_intervals(
    [IntervalSpec(0.0, -2.0, -0.5, 0.0), IntervalSpec(0.0, 0.0, 1.5, 0.0)]
)


@pytest.fixture(
    params=[reference_config, two_time_config],
    ids=["one_time", "two_times"],
)
def counting_config(request) -> CountingConfig:
    return request.param


def test_fixture_counting_config(counting_config: CountingConfig):
    assert counting_config.lower_bound == -1.0
    assert all(spec.weight_z == 0.5 for _, spec in counting_config.specs)


@pytest.fixture(params=[edge_config, split_config], ids=["edge", "split"])
def gap_config(request) -> CountingConfig:
    return request.param


def test_fixture_gap_config(gap_config: CountingConfig):
    assert all(spec.weight_z == 0 for _, spec in gap_config.specs)


@pytest.fixture
def rng() -> RngStream:
    return RngStream(42)


@pytest.fixture(params=[1, 4], ids=["serial", "threads"])
def threads(request) -> int:
    return request.param
