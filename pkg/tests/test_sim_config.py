from fractions import Fraction

import pytest

from reapkit.sim import PRESETS, ConfigError, CostModel, SimConfig, preset


def test_presets():
    p = preset("reap32-spgemm")
    assert (p.pipelines, p.freq_mhz, p.read_bw_gbps, p.write_bw_gbps) == (32, 250.0, 14.0, 14.0)
    assert (p.bundle_capacity, p.cam_size) == (32, 32)
    p = preset("reap64-spgemm")
    assert (p.pipelines, p.freq_mhz, p.read_bw_gbps, p.write_bw_gbps) == (64, 250.0, 147.0, 73.0)
    p = preset("reap128-spgemm")
    assert (p.pipelines, p.freq_mhz, p.read_bw_gbps, p.write_bw_gbps) == (128, 220.0, 147.0, 73.0)
    p = preset("reap32-chol")
    assert (p.pipelines, p.freq_mhz, p.multipliers_per_pe) == (32, 250.0, 8)
    p = preset("reap64-chol")
    assert (p.pipelines, p.freq_mhz, p.multipliers_per_pe, p.read_bw_gbps) == (64, 238.0, 16, 147.0)
    assert len(PRESETS) == 5


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("reap256")


def test_budget_per_cycle():
    p = preset("reap32-spgemm")
    assert p.read_budget == Fraction(56)
    assert preset("reap128-spgemm").read_budget == Fraction(147_000, 220)


@pytest.mark.parametrize(
    "kw",
    [
        {"pipelines": 0},
        {"read_bw_gbps": 0},
        {"freq_mhz": -1},
        {"cam_size": 16},
        {"buffer_depth": 8},
        {"costs": {"mul_latency": 0}},
        {"sort_capacity": 0},
    ],
)
def test_invalid(kw):
    with pytest.raises(ConfigError):
        preset("reap32-spgemm").with_(**kw)


def test_dict_round_trip():
    c = preset("reap64-chol").with_(costs={"div_latency": 20})
    d = c.to_dict()
    assert d["costs"]["div_latency"] == 20
    assert SimConfig.from_dict(d) == c.with_(buffer_depth=c.depth)
    assert CostModel().row_fetch_latency >= 0
