"""Accelerator parameters, per-stage cycle costs and named presets."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CostModel:
    """Cycle costs per stage.

    Defaults are typical single-precision FPGA IP figures; none of them
    come from a measured RTL build.  ``row_fetch_latency`` is only used by
    the serial baseline, which chases a pointer for every B row it reads.
    """

    cam_load: int = 1
    cam_lookup: int = 1
    mul_latency: int = 3
    add_latency: int = 1
    sort_insert: int = 1
    merge: int = 1
    div_latency: int = 14
    sqrt_latency: int = 14
    row_fetch_latency: int = 25


@dataclass(frozen=True)
class SimConfig:
    pipelines: int
    freq_mhz: float
    read_bw_gbps: float
    write_bw_gbps: float
    bundle_capacity: int = 32
    cam_size: int = 32
    multipliers_per_pe: int = 1
    sort_capacity: int = 64
    element_bytes: int = 8
    buffer_depth: int | None = None  # defaults to bundle_capacity
    costs: CostModel = field(default_factory=CostModel)
    prep_ns_per_element: float = 2.0
    prep_ns_per_bundle: float = 10.0

    def __post_init__(self):
        for name in ("pipelines", "bundle_capacity", "cam_size", "multipliers_per_pe", "sort_capacity", "element_bytes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.freq_mhz <= 0:
            raise ConfigError("freq_mhz must be > 0")
        if self.read_bw_gbps <= 0 or self.write_bw_gbps <= 0:
            raise ConfigError("bandwidths must be > 0")
        if self.cam_size < self.bundle_capacity:
            raise ConfigError(f"cam_size {self.cam_size} < bundle_capacity {self.bundle_capacity}")
        if self.buffer_depth is not None and self.buffer_depth < self.bundle_capacity:
            raise ConfigError("buffer_depth must hold at least one full bundle")
        for name, v in asdict(self.costs).items():
            if v < 0 or (name != "row_fetch_latency" and v < 1):
                raise ConfigError(f"cost {name} must be >= 1")

    @property
    def depth(self) -> int:
        return self.buffer_depth if self.buffer_depth is not None else self.bundle_capacity

    @property
    def read_budget(self) -> Fraction:
        """Bytes the memory may deliver per accelerator cycle."""
        return _per_cycle(self.read_bw_gbps, self.freq_mhz)

    @property
    def write_budget(self) -> Fraction:
        return _per_cycle(self.write_bw_gbps, self.freq_mhz)

    def with_(self, **kw) -> SimConfig:
        if "costs" in kw and isinstance(kw["costs"], dict):
            kw["costs"] = replace(self.costs, **kw["costs"])
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["buffer_depth"] = self.depth
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SimConfig:
        d = dict(d)
        d["costs"] = CostModel(**d.get("costs", {}))
        return cls(**d)


def _per_cycle(gbps: float, mhz: float) -> Fraction:
    g = Fraction(gbps).limit_denominator(10**6)
    f = Fraction(mhz).limit_denominator(10**6)
    return g * 1000 / f


SINGLE_CORE_BW = 14.0
PEAK_READ_BW = 147.0
PEAK_WRITE_BW = 73.0

PRESETS: dict[str, SimConfig] = {
    "reap32-spgemm": SimConfig(32, 250.0, SINGLE_CORE_BW, SINGLE_CORE_BW),
    "reap64-spgemm": SimConfig(64, 250.0, PEAK_READ_BW, PEAK_WRITE_BW),
    "reap128-spgemm": SimConfig(128, 220.0, PEAK_READ_BW, PEAK_WRITE_BW),
    # no separate single-core figure is given for Cholesky; reuse the SpGEMM one
    "reap32-chol": SimConfig(32, 250.0, SINGLE_CORE_BW, SINGLE_CORE_BW, multipliers_per_pe=8),
    "reap64-chol": SimConfig(64, 238.0, PEAK_READ_BW, PEAK_WRITE_BW, multipliers_per_pe=16),
}


def preset(name: str) -> SimConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}' (choose from {', '.join(PRESETS)})") from None
