"""Scenario configuration, built-in profiles, and the flat key=value scenario file format."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace, fields as dc_fields

PROTOCOLS = ("HBDS", "NoIncentive", "SimBetLike", "SSARLike")

KMH_TO_MS = 1000.0 / 3600.0

# IEEE 802.11b class link, fixed transfer rate in bytes/second.
LINK_RATE_BPS = 2_000_000 / 8


@dataclass(frozen=True)
class IncentiveConstants:
    """The three scheme constants: election budget, relay payment, watchdog payment."""

    fb: float = 10.0
    f_pay: float = 1.0
    wn_pay: float = 0.1

    def __post_init__(self):
        if self.fb <= 0 or self.f_pay <= 0 or self.wn_pay <= 0:
            raise ValueError("incentive constants must all be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    area_width: float = 1500.0
    area_height: float = 1200.0
    n_terminal_nodes: int = 50
    n_relay_nodes: int = 3
    tx_range: float = 40.0
    avg_speed: float = 30.0          # km/h
    sim_duration: float = 7200.0     # seconds
    packet_interval: tuple[float, float] = (20.0, 30.0)
    packet_size: tuple[int, int] = (50_000, 650_000)
    packet_ttl: float = 1200.0
    terminal_buffer: int = 80_000_000
    relay_buffer: int = 120_000_000
    selfish_fraction: float = 0.0
    selfish_drop_probability: float = 0.92
    election_period: float = 600.0
    rng_seed: int = 1
    protocol: str = "HBDS"
    incentive_constants: IncentiveConstants = field(default_factory=IncentiveConstants)

    def __post_init__(self):
        if self.area_width <= 0 or self.area_height <= 0:
            raise ValueError("simulation area must have positive width and height")
        if self.n_terminal_nodes < 2:
            raise ValueError("need at least two terminal nodes")
        if self.n_relay_nodes < 0:
            raise ValueError("relay node count cannot be negative")
        if self.tx_range <= 0:
            raise ValueError("transmission range must be positive")
        if self.avg_speed < 0:
            raise ValueError("average speed cannot be negative")
        if self.sim_duration <= 0:
            raise ValueError("simulation duration must be positive")
        if self.packet_interval[0] > self.packet_interval[1] or self.packet_interval[0] < 0:
            raise ValueError("packet interval range is empty")
        if self.packet_size[0] > self.packet_size[1] or self.packet_size[0] <= 0:
            raise ValueError("packet size range is empty")
        if self.packet_ttl <= 0:
            raise ValueError("packet ttl must be positive")
        if self.terminal_buffer <= 0 or self.relay_buffer <= 0:
            raise ValueError("buffer capacities must be positive")
        if not (0.0 <= self.selfish_fraction <= 1.0):
            raise ValueError("selfish_fraction must lie in [0, 1]")
        if not (0.0 < self.selfish_drop_probability <= 1.0):
            raise ValueError("selfish_drop_probability must lie in (0, 1]")
        if self.election_period <= 0:
            raise ValueError("election period must be positive")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}, expected one of {PROTOCOLS}")

    @property
    def n_nodes(self) -> int:
        return self.n_terminal_nodes + self.n_relay_nodes

    @property
    def selfish_count(self) -> int:
        # round half up
        return int(math.floor(self.selfish_fraction * self.n_terminal_nodes + 0.5))

    def terminal_ids(self) -> range:
        return range(self.n_terminal_nodes)

    def relay_ids(self) -> range:
        return range(self.n_terminal_nodes, self.n_nodes)


def desk_profile(**overrides) -> ScenarioConfig:
    """Small scenario used by the test suite: 50 nodes, 2 simulated hours, 1500x1200 m."""
    return replace(ScenarioConfig(), **overrides) if overrides else ScenarioConfig()


def paper_profile(**overrides) -> ScenarioConfig:
    """Full-scale scenario: 4500x3500 m, 100 terminals, 5 relays, 24 hours."""
    base = ScenarioConfig(
        area_width=4500.0,
        area_height=3500.0,
        n_terminal_nodes=100,
        n_relay_nodes=5,
        tx_range=300.0,
        avg_speed=60.0,
        sim_duration=86_400.0,
        packet_interval=(20.0, 30.0),
        packet_size=(50_000, 650_000),
        packet_ttl=320.0 * 60.0,
        terminal_buffer=150_000_000,
        relay_buffer=250_000_000,
        election_period=3600.0,
    )
    return replace(base, **overrides) if overrides else base


def profile_from_env(**overrides) -> ScenarioConfig:
    """Select the default profile via HBDS_PROFILE (paper|desk, default desk)."""
    name = os.environ.get("HBDS_PROFILE", "desk").strip().lower()
    if name == "paper":
        return paper_profile(**overrides)
    if name == "desk":
        return desk_profile(**overrides)
    raise ValueError(f"HBDS_PROFILE must be 'paper' or 'desk', got {name!r}")


_PAIR_FIELDS = {"packet_interval": float, "packet_size": int}
_INT_FIELDS = {"n_terminal_nodes", "n_relay_nodes", "terminal_buffer", "relay_buffer", "rng_seed"}


def parse_scenario_file(path: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Read a flat key=value scenario file; unknown keys are fatal."""
    cfg = base if base is not None else profile_from_env()
    known = {f.name for f in dc_fields(ScenarioConfig)}
    overrides: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown scenario key {key!r}")
            overrides[key] = _parse_value(key, value, path, lineno)
    return replace(cfg, **overrides)


def _parse_value(key: str, value: str, path: str, lineno: int):
    if key == "protocol":
        return value
    if key == "incentive_constants":
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: incentive_constants needs fb,f_pay,wn_pay")
        return IncentiveConstants(float(parts[0]), float(parts[1]), float(parts[2]))
    if key in _PAIR_FIELDS:
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: {key} needs min,max")
        cast = _PAIR_FIELDS[key]
        return (cast(parts[0]), cast(parts[1]))
    if key in _INT_FIELDS:
        return int(value)
    return float(value)


def format_scenario(cfg: ScenarioConfig) -> str:
    """Serialize a config back to the flat key=value form."""
    lines = []
    for f in dc_fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        if f.name == "incentive_constants":
            rendered = f"{value.fb},{value.f_pay},{value.wn_pay}"
        elif f.name in _PAIR_FIELDS:
            rendered = f"{value[0]},{value[1]}"
        else:
            rendered = str(value)
        lines.append(f"{f.name}={rendered}")
    return "\n".join(lines) + "\n"
