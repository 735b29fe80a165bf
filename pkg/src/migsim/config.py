"""Run configuration: every knob the CLI and tests can turn, with the
defaults used throughout the benchmark scenarios."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


TOPOLOGIES = ("grid", "hypercube", "mesh")
SCENARIOS = ("independent_tasks", "star", "ring", "chord")
PROCEDURES = (
    "berenbrink",
    "berenbrink_neutral",
    "berenbrink_comm",
    "weighted_load",
    "weighted_load_comm",
    "none",
)


@dataclass
class RunConfig:
    # topology
    topology: str = "grid"
    rows: int = 4
    cols: int = 8
    nodes: int | None = None          # hypercube/mesh size (hypercube: power of two)

    # workload
    scenario: str = "independent_tasks"
    procedure: str = "berenbrink"
    seed: int = 0

    # cadences and run length
    samples: int = 1000               # stop after this many post-gate samples
    sample_interval: int = 1000       # transitions per sample
    migration_cadence: int = 10       # rounds per migration cycle
    gossip_dirty_interval: int = 1    # rounds between gossip checks after a change
    gossip_idle_interval: int = 10    # resend floor for unchanged tables
    stop_after_cycles: int | None = None   # alternative stop: post-gate migration cycles
    max_rounds: int | None = None     # hard safety cap
    smooth_window: int = 5

    # balancing parameters (paper defaults)
    migration_cap: int = 20           # max migrations per non-neutral cycle
    neutral_cap: int = 2              # max migrations per neutral/comm cycle
    load_diff_threshold: int = 10     # divisor of the weighted load-difference probability
    comm_weight: float = 0.2          # weight of the communication-intensity probability

    # actor runtime
    history_capacity: int = 32
    queue_soft_limit: int | None = None

    # scenario sizing
    workers: int = 200                # independent_tasks worker count
    star_count: int | None = None     # default: one star per node
    star_fringes: int = 5
    star_ticks: int | None = None     # finite request count per fringe (None = forever)
    star_think_steps: int = 16        # local work per fringe request cycle
    star_serve_steps: int = 2         # local work per center reply
    ring_size: int = 128
    ring_tokens: int | None = None    # default: one token per ring object
    ring_laps: int | None = None      # finite laps per token (None = forever)
    ring_work_steps: int = 24
    chord_objects: int = 128
    chord_bits: int = 7
    chord_ops: int | None = None      # finite put/get count per client (None = forever)
    chord_think_steps: int = 16       # local work per client operation
    chord_serve_steps: int = 4        # local work per DHT request/relay

    # output
    out: str | None = None
    trace: bool = False

    def validate(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.procedure not in PROCEDURES:
            raise ConfigError(f"unknown procedure {self.procedure!r}")
        if self.topology == "grid":
            if self.rows < 1 or self.cols < 1:
                raise ConfigError("grid needs rows >= 1 and cols >= 1")
        else:
            n = self.nodes
            if n is None or n < 1:
                raise ConfigError(f"{self.topology} needs --nodes >= 1")
            if self.topology == "hypercube" and n & (n - 1) != 0:
                raise ConfigError(f"hypercube size must be a power of two, got {n}")
        if self.sample_interval < 1:
            raise ConfigError("sample interval must be >= 1")
        if self.migration_cadence < 1:
            raise ConfigError("migration cadence must be >= 1")
        if self.smooth_window < 1:
            raise ConfigError("smooth window must be >= 1")
        if self.chord_objects > (1 << self.chord_bits):
            raise ConfigError("chord objects cannot exceed the keyspace size")

    def n_nodes(self) -> int:
        return self.rows * self.cols if self.topology == "grid" else int(self.nodes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        fields = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)
