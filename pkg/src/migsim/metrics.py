"""Sampling, aggregation, smoothing, distances and CSV output.

A sample is taken every `sample_interval` transitions after the setup gate:
per-node active-object loads, per-node inter-node Call/Future sends since
the previous sample, migration count, and the hop counts of messages
delivered in the interval.  Self-loop traffic is excluded everywhere.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from math import sqrt
from pathlib import Path

from .netgraph import NetworkGraph, all_pairs_distances
from .routing import ObjectId


@dataclass
class MetricsSample:
    index: int
    loads: list[int]
    msgs: list[int]
    migrations: int
    latency: Counter


class MetricsRecorder:
    """Accumulates deltas between samples; the engine writes straight into
    `msgs_sent`, `latency_delta` and `migrations`."""

    def __init__(self, n_nodes: int) -> None:
        self.n_nodes = n_nodes
        self.msgs_sent = [0] * n_nodes
        self.latency_delta: Counter = Counter()
        self.migrations = 0
        self.samples: list[MetricsSample] = []

    def take_sample(self, active_counts: list[int]) -> MetricsSample:
        s = MetricsSample(
            index=len(self.samples),
            loads=list(active_counts),
            msgs=list(self.msgs_sent),
            migrations=self.migrations,
            latency=self.latency_delta,
        )
        self.samples.append(s)
        self.msgs_sent = [0] * self.n_nodes
        self.latency_delta = Counter()
        self.migrations = 0
        return s


def _mean(xs) -> float:
    return sum(xs) / len(xs)


def _pstd(xs) -> float:
    """Population standard deviation: node sets are complete populations."""
    m = _mean(xs)
    return sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


@dataclass
class AggregateRow:
    index: int
    load_max: int
    load_std: float
    msg_avg: float
    msg_std: float
    migrations: int


def aggregate(samples: list[MetricsSample]) -> list[AggregateRow]:
    """Per-sample cross-node statistics, aligned to sample index."""
    if not samples:
        raise ValueError("aggregate needs at least one sample")
    return [
        AggregateRow(
            index=s.index,
            load_max=max(s.loads),
            load_std=_pstd(s.loads),
            msg_avg=_mean(s.msgs),
            msg_std=_pstd(s.msgs),
            migrations=s.migrations,
        )
        for s in samples
    ]


def smooth(series: list[float], window: int) -> list[float]:
    """Trailing sliding mean; prefixes shorter than the window average over
    the points available so far."""
    if window < 1:
        raise ValueError("window must be >= 1")
    out = []
    acc = 0.0
    for i, x in enumerate(series):
        acc += x
        if i >= window:
            acc -= series[i - window]
        out.append(acc / min(i + 1, window))
    return out


def final_window_mean(series: list[float], window: int = 100) -> float:
    tail = series[-window:] if len(series) > window else series
    return _mean(tail)


def latency_histogram(samples: list[MetricsSample]) -> Counter:
    """Hops-per-delivered-message distribution over the whole run."""
    total: Counter = Counter()
    for s in samples:
        total.update(s.latency)
    return total


def total_distances(
    graph: NetworkGraph,
    hosts: dict[ObjectId, int],
    comm_graph: dict[ObjectId, tuple[ObjectId, ...]],
) -> dict[ObjectId, int]:
    """Per-object sum of shortest-path hops to its declared communication
    partners.  Uses true BFS distance on the topology, so the measure is an
    allocation quality score independent of routing-table staleness."""
    dist = all_pairs_distances(graph)
    totals: dict[ObjectId, int] = {}
    for o, partners in comm_graph.items():
        row = dist[hosts[o]]
        totals[o] = sum(row[hosts[p]] for p in partners)
    return totals


def distance_histogram(
    totals: dict[ObjectId, int], ids=None
) -> Counter:
    sel = totals if ids is None else {o: totals[o] for o in ids}
    return Counter(sel.values())


# ---------------------------------------------------------------------- CSVs

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_load_csv(samples: list[MetricsSample], path: Path) -> None:
    n = len(samples[0].loads) if samples else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "max", "std"] + [f"load_{u}" for u in range(n)])
        for s in samples:
            w.writerow([s.index, max(s.loads), _fmt(_pstd(s.loads))] + s.loads)


def write_messages_csv(samples: list[MetricsSample], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "avg", "std"])
        for s in samples:
            w.writerow([s.index, _fmt(_mean(s.msgs)), _fmt(_pstd(s.msgs))])


def write_latency_csv(samples: list[MetricsSample], path: Path) -> None:
    hist = latency_histogram(samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hops", "count"])
        for hops in sorted(hist):
            w.writerow([hops, hist[hops]])


def write_migrations_csv(samples: list[MetricsSample], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample", "count"])
        for s in samples:
            w.writerow([s.index, s.migrations])


def write_distances_csv(hist: Counter, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["total_distance", "object_count"])
        for d in sorted(hist):
            w.writerow([d, hist[d]])


def read_csv_columns(path: Path) -> dict[str, list[float]]:
    """Load a metrics CSV back as {column: values} (report path helper)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    return {h: [float(r[i]) for r in data] for i, h in enumerate(header)}
