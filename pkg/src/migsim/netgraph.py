"""Static network topology: nodes, directed FIFO arcs, builders and validation.

A network is a set of integer node ids plus directed arcs carrying FIFO
message queues.  Every node has a self-loop arc, every inter-node arc has a
reverse arc, and the topology never changes after construction; only queue
contents mutate, and only under the simulation engine's single logical
thread.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

# Message kind tags.  Call/Future are the application-level messages: the
# only ones that count toward inter-node message metrics (kind >= KIND_CALL).
KIND_TABLE = 0
KIND_OBJECT = 1
KIND_LOAD = 2
KIND_CALL = 3
KIND_FUTURE = 4


class EmptyQueueError(Exception):
    """Dequeue from an empty arc queue: a rule was applied without its premise."""


class Message:
    """Base wire message.  `hops` counts inter-node arc traversals."""

    __slots__ = ("hops",)
    kind = -1

    def __init__(self) -> None:
        self.hops = 0


class TableMsg(Message):
    """Routing-table snapshot gossiped to a neighbour."""

    __slots__ = ("table",)
    kind = KIND_TABLE

    def __init__(self, table: dict) -> None:
        self.hops = 0
        self.table = table


class ObjectMsg(Message):
    """A complete runtime object in transit between nodes."""

    __slots__ = ("obj",)
    kind = KIND_OBJECT

    def __init__(self, obj) -> None:
        self.hops = 0
        self.obj = obj


class LoadMsg(Message):
    """A node's advertised active-object count.  Never enters message metrics."""

    __slots__ = ("origin", "load")
    kind = KIND_LOAD

    def __init__(self, origin: int, load: int) -> None:
        self.hops = 0
        self.origin = origin
        self.load = load


class CallMsg(Message):
    """Asynchronous method invocation addressed to an object."""

    __slots__ = ("dest", "method", "args", "future", "caller")
    kind = KIND_CALL

    def __init__(self, dest, method: str, args, future, caller) -> None:
        self.hops = 0
        self.dest = dest
        self.method = method
        self.args = args
        self.future = future
        self.caller = caller


class FutureMsg(Message):
    """The resolved value of a future, addressed back to an object."""

    __slots__ = ("dest", "future", "value")
    kind = KIND_FUTURE

    def __init__(self, dest, future, value) -> None:
        self.hops = 0
        self.dest = dest
        self.future = future
        self.value = value


def dest(m: Message):
    """Recipient object id; defined exactly for Call and Future messages."""
    if m.kind >= KIND_CALL:
        return m.dest
    raise TypeError(f"dest() undefined for message kind {m.kind}")


@dataclass
class ArcQueue:
    """Directed link from `src` to `dst` with an unbounded FIFO queue.

    `soft_limit` never drops messages; it only bumps `overflows` so queue
    pressure can be studied without reproducing buffer-overflow failures.
    """

    src: int
    dst: int
    q: deque = field(default_factory=deque)
    soft_limit: int | None = None
    overflows: int = 0

    def push(self, m: Message) -> None:
        if self.soft_limit is not None and len(self.q) >= self.soft_limit:
            self.overflows += 1
        self.q.append(m)


def enqueue(a: ArcQueue, m: Message) -> ArcQueue:
    """Append `m` at the back of the arc queue (in place; returns the arc)."""
    a.push(m)
    return a


def first(a: ArcQueue) -> Message:
    """Front message without removing it."""
    if not a.q:
        raise EmptyQueueError(f"arc ({a.src},{a.dst}) is empty")
    return a.q[0]


def dequeue_first(a: ArcQueue) -> tuple[Message, ArcQueue]:
    """Pop and return the front message together with the arc."""
    if not a.q:
        raise EmptyQueueError(f"arc ({a.src},{a.dst}) is empty")
    return a.q.popleft(), a


class NetworkGraph:
    """Immutable topology over dense integer node ids 0..n-1.

    Arcs are keyed by (src, dst).  Construction happens through the builders
    below, which guarantee the three well-formedness rules: no dangling
    arcs, a reverse arc for every inter-node arc, and a self-loop per node.
    """

    def __init__(self, n_nodes: int, edges: list[tuple[int, int]]) -> None:
        self.n_nodes = n_nodes
        self.arcs: dict[tuple[int, int], ArcQueue] = {}
        for u in range(n_nodes):
            self.arcs[(u, u)] = ArcQueue(u, u)
        for u, v in edges:
            self.arcs.setdefault((u, v), ArcQueue(u, v))
            self.arcs.setdefault((v, u), ArcQueue(v, u))
        # canonical per-node views, all in ascending index order
        self.neighbours: list[list[int]] = [[] for _ in range(n_nodes)]
        for (u, v) in sorted(self.arcs):
            if u != v:
                self.neighbours[u].append(v)
        self.in_arcs: list[list[ArcQueue]] = [
            [self.arcs[(v, u)] for v in sorted(src for (src, d) in self.arcs if d == u)]
            for u in range(n_nodes)
        ]
        self.out: list[dict[int, ArcQueue]] = [
            {v: self.arcs[(u, v)] for (s, v) in sorted(self.arcs) if s == u}
            for u in range(n_nodes)
        ]

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    def arc(self, u: int, v: int) -> ArcQueue:
        return self.arcs[(u, v)]

    def set_soft_limit(self, limit: int | None) -> None:
        for a in self.arcs.values():
            a.soft_limit = limit

    def total_overflows(self) -> int:
        return sum(a.overflows for a in self.arcs.values())

    def in_flight(self) -> Iterator[Message]:
        """All messages currently sitting in arc queues, in canonical order."""
        for key in sorted(self.arcs):
            yield from self.arcs[key].q

    def dump(self) -> str:
        """Text form consumed by test oracles: header plus one 'src dst' per arc."""
        lines = [f"nodes {self.n_nodes}"]
        lines += [f"{u} {v}" for (u, v) in sorted(self.arcs)]
        return "\n".join(lines) + "\n"


def build_grid(rows: int, cols: int) -> NetworkGraph:
    """Non-wrapping rows x cols grid, 4-neighbour adjacency, row-major ids."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return NetworkGraph(rows * cols, edges)


def build_hypercube(dim: int) -> NetworkGraph:
    """Binary hypercube: 2^dim nodes, adjacency on single differing bit."""
    if dim < 0:
        raise ValueError("dimension must be >= 0")
    n = 1 << dim
    edges = []
    for u in range(n):
        for b in range(dim):
            v = u ^ (1 << b)
            if u < v:
                edges.append((u, v))
    return NetworkGraph(n, edges)


def build_full_mesh(n: int) -> NetworkGraph:
    """Complete graph: an arc between every ordered pair of distinct nodes."""
    if n < 1:
        raise ValueError("mesh size must be >= 1")
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return NetworkGraph(n, edges)


def validate(g: NetworkGraph) -> str | None:
    """None when well-formed, else a report naming the first violation."""
    for (u, v) in sorted(g.arcs):
        if u not in g.nodes or v not in g.nodes:
            return f"dangling arc ({u},{v}) references a non-existent node"
    for (u, v) in sorted(g.arcs):
        if u != v and (v, u) not in g.arcs:
            return f"missing reverse arc for ({u},{v})"
    for u in g.nodes:
        if (u, u) not in g.arcs:
            return f"missing self-loop at node {u}"
    return None


def bfs_distances(g: NetworkGraph, source: int) -> list[int]:
    """Hop distance from `source` to every node (-1 when unreachable)."""
    dist = [-1] * g.n_nodes
    dist[source] = 0
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        for v in g.neighbours[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return dist


def all_pairs_distances(g: NetworkGraph) -> list[list[int]]:
    return [bfs_distances(g, u) for u in g.nodes]
