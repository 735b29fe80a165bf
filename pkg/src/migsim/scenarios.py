"""The benchmark programs: behavior state machines plus setup orchestration.

Every scenario follows the same shape: a start object on node 0 runs a
setup task that creates the whole object population (creation is one step
per object, so setup takes a pre-gate warm-up phase), wires any static
references directly on the behavior instances, and finally calls
`setupFinished` on itself, which opens the gate for migration and metrics.

Workloads are closed loops: callers block on their own futures or forward a
fixed token population, so in-flight message counts stay bounded and load
stays steady, which is what the migration procedures feed on.
"""

from __future__ import annotations

from bisect import bisect_left

from .actors import (
    Behavior, CallOut, COMPUTE, CreateObject, DELEGATED, GetValue, Resolve,
    SETUP_FINISHED,
)
from .config import RunConfig
from .routing import ObjectId


class StartBehavior(Behavior):
    """Generic start object: runs the scenario's setup generator, then calls
    setupFinished on itself and goes inactive."""

    def __init__(self, scenario) -> None:
        self.scenario = scenario

    def init_task(self, ctx):
        yield from self.scenario.setup_task(ctx)
        yield CallOut(ctx.self_id, SETUP_FINISHED, ())
        return None

    def handler(self, ctx, method, args, caller, reply_future):
        if method != SETUP_FINISHED:
            raise NotImplementedError(method)
        yield COMPUTE
        return "ready"


class Scenario:
    """Base: install on a world, declare the communication graph."""

    name = "scenario"

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.start_id: ObjectId | None = None

    def install(self, world) -> None:
        self.start_id = world.bootstrap(0, StartBehavior(self))

    def setup_task(self, ctx):
        raise NotImplementedError
        yield  # pragma: no cover

    def comm_graph(self) -> dict[ObjectId, tuple[ObjectId, ...]]:
        return {}

    def distance_report_ids(self) -> list[ObjectId] | None:
        """Objects whose totals go into distances.csv (None = all)."""
        return None

    def declared_edges(self) -> set[frozenset]:
        """Undirected object pairs that post-gate traffic may use.  Includes
        the start object's residual edges (setup replies drain post-gate)."""
        edges: set[frozenset] = set()
        for o, partners in self.comm_graph().items():
            for p in partners:
                edges.add(frozenset((o, p)))
        if self.start_id is not None:
            edges.add(frozenset((self.start_id,)))
            for o in self.comm_graph():
                edges.add(frozenset((self.start_id, o)))
        return edges


# --------------------------------------------------------------- independent

class WorkerBehavior(Behavior):
    """Perpetual fixed-cost compute loop: one steady unit of node load."""

    def init_task(self, ctx):
        while True:
            yield COMPUTE


class IndependentTasksScenario(Scenario):
    """One coordinator creates `workers` long-running objects and goes
    inactive; the workers never communicate."""

    name = "independent_tasks"

    def __init__(self, config: RunConfig) -> None:
        super().__init__(config)
        self.workers: list[ObjectId] = []

    def setup_task(self, ctx):
        for _ in range(self.config.workers):
            oid = yield CreateObject(WorkerBehavior())
            self.workers.append(oid)

    def comm_graph(self):
        return {w: () for w in self.workers}


# ---------------------------------------------------------------------- star

class StarCenter(Behavior):
    """Replies to fringe requests; stateless."""

    def __init__(self, serve_steps: int = 2) -> None:
        self.serve_steps = serve_steps

    def handler(self, ctx, method, args, caller, reply_future):
        if method != "request":
            raise NotImplementedError(method)
        for _ in range(self.serve_steps):
            yield COMPUTE
        return ("reply", args[0])


class StarFringe(Behavior):
    """Loops forever (or for `ticks` requests): call the center, await the
    reply, think a little."""

    def __init__(self, center: ObjectId, ticks: int | None, think_steps: int = 1):
        self.center = center
        self.ticks = ticks
        self.think_steps = think_steps

    def init_task(self, ctx):
        i = 0
        while self.ticks is None or i < self.ticks:
            f = yield CallOut(self.center, "request", (i,))
            yield GetValue(f)
            for _ in range(self.think_steps):
                yield COMPUTE
            i += 1


class StarScenario(Scenario):
    """Independent stars: one center and `star_fringes` fringe objects each.
    Fringes talk only to their center, so an allocation with every star on
    one node exchanges no inter-node messages at all."""

    name = "star"

    def __init__(self, config: RunConfig, star_count: int) -> None:
        super().__init__(config)
        self.star_count = star_count
        self.centers: list[ObjectId] = []
        self.fringes: dict[ObjectId, list[ObjectId]] = {}

    def setup_task(self, ctx):
        cfg = self.config
        for _ in range(self.star_count):
            center = yield CreateObject(StarCenter(cfg.star_serve_steps))
            members = []
            for _ in range(cfg.star_fringes):
                fr = yield CreateObject(
                    StarFringe(center, cfg.star_ticks, cfg.star_think_steps))
                members.append(fr)
            self.centers.append(center)
            self.fringes[center] = members

    def comm_graph(self):
        g: dict[ObjectId, tuple[ObjectId, ...]] = {}
        for center in self.centers:
            members = self.fringes[center]
            g[center] = tuple(members)
            for fr in members:
                g[fr] = (center,)
        return g

    def distance_report_ids(self):
        return list(self.centers)


# ---------------------------------------------------------------------- ring

class RingNode(Behavior):
    """Forwards tokens to its successor after a fixed amount of local work.
    `remaining` counts successor-link traversals left (None = forever)."""

    def __init__(self, work_steps: int) -> None:
        self.successor: ObjectId | None = None
        self.work_steps = work_steps

    def handler(self, ctx, method, args, caller, reply_future):
        if method != "pass_token":
            raise NotImplementedError(method)
        token, remaining = args
        for _ in range(self.work_steps):
            yield COMPUTE
        if remaining is None:
            yield CallOut(self.successor, "pass_token", (token, None))
        elif remaining > 0:
            yield CallOut(self.successor, "pass_token", (token, remaining - 1))
        return token


class RingScenario(Scenario):
    """`ring_size` objects wired in a cycle; the start object injects
    `ring_tokens` tokens that circulate as chained calls."""

    name = "ring"

    def __init__(self, config: RunConfig) -> None:
        super().__init__(config)
        self.ring_ids: list[ObjectId] = []

    def setup_task(self, ctx):
        cfg = self.config
        n = cfg.ring_size
        behaviors = [RingNode(cfg.ring_work_steps) for _ in range(n)]
        for b in behaviors:
            oid = yield CreateObject(b)
            self.ring_ids.append(oid)
        for i, b in enumerate(behaviors):
            b.successor = self.ring_ids[(i + 1) % n]
        tokens = cfg.ring_tokens if cfg.ring_tokens is not None else n
        remaining = cfg.ring_laps * n if cfg.ring_laps is not None else None
        for t in range(tokens):
            yield CallOut(self.ring_ids[t % n], "pass_token", (t, remaining))

    def comm_graph(self):
        ids = self.ring_ids
        n = len(ids)
        return {ids[i]: (ids[(i - 1) % n], ids[(i + 1) % n]) for i in range(n)}

    def distance_report_ids(self):
        return list(self.ring_ids)


# --------------------------------------------------------------------- chord

def _in_right_closed(a: int, x: int, b: int) -> bool:
    """x in (a, b] on the identifier circle; a == b means the whole circle."""
    if a == b:
        return True
    if a < b:
        return a < x <= b
    return x > a or x <= b


def _between_open(a: int, x: int, b: int) -> bool:
    if a == b:
        return x != a
    if a < b:
        return a < x < b
    return x > a or x < b


class ChordNode(Behavior):
    """One DHT member: owns the keys in (predecessor, self] and forwards
    other requests greedily along fingers.

    Forwarding never blocks: requests travel as fire-and-forget relays that
    record their path, replies relay back along the same path, and the entry
    object resolves the client's original future (its own entry task
    returned DELEGATED).
    """

    def __init__(self, scenario, index: int, pos: int, serve_steps: int = 4) -> None:
        self.scenario = scenario
        self.index = index
        self.pos = pos
        self.serve_steps = serve_steps
        self.prev_pos: int | None = None
        self.successor: ObjectId | None = None
        self.fingers: list[tuple[int, ObjectId]] = []
        self.client: ObjectId | None = None
        self.store: dict[int, object] = {}

    def owns(self, k: int) -> bool:
        return _in_right_closed(self.prev_pos, k, self.pos)

    def route_toward(self, k: int) -> ObjectId:
        for fpos, fid in reversed(self.fingers):
            if _between_open(self.pos, fpos, k):
                return fid
        return self.successor

    def _apply(self, op: str, k: int, v):
        ev = self.scenario.events
        if op == "put":
            self.store[k] = v
            ev.append(("store", k, v))
            return ("ok", k)
        r = self.store.get(k)
        ev.append(("fetch", k, r))
        return ("val", k, r)

    def handler(self, ctx, method, args, caller, reply_future):
        if method in ("dht_put", "dht_get"):
            op = "put" if method == "dht_put" else "get"
            k = args[0]
            v = args[1] if op == "put" else None
            for _ in range(self.serve_steps):
                yield COMPUTE
            if self.owns(k):
                self.scenario.events.append(("hops", 0))
                return self._apply(op, k, v)
            nxt = self.route_toward(k)
            yield CallOut(nxt, "dht_relay",
                          (op, k, v, reply_future, caller, (ctx.self_id,)))
            return DELEGATED
        if method == "dht_relay":
            op, k, v, client_fut, client, path = args
            for _ in range(self.serve_steps):
                yield COMPUTE
            if self.owns(k):
                self.scenario.events.append(("hops", len(path)))
                result = self._apply(op, k, v)
                yield CallOut(path[-1], "dht_reply",
                              (client_fut, client, result, path[:-1]))
                return "forwarded"
            nxt = self.route_toward(k)
            yield CallOut(nxt, "dht_relay",
                          (op, k, v, client_fut, client, path + (ctx.self_id,)))
            return "forwarded"
        if method == "dht_reply":
            client_fut, client, result, path = args
            for _ in range(self.serve_steps):
                yield COMPUTE
            if path:
                yield CallOut(path[-1], "dht_reply",
                              (client_fut, client, result, path[:-1]))
            else:
                yield Resolve(client, client_fut, result)
            return "relayed"
        raise NotImplementedError(method)


class ChordClient(Behavior):
    """Producer (puts values under pseudorandom keys) or consumer (gets
    pseudorandom keys) driving its associated DHT object."""

    def __init__(self, scenario, entry: ObjectId, producer: bool,
                 ops: int | None, bits: int, index: int,
                 think_steps: int) -> None:
        self.scenario = scenario
        self.entry = entry
        self.producer = producer
        self.ops = ops
        self.bits = bits
        self.index = index
        self.think_steps = think_steps

    def init_task(self, ctx):
        space = 1 << self.bits
        i = 0
        while self.ops is None or i < self.ops:
            k = ctx.rng.randrange(space)
            if self.producer:
                f = yield CallOut(self.entry, "dht_put", (k, (self.index, i)))
            else:
                f = yield CallOut(self.entry, "dht_get", (k,))
            r = yield GetValue(f)
            if not self.producer:
                self.scenario.events.append(("client_get", k, r))
            for _ in range(self.think_steps):
                yield COMPUTE
            i += 1


class ChordScenario(Scenario):
    """A Chord ring of `chord_objects` members spread evenly over a
    2^chord_bits identifier circle, each with one finger per keyspace bit
    and one attached client (producers and consumers alternate)."""

    name = "chord"

    def __init__(self, config: RunConfig) -> None:
        super().__init__(config)
        self.dht_ids: list[ObjectId] = []
        self.clients: list[ObjectId] = []
        self.nodes: list[ChordNode] = []
        self.events: list[tuple] = []

    def setup_task(self, ctx):
        cfg = self.config
        m, bits = cfg.chord_objects, cfg.chord_bits
        space = 1 << bits
        positions = [i * space // m for i in range(m)]

        def owner_index(k: int) -> int:
            i = bisect_left(positions, k)
            return i % m

        self.nodes = [ChordNode(self, i, positions[i], cfg.chord_serve_steps)
                      for i in range(m)]
        for node in self.nodes:
            oid = yield CreateObject(node)
            self.dht_ids.append(oid)
        # joins: ring pointers and fingers are fixed once all members exist
        for i, node in enumerate(self.nodes):
            node.prev_pos = positions[(i - 1) % m]
            node.successor = self.dht_ids[(i + 1) % m]
            node.fingers = [
                (positions[owner_index((positions[i] + (1 << j)) % space)],
                 self.dht_ids[owner_index((positions[i] + (1 << j)) % space)])
                for j in range(bits)
            ]
        for i in range(m):
            cid = yield CreateObject(ChordClient(
                self, self.dht_ids[i], producer=(i % 2 == 0),
                ops=cfg.chord_ops, bits=bits, index=i,
                think_steps=cfg.chord_think_steps))
            self.clients.append(cid)
            self.nodes[i].client = cid

    def comm_graph(self):
        g: dict[ObjectId, tuple[ObjectId, ...]] = {}
        for i, node in enumerate(self.nodes):
            partners = dict.fromkeys(
                [node.successor] + [fid for _, fid in node.fingers] + [node.client])
            g[self.dht_ids[i]] = tuple(p for p in partners if p is not None)
        for i, cid in enumerate(self.clients):
            g[cid] = (self.dht_ids[i],)
        return g

    def distance_report_ids(self):
        return list(self.dht_ids)

    def max_lookup_hops(self) -> int:
        return max((e[1] for e in self.events if e[0] == "hops"), default=0)

    def check_get_consistency(self) -> None:
        """Replay owner-side store/fetch events: each fetch must see the
        value most recently stored under its key (keys have one owner, so
        per-key event order is execution order)."""
        current: dict[int, object] = {}
        for e in self.events:
            if e[0] == "store":
                current[e[1]] = e[2]
            elif e[0] == "fetch":
                assert e[2] == current.get(e[1]), (
                    f"fetch of {e[1]} saw {e[2]!r}, expected {current.get(e[1])!r}")


# ------------------------------------------------------------------- factory

def make_scenario(config: RunConfig, n_nodes: int) -> Scenario:
    name = config.scenario
    if name == "independent_tasks":
        return IndependentTasksScenario(config)
    if name == "star":
        count = config.star_count if config.star_count is not None else n_nodes
        return StarScenario(config, count)
    if name == "ring":
        return RingScenario(config)
    if name == "chord":
        return ChordScenario(config)
    raise ValueError(f"unknown scenario {name!r}")
