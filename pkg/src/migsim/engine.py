"""The round-robin reduction engine.

One engine round visits every node in index order and, per node: (a) drains
one front message from each non-empty incoming arc, (b) steps each active
local object once, (c) flushes object output queues onto outgoing arcs, and
(d) on cadence, gossips the routing table, broadcasts load, and runs the
configured migration procedure.  Every applied rule bumps the transition
counter, which drives the sampling cadence.

Everything is deterministic for a given (config, seed): node and arc order
are canonical, and randomness comes from named per-node and per-object
streams.
"""

from __future__ import annotations

import random

from . import balancer
from .actors import (
    BLOCKED, CallOut, Compute, CreateObject, DELEGATED, FutureId, GetValue,
    Resolve, RuntimeObject, RUNNING, SETUP_FINISHED,
)
from .config import RunConfig
from .metrics import MetricsRecorder
from .netgraph import (
    KIND_CALL, KIND_FUTURE, KIND_LOAD, KIND_OBJECT, KIND_TABLE,
    CallMsg, FutureMsg, LoadMsg, NetworkGraph, ObjectMsg, TableMsg,
)
from .routing import ObjectId, RoutingTable


class InvariantError(Exception):
    """A runtime invariant broke: engine bug, surfaced loudly (exit code 3)."""


class NotLocalError(InvariantError):
    """Rule applied at a node that does not host the object."""


class NotNeighbourError(InvariantError):
    """Migration target is not adjacent to the source node."""


class SelfMigrationError(InvariantError):
    """Migration target equals the source node."""


class LateCreationError(InvariantError):
    """A behavior tried to create an object after the setup gate fired."""


_MISSING = object()


class World:
    """Complete simulation state: topology, tables, hosted objects, RNG
    streams, counters, and the metrics recorder.

    A world is single-threaded but self-contained: independent worlds (seed
    sweeps) can run in parallel processes.
    """

    def __init__(self, graph: NetworkGraph, config: RunConfig, scenario=None,
                 trace=None):
        self.graph = graph
        self.config = config
        self.scenario = scenario
        n = graph.n_nodes
        if config.queue_soft_limit is not None:
            graph.set_soft_limit(config.queue_soft_limit)
        self.tables = [RoutingTable(u) for u in range(n)]
        self.objects: list[dict[ObjectId, RuntimeObject]] = [{} for _ in range(n)]
        self.locations: dict[ObjectId, int | None] = {}
        self.active_count = [0] * n
        self.total_active = 0
        seed = config.seed
        self.node_rng = [random.Random(f"{seed}|node|{u}") for u in range(n)]
        self._obj_seq = [0] * n
        self.neighbour_loads: list[dict[int, tuple[int, int]]] = [{} for _ in range(n)]
        self._last_broadcast: list[int | None] = [None] * n
        self._last_table_send = [0] * n
        self._last_table_from: list[dict[int, dict]] = [{} for _ in range(n)]

        self.round = 0
        self.transitions = 0
        self.table_updates = 0
        self.gate_on = False
        self.gate_round: int | None = None
        self._gate_transitions = 0
        self.cycles = 0

        # conservation counters
        self.calls_created = 0
        self.calls_delivered = 0
        self.futures_created = 0
        self.futures_delivered = 0
        self.objects_in_flight = 0
        self.tables_in_flight = 0
        self.migration_count = 0
        self.migration_log: list[tuple[int, int, int, ObjectId]] = []

        self.metrics = MetricsRecorder(n)
        self._next_boundary: int | None = None
        self._settling = False
        self.stalled = False

        self.app_log: list | None = None   # enable for multiset/conformance tests
        self._trace = trace

        if scenario is not None:
            scenario.install(self)

    # ------------------------------------------------------------------ setup

    def bootstrap(self, node: int, behavior) -> ObjectId:
        """Install a fresh object at `node` (used for the start object and
        by tests that pre-place static objects)."""
        if self.gate_on:
            raise LateCreationError("object creation after the setup gate")
        oid = ObjectId(node, self._obj_seq[node])
        self._obj_seq[node] += 1
        rng = random.Random(f"{self.config.seed}|obj|{oid.node}.{oid.seq}")
        obj = RuntimeObject(oid, behavior, rng, self.config.history_capacity)
        self.objects[node][oid] = obj
        self.locations[oid] = node
        self.tables[node].register(oid, node, 0)
        if obj.start_initial_task():
            self.active_count[node] += 1
            self.total_active += 1
        self.transitions += 1
        if self._trace is not None:
            self._trace.write(f"{self.round} new-object {node} {oid}\n")
        return oid

    def new_object_in(self, u: int, creator: ObjectId, behavior) -> ObjectId:
        """Creation rule: mint a fresh id, register it locally, install."""
        if not self.tables[u].contains(creator):
            raise NotLocalError(f"creator {creator} is not local to node {u}")
        return self.bootstrap(u, behavior)

    # --------------------------------------------------------------- migration

    def object_send_in(self, u: int, oid: ObjectId, to: int) -> None:
        """Serialize an object onto the arc (u, to) and repoint the local
        route to (to, 1)."""
        if to == u:
            raise SelfMigrationError(f"{oid}: migration from {u} to itself")
        if (u, to) not in self.graph.arcs:
            raise NotNeighbourError(f"{oid}: {to} is not a neighbour of {u}")
        table = self.tables[u]
        if not table.contains(oid):
            raise NotLocalError(f"{oid} is not local to node {u}")
        obj = self.objects[u].pop(oid)
        if obj.task is not None:
            self.active_count[u] -= 1
            self.total_active -= 1
        table.replace(oid, to, 1)
        self.graph.out[u][to].push(ObjectMsg(obj))
        self.locations[oid] = None
        self.objects_in_flight += 1
        self.migration_count += 1
        if self.gate_on:
            self.metrics.migrations += 1
        self.migration_log.append((self.round, u, to, oid))
        self.transitions += 1
        if self._trace is not None:
            self._trace.write(f"{self.round} object-send {u} {oid}->{to}\n")

    def _object_recv_out(self, u: int, m: ObjectMsg) -> None:
        obj = m.obj
        oid = obj.id
        self.objects[u][oid] = obj
        if obj.task is not None:
            self.active_count[u] += 1
            self.total_active += 1
        self.tables[u].replace(oid, u, 0)
        self.locations[oid] = u
        self.objects_in_flight -= 1
        if self._trace is not None:
            self._trace.write(f"{self.round} object-recv {u} {oid}\n")

    # ------------------------------------------------------------ message flow

    def _deliver(self, u: int, m) -> None:
        """Hand a Call/Future whose destination is local to its object.

        A call is "delivered" for conservation purposes only once consumed
        into a task; until then it sits in the input queue and counts as
        in flight.
        """
        obj = self.objects[u].get(m.dest)
        if obj is None:
            raise NotLocalError(f"table of {u} claims {m.dest} but object absent")
        if m.kind == KIND_CALL:
            obj.input_queue.append(m)
            if obj.activate_next():
                self.calls_delivered += 1
                self.active_count[u] += 1
                self.total_active += 1
            if not self.gate_on and m.method == SETUP_FINISHED:
                self._fire_gate()
        else:
            obj.store_future(m.future, m.value)
            self.futures_delivered += 1
        if self.gate_on:
            self.metrics.latency_delta[m.hops] += 1

    def _fire_gate(self) -> None:
        self.gate_on = True
        self.gate_round = self.round
        self._gate_transitions = self.transitions
        self._next_boundary = self.config.sample_interval
        if self._trace is not None:
            self._trace.write(f"{self.round} gate - setup finished\n")

    def _send_app(self, u: int, m) -> None:
        """Msg-Send-In / Route-Further tail: enqueue toward the next hop,
        falling back to the self-loop for local or unknown destinations."""
        v = self.tables[u].next_hop(m.dest, u)
        self.graph.out[u][v].push(m)
        if v != u:
            m.hops += 1
            if self.gate_on:
                self.metrics.msgs_sent[u] += 1

    def _flush_outputs(self, u: int, obj: RuntimeObject) -> None:
        if not self.tables[u].contains(obj.id):
            raise NotLocalError(f"flushing output of non-local object {obj.id} at {u}")
        oq = obj.output_queue
        tr = self._trace
        while oq:
            m = oq.popleft()
            self._send_app(u, m)
            self.transitions += 1
            if tr is not None:
                tr.write(f"{self.round} msg-send {u} {m.dest}\n")

    # ------------------------------------------------------------- object step

    def _step_object(self, u: int, obj: RuntimeObject) -> None:
        t = obj.task
        try:
            action = t.gen.send(t.inbox)
        except StopIteration as stop:
            self._finish_task(u, obj, t, stop.value)
            return
        t.inbox = None
        if type(action) is Compute:
            return
        acls = type(action)
        if acls is CallOut:
            fid = obj.mint_future()
            m = CallMsg(action.target, action.method, action.args, fid, obj.id)
            obj.output_queue.append(m)
            obj.record_history(action.target)
            self.calls_created += 1
            if self.app_log is not None:
                self.app_log.append(
                    ("C", obj.id, action.target, action.method, action.args, self.gate_on))
            t.inbox = fid
        elif acls is GetValue:
            v = obj.futures.get(action.future, _MISSING)
            if v is _MISSING:
                t.status = BLOCKED
                t.waiting_on = action.future
            else:
                t.inbox = v
        elif acls is CreateObject:
            t.inbox = self.new_object_in(u, obj.id, action.behavior)
        elif acls is Resolve:
            self._emit_future(obj, action.target, action.future, action.value)
        else:
            raise InvariantError(f"behavior yielded unknown action {action!r}")

    def _emit_future(self, obj: RuntimeObject, target: ObjectId,
                     fid: FutureId, value) -> None:
        obj.output_queue.append(FutureMsg(target, fid, value))
        obj.record_history(target)
        self.futures_created += 1
        if self.app_log is not None:
            self.app_log.append(("F", obj.id, target, fid, value, self.gate_on))

    def _finish_task(self, u: int, obj: RuntimeObject, t, value) -> None:
        if t.reply_future is not None and value is not DELEGATED:
            self._emit_future(obj, t.caller, t.reply_future, value)
        obj.tasks_finished += 1
        obj.task = None
        if obj.activate_next():
            self.calls_delivered += 1
        else:
            self.active_count[u] -= 1
            self.total_active -= 1

    # ------------------------------------------------------------------ gossip

    def _table_send(self, u: int) -> None:
        """Enqueue a snapshot on every non-self outgoing arc."""
        table = self.tables[u]
        snap = table.snapshot()
        out = self.graph.out[u]
        for v in self.graph.neighbours[u]:
            out[v].push(TableMsg(snap))
            self.tables_in_flight += 1
            self.transitions += 1
        table.dirty = False
        self._last_table_send[u] = self.round
        if self._trace is not None:
            self._trace.write(f"{self.round} table-send {u} -\n")

    def _table_recv(self, u: int, src: int, m: TableMsg) -> None:
        self.tables_in_flight -= 1
        seen = self._last_table_from[u]
        if seen.get(src) is m.table:
            return  # identical snapshot already folded in
        seen[src] = m.table
        if self.tables[u].update(src, m.table):
            self.table_updates += 1

    def _broadcast_load(self, u: int) -> None:
        load = self.active_count[u]
        out = self.graph.out[u]
        for v in self.graph.neighbours[u]:
            out[v].push(LoadMsg(u, load))
            self.transitions += 1
        self._last_broadcast[u] = load

    # ------------------------------------------------------------------- round

    def step_round(self) -> int:
        """Apply one full engine round; returns transitions applied."""
        start = self.transitions
        cfg = self.config
        graph = self.graph
        rnd = self.round
        migration_due = (
            not self._settling
            and self.gate_on
            and self.gate_round is not None
            and (rnd - self.gate_round) > 0
            and (rnd - self.gate_round) % cfg.migration_cadence == 0
        )
        tr = self._trace
        for u in range(graph.n_nodes):
            # (a) drain one front message per non-empty incoming arc
            table = self.tables[u]
            for arc in graph.in_arcs[u]:
                q = arc.q
                if not q:
                    continue
                m = q.popleft()
                k = m.kind
                if k >= KIND_CALL:
                    if table.contains(m.dest):
                        self._deliver(u, m)
                        if tr is not None:
                            tr.write(f"{rnd} msg-recv {u} {m.dest}\n")
                    else:
                        self._send_app(u, m)
                        if tr is not None:
                            tr.write(f"{rnd} route-further {u} {m.dest}\n")
                elif k == KIND_TABLE:
                    self._table_recv(u, arc.src, m)
                    if tr is not None:
                        tr.write(f"{rnd} table-recv {u} from={arc.src}\n")
                elif k == KIND_OBJECT:
                    self._object_recv_out(u, m)
                else:  # KIND_LOAD
                    self.neighbour_loads[u][m.origin] = (m.load, rnd)
                self.transitions += 1

            # (b) step each active, unblocked local object once
            objs = self.objects[u]
            for obj in list(objs.values()):
                t = obj.task
                if t is not None and t.status == RUNNING:
                    self._step_object(u, obj)
                    self.transitions += 1

            # (c) flush output queues onto arcs
            for obj in list(objs.values()):
                if obj.output_queue:
                    self._flush_outputs(u, obj)

            # (d) cadence work: load broadcast, gossip, migration
            if self.gate_on and not self._settling:
                if self.active_count[u] != self._last_broadcast[u] or migration_due:
                    self._broadcast_load(u)
            t_last = self._last_table_send[u]
            if (table.dirty and rnd - t_last >= cfg.gossip_dirty_interval) or (
                    rnd - t_last >= cfg.gossip_idle_interval):
                self._table_send(u)
            if migration_due:
                for oid, to in balancer.run_cycle(self, u):
                    self.object_send_in(u, oid, to)

        if migration_due:
            self.cycles += 1
        self.round += 1
        if self.gate_on and not self._settling:
            self._maybe_sample()
        return self.transitions - start

    def _maybe_sample(self) -> None:
        m = self.metrics
        if not m.samples:
            m.take_sample(self.active_count)
            return
        post = self.transitions - self._gate_transitions
        if post >= self._next_boundary:
            m.take_sample(self.active_count)
            interval = self.config.sample_interval
            self._next_boundary = (post // interval + 1) * interval

    # --------------------------------------------------------------- run loop

    def app_in_flight(self) -> int:
        """Call/Future messages not yet delivered plus objects in transit."""
        return (self.calls_created - self.calls_delivered
                + self.futures_created - self.futures_delivered
                + self.objects_in_flight)

    def app_quiescent(self) -> bool:
        return self.total_active == 0 and self.app_in_flight() == 0

    def run(self) -> None:
        """Run until the configured stop condition (see RunConfig)."""
        cfg = self.config
        max_rounds = cfg.max_rounds
        while True:
            self.step_round()
            if self.gate_on:
                if cfg.stop_after_cycles is not None:
                    if self.cycles >= cfg.stop_after_cycles:
                        break
                elif len(self.metrics.samples) > cfg.samples:
                    break
                if self.app_quiescent():
                    break
            elif self.app_quiescent():
                raise InvariantError("world quiesced before the setup gate fired")
            if max_rounds is not None and self.round >= max_rounds:
                self.stalled = True
                break
        self.settle()

    def settle(self, bound: int | None = None) -> None:
        """Drain in-flight objects (no migrations, no sampling) so that the
        final allocation snapshot is well defined.

        An Object message sits on one fixed arc and advances one position
        per round, so the deepest queue at entry bounds the rounds needed.
        """
        self._settling = True
        if bound is None:
            deepest = max((len(a.q) for a in self.graph.arcs.values()), default=0)
            bound = deepest + 4 * self.graph.n_nodes + 16
        spent = 0
        while self.objects_in_flight > 0 and spent < bound:
            self.step_round()
            spent += 1
        self._settling = False
        if self.objects_in_flight > 0:
            raise InvariantError("objects still in flight after settling")

    # ------------------------------------------------------------- inspection

    def hosts(self) -> dict[ObjectId, int]:
        """Current object placement (requires no objects in flight)."""
        if self.objects_in_flight:
            raise InvariantError("placement undefined while objects are in flight")
        return {oid: node for oid, node in self.locations.items()}

    def scan_in_flight_app(self) -> int:
        """Exhaustive count of Call/Future messages in arc, input and output
        queues (test oracle for the O(1) in-flight counters)."""
        n = 0
        for m in self.graph.in_flight():
            if m.kind >= KIND_CALL:
                n += 1
        for per_node in self.objects:
            for obj in per_node.values():
                n += len(obj.input_queue) + len(obj.output_queue)
        return n
