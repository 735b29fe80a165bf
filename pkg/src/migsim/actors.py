"""Runtime objects: one task at a time, asynchronous calls, futures, history.

A behavior is a deterministic state machine written as a Python generator
that yields actions (call, get, compute, create, resolve) to the engine and
receives results back.  One generator resume is one behavior step.  Tasks
finish by returning; the engine then resolves the caller's future with the
returned value, unless the task returned DELEGATED to hand that duty to
another object.
"""

from __future__ import annotations

from collections import deque
from typing import Any, NamedTuple

from .routing import ObjectId


class DuplicateFutureError(Exception):
    """A future id resolved twice: the engine duplicated a message."""


# Method name whose delivery opens the setup gate: migration and metric
# logging start, object creation stops.
SETUP_FINISHED = "setupFinished"


class FutureId(NamedTuple):
    """Unique future identifier: minting object plus per-object counter.

    The mint is tied to the object, not its current node, so call/reply
    identities are unchanged by migration.
    """

    owner: ObjectId
    seq: int

    def __str__(self) -> str:
        return f"{self.owner}/f{self.seq}"


# --- actions yielded by behavior generators ---------------------------------

class Compute:
    """One step of local computation (also used as load padding)."""

    __slots__ = ()


COMPUTE = Compute()


class CallOut(NamedTuple):
    """Asynchronous method call; the yield returns the minted FutureId."""

    target: ObjectId
    method: str
    args: tuple


class GetValue(NamedTuple):
    """Read a future; blocks the task until the value has arrived."""

    future: FutureId


class CreateObject(NamedTuple):
    """Create a fresh object on this node; the yield returns its ObjectId.

    Only legal before the setup gate fires.
    """

    behavior: Any


class Resolve(NamedTuple):
    """Explicitly resolve a future held by `target` (used with DELEGATED)."""

    target: ObjectId
    future: FutureId
    value: Any


class _Delegated:
    __slots__ = ()

    def __repr__(self) -> str:
        return "DELEGATED"


# Sentinel return value: the task finished but another object will resolve
# the caller's future via a Resolve action.
DELEGATED = _Delegated()

# task status
RUNNING = 0
BLOCKED = 1


class Task:
    """An in-progress method execution (or initial task) of an object."""

    __slots__ = ("gen", "status", "waiting_on", "inbox", "caller", "reply_future")

    def __init__(self, gen, caller: ObjectId | None, reply_future: FutureId | None):
        self.gen = gen
        self.status = RUNNING
        self.waiting_on: FutureId | None = None
        self.inbox: Any = None
        self.caller = caller
        self.reply_future = reply_future


class ObjectContext:
    """Per-object handle passed to behavior generators: identity plus an
    object-local RNG stream (stable under migration)."""

    __slots__ = ("self_id", "rng")

    def __init__(self, self_id: ObjectId, rng) -> None:
        self.self_id = self_id
        self.rng = rng


class RuntimeObject:
    """An object hosted on some node; the whole unit moves on migration.

    Scenario-persistent fields live on the behavior instance, which travels
    with the object.  `history` is the bounded list of recent communication
    partners; `tasks_finished` is the object-local clock.
    """

    __slots__ = (
        "id", "behavior", "ctx", "task", "input_queue", "output_queue",
        "futures", "history", "tasks_finished", "fut_seq",
    )

    def __init__(self, oid: ObjectId, behavior, rng, history_capacity: int) -> None:
        self.id = oid
        self.behavior = behavior
        self.ctx = ObjectContext(oid, rng)
        self.task: Task | None = None
        self.input_queue: deque = deque()
        self.output_queue: deque = deque()
        self.futures: dict[FutureId, Any] = {}
        self.history: deque = deque(maxlen=history_capacity)
        self.tasks_finished = 0
        self.fut_seq = 0

    @property
    def active(self) -> bool:
        return self.task is not None

    def mint_future(self) -> FutureId:
        f = FutureId(self.id, self.fut_seq)
        self.fut_seq += 1
        return f

    def record_history(self, other: ObjectId) -> None:
        """Append a communication partner; capacity eviction is automatic."""
        self.history.append(other)

    def store_future(self, f: FutureId, value: Any) -> None:
        """Keep a resolved value; resolving the same future twice is a bug."""
        if f in self.futures:
            raise DuplicateFutureError(f"future {f} resolved twice at {self.id}")
        self.futures[f] = value
        t = self.task
        if t is not None and t.status == BLOCKED and t.waiting_on == f:
            t.status = RUNNING
            t.waiting_on = None
            t.inbox = value

    def activate_next(self) -> bool:
        """Start a task for the oldest queued call, if the object is idle."""
        if self.task is not None or not self.input_queue:
            return False
        m = self.input_queue.popleft()
        gen = self.behavior.handler(self.ctx, m.method, m.args, m.caller, m.future)
        self.task = Task(gen, m.caller, m.future)
        return True

    def start_initial_task(self) -> bool:
        gen = self.behavior.init_task(self.ctx)
        if gen is None:
            return False
        self.task = Task(gen, None, None)
        return True


class Behavior:
    """Base behavior: no initial task, no methods.

    Subclasses override `init_task` to run from creation and/or `handler`
    to serve method calls; both must return generators yielding actions.
    """

    def init_task(self, ctx: ObjectContext):
        return None

    def handler(self, ctx: ObjectContext, method: str, args, caller, reply_future):
        raise NotImplementedError(f"{type(self).__name__} has no method {method!r}")
