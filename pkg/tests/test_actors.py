"""Task model semantics: one task at a time, calls, futures, history."""

import random

import pytest

from migsim.actors import (
    BLOCKED, Behavior, CallOut, COMPUTE, DuplicateFutureError, FutureId,
    GetValue, RuntimeObject, RUNNING,
)
from migsim.netgraph import CallMsg, FutureMsg, KIND_CALL, KIND_FUTURE, build_grid
from migsim.routing import ObjectId

from conftest import Script, make_world, run_rounds


def fresh_obj(capacity=32) -> RuntimeObject:
    return RuntimeObject(ObjectId(0, 0), Behavior(), random.Random(1), capacity)


class Recorder(Behavior):
    """Records every call it serves; one compute step per call."""

    def __init__(self, steps=1):
        self.calls = []
        self.steps = steps

    def handler(self, ctx, method, args, caller, reply_future):
        self.calls.append((method, args))
        for _ in range(self.steps):
            yield COMPUTE
        return (method, args)


class TestStepSemantics:
    def test_single_step_task_emits_one_future(self):
        """A leaf-style task: one step computes the value, the finish emits
        exactly one Future message."""
        w = make_world(build_grid(1, 1))
        rec = Recorder(steps=1)
        target = w.bootstrap(0, rec)

        def driver(ctx):
            yield CallOut(target, "value", ())

        w.bootstrap(0, Script(driver))
        run_rounds(w, 6)
        assert rec.calls == [("value", ())]
        assert w.futures_created == 1
        assert w.futures_delivered == 1

    def test_queued_calls_fifo_order(self):
        w = make_world(build_grid(1, 1))
        rec = Recorder(steps=3)
        target = w.bootstrap(0, rec)

        def driver(ctx):
            yield CallOut(target, "a", ())
            yield CallOut(target, "b", ())

        w.bootstrap(0, Script(driver))
        run_rounds(w, 16)
        assert rec.calls == [("a", ()), ("b", ())]

    def test_call_while_busy_queues_without_preemption(self):
        w = make_world(build_grid(1, 1))
        rec = Recorder(steps=8)
        target = w.bootstrap(0, rec)

        def driver(ctx):
            yield CallOut(target, "a", ())
            yield CallOut(target, "b", ())

        w.bootstrap(0, Script(driver))
        run_rounds(w, 4)
        obj = w.objects[0][target]
        assert obj.task is not None
        assert len(obj.input_queue) == 1  # second call parked, first uninterrupted
        gen_before = obj.task.gen
        run_rounds(w, 2)
        assert obj.task.gen is gen_before

    def test_get_blocks_until_future_arrives(self):
        w = make_world(build_grid(1, 1))
        rec = Recorder(steps=6)
        target = w.bootstrap(0, rec)
        got = []

        def driver(ctx):
            f = yield CallOut(target, "slow", ())
            v = yield GetValue(f)
            got.append(v)

        did = w.bootstrap(0, Script(driver))
        run_rounds(w, 3)
        assert w.objects[0][did].task.status == BLOCKED
        run_rounds(w, 14)
        assert got == [("slow", ())]

    def test_get_on_resolved_future_does_not_block(self):
        w = make_world(build_grid(1, 1))
        rec = Recorder(steps=1)
        target = w.bootstrap(0, rec)
        got = []

        def driver(ctx):
            f = yield CallOut(target, "fast", ())
            for _ in range(8):  # future arrives while we are busy
                yield COMPUTE
            v = yield GetValue(f)
            got.append(v)

        did = w.bootstrap(0, Script(driver))
        statuses = set()
        for _ in range(14):
            w.step_round()
            t = w.objects[0][did].task
            if t is not None:
                statuses.add(t.status)
        assert got == [("fast", ())]
        assert statuses == {RUNNING}

    def test_one_task_at_a_time(self):
        w = make_world(build_grid(1, 1))
        rec = Recorder(steps=4)
        target = w.bootstrap(0, rec)

        def driver(ctx):
            yield CallOut(target, "a", ())
            yield CallOut(target, "b", ())
            yield CallOut(target, "c", ())

        w.bootstrap(0, Script(driver))
        for _ in range(30):
            w.step_round()
            obj = w.objects[0][target]
            assert obj.task is None or isinstance(obj.task.gen, type((x for x in ()))), \
                "at most one active task"
        assert rec.calls == [("a", ()), ("b", ()), ("c", ())]
        assert w.objects[0][target].tasks_finished == 3


class TestDeliver:
    def test_future_delivery_resumes_blocked_task(self):
        # covered end to end above; here check the store/unblock mechanics
        obj = fresh_obj()
        fid = FutureId(obj.id, 0)

        def gen():
            yield GetValue(fid)

        from migsim.actors import Task
        obj.task = Task(gen(), None, None)
        obj.task.status = BLOCKED
        obj.task.waiting_on = fid
        obj.store_future(fid, 42)
        assert obj.task.status == RUNNING
        assert obj.task.inbox == 42

    def test_duplicate_future_raises(self):
        obj = fresh_obj()
        fid = FutureId(obj.id, 0)
        obj.store_future(fid, 1)
        with pytest.raises(DuplicateFutureError):
            obj.store_future(fid, 2)

    def test_future_for_unknown_id_is_stored(self):
        obj = fresh_obj()
        fid = FutureId(ObjectId(1, 1), 5)
        obj.store_future(fid, "early")
        assert obj.futures[fid] == "early"


class TestHistory:
    def test_capacity_eviction(self):
        obj = fresh_obj(capacity=2)
        a, b, c = ObjectId(0, 1), ObjectId(0, 2), ObjectId(0, 3)
        obj.record_history(a)
        obj.record_history(b)
        obj.record_history(c)
        assert list(obj.history) == [b, c]

    def test_repeated_partner_multiplicity(self):
        obj = fresh_obj(capacity=8)
        a = ObjectId(0, 1)
        for _ in range(3):
            obj.record_history(a)
        assert list(obj.history).count(a) == 3

    def test_fresh_object_empty_history(self):
        assert list(fresh_obj().history) == []

    def test_engine_records_callee_and_caller(self):
        w = make_world(build_grid(1, 1))
        rec = Recorder()
        target = w.bootstrap(0, rec)

        def driver(ctx):
            yield CallOut(target, "x", ())

        did = w.bootstrap(0, Script(driver))
        run_rounds(w, 6)
        assert did in w.objects[0][target].history      # reply recorded at callee
        assert target in w.objects[0][did].history      # call recorded at caller


class TestMessageKinds:
    def test_call_and_future_payloads(self):
        c = CallMsg(ObjectId(0, 0), "m", (1,), FutureId(ObjectId(0, 1), 0), ObjectId(0, 1))
        f = FutureMsg(ObjectId(0, 1), c.future, 9)
        assert c.kind == KIND_CALL and f.kind == KIND_FUTURE
        assert c.hops == 0 and f.hops == 0
