"""Shared test fixtures and tiny scripted behaviors."""

from __future__ import annotations

from collections import deque

import pytest

from migsim.actors import Behavior, CallOut, COMPUTE, GetValue
from migsim.config import RunConfig
from migsim.engine import World
from migsim.netgraph import NetworkGraph, bfs_distances, build_grid


class Inert(Behavior):
    """An object that exists, owns routes, and never does anything."""


class Echo(Behavior):
    """Replies to any call with (method, args) after one compute step."""

    def handler(self, ctx, method, args, caller, reply_future):
        yield COMPUTE
        return (method, args)


class Script(Behavior):
    """Runs a caller-supplied generator factory as its initial task."""

    def __init__(self, factory):
        self.factory = factory

    def init_task(self, ctx):
        return self.factory(ctx)


class ScriptedRng:
    """random.Random stand-in with queued results for exact-probability tests."""

    def __init__(self, randranges=(), randoms=()):
        self.randranges = deque(randranges)
        self.randoms = deque(randoms)

    def randrange(self, n):
        v = self.randranges.popleft()
        assert 0 <= v < n
        return v

    def random(self):
        return self.randoms.popleft()


def make_world(graph: NetworkGraph | None = None, **cfg_kwargs) -> World:
    cfg = RunConfig(**cfg_kwargs)
    if graph is None:
        graph = build_grid(2, 2)
    return World(graph, cfg)


def run_rounds(world: World, n: int) -> None:
    for _ in range(n):
        world.step_round()


def run_until_table_quiescence(world: World, window: int = 30,
                               limit: int = 2000) -> int:
    """Rounds until table contents stop changing for `window` rounds."""
    last, stable, rounds = world.table_updates, 0, 0
    while stable < window:
        assert rounds < limit, "routing tables failed to converge"
        world.step_round()
        rounds += 1
        if world.table_updates == last:
            stable += 1
        else:
            stable, last = 0, world.table_updates
    return rounds


def shortest_path_ok(graph: NetworkGraph, u: int, next_hop: int, host: int,
                     claimed: int) -> bool:
    """True iff the claimed distance is BFS-exact and the hop is on a
    shortest path from u to host."""
    want = bfs_distances(graph, u)[host]
    if claimed != want:
        return False
    if want == 0:
        return next_hop == u
    return bfs_distances(graph, next_hop)[host] == want - 1


@pytest.fixture
def grid22() -> NetworkGraph:
    return build_grid(2, 2)
