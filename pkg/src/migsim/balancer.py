"""Migration procedures: per-node callbacks that pick (object, neighbour)
pairs to hand to the engine's migration rule.

All procedures work from the last load values gossiped by neighbours, which
may be stale; that staleness (and the oscillation it can cause) is part of
what the simulation measures.  Candidate iteration and tie-breaking are
canonical (ascending object id) so a seeded run is fully reproducible.
"""

from __future__ import annotations

from collections import Counter

from .routing import ObjectId, RoutingTable


def affinity(obj, u_prime: int, table: RoutingTable) -> tuple[int, float]:
    """How strongly `obj` is pulled toward neighbour `u_prime`.

    Count of communication-history entries whose current route points at
    `u_prime`, plus that count as a fraction of the history length.
    Co-located partners route to the node itself and pull nowhere.
    """
    hist = obj.history
    if not hist:
        return 0, 0.0
    owner = table.owner
    count = sum(1 for o in hist if table.next_hop(o, owner) == u_prime)
    return count, count / len(hist)


def _direction_counts(obj, table: RoutingTable) -> Counter:
    owner = table.owner
    c: Counter = Counter()
    for o in obj.history:
        c[table.next_hop(o, owner)] += 1
    return c


def berenbrink_cycle(world, u: int, neutral: bool, comm: bool) -> list[tuple[ObjectId, int]]:
    """One load-balancing cycle at node `u`.

    For each active object: pick a neighbour uniformly at random; with local
    load l and the neighbour's last known load l', migrate with probability
    1 - l'/l when l > l' + 1 (or l > l' with neutral moves).  Emissions are
    capped per cycle, and l is the live count net of emissions so far.

    The communication-intensity variant runs the neutral cycle but, at each
    draw, offers the not-yet-considered object with the highest affinity
    toward the drawn neighbour (ties broken by ascending object id).
    """
    neighbours = world.graph.neighbours[u]
    if not neighbours:
        return []
    rng = world.node_rng[u]
    loads = world.neighbour_loads[u]
    cfg = world.config
    cap = cfg.neutral_cap if (neutral or comm) else cfg.migration_cap
    table = world.tables[u]
    objs = world.objects[u]
    candidates = sorted(oid for oid, o in objs.items() if o.task is not None)
    if comm:
        directions = {oid: _direction_counts(objs[oid], table) for oid in candidates}
    remaining = list(candidates)
    out: list[tuple[ObjectId, int]] = []
    l = len(candidates)
    for _ in range(len(candidates)):
        if len(out) >= cap or not remaining:
            break
        u_prime = neighbours[rng.randrange(len(neighbours))]
        if comm:
            oid = min(remaining, key=lambda o: (-directions[o].get(u_prime, 0), o))
            remaining.remove(oid)
        else:
            oid = remaining.pop(0)
        known = loads.get(u_prime)
        if known is None:
            continue
        l_prime = known[0]
        if (l > l_prime if neutral or comm else l > l_prime + 1):
            if rng.random() < 1.0 - l_prime / l:
                out.append((oid, u_prime))
                l -= 1
    return out


def weighted_cycle(world, u: int, comm: bool) -> list[tuple[ObjectId, int]]:
    """Weighted neighbour-load-difference procedure (optionally blended with
    communication intensity).

    Once per cycle one active object and one neighbour are drawn uniformly
    and independently (object first).  With load difference d the migration
    probability is clamp(d / threshold, 0, 1); the comm variant blends it as
    w * affinity_fraction + (1 - w) * load_probability.
    """
    neighbours = world.graph.neighbours[u]
    if not neighbours:
        return []
    rng = world.node_rng[u]
    cfg = world.config
    objs = world.objects[u]
    candidates = sorted(oid for oid, o in objs.items() if o.task is not None)
    if not candidates:
        return []
    oid = candidates[rng.randrange(len(candidates))]
    u_prime = neighbours[rng.randrange(len(neighbours))]
    known = world.neighbour_loads[u].get(u_prime)
    if known is None:
        return []
    d = world.active_count[u] - known[0]
    p_load = min(1.0, max(0.0, d / cfg.load_diff_threshold))
    if comm:
        _, frac = affinity(objs[oid], u_prime, world.tables[u])
        p = cfg.comm_weight * frac + (1.0 - cfg.comm_weight) * p_load
    else:
        p = p_load
    if p > 0.0 and rng.random() < p:
        return [(oid, u_prime)]
    return []


def run_cycle(world, u: int) -> list[tuple[ObjectId, int]]:
    """Dispatch the configured procedure for node `u`."""
    p = world.config.procedure
    if p == "none":
        return []
    if p == "berenbrink":
        return berenbrink_cycle(world, u, neutral=False, comm=False)
    if p == "berenbrink_neutral":
        return berenbrink_cycle(world, u, neutral=True, comm=False)
    if p == "berenbrink_comm":
        return berenbrink_cycle(world, u, neutral=True, comm=True)
    if p == "weighted_load":
        return weighted_cycle(world, u, comm=False)
    if p == "weighted_load_comm":
        return weighted_cycle(world, u, comm=True)
    raise ValueError(f"unknown procedure {p!r}")
