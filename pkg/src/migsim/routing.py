"""Per-node routing tables for location-independent, object-addressed forwarding.

Each node owns one table mapping object ids to (next hop, hop distance).
Tables converge by gossip: a node folds a neighbour's snapshot into its own,
keeping an entry only when the route through that neighbour is strictly
shorter.  A distance of 0 means the object lives here; such entries are
never displaced by gossip, only by an explicit replace when the object
migrates away.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple


class ObjectId(NamedTuple):
    """Globally unique object identifier: birth node plus per-node counter."""

    node: int
    seq: int

    def __str__(self) -> str:
        return f"{self.node}.{self.seq}"


class RouteEntry(NamedTuple):
    next_hop: int
    distance: int


class RoutingTable:
    """Routing table owned by one node.

    Mutation happens only on the engine thread.  `dirty` flags unsent
    changes; `snapshot()` returns a frozen copy shared by all outgoing
    gossip messages until the next mutation.
    """

    __slots__ = ("owner", "entries", "dirty", "_snapshot")

    def __init__(self, owner: int) -> None:
        self.owner = owner
        self.entries: dict[ObjectId, RouteEntry] = {}
        self.dirty = False
        self._snapshot: dict[ObjectId, RouteEntry] | None = None

    def update(self, u_adj: int, snap: dict[ObjectId, RouteEntry]) -> bool:
        """Fold a neighbour's table in; routes gained go through `u_adj`.

        A foreign route at distance k is adopted as (u_adj, k+1) when we have
        no entry or a strictly longer one.  Ties keep the incumbent, and
        distance-0 (local) entries always survive.  Returns True when
        anything changed.
        """
        entries = self.entries
        get = entries.get
        changed = False
        for o, e in snap.items():  # hot path: index access, build on change only
            k1 = e[1] + 1
            cur = get(o)
            if cur is None or cur[1] > k1:
                entries[o] = RouteEntry(u_adj, k1)
                changed = True
        if changed:
            self.dirty = True
            self._snapshot = None
        return changed

    def next_hop(self, o: ObjectId, default: int) -> int:
        """Next hop for `o`, or `default` (the node itself: the self-loop)."""
        e = self.entries.get(o)
        return e.next_hop if e is not None else default

    def register(self, o: ObjectId, u: int, k: int) -> None:
        """Record route o -> (u, k); engine rules always use k = 0."""
        self.entries[o] = RouteEntry(u, k)
        self.dirty = True
        self._snapshot = None

    def replace(self, o: ObjectId, u: int, k: int) -> None:
        """Drop any route for `o` and record (u, k) as the only one."""
        self.entries[o] = RouteEntry(u, k)
        self.dirty = True
        self._snapshot = None

    def contains(self, o: ObjectId) -> bool:
        """True iff `o` is located on this node (entry at distance 0)."""
        e = self.entries.get(o)
        return e is not None and e.distance == 0

    def snapshot(self) -> dict[ObjectId, RouteEntry]:
        if self._snapshot is None:
            self._snapshot = dict(self.entries)
        return self._snapshot

    def dump_lines(self) -> Iterator[str]:
        """Debug dump: 'objectId nextHop distance' per entry, canonical order."""
        for o in sorted(self.entries):
            e = self.entries[o]
            yield f"{o} {e.next_hop} {e.distance}"

    def __len__(self) -> int:
        return len(self.entries)
