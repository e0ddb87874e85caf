"""Unit-disk mesh graph and an abstract multi-channel shared medium.

Each channel is one network-wide medium: transmissions on the same channel
are serialised in request order, transmissions on different channels overlap
freely.  There is no propagation delay and no collision loss; per-link
``loss_prob`` is the only random loss.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from . import kernels
from .engine import Simulator

DEFAULT_RATE_BPS = 6_000_000.0


class TopologyError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class RadioSpec:
    channel: int
    rate_bps: float = DEFAULT_RATE_BPS


@dataclass(frozen=True, slots=True)
class NodeSpec:
    id: int
    position: tuple[float, float]
    radios: tuple[RadioSpec, ...]

    def radio_on(self, channel: int) -> RadioSpec | None:
        for r in self.radios:
            if r.channel == channel:
                return r
        return None


@dataclass(eq=False, slots=True)
class Link:
    a: int
    b: int
    channel: int
    rate_bps: float
    loss_prob: float = 0.0
    up: bool = True

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.channel)

    def other(self, node: int) -> int:
        return self.b if node == self.a else self.a


@dataclass
class Topology:
    """The graph ``G = (V, E)``; one :class:`Link` per (node pair, shared channel)."""

    nodes: dict[int, NodeSpec]
    links: list[Link]
    transmission_range_m: float
    _by_pair: dict[tuple[int, int], list[Link]] = field(default_factory=dict, repr=False)
    _hops: dict[int, dict[int, int]] | None = field(default=None, repr=False)
    _adj: dict[int, set[int]] | None = field(default=None, repr=False)
    _on: dict[tuple[int, int], list[Link]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._by_pair.clear()
        for link in self.links:
            self._by_pair.setdefault((link.a, link.b), []).append(link)
            self._by_pair.setdefault((link.b, link.a), []).append(link)
        for lst in self._by_pair.values():
            lst.sort(key=lambda l: l.channel)

    @property
    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def links_between(self, u: int, v: int) -> list[Link]:
        """Links currently up between ``u`` and ``v``, lowest channel first."""
        return [l for l in self._by_pair.get((u, v), ()) if l.up]

    def links_of(self, u: int) -> list[Link]:
        out = []
        for v in self.neighbors(u):
            out.extend(self.links_between(u, v))
        return out

    def links_on(self, u: int, channel: int) -> list[Link]:
        """Up links of ``u`` on ``channel``, ordered by neighbour id."""
        key = (u, channel)
        out = self._on.get(key)
        if out is None:
            out = self._on[key] = [l for l in self.links_of(u) if l.channel == channel]
        return out

    def neighbors(self, u: int) -> list[int]:
        return sorted(self.adjacency()[u])

    def adjacency(self) -> dict[int, set[int]]:
        if self._adj is None:
            adj: dict[int, set[int]] = {n: set() for n in self.nodes}
            for link in self.links:
                if link.up:
                    adj[link.a].add(link.b)
                    adj[link.b].add(link.a)
            self._adj = adj
        return self._adj

    def link(self, a: int, b: int, channel: int) -> Link:
        for l in self._by_pair.get((a, b), ()):
            if l.channel == channel:
                return l
        raise TopologyError(f"no link {a}-{b} on channel {channel}")

    def set_link_state(self, a: int, b: int, channel: int | None, up: bool) -> list[Link]:
        """Bring links up or down; ``channel=None`` means every channel of the pair."""
        changed = []
        for l in self._by_pair.get((a, b), ()):
            if (channel is None or l.channel == channel) and l.up != up:
                l.up = up
                changed.append(l)
        if not self._by_pair.get((a, b)):
            raise TopologyError(f"nodes {a} and {b} share no link")
        if changed:
            self._hops = None
            self._adj = None
            self._on.clear()
        return changed

    def hop_matrix(self) -> dict[int, dict[int, int]]:
        """All-pairs hop distances over up links; unreachable pairs are absent."""
        if self._hops is None:
            ids, indptr, indices = kernels.csr(self.adjacency())
            rows = kernels.all_pairs_hops(indptr, indices)
            self._hops = {
                ids[i]: {ids[j]: d for j, d in enumerate(row) if d >= 0}
                for i, row in enumerate(rows)
            }
        return self._hops


def build_topology(
    nodes: list[NodeSpec], range_m: float, loss_prob: float = 0.0
) -> Topology:
    """Unit-disk graph: a link per channel both nodes can use, within ``range_m``."""
    by_id: dict[int, NodeSpec] = {}
    for n in nodes:
        if n.id in by_id:
            raise TopologyError(f"duplicate node id {n.id}")
        if not n.radios:
            raise TopologyError(f"node {n.id} has no radios")
        channels = [r.channel for r in n.radios]
        if len(set(channels)) != len(channels):
            raise TopologyError(f"node {n.id} has two radios on one channel")
        for r in n.radios:
            if r.rate_bps <= 0:
                raise TopologyError(f"node {n.id} radio rate must be positive")
        by_id[n.id] = n

    ids = sorted(by_id)
    links = []
    for i, u in enumerate(ids):
        nu = by_id[u]
        for v in ids[i + 1:]:
            nv = by_id[v]
            if math.dist(nu.position, nv.position) > range_m:
                continue
            for ru in sorted(nu.radios, key=lambda r: r.channel):
                rv = nv.radio_on(ru.channel)
                if rv is not None:
                    links.append(
                        Link(u, v, ru.channel, min(ru.rate_bps, rv.rate_bps), loss_prob)
                    )
    return Topology(by_id, links, range_m)


def hop_distance(topo: Topology, u: int, v: int) -> int | None:
    """Minimum number of links from ``u`` to ``v``; ``None`` if unreachable."""
    if u not in topo.nodes or v not in topo.nodes:
        raise TopologyError(f"unknown node id in ({u}, {v})")
    return topo.hop_matrix()[u].get(v)


def airtime(frame_bytes: int, rate_bps: float) -> float:
    return frame_bytes * 8 / rate_bps


class ChannelMedium:
    """One channel shared by the whole network; grants are FIFO by request time."""

    __slots__ = ("channel", "busy_until", "intervals")

    def __init__(self, channel: int, record: bool = False):
        self.channel = channel
        self.busy_until = 0.0
        self.intervals: list[tuple[float, float]] | None = [] if record else None

    def reserve(self, at: float, duration: float) -> float:
        start = max(at, self.busy_until)
        self.busy_until = start + duration
        if self.intervals is not None:
            self.intervals.append((start, self.busy_until))
        return start


@dataclass(slots=True)
class TxRecord:
    link: tuple[int, int, int]
    sender: int
    start: float
    end: float
    frame_bytes: int
    lost: bool = False


class Medium:
    """Serialisation and loss for frames handed down by the forwarding layer."""

    def __init__(self, sim: Simulator, record: bool = False):
        self.sim = sim
        self.channels: dict[int, ChannelMedium] = {}
        self._rng = sim.random.stream("loss")
        self._record = record
        self.log: list[TxRecord] = []
        self.frames_sent = 0

    def channel(self, channel: int) -> ChannelMedium:
        ch = self.channels.get(channel)
        if ch is None:
            ch = self.channels[channel] = ChannelMedium(channel, self._record)
        return ch

    def transmit_frame(
        self,
        link: Link,
        sender: int,
        frame_bytes: int,
        on_done: Callable[..., None],
        *args,
    ) -> tuple[float, float]:
        """Request the channel now; ``on_done(lost, *args)`` fires at frame end.

        Returns ``(start, end)`` of the granted transmission interval.
        """
        if frame_bytes <= 0:
            raise ValueError("frame_bytes must be positive")
        dur = frame_bytes * 8 / link.rate_bps
        self.frames_sent += 1
        start = self.channel(link.channel).reserve(self.sim.now(), dur)
        end = start + dur
        rec = None
        if self._record:
            rec = TxRecord(link.key, sender, start, end, frame_bytes)
            self.log.append(rec)
        self.sim.schedule(end, self._complete, link, rec, on_done, args)
        return start, end

    def _complete(self, link: Link, rec: TxRecord | None, on_done, args) -> None:
        lost = link.loss_prob > 0 and self._rng.random() < link.loss_prob
        if rec is not None:
            rec.lost = lost
        on_done(lost, *args)


class InterfaceQueue:
    """Bounded FIFO with tail drop."""

    __slots__ = ("capacity", "items")

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.items: deque = deque()

    def __len__(self) -> int:
        return len(self.items)

    def offer(self, item) -> bool:
        if len(self.items) >= self.capacity:
            return False
        self.items.append(item)
        return True

    def pop(self):
        return self.items.popleft()

    def head(self):
        return self.items[0]
