"""Aggregation-aware layer-2.5 forwarding.

Each node keeps one timestamped FIFO per outgoing (next hop, channel) link.
A packet for destination ``d`` may only go to neighbours strictly one hop
closer to ``d``, which bounds every path by the source's hop distance.
Among those candidates the packet prefers a queue whose in-progress unit it
can join; otherwise any candidate is eligible.  Ties in eligibility are
broken by smooth weighted round-robin with link rate as weight, so traffic
splits across links in proportion to their bandwidth.  An idle radio serves
the queue with the oldest head packet and sends as many packets as fit in
one MTU-sized unit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable

from . import kernels
from .forwarding import Forwarder
from .net import Link, Topology
from .packet import Packet, TransmissionUnit

OLDEST_HEAD = "oldest_head"
AVG_AGE = "avg_age"


class NoRoute(Exception):
    pass


class QueueFull(Exception):
    def __init__(self, queue: NextHopQueue):
        super().__init__(f"queue {queue.key} full")
        self.queue = queue


@dataclass(frozen=True)
class Aal2rConfig:
    mtu_bytes: int = 1500
    header_bytes: int = 28
    queue_priority: str = OLDEST_HEAD
    hold_time_s: float = 0.0
    queue_capacity_pkts: int = 50

    def __post_init__(self):
        if not 0 <= self.header_bytes < self.mtu_bytes:
            raise ValueError("need 0 <= header_bytes < mtu_bytes")
        if self.hold_time_s < 0:
            raise ValueError("hold_time_s must be >= 0")
        if self.queue_priority not in (OLDEST_HEAD, AVG_AGE):
            raise ValueError(f"unknown queue_priority {self.queue_priority!r}")


class NextHopQueue:
    __slots__ = ("next_hop", "link", "capacity", "packets", "_bytes")

    def __init__(self, next_hop: int, link: Link | None = None, capacity: int = 50):
        self.next_hop = next_hop
        self.link = link
        self.capacity = capacity
        self.packets: deque[Packet] = deque()
        self._bytes = 0

    @property
    def key(self) -> tuple[int, int]:
        return (self.next_hop, self.link.channel if self.link is not None else 0)

    @property
    def queued_bytes(self) -> int:
        return self._bytes

    def __len__(self) -> int:
        return len(self.packets)

    def __repr__(self) -> str:
        return f"NextHopQueue({self.key}, {[p.size_bytes for p in self.packets]})"

    def append(self, p: Packet) -> None:
        if len(self.packets) >= self.capacity:
            raise QueueFull(self)
        self.packets.append(p)
        self._bytes += p.size_bytes

    def popleft(self) -> Packet:
        p = self.packets.popleft()
        self._bytes -= p.size_bytes
        return p


def spare_space(q: NextHopQueue, cfg: Aal2rConfig) -> int:
    """``MTU - sum of queued packet sizes - header``; negative once over-full."""
    return cfg.mtu_bytes - q.queued_bytes - cfg.header_bytes


def candidate_next_hops(u: int, d: int, topo: Topology) -> list[int]:
    """Neighbours of ``u`` exactly one hop closer to ``d``, ascending."""
    if u == d:
        raise ValueError("source and destination coincide")
    hops = topo.hop_matrix()
    du = hops[u].get(d)
    if du is None:
        raise NoRoute(d)
    return [v for v in topo.neighbors(u) if hops[v].get(d) == du - 1]


class SplitScheduler:
    """Smooth weighted round-robin state for one candidate set."""

    def __init__(self, weights: dict):
        self.weights = {k: float(w) for k, w in weights.items()}
        self.credits = {k: 0.0 for k in weights}


def weighted_pick(eligible: Iterable, sched: SplitScheduler):
    """One smooth-WRR selection restricted to ``eligible`` (ties: lowest key)."""
    keys = sorted(eligible)
    if not keys:
        raise ValueError("no eligible queue")
    credits = [sched.credits[k] for k in keys]
    i = kernels.swrr_pick(credits, [sched.weights[k] for k in keys])
    for k, c in zip(keys, credits):
        sched.credits[k] = c
    return keys[i]


def enqueue_packet(
    p: Packet,
    cands: list[NextHopQueue],
    cfg: Aal2rConfig,
    sched: SplitScheduler,
    now: float,
) -> NextHopQueue:
    """Place ``p`` on one candidate queue and stamp it.

    The aggregation set is the non-empty candidates whose spare space still
    holds ``p``.  When it is empty (all queues empty, or none has room) every
    candidate is eligible.  Raises :class:`QueueFull` on tail drop.
    """
    if p.size_bytes > cfg.mtu_bytes - cfg.header_bytes:
        raise ValueError(f"packet of {p.size_bytes} bytes can never fit the MTU")
    by_key = {q.key: q for q in cands}
    agg = [q.key for q in cands if len(q) and spare_space(q, cfg) >= p.size_bytes]
    chosen = by_key[weighted_pick(agg or by_key, sched)]
    p.enqueue_timestamp = now
    chosen.append(p)
    return chosen


def select_queue_for_radio(
    queues: list[NextHopQueue], cfg: Aal2rConfig, now: float
) -> NextHopQueue:
    """Pick the queue an idle radio serves; ties go to the lowest next hop."""
    ready = [q for q in queues if len(q)]
    if not ready:
        raise ValueError("no non-empty queue")
    if cfg.queue_priority == AVG_AGE:
        def rank(q):
            mean_age = sum(now - p.enqueue_timestamp for p in q.packets) / len(q)
            return (-mean_age, q.key)
    else:
        def rank(q):
            return (q.packets[0].enqueue_timestamp, q.key)
    return min(ready, key=rank)


def assemble_unit(
    q: NextHopQueue,
    cfg: Aal2rConfig,
    on_step: Callable[[tuple[int, ...], int], None] | None = None,
) -> TransmissionUnit:
    """Dequeue the longest head prefix that fits in one MTU-sized unit.

    ``on_step(sizes_so_far, spare)`` is called after each packet is added,
    with the spare space the assembler is tracking.
    """
    if not len(q):
        raise ValueError("cannot assemble a unit from an empty queue")
    if on_step is None:
        n = kernels.greedy_pack([p.size_bytes for p in q.packets], cfg.header_bytes, cfg.mtu_bytes)
        packets = [q.popleft() for _ in range(n)]
    else:
        packets = []
        spare = cfg.mtu_bytes - cfg.header_bytes
        while len(q) and q.packets[0].size_bytes <= spare:
            p = q.popleft()
            packets.append(p)
            spare -= p.size_bytes
            on_step(tuple(x.size_bytes for x in packets), spare)
    if not packets:
        raise ValueError("head packet exceeds the MTU")
    return TransmissionUnit(cfg.header_bytes, packets)


def unit_is_full(q: NextHopQueue, cfg: Aal2rConfig) -> bool:
    """No further waiting packet could join the queue's unit."""
    return spare_space(q, cfg) < min(p.size_bytes for p in q.packets)


class Aal2rForwarder(Forwarder):
    """Runs the AAL2R data plane on every node.

    Candidate sets come from the hop distances of the static topology
    (recomputed on scripted link events); no control traffic is sent.
    """

    name = "aal2r"

    def __init__(self, *args, aal2r: Aal2rConfig | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.acfg = aal2r or Aal2rConfig(
            self.cfg.mtu_bytes, self.cfg.header_bytes,
            queue_capacity_pkts=self.cfg.queue_capacity_pkts,
        )
        self.steps: list[tuple[tuple[int, ...], int]] = []
        self._queues: dict[int, dict[tuple[int, int], NextHopQueue]] = {}
        self._cands: dict[tuple[int, int], tuple[list[NextHopQueue], SplitScheduler]] = {}
        self._timers: dict[tuple[int, int], object] = {}
        for n in self.topo.node_ids:
            self._queues[n] = {}
            for link in self.topo.links_of(n):
                self._add_queue(n, link)

    def _add_queue(self, node: int, link: Link) -> None:
        q = NextHopQueue(link.other(node), link, self.acfg.queue_capacity_pkts)
        self._queues[node].setdefault(q.key, q)

    def candidates(self, node: int, dst: int):
        entry = self._cands.get((node, dst))
        if entry is None:
            queues = []
            for v in candidate_next_hops(node, dst, self.topo):
                for link in self.topo.links_between(node, v):
                    queues.append(self._queues[node][(v, link.channel)])
            sched = SplitScheduler({q.key: q.link.rate_bps for q in queues})
            entry = self._cands[(node, dst)] = (queues, sched)
        return entry

    def forward(self, node: int, packet: Packet) -> None:
        if packet.dst == node:
            self._deliver(node, packet)
            return
        try:
            queues, sched = self.candidates(node, packet.dst)
        except NoRoute:
            self.drop(packet, "noroute")
            return
        if not queues:
            self.drop(packet, "noroute")
            return
        try:
            q = enqueue_packet(packet, queues, self.acfg, sched, self.sim.now())
        except QueueFull:
            self.drop(packet, "queue")
            return
        self.kick(node, q.link.channel)

    def next_frame(self, node: int, channel: int):
        queues = [
            q for q in self._queues[node].values()
            if len(q) and q.link.channel == channel and q.link.up
        ]
        if not queues:
            return None
        now = self.sim.now()
        hold = self.acfg.hold_time_s
        if hold > 0:
            # same expression as the timer deadline, so a firing timer always finds work
            ready = [
                q for q in queues
                if q.packets[0].enqueue_timestamp + hold <= now or unit_is_full(q, self.acfg)
            ]
            if not ready:
                self._arm_timer(node, channel, min(q.packets[0].enqueue_timestamp for q in queues) + hold)
                return None
            queues = ready
        q = select_queue_for_radio(queues, self.acfg, now)
        unit = assemble_unit(q, self.acfg, self._on_step if self.record else None)
        return q.link, unit

    def _on_step(self, sizes: tuple[int, ...], spare: int) -> None:
        self.steps.append((sizes, spare))

    def _arm_timer(self, node: int, channel: int, t: float) -> None:
        key = (node, channel)
        old = self._timers.get(key)
        if old is not None and not old.cancelled and old.time <= t:
            return
        if old is not None:
            self.sim.cancel(old)
        self._timers[key] = self.sim.schedule(max(t, self.sim.now()), self._hold_expired, node, channel)

    def _hold_expired(self, node: int, channel: int) -> None:
        self._timers.pop((node, channel), None)
        self.kick(node, channel)

    def on_links_changed(self, links: list[Link]) -> None:
        self._cands.clear()
        for link in links:
            for node in (link.a, link.b):
                if link.up:
                    self._add_queue(node, link)
                else:
                    q = self._queues[node].get((link.other(node), link.channel))
                    while q is not None and len(q):
                        self.drop(q.popleft(), "noroute")
        for link in links:
            for node in (link.a, link.b):
                self.kick(node, link.channel)
