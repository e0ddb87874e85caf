"""Global State Routing: link-state tables exchanged only with neighbours.

Every node keeps a neighbour list, a topology table of link-state entries
(one per origin, each with the origin's sequence number), and the next-hop
and distance tables derived from it by a hop-count shortest-path search.
Links have weight 1; absent adjacency means no edge at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import kernels
from .forwarding import Forwarder
from .net import InterfaceQueue, Link, Topology
from .packet import Packet, TransmissionUnit

DELIVER = "deliver"


class NoRoute(Exception):
    pass


class HopBudgetExhausted(Exception):
    pass


@dataclass(frozen=True, slots=True)
class LinkStateEntry:
    origin: int
    neighbors: frozenset[int]
    seq: int
    timestamp: float


@dataclass(frozen=True, slots=True)
class RoutingUpdateMessage:
    sender: int
    entries: tuple[LinkStateEntry, ...]

    @property
    def wire_size_bytes(self) -> int:
        return 8 + 12 * len(self.entries)


@dataclass
class GsrTables:
    node_id: int
    neighbor_list: set[int]
    topology_table: dict[int, LinkStateEntry] = field(default_factory=dict)
    next_hop_table: dict[int, int] = field(default_factory=dict)
    distance_table: dict[int, int] = field(default_factory=dict)


def gsr_init(node: int, neighbors, now: float = 0.0) -> GsrTables:
    nbrs = set(neighbors)
    tables = GsrTables(node, nbrs)
    tables.topology_table[node] = LinkStateEntry(node, frozenset(nbrs), 0, now)
    gsr_compute_routes(tables)
    return tables


def gsr_periodic_update(tables: GsrTables, now: float) -> RoutingUpdateMessage:
    """Bump the node's own entry and snapshot the whole table for broadcast."""
    own = tables.topology_table[tables.node_id]
    tables.topology_table[tables.node_id] = LinkStateEntry(
        tables.node_id, frozenset(tables.neighbor_list), own.seq + 1, now
    )
    entries = tuple(tables.topology_table[k] for k in sorted(tables.topology_table))
    return RoutingUpdateMessage(tables.node_id, entries)


def gsr_handle_update(tables: GsrTables, msg: RoutingUpdateMessage, now: float) -> bool:
    """Merge entries with a strictly newer sequence number; recompute if anything changed."""
    changed = False
    topo = tables.topology_table
    for entry in msg.entries:
        if entry.origin == tables.node_id:
            continue
        local = topo.get(entry.origin)
        if local is None or entry.seq > local.seq:
            topo[entry.origin] = replace(entry, timestamp=now)
            changed = True
    if changed:
        gsr_compute_routes(tables)
    return changed


def gsr_compute_routes(tables: GsrTables) -> tuple[dict[int, int], dict[int, int]]:
    """Min-hop routes over the union of known link states.

    The node's own adjacency is its neighbour list, so every next hop is a
    current neighbour.  Equal-cost ties go to the lowest next-hop id.
    """
    me = tables.node_id
    adj: dict[int, set[int]] = {}
    for origin, entry in tables.topology_table.items():
        if origin == me:
            continue
        adj.setdefault(origin, set()).update(entry.neighbors)
        for n in entry.neighbors:
            adj.setdefault(n, set()).add(origin)
    adj[me] = set(tables.neighbor_list)
    for n in tables.neighbor_list:
        adj.setdefault(n, set()).add(me)

    ids, indptr, indices = kernels.csr(adj)
    dist, first = kernels.bfs_routes(indptr, indices, ids.index(me))
    next_hop = {}
    distance = {}
    for i, nid in enumerate(ids):
        if dist[i] < 0:
            continue
        distance[nid] = dist[i]
        if nid != me:
            next_hop[nid] = ids[first[i]]
    tables.next_hop_table = next_hop
    tables.distance_table = distance
    return next_hop, distance


def gsr_forward(tables: GsrTables, packet: Packet):
    """``DELIVER`` or the next-hop id; decrements the hop budget when relaying."""
    if packet.dst == tables.node_id:
        return DELIVER
    nh = tables.next_hop_table.get(packet.dst)
    if nh is None:
        raise NoRoute(packet.dst)
    if packet.hop_budget <= 0:
        raise HopBudgetExhausted(packet.id)
    packet.hop_budget -= 1
    return nh


def outgoing_link(topo: Topology, node: int, next_hop: int) -> Link | None:
    links = topo.links_between(node, next_hop)
    return links[0] if links else None


class GsrForwarder(Forwarder):
    """Single-path forwarding from GSR tables; control traffic shares the channels.

    Per outgoing link there is a bounded data FIFO and an unbounded control
    FIFO; control frames go first.
    """

    name = "gsr"

    def __init__(self, *args, update_interval_s: float = 1.0, **kwargs):
        super().__init__(*args, **kwargs)
        self.update_interval_s = update_interval_s
        self.tables = {n: gsr_init(n, self.topo.neighbors(n)) for n in self.topo.node_ids}
        self._data: dict[tuple[int, tuple], InterfaceQueue] = {}
        self._ctrl: dict[tuple[int, tuple], list] = {}
        self.updates_sent = 0

    def _data_queue(self, node: int, link: Link) -> InterfaceQueue:
        key = (node, link.key)
        q = self._data.get(key)
        if q is None:
            q = self._data[key] = InterfaceQueue(self.cfg.queue_capacity_pkts)
        return q

    def start(self) -> None:
        rng = self.sim.random.stream("gsr")
        for n in self.topo.node_ids:
            offset = self.update_interval_s * rng.random()
            self.sim.schedule(offset, self._periodic, n)

    def _periodic(self, node: int) -> None:
        tables = self.tables[node]
        msg = gsr_periodic_update(tables, self.sim.now())
        for nbr in sorted(tables.neighbor_list):
            link = outgoing_link(self.topo, node, nbr)
            if link is None:
                continue
            self._ctrl.setdefault((node, link.key), []).append((self.sim.now(), msg))
            self.updates_sent += 1
            self.kick(node, link.channel)
        self.sim.schedule_in(self.update_interval_s, self._periodic, node)

    def on_control(self, node: int, link: Link, msg: RoutingUpdateMessage) -> None:
        tables = self.tables[node]
        if msg.sender in tables.neighbor_list:
            gsr_handle_update(tables, msg, self.sim.now())

    def forward(self, node: int, packet: Packet) -> None:
        tables = self.tables[node]
        try:
            nh = gsr_forward(tables, packet)
        except NoRoute:
            self.drop(packet, "noroute")
            return
        except HopBudgetExhausted:
            self.drop(packet, "hopbudget")
            return
        if nh is DELIVER:
            self._deliver(node, packet)
            return
        link = outgoing_link(self.topo, node, nh)
        if link is None:
            self.drop(packet, "noroute")
            return
        packet.enqueue_timestamp = self.sim.now()
        if not self._data_queue(node, link).offer(packet):
            self.drop(packet, "queue")
            return
        self.kick(node, link.channel)

    def next_frame(self, node: int, channel: int):
        best = None
        links = self.topo.links_on(node, channel)
        for link in links:
            ctrl = self._ctrl.get((node, link.key))
            if ctrl:
                cand = (ctrl[0][0], link.other(node))
                if best is None or cand < best[0]:
                    best = (cand, link)
        if best is not None:
            link = best[1]
            return link, self._ctrl[(node, link.key)].pop(0)[1]

        for link in links:
            q = self._data.get((node, link.key))
            if q:
                cand = (q.head().enqueue_timestamp, link.other(node))
                if best is None or cand < best[0]:
                    best = (cand, link)
        if best is None:
            return None
        link = best[1]
        unit = TransmissionUnit(self.cfg.header_bytes, [self._data[(node, link.key)].pop()])
        return link, unit

    def on_links_changed(self, links: list[Link]) -> None:
        touched = set()
        for link in links:
            touched.update((link.a, link.b))
            if not link.up:
                for node in (link.a, link.b):
                    q = self._data.get((node, link.key))
                    while q:
                        self.drop(q.pop(), "noroute")
                    self._ctrl.pop((node, link.key), None)
        for node in sorted(touched):
            tables = self.tables[node]
            tables.neighbor_list = set(self.topo.neighbors(node))
            gsr_compute_routes(tables)
            for link in self.topo.links_of(node):
                self.kick(node, link.channel)
