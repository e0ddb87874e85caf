"""Machinery shared by both forwarding strategies: radios, frame hand-off, arrival."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .engine import Simulator
from .metrics import MetricsCollector
from .net import Link, Medium, Topology
from .packet import ACK, Packet, TransmissionUnit, deaggregate


@dataclass
class LinkConfig:
    mtu_bytes: int = 1500
    header_bytes: int = 28
    queue_capacity_pkts: int = 50


class Forwarder:
    """Base class: one instance drives the data plane of every node in a run.

    Each node has one radio per channel it is tuned to.  A radio sends one
    frame at a time; :meth:`next_frame` is asked for work whenever the radio
    is idle and something may be queued for it.
    """

    name = "base"

    def __init__(
        self,
        sim: Simulator,
        topo: Topology,
        medium: Medium,
        metrics: MetricsCollector,
        cfg: LinkConfig,
        deliver: Callable[[int, Packet], None],
        record: bool = False,
    ):
        self.sim = sim
        self.topo = topo
        self.medium = medium
        self.metrics = metrics
        self.cfg = cfg
        self._deliver = deliver
        self.hop_budget_init = 2 * len(topo.nodes)
        self._busy: set[tuple[int, int]] = set()
        self.record = record
        # (header bytes, payload sizes) of every data frame put on the air
        self.frames: list[tuple[int, tuple[int, ...]]] = []
        self.ack_drops = 0

    # -- hooks for subclasses -------------------------------------------------

    def start(self) -> None:
        pass

    def forward(self, node: int, packet: Packet) -> None:
        raise NotImplementedError

    def next_frame(self, node: int, channel: int):
        """Return ``(link, frame)`` to send, or ``None`` if nothing is ready."""
        raise NotImplementedError

    def on_control(self, node: int, link: Link, msg) -> None:
        pass

    def on_links_changed(self, links: list[Link]) -> None:
        pass

    # -- shared behaviour -----------------------------------------------------

    def inject(self, node: int, packet: Packet) -> None:
        """Hand a freshly created packet to the forwarding layer of its source."""
        packet.hop_budget = self.hop_budget_init
        packet.hop_limit = self.topo.hop_matrix()[packet.src].get(packet.dst)
        self.forward(node, packet)

    def drop(self, packet: Packet, reason: str) -> None:
        if packet.kind == ACK:
            self.ack_drops += 1
        else:
            self.metrics.on_drop(packet, reason)

    def kick(self, node: int, channel: int) -> None:
        if (node, channel) in self._busy:
            return
        work = self.next_frame(node, channel)
        if work is None:
            return
        link, frame = work
        self._busy.add((node, channel))
        if isinstance(frame, TransmissionUnit):
            nbytes = frame.total_bytes
            if self.record:
                self.frames.append(
                    (frame.header_bytes, tuple(p.size_bytes for p in frame.packets))
                )
        else:
            nbytes = self.cfg.header_bytes + frame.wire_size_bytes
            self.metrics.on_control(nbytes)
        self.medium.transmit_frame(link, node, nbytes, self._tx_done, node, link, frame)

    def _tx_done(self, lost: bool, node: int, link: Link, frame) -> None:
        self._busy.discard((node, link.channel))
        receiver = link.other(node)
        if isinstance(frame, TransmissionUnit):
            if lost or not link.up:
                for p in frame.packets:
                    self.drop(p, "linkloss")
            else:
                for p in deaggregate(frame):
                    p.hops_taken += 1
                    if p.dst == receiver:
                        self._deliver(receiver, p)
                    else:
                        self.forward(receiver, p)
        elif not lost and link.up:
            self.on_control(receiver, link, frame)
        self.kick(node, link.channel)
