"""Delivery accounting and the delivery-ratio, loss and throughput formulas.

Accounting is per unique packet id.  A reliable flow may put several copies
of one id into the network; the id counts as received once any copy reaches
the destination, and otherwise ends in exactly one of: still in flight, or
dropped (attributed to the reason of its last dropped copy).  That makes
``sent == received + drops + in_flight`` an identity on every run.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .packet import Packet

DROP_REASONS = ("queue", "noroute", "hopbudget", "linkloss")


class InvariantViolation(RuntimeError):
    """A hard accounting identity failed; this is a bug, not a result."""


@dataclass
class Counters:
    sent: int = 0
    received: int = 0
    duplicates: int = 0
    dropped_queue: int = 0
    dropped_noroute: int = 0
    dropped_hopbudget: int = 0
    dropped_linkloss: int = 0
    in_flight: int = 0
    bytes_delivered: int = 0
    control_bytes_sent: int = 0

    @property
    def dropped(self) -> int:
        return (
            self.dropped_queue
            + self.dropped_noroute
            + self.dropped_hopbudget
            + self.dropped_linkloss
        )

    def add(self, other: Counters) -> None:
        for k, v in asdict(other).items():
            setattr(self, k, getattr(self, k) + v)

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass
class TimeSeries:
    bin_width: float
    delivered_bytes: list[int] = field(default_factory=list)
    delivered_packets: list[int] = field(default_factory=list)
    sent_packets: list[int] = field(default_factory=list)

    @classmethod
    def empty(cls, duration: float, bin_width: float) -> TimeSeries:
        n = max(1, math.ceil(round(duration / bin_width, 9)))
        return cls(bin_width, [0] * n, [0] * n, [0] * n)

    def bin_of(self, t: float) -> int:
        return min(int(t // self.bin_width), len(self.delivered_bytes) - 1)

    def bin_starts(self) -> list[float]:
        return [i * self.bin_width for i in range(len(self.delivered_bytes))]

    def pdr_cumulative(self) -> list[float | None]:
        out: list[float | None] = []
        sent = recv = 0
        for s, r in zip(self.sent_packets, self.delivered_packets):
            sent += s
            recv += r
            out.append(recv / sent if sent else None)
        return out


def pdr(c: Counters) -> float | None:
    """Unique packets received over packets generated; ``None`` when nothing was sent."""
    if c.sent == 0:
        return None
    return c.received / c.sent


def packet_loss(c: Counters) -> tuple[int, float | None]:
    count = c.sent - c.received
    return count, (count / c.sent if c.sent else None)


def throughput(
    c: Counters, duration: float, series: TimeSeries | None = None
) -> tuple[float, list[float]]:
    """Delivered payload bit/s over ``duration``, plus per-bin bit/s."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    avg = c.bytes_delivered * 8 / duration
    bins = []
    if series is not None:
        bins = [b * 8 / series.bin_width for b in series.delivered_bytes]
    return avg, bins


@dataclass
class _Fate:
    flow_id: int
    alive: int = 1
    delivered: bool = False
    last_drop: str | None = None


class MetricsCollector:
    """Receives per-copy events from the forwarding layer; produces counters."""

    def __init__(self, duration: float, bin_width: float = 1.0):
        self.duration = duration
        self._fates: dict[int, _Fate] = {}
        self._flows: dict[int, Counters] = {}
        self.series: dict[int, TimeSeries] = {}
        self._bin_width = bin_width
        self.control_bytes_sent = 0
        self.copy_drops = {r: 0 for r in DROP_REASONS}
        self.routing_errors = 0
        # (packet id, hops taken, hop distance at injection) per first delivery
        self.hop_records: list[tuple[int, int, int | None]] = []

    def _flow(self, flow_id: int) -> Counters:
        c = self._flows.get(flow_id)
        if c is None:
            c = self._flows[flow_id] = Counters()
            self.series[flow_id] = TimeSeries.empty(self.duration, self._bin_width)
        return c

    def on_sent(self, p: Packet, now: float) -> None:
        if p.id in self._fates:
            raise InvariantViolation(f"packet id {p.id} registered twice")
        self._fates[p.id] = _Fate(p.flow_id)
        self._flow(p.flow_id).sent += 1
        ts = self.series[p.flow_id]
        ts.sent_packets[ts.bin_of(now)] += 1

    def on_copy(self, p: Packet) -> None:
        self._fates[p.id].alive += 1

    def on_drop(self, p: Packet, reason: str) -> None:
        fate = self._fates[p.id]
        fate.alive -= 1
        fate.last_drop = reason
        self.copy_drops[reason] += 1

    def on_deliver(self, p: Packet, node: int, now: float) -> bool:
        """Returns ``True`` for the first copy of an id, ``False`` for a duplicate."""
        if p.dst != node:
            self.routing_errors += 1
            raise InvariantViolation(f"packet {p.id} for {p.dst} delivered at {node}")
        fate = self._fates[p.id]
        fate.alive -= 1
        c = self._flow(p.flow_id)
        if fate.delivered:
            c.duplicates += 1
            return False
        fate.delivered = True
        c.received += 1
        c.bytes_delivered += p.size_bytes
        ts = self.series[p.flow_id]
        b = ts.bin_of(now)
        ts.delivered_bytes[b] += p.size_bytes
        ts.delivered_packets[b] += 1
        self.hop_records.append((p.id, p.hops_taken, p.hop_limit))
        return True

    def on_control(self, nbytes: int) -> None:
        self.control_bytes_sent += nbytes

    def finalize(self) -> tuple[dict[int, Counters], Counters, TimeSeries]:
        """Classify every id and check conservation per flow and in total."""
        per_flow = {}
        for fid, c in self._flows.items():
            out = Counters(
                sent=c.sent,
                received=c.received,
                duplicates=c.duplicates,
                bytes_delivered=c.bytes_delivered,
            )
            per_flow[fid] = out
        for pid, fate in self._fates.items():
            if fate.alive < 0:
                raise InvariantViolation(f"packet {pid} has negative live copies")
            if fate.delivered:
                continue
            c = per_flow[fate.flow_id]
            if fate.alive > 0:
                c.in_flight += 1
            elif fate.last_drop is None:
                raise InvariantViolation(f"packet {pid} vanished without a drop")
            else:
                name = "dropped_" + fate.last_drop
                setattr(c, name, getattr(c, name) + 1)

        total = Counters()
        for fid in sorted(per_flow):
            c = per_flow[fid]
            if c.sent != c.received + c.dropped + c.in_flight:
                raise InvariantViolation(f"conservation failed for flow {fid}: {c}")
            total.add(c)
        total.control_bytes_sent = self.control_bytes_sent
        if total.sent != total.received + total.dropped + total.in_flight:
            raise InvariantViolation(f"conservation failed in total: {total}")

        merged = TimeSeries.empty(self.duration, self._bin_width)
        for fid in sorted(self.series):
            ts = self.series[fid]
            for i in range(len(merged.delivered_bytes)):
                merged.delivered_bytes[i] += ts.delivered_bytes[i]
                merged.delivered_packets[i] += ts.delivered_packets[i]
                merged.sent_packets[i] += ts.sent_packets[i]
        if sum(merged.delivered_bytes) != total.bytes_delivered:
            raise InvariantViolation("time-series bins do not sum to delivered bytes")
        return per_flow, total, merged
