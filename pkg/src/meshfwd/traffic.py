"""Traffic sources: constant-bit-rate datagrams and a fixed-window reliable flow."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

from .packet import Packet

ACK_BYTES = 40
RTO_MAX_S = 4.0
RTT_ALPHA = 0.125


@dataclass(frozen=True)
class FlowSpec:
    id: int
    src: int
    dst: int
    kind: str = "cbr"
    rate_pps: float = 10.0
    pkt_bytes: int = 512
    start_s: float = 0.0
    stop_s: float = 10.0
    window: int = 8
    rto_initial_s: float = 1.0


class Host(Protocol):
    """What a traffic endpoint needs from the running simulation."""

    def now(self) -> float: ...
    def schedule(self, t: float, fn, *args): ...
    def cancel(self, handle) -> None: ...
    def send_data(self, flow: FlowSpec, seq: int = -1) -> Packet: ...
    def resend(self, packet: Packet) -> None: ...
    def send_ack(self, flow: FlowSpec, ack: int) -> None: ...


def cbr_count(start: float, stop: float, rate_pps: float) -> int:
    """Injections in the half-open ``[start, stop)`` at ``rate_pps``."""
    if stop <= start:
        return 0
    # rounding absorbs float noise such as (1.02 - 1.0) * 200 = 4.000000000000009
    return math.ceil(round((stop - start) * rate_pps, 9))


def cbr_times(start: float, stop: float, rate_pps: float) -> list[float]:
    return [start + k / rate_pps for k in range(cbr_count(start, stop, rate_pps))]


class CbrSource:
    def __init__(self, flow: FlowSpec, host: Host):
        self.flow = flow
        self.host = host
        self.count = cbr_count(flow.start_s, flow.stop_s, flow.rate_pps)
        self.emitted = 0

    def start(self) -> None:
        if self.count:
            self.host.schedule(self.flow.start_s, self._emit)

    def _emit(self) -> None:
        self.host.send_data(self.flow)
        self.emitted += 1
        if self.emitted < self.count:
            f = self.flow
            self.host.schedule(f.start_s + self.emitted / f.rate_pps, self._emit)


class ReliableSender:
    """Fixed window, cumulative acks, single retransmission timer.

    A timeout resends only the oldest unacknowledged packet and doubles the
    timeout (capped).  Round-trip samples come from packets that were never
    retransmitted; the timeout is twice the smoothed round-trip time.
    """

    def __init__(self, flow: FlowSpec, host: Host):
        self.flow = flow
        self.host = host
        self.next_seq = 0
        self.highest_ack = -1
        self.in_flight: dict[int, tuple[float, Packet, bool]] = {}
        self.srtt: float | None = None
        self.rto = flow.rto_initial_s
        self.max_in_flight = 0
        self.retransmissions = 0
        self._timer = None

    def start(self) -> None:
        self.host.schedule(self.flow.start_s, self.fill)

    def fill(self) -> None:
        now = self.host.now()
        sent_any = False
        while len(self.in_flight) < self.flow.window and now < self.flow.stop_s:
            p = self.host.send_data(self.flow, self.next_seq)
            self.in_flight[self.next_seq] = (now, p, False)
            self.next_seq += 1
            sent_any = True
        self.max_in_flight = max(self.max_in_flight, len(self.in_flight))
        if sent_any and self._timer is None:
            self._restart_timer()

    def on_ack(self, ack: int) -> None:
        if ack <= self.highest_ack:
            return
        now = self.host.now()
        sample = self.in_flight.get(ack)
        if sample is not None and not sample[2]:
            rtt = now - sample[0]
            self.srtt = rtt if self.srtt is None else (1 - RTT_ALPHA) * self.srtt + RTT_ALPHA * rtt
            self.rto = min(2 * self.srtt, RTO_MAX_S)
        for seq in [s for s in self.in_flight if s <= ack]:
            del self.in_flight[seq]
        self.highest_ack = ack
        self._restart_timer()
        self.fill()

    def _restart_timer(self) -> None:
        if self._timer is not None:
            self.host.cancel(self._timer)
            self._timer = None
        if self.in_flight:
            self._timer = self.host.schedule(self.host.now() + self.rto, self._on_timeout)

    def _on_timeout(self) -> None:
        self._timer = None
        if not self.in_flight:
            return
        seq = min(self.in_flight)
        _, p, _ = self.in_flight[seq]
        self.in_flight[seq] = (self.host.now(), p, True)
        self.host.resend(p)
        self.retransmissions += 1
        self.rto = min(2 * self.rto, RTO_MAX_S)
        self._restart_timer()


class ReliableReceiver:
    def __init__(self, flow: FlowSpec, host: Host):
        self.flow = flow
        self.host = host
        self.cumulative = -1
        self._out_of_order: set[int] = set()
        self.delivered: list[int] = []

    def on_data(self, packet: Packet, first_copy: bool) -> None:
        if first_copy:
            self.delivered.append(packet.seq)
        if packet.seq > self.cumulative:
            self._out_of_order.add(packet.seq)
            while self.cumulative + 1 in self._out_of_order:
                self.cumulative += 1
                self._out_of_order.discard(self.cumulative)
        self.host.send_ack(self.flow, self.cumulative)
