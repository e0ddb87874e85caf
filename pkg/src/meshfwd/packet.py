from __future__ import annotations

from dataclasses import dataclass, field, replace

DATA = "data"
ACK = "ack"


@dataclass(slots=True)
class Packet:
    """A network-layer data unit.

    ``enqueue_timestamp`` is rewritten every time the packet enters a queue;
    ``hop_limit`` records the source-to-destination hop distance seen at
    injection so delivered packets can be checked against it.
    """

    id: int
    flow_id: int
    src: int
    dst: int
    size_bytes: int
    created_at: float
    enqueue_timestamp: float = 0.0
    hop_budget: int = 0
    hops_taken: int = 0
    kind: str = DATA
    seq: int = -1
    ack: int = -1
    hop_limit: int | None = None

    def copy(self) -> Packet:
        return replace(self)


@dataclass(slots=True)
class TransmissionUnit:
    """One frame on the air: a header followed by whole packets, in order."""

    header_bytes: int
    packets: list[Packet] = field(default_factory=list)

    @property
    def payload_bytes(self) -> int:
        return sum(p.size_bytes for p in self.packets)

    @property
    def total_bytes(self) -> int:
        return self.header_bytes + self.payload_bytes


def deaggregate(unit: TransmissionUnit) -> list[Packet]:
    return list(unit.packets)
