import pytest

from meshfwd.engine import Simulator
from meshfwd.packet import Packet
from meshfwd.traffic import (
    CbrSource,
    FlowSpec,
    ReliableReceiver,
    ReliableSender,
    cbr_count,
    cbr_times,
)


def test_cbr_times_short_window():
    assert cbr_times(1.0, 1.02, 200) == pytest.approx([1.000, 1.005, 1.010, 1.015])


@pytest.mark.parametrize(
    "start,stop,rate,n", [(1, 60, 200, 11_800), (5, 5, 10, 0), (0, 1, 3, 3), (0, 1.0001, 3, 4)]
)
def test_cbr_count(start, stop, rate, n):
    assert cbr_count(start, stop, rate) == n
    assert len(cbr_times(start, stop, rate)) == n


class FakeHost:
    """Loopback host: data and acks are delivered after a fixed delay."""

    def __init__(self, delay=0.01, drop_seqs=()):
        self.sim = Simulator()
        self.delay = delay
        self.drop_seqs = set(drop_seqs)
        self.sent = []
        self.acks = []
        self.sender = None
        self.receiver = None
        self._id = 0

    def now(self):
        return self.sim.now()

    def schedule(self, t, fn, *args):
        return self.sim.schedule(t, fn, *args)

    def cancel(self, h):
        self.sim.cancel(h)

    def send_data(self, flow, seq=-1):
        self._id += 1
        p = Packet(self._id, flow.id, flow.src, flow.dst, flow.pkt_bytes, self.now(), seq=seq)
        self._transmit(p)
        return p

    def resend(self, p):
        self._transmit(p.copy())

    def _transmit(self, p):
        self.sent.append(p.seq)
        if p.seq in self.drop_seqs:
            self.drop_seqs.discard(p.seq)
            return
        if self.receiver is not None:
            self.sim.schedule_in(self.delay, self._arrive, p)

    def _arrive(self, p):
        first = p.seq not in getattr(self, "_seen", set())
        self.__dict__.setdefault("_seen", set()).add(p.seq)
        self.receiver.on_data(p, first)

    def send_ack(self, flow, ack):
        self.acks.append(ack)
        self.sim.schedule_in(self.delay, self.sender.on_ack, ack)


def reliable(host, window=2, stop=1.0):
    f = FlowSpec(0, 0, 1, "reliable", pkt_bytes=100, start_s=0.0, stop_s=stop, window=window, rto_initial_s=0.5)
    host.sender = ReliableSender(f, host)
    host.receiver = ReliableReceiver(f, host)
    host.sender.start()
    return host.sender, host.receiver


def test_cbr_source_emits_on_schedule():
    host = FakeHost()
    f = FlowSpec(0, 0, 1, "cbr", rate_pps=200, start_s=1.0, stop_s=1.02)
    times = []
    host.send_data = lambda flow, seq=-1: times.append(host.now())
    CbrSource(f, host).start()
    host.sim.run_until(5.0)
    assert times == pytest.approx([1.0, 1.005, 1.01, 1.015])


def test_window_never_exceeded_in_order():
    host = FakeHost()
    tx, rx = reliable(host, window=2)
    host.sim.run_until(5.0)
    assert tx.max_in_flight == 2
    assert rx.delivered == list(range(tx.next_seq))
    assert tx.retransmissions == 0


def test_cumulative_ack_clears_prefix():
    host = FakeHost()
    f = FlowSpec(0, 0, 1, "reliable", window=8, stop_s=10.0)
    tx = ReliableSender(f, host)
    host.send_data = lambda flow, seq=-1: Packet(seq, 0, 0, 1, 10, 0.0, seq=seq)
    tx.fill()
    tx.highest_ack = 3
    for s in range(4):
        del tx.in_flight[s]
    host.send_data = lambda flow, seq=-1: Packet(seq, 0, 0, 1, 10, 0.0, seq=seq)
    tx.on_ack(5)
    assert 4 not in tx.in_flight and 5 not in tx.in_flight
    assert min(tx.in_flight) == 6


def test_timeout_retransmits_oldest_only_and_backs_off():
    host = FakeHost(delay=0.01, drop_seqs={0})
    tx, rx = reliable(host, window=2, stop=0.001)
    host.sim.run_until(0.3)
    assert host.sent == [0, 1]
    assert tx.rto == 0.5
    host.sim.run_until(0.505)
    assert host.sent == [0, 1, 0]
    assert tx.retransmissions == 1
    assert tx.rto == 1.0
    host.sim.run_until(10.0)
    assert sorted(set(rx.delivered)) == [0, 1]


def test_rto_doubling_is_capped():
    host = FakeHost()
    f = FlowSpec(0, 0, 1, "reliable", window=1, stop_s=0.5, rto_initial_s=3.0)
    host.receiver = None
    host.sender = tx = ReliableSender(f, host)
    tx.start()
    host.sim.run_until(60.0)
    assert tx.rto == 4.0
    assert tx.retransmissions > 3


def test_receiver_acks_cumulatively():
    host = FakeHost()
    f = FlowSpec(0, 0, 1, "reliable")
    rx = ReliableReceiver(f, host)
    host.sender = type("S", (), {"on_ack": lambda self, a: None})()
    for seq in (0, 2, 1, 1):
        rx.on_data(Packet(seq, 0, 0, 1, 10, 0.0, seq=seq), seq not in rx.delivered)
    assert host.acks == [0, 0, 2, 2]
    assert rx.delivered == [0, 2, 1]
