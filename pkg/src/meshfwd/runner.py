"""Assemble and execute one simulation run; paired comparisons across protocols."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .aal2r import Aal2rConfig, Aal2rForwarder
from .engine import Simulator
from .forwarding import Forwarder, LinkConfig
from .gsr import GsrForwarder
from .metrics import Counters, MetricsCollector, TimeSeries, packet_loss, pdr, throughput
from .net import Medium, build_topology
from .packet import ACK, DATA, Packet
from .scenario import Scenario
from .traffic import (
    ACK_BYTES,
    CbrSource,
    FlowSpec,
    ReliableReceiver,
    ReliableSender,
)

log = logging.getLogger(__name__)

PROTOCOLS = ("gsr", "aal2r")
NA = "NA"

SUMMARY_METRICS = (
    "sent",
    "received",
    "duplicates",
    "dropped_queue",
    "dropped_noroute",
    "dropped_hopbudget",
    "dropped_linkloss",
    "in_flight",
    "bytes_delivered",
    "pdr",
    "loss_count",
    "loss_ratio",
    "throughput_bps",
)


def _fmt(v) -> str:
    if v is None:
        return NA
    if isinstance(v, float):
        return repr(v)
    return str(v)


def scenario_digest(echo: dict) -> str:
    blob = json.dumps(echo, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class Report:
    scenario: dict
    digest: str
    protocol: str
    seed: int
    duration_s: float
    per_flow: dict[int, Counters]
    total: Counters
    series: TimeSeries
    runtime: dict = field(default_factory=dict)

    @property
    def pdr(self) -> float | None:
        return pdr(self.total)

    @property
    def throughput_bps(self) -> float:
        return throughput(self.total, self.duration_s)[0]

    def metric_summary(self, c: Counters) -> dict:
        loss_count, loss_ratio = packet_loss(c)
        out = dict(c.as_dict())
        out.update(
            pdr=pdr(c),
            loss_count=loss_count,
            loss_ratio=loss_ratio,
            throughput_bps=throughput(c, self.duration_s)[0],
        )
        return out

    def summary_rows(self) -> list[tuple[str, str, str]]:
        rows = []
        for fid in sorted(self.per_flow):
            m = self.metric_summary(self.per_flow[fid])
            rows.extend((name, str(fid), _fmt(m[name])) for name in SUMMARY_METRICS)
        m = self.metric_summary(self.total)
        rows.extend((name, "all", _fmt(m[name])) for name in SUMMARY_METRICS)
        rows.append(("control_bytes_sent", "all", _fmt(self.total.control_bytes_sent)))
        return rows

    def series_rows(self) -> list[tuple[str, str, str, str]]:
        _, bins = throughput(self.total, self.duration_s, self.series)
        return [
            (_fmt(t), self.protocol, _fmt(b), _fmt(p))
            for t, b, p in zip(self.series.bin_starts(), bins, self.series.pdr_cumulative())
        ]

    def summary_csv(self) -> str:
        return _csv(("metric", "flow_id", "value"), self.summary_rows())

    def series_csv(self) -> str:
        return _csv(
            ("t_bin_start_s", "protocol", "delivered_bits_per_s", "pdr_cumulative"),
            self.series_rows(),
        )

    def to_json(self) -> str:
        doc = {
            "digest": self.digest,
            "protocol": self.protocol,
            "seed": self.seed,
            "scenario": self.scenario,
            "nodes": len(self.scenario["nodes"]),
            "summary": {
                str(fid): self.metric_summary(c) for fid, c in sorted(self.per_flow.items())
            }
            | {"all": self.metric_summary(self.total)},
            "runtime": self.runtime,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, text in (
            ("summary.csv", self.summary_csv()),
            ("series.csv", self.series_csv()),
            ("report.json", self.to_json()),
        ):
            p = out / name
            p.write_text(text)
            paths.append(p)
        return paths


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class Simulation:
    """One (scenario, protocol, seed) run.

    ``record=True`` keeps transmission intervals, frame contents and
    aggregation steps for post-run checks; ``trace=True`` keeps the event
    trace.
    """

    def __init__(
        self,
        scenario: Scenario,
        protocol: str | None = None,
        seed: int | None = None,
        record: bool = False,
        trace: bool = False,
    ):
        self.protocol = protocol or scenario.protocol
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        self.seed = scenario.seed if seed is None else seed
        self.scenario = scenario.model_copy(
            update={"protocol": self.protocol, "seed": self.seed}, deep=True
        )
        s = self.scenario
        self.sim = Simulator(self.seed, trace=trace)
        self.topo = build_topology(s.node_specs(), s.transmission_range_m, s.link_loss_prob)
        self.medium = Medium(self.sim, record=record)
        self.metrics = MetricsCollector(s.duration_s, s.bin_width_s)
        cfg = LinkConfig(s.mtu_bytes, s.header_bytes, s.queue_capacity_pkts)
        common = (self.sim, self.topo, self.medium, self.metrics, cfg, self._deliver)
        if self.protocol == "gsr":
            self.forwarder: Forwarder = GsrForwarder(
                *common, record=record, update_interval_s=s.gsr.update_interval_s
            )
        else:
            acfg = Aal2rConfig(
                s.mtu_bytes,
                s.header_bytes,
                s.aal2r.queue_priority,
                s.aal2r.hold_time_s,
                s.queue_capacity_pkts,
            )
            self.forwarder = Aal2rForwarder(*common, record=record, aal2r=acfg)
        self.flows = {f.id: f for f in s.flow_specs()}
        self.senders: dict[int, ReliableSender] = {}
        self.receivers: dict[int, ReliableReceiver] = {}
        self.sources: dict[int, CbrSource] = {}
        self._next_id = 0

    # -- host interface for traffic endpoints ---------------------------------

    def now(self) -> float:
        return self.sim.now()

    def schedule(self, t: float, fn, *args):
        return self.sim.schedule(t, fn, *args)

    def cancel(self, handle) -> None:
        self.sim.cancel(handle)

    def _packet(self, flow: FlowSpec, kind: str, size: int, src: int, dst: int) -> Packet:
        pid = self._next_id
        self._next_id += 1
        return Packet(pid, flow.id, src, dst, size, self.sim.now(), kind=kind)

    def send_data(self, flow: FlowSpec, seq: int = -1) -> Packet:
        p = self._packet(flow, DATA, flow.pkt_bytes, flow.src, flow.dst)
        p.seq = seq
        self.metrics.on_sent(p, self.sim.now())
        self.forwarder.inject(flow.src, p)
        return p

    def resend(self, packet: Packet) -> None:
        p = packet.copy()
        p.hops_taken = 0
        self.metrics.on_copy(p)
        self.forwarder.inject(p.src, p)

    def send_ack(self, flow: FlowSpec, ack: int) -> None:
        p = self._packet(flow, ACK, ACK_BYTES, flow.dst, flow.src)
        p.ack = ack
        self.forwarder.inject(flow.dst, p)

    def _deliver(self, node: int, packet: Packet) -> None:
        if packet.kind == ACK:
            self.senders[packet.flow_id].on_ack(packet.ack)
            return
        first = self.metrics.on_deliver(packet, node, self.sim.now())
        rx = self.receivers.get(packet.flow_id)
        if rx is not None:
            rx.on_data(packet, first)

    # -- execution ------------------------------------------------------------

    def _link_event(self, a: int, b: int, channel: int | None, up: bool) -> None:
        changed = self.topo.set_link_state(a, b, channel, up)
        if changed:
            self.forwarder.on_links_changed(changed)

    def run(self) -> Report:
        s = self.scenario
        self.forwarder.start()
        for fid in sorted(self.flows):
            f = self.flows[fid]
            if f.kind == "reliable":
                self.senders[fid] = ReliableSender(f, self)
                self.receivers[fid] = ReliableReceiver(f, self)
                self.senders[fid].start()
            else:
                self.sources[fid] = CbrSource(f, self)
                self.sources[fid].start()
        for ev in s.link_events:
            self.sim.schedule(ev.t, self._link_event, ev.a, ev.b, ev.channel, ev.up)
        events = self.sim.run_until(s.duration_s)
        per_flow, total, series = self.metrics.finalize()
        echo = s.echo()
        return Report(
            scenario=echo,
            digest=scenario_digest(echo),
            protocol=self.protocol,
            seed=self.seed,
            duration_s=s.duration_s,
            per_flow=per_flow,
            total=total,
            series=series,
            runtime={
                "events_processed": events,
                "frames_sent": self.medium.frames_sent,
                "ack_drops": self.forwarder.ack_drops,
            },
        )


def run(scenario: Scenario, protocol: str | None = None, seed: int | None = None) -> Report:
    return Simulation(scenario, protocol, seed).run()


def _run_args(args) -> Report:
    return run(*args)


@dataclass
class Comparison:
    protocols: list[str]
    seeds: list[int]
    reports: dict[tuple[int, str], Report]

    def pdr_pairs(self, a: str = "aal2r", b: str = "gsr") -> list[tuple[int, float, float]]:
        return [
            (seed, self.reports[(seed, a)].pdr, self.reports[(seed, b)].pdr)
            for seed in self.seeds
        ]

    def fraction_at_least(self, a: str = "aal2r", b: str = "gsr", metric: str = "pdr") -> float:
        wins = sum(
            getattr(self.reports[(seed, a)], metric) >= getattr(self.reports[(seed, b)], metric)
            for seed in self.seeds
        )
        return wins / len(self.seeds)

    def mean(self, protocol: str, metric: str) -> float:
        vals = [getattr(self.reports[(seed, protocol)], metric) for seed in self.seeds]
        return sum(vals) / len(vals)

    def rows(self) -> list[tuple[str, ...]]:
        out = []
        for seed in self.seeds:
            for proto in self.protocols:
                r = self.reports[(seed, proto)]
                _, loss_ratio = packet_loss(r.total)
                out.append(
                    (str(seed), proto, _fmt(r.pdr), _fmt(loss_ratio), _fmt(r.throughput_bps))
                )
        return out

    def summary(self) -> list[tuple[str, str]]:
        rows = []
        for proto in self.protocols:
            rows.append((f"mean_pdr.{proto}", _fmt(self.mean(proto, "pdr"))))
            rows.append((f"mean_throughput_bps.{proto}", _fmt(self.mean(proto, "throughput_bps"))))
        if "aal2r" in self.protocols and "gsr" in self.protocols:
            rows.append(("fraction_pdr_aal2r_ge_gsr", _fmt(self.fraction_at_least())))
            rows.append((
                "fraction_throughput_aal2r_ge_gsr",
                _fmt(self.fraction_at_least(metric="throughput_bps")),
            ))
        return rows

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        p1 = out / "compare.csv"
        p1.write_text(_csv(("seed", "protocol", "pdr", "loss_ratio", "throughput_bps"), self.rows()))
        p2 = out / "compare_summary.csv"
        p2.write_text(_csv(("metric", "value"), self.summary()))
        return [p1, p2]


def normalize_protocols(protocols: list[str]) -> list[str]:
    if not protocols:
        raise ValueError("at least one protocol is required")
    seen: list[str] = []
    for p in protocols:
        if p not in PROTOCOLS:
            raise ValueError(f"unknown protocol {p!r}")
        if p in seen:
            log.warning("duplicate protocol %r ignored", p)
            continue
        seen.append(p)
    return seen


def compare(
    scenario: Scenario,
    protocols: list[str],
    seeds: int | list[int] = 1,
    jobs: int = 1,
) -> Comparison:
    """Run every protocol on the identical scenario for each seed."""
    protos = normalize_protocols(protocols)
    if len(protos) < 2:
        raise ValueError("compare needs at least two distinct protocols")
    seed_list = (
        [scenario.seed + i for i in range(seeds)] if isinstance(seeds, int) else list(seeds)
    )
    tasks = [(scenario, proto, seed) for seed in seed_list for proto in protos]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_args, tasks))
    else:
        results = [_run_args(t) for t in tasks]
    reports = {(t[2], t[1]): r for t, r in zip(tasks, results)}
    return Comparison(protos, seed_list, reports)
