"""Scenario files (YAML or JSON), validation, and built-in presets."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .net import DEFAULT_RATE_BPS, NodeSpec, RadioSpec
from .traffic import FlowSpec

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Unreadable or invalid scenario; the message names the offending field."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RadioConfig(_Strict):
    channel: int = Field(ge=0)
    rate_bps: float = Field(DEFAULT_RATE_BPS, gt=0)


class NodeConfig(_Strict):
    id: int = Field(ge=0)
    x: float
    y: float
    radios: list[RadioConfig] = Field(min_length=1)


class FlowConfig(_Strict):
    id: int = Field(ge=0)
    src: int
    dst: int
    kind: Literal["cbr", "reliable"] = "cbr"
    rate_pps: float = Field(10.0, gt=0)
    pkt_bytes: int = Field(512, gt=0)
    start_s: float = Field(0.0, ge=0)
    stop_s: float | None = None
    window: int = Field(8, gt=0)
    rto_initial_s: float = Field(1.0, gt=0)


class GsrSection(_Strict):
    update_interval_s: float = Field(1.0, gt=0)


class Aal2rSection(_Strict):
    queue_priority: Literal["oldest_head", "avg_age"] = "oldest_head"
    hold_time_s: float = Field(0.0, ge=0)


class LinkEventConfig(_Strict):
    t: float = Field(ge=0)
    a: int
    b: int
    channel: int | None = None
    up: bool


class Scenario(_Strict):
    schema_version: Literal[1]
    duration_s: float = Field(gt=0)
    seed: int = 1
    protocol: Literal["gsr", "aal2r"] = "aal2r"
    mtu_bytes: int = Field(1500, gt=0)
    header_bytes: int = Field(28, ge=0)
    transmission_range_m: float = Field(120.0, gt=0)
    queue_capacity_pkts: int = Field(50, gt=0)
    link_loss_prob: float = Field(0.0, ge=0, le=1)
    bin_width_s: float = Field(1.0, gt=0)
    nodes: list[NodeConfig] = Field(min_length=1)
    flows: list[FlowConfig] = Field(default_factory=list)
    gsr: GsrSection = Field(default_factory=GsrSection)
    aal2r: Aal2rSection = Field(default_factory=Aal2rSection)
    link_events: list[LinkEventConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _cross_check(self) -> Scenario:
        if self.header_bytes >= self.mtu_bytes:
            raise ValueError(
                f"header_bytes: {self.header_bytes} must be below mtu_bytes {self.mtu_bytes}"
            )
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("nodes: node ids must be unique")
        for i, n in enumerate(self.nodes):
            chans = [r.channel for r in n.radios]
            if len(set(chans)) != len(chans):
                raise ValueError(f"nodes[{i}].radios: at most one radio per channel")
        known = set(ids)
        fids = [f.id for f in self.flows]
        if len(set(fids)) != len(fids):
            raise ValueError("flows: flow ids must be unique")
        limit = self.mtu_bytes - self.header_bytes
        for i, f in enumerate(self.flows):
            where = f"flows[{i}]"
            for attr in ("src", "dst"):
                if getattr(f, attr) not in known:
                    raise ValueError(f"{where}.{attr}: unknown node {getattr(f, attr)}")
            if f.src == f.dst:
                raise ValueError(f"{where}.dst: must differ from src")
            if f.pkt_bytes > limit:
                raise ValueError(
                    f"{where}.pkt_bytes: {f.pkt_bytes} exceeds mtu_bytes - header_bytes = {limit}"
                )
            if f.stop_s is None:
                f.stop_s = self.duration_s
            if not f.start_s < f.stop_s <= self.duration_s:
                raise ValueError(
                    f"{where}.stop_s: need start_s < stop_s <= duration_s "
                    f"({f.start_s}, {f.stop_s}, {self.duration_s})"
                )
        for i, ev in enumerate(self.link_events):
            for attr in ("a", "b"):
                if getattr(ev, attr) not in known:
                    raise ValueError(f"link_events[{i}].{attr}: unknown node {getattr(ev, attr)}")
            if ev.t > self.duration_s:
                raise ValueError(f"link_events[{i}].t: beyond duration_s")
        return self

    def node_specs(self) -> list[NodeSpec]:
        return [
            NodeSpec(
                n.id,
                (n.x, n.y),
                tuple(RadioSpec(r.channel, r.rate_bps) for r in n.radios),
            )
            for n in self.nodes
        ]

    def flow_specs(self) -> list[FlowSpec]:
        return [FlowSpec(**f.model_dump()) for f in self.flows]

    def echo(self) -> dict:
        """Every parameter the engine uses, defaults included."""
        return self.model_dump(mode="json")


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        msg = e["msg"].removeprefix("Value error, ")
        lines.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(lines)


def parse_scenario(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping at the top level")
    try:
        return Scenario.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format_validation(err)) from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        problem = getattr(err, "problem", None) or str(err)
        raise ScenarioError(f"{where}: parse error: {problem}") from None
    return parse_scenario(data)


def dump_scenario(s: Scenario) -> str:
    return yaml.safe_dump(s.echo(), sort_keys=False)


# -- presets ------------------------------------------------------------------

PRESETS = ("paper-10node", "line-3", "grid-9")

# Rate used by the paper-10node preset; low enough that a 60 s run stays fast.
REF_RATE_BPS = 2_000_000.0
REF_PKT_BYTES = 512
REF_OVERLOAD = 1.5


def _grid(rows: int, cols: int, spacing: float, radios: list[dict]) -> list[dict]:
    return [
        {"id": r * cols + c, "x": c * spacing, "y": r * spacing, "radios": radios}
        for r in range(rows)
        for c in range(cols)
    ]


def _ten_node() -> dict:
    radios = [{"channel": 1, "rate_bps": REF_RATE_BPS}, {"channel": 2, "rate_bps": REF_RATE_BPS}]
    nodes = _grid(2, 5, 100.0, radios)
    # (src, dst, hops on the 2x5 grid)
    pairs = [(0, 9, 5), (5, 4, 5), (1, 8, 3), (6, 3, 3)]
    # Under single-path forwarding everything rides the lowest channel, which
    # is the bottleneck; size the per-flow rate so the offered airtime on it
    # is REF_OVERLOAD times its capacity.
    frame_s = (REF_PKT_BYTES + 28) * 8 / REF_RATE_BPS
    total_hops = sum(h for _, _, h in pairs)
    rate = round(REF_OVERLOAD / (total_hops * frame_s), 1)
    flows = [
        {"id": i, "src": s, "dst": d, "kind": "cbr", "rate_pps": rate,
         "pkt_bytes": REF_PKT_BYTES, "start_s": 5.0, "stop_s": 60.0}
        for i, (s, d, _) in enumerate(pairs)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "duration_s": 60.0,
        "seed": 1,
        "protocol": "aal2r",
        "transmission_range_m": 120.0,
        "nodes": nodes,
        "flows": flows,
    }


def _line_3() -> dict:
    nodes = [
        {"id": i, "x": 100.0 * i, "y": 0.0, "radios": [{"channel": 1}]}
        for i in range(3)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "duration_s": 20.0,
        "seed": 1,
        "protocol": "aal2r",
        "transmission_range_m": 120.0,
        "nodes": nodes,
        "flows": [{"id": 0, "src": 0, "dst": 2, "rate_pps": 100.0,
                   "start_s": 3.0, "stop_s": 18.0}],
    }


def _grid_9() -> dict:
    nodes = _grid(3, 3, 100.0, [{"channel": 1}, {"channel": 2}])
    flows = [
        {"id": 0, "src": 0, "dst": 8, "rate_pps": 200.0, "start_s": 4.0, "stop_s": 28.0},
        {"id": 1, "src": 6, "dst": 2, "rate_pps": 200.0, "start_s": 4.0, "stop_s": 28.0},
        {"id": 2, "src": 3, "dst": 5, "rate_pps": 200.0, "start_s": 4.0, "stop_s": 28.0},
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "duration_s": 30.0,
        "seed": 1,
        "protocol": "aal2r",
        "transmission_range_m": 120.0,
        "nodes": nodes,
        "flows": flows,
    }


def preset(name: str) -> Scenario:
    builders = {"paper-10node": _ten_node, "line-3": _line_3, "grid-9": _grid_9}
    try:
        build = builders[name]
    except KeyError:
        raise ScenarioError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return parse_scenario(build())
