import pytest

from meshfwd.scenario import ScenarioError, load_scenario, parse_scenario, preset

MINIMAL = """\
schema_version: 1
duration_s: 10
nodes:
  - {id: 0, x: 0, y: 0, radios: [{channel: 1}]}
  - {id: 1, x: 50, y: 0, radios: [{channel: 1}]}
flows:
  - {id: 0, src: 0, dst: 1}
"""


def test_minimal_file_gets_defaults(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(MINIMAL)
    s = load_scenario(path)
    assert (s.mtu_bytes, s.header_bytes, s.queue_capacity_pkts) == (1500, 28, 50)
    assert s.flows[0].stop_s == 10.0 and s.flows[0].pkt_bytes == 512
    echo = s.echo()
    assert echo["gsr"]["update_interval_s"] == 1.0
    assert echo["aal2r"]["queue_priority"] == "oldest_head"
    assert echo["nodes"][0]["radios"][0]["rate_bps"] == 6e6


def _data(**over):
    import yaml

    d = yaml.safe_load(MINIMAL)
    d.update(over)
    return d


def test_unknown_protocol_names_field():
    with pytest.raises(ScenarioError, match="protocol"):
        parse_scenario(_data(protocol="ospf"))


def test_packet_too_large_for_mtu():
    d = _data()
    d["flows"][0]["pkt_bytes"] = 1490
    with pytest.raises(ScenarioError, match=r"flows\[0\]\.pkt_bytes.*1472"):
        parse_scenario(d)


def test_unknown_field_rejected():
    with pytest.raises(ScenarioError, match="mtu"):
        parse_scenario(_data(mtu=1400))


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d["flows"][0].update(dst=7), "dst"),
        (lambda d: d["flows"][0].update(dst=0), "dst"),
        (lambda d: d["flows"][0].update(stop_s=99), "stop_s"),
        (lambda d: d["nodes"][1].update(id=0), "nodes"),
        (lambda d: d["nodes"][0].update(radios=[]), "radios"),
        (lambda d: d.pop("schema_version"), "schema_version"),
        (lambda d: d.update(header_bytes=1500), "header_bytes"),
    ],
)
def test_cross_validation(mutate, field):
    d = _data()
    mutate(d)
    with pytest.raises(ScenarioError, match=field):
        parse_scenario(d)


def test_parse_error_has_line_context(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("schema_version: 1\nnodes: [\n  {id: 0\n")
    with pytest.raises(ScenarioError, match=r"bad\.yaml:\d+:\d+"):
        load_scenario(path)


def test_presets():
    line = preset("line-3")
    assert len(line.nodes) == 3
    assert {r.channel for n in line.nodes for r in n.radios} == {1}
    assert len({n.y for n in line.nodes}) == 1

    ten = preset("paper-10node")
    assert len(ten.nodes) == 10
    assert ten.duration_s == 60
    assert ten.flows[0].pkt_bytes == 512
    assert len(ten.flows) == 4
    assert all([r.channel for r in n.radios] == [1, 2] for n in ten.nodes)

    assert len(preset("grid-9").nodes) == 9
    with pytest.raises(ScenarioError):
        preset("mesh-1000")


def test_ten_node_preset_offered_load_is_about_one_and_a_half():
    s = preset("paper-10node")
    rate = s.nodes[0].radios[0].rate_bps
    hops = {(0, 9): 5, (5, 4): 5, (1, 8): 3, (6, 3): 3}
    frame_s = (512 + s.header_bytes) * 8 / rate
    load = sum(f.rate_pps * hops[(f.src, f.dst)] * frame_s for f in s.flows)
    assert load == pytest.approx(1.5, rel=0.01)
