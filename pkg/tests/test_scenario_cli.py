import csv
import io
import json

import pytest
import yaml

from texchange.cli import main
from texchange.experiment import CSV_COLUMNS, emit_report, run_experiment
from texchange.model import check_pair_allocation, network_objective
from texchange.scenario import (Scenario, ScenarioError, dump_scenario, load_scenario,
                                scenario_from_dict)


def write(tmp_path, data, name="sc.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


MINIMAL = {
    "nodes": [{"id": 1}, {"id": 2}, {"id": 3}],
    "links": [{"from": 1, "to": 0, "pe": 0.5}, {"from": 2, "to": 0, "pe": 0.2},
              {"from": 3, "to": 0, "pe": 0.0}],
}


def test_minimal_defaults(tmp_path):
    sc = load_scenario(write(tmp_path, MINIMAL))
    assert [n.k_in for n in sc.nodes] == [83, 83, 83]
    assert sc.horizon == 3.0 and sc.slot == 0.012
    assert sc.objective == "sum" and sc.policy.value == "BUDGETED"
    assert sc.epsilon == 0.5


@pytest.mark.parametrize("mutate,where", [
    (lambda d: d["links"].__setitem__(0, {"from": 1, "to": 0, "pe": 1.2}), "links[0] (1,0)"),
    (lambda d: d.__setitem__("nodes", []), "nodes"),
    (lambda d: d["nodes"].__setitem__(0, {"id": 1, "k_in": 2.5}), "nodes[0].k_in"),
    (lambda d: d["links"].pop(2), "links (3,0)"),
    (lambda d: d["links"].append({"from": 1, "to": 9, "pe": 0.1}), "links[3] (1,9)"),
    (lambda d: d.__setitem__("settings", {"objective": "max_min"}), "settings.objective"),
    (lambda d: d.__setitem__("settings", {"trials": 0}), "settings.trials"),
    (lambda d: d["nodes"].__setitem__(0, {"id": 1, "k_in": 200}), "nodes"),
])
def test_validation_errors_name_the_field(tmp_path, mutate, where):
    data = yaml.safe_load(yaml.safe_dump(MINIMAL))
    mutate(data)
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, data))
    assert exc.value.where == where


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "nope.yaml")


def test_round_trip(tmp_path, three_node):
    path = tmp_path / "rt.yaml"
    dump_scenario(three_node, path)
    again = load_scenario(path)
    assert again == three_node
    assert isinstance(again, Scenario)


def test_json_scenario_accepted(tmp_path):
    p = tmp_path / "sc.json"
    p.write_text(json.dumps(MINIMAL))
    assert len(load_scenario(p).nodes) == 3


def test_three_node_experiment(three_node):
    rep = run_experiment(three_node.with_overrides(trials=2000))
    assert [(p.sender, p.forwarder) for p in rep.pairs] == [(1, 3)]
    r1, r2, r3 = rep.row(1), rep.row(2), rep.row(3)
    assert r3.goodput_planned == pytest.approx(132.3, abs=0.1)
    assert r1.goodput_planned >= 18.0 - 1e-9
    assert r2.role == "direct" and r2.goodput_planned == r2.goodput_initial
    assert (r1.role, r1.partner, r3.role, r3.partner) == ("sender", 3, "forwarder", 1)
    assert 59 <= r3.gain_pct <= 70
    assert rep.pairs[0].bound_gap == pytest.approx(0.0, abs=1e-9)


def test_three_node_proportional_fair(three_node):
    rep = run_experiment(three_node.with_overrides(objective="proportional_fair", trials=500))
    assert rep.row(1).goodput_planned > rep.row(1).goodput_initial
    assert rep.row(3).goodput_planned > rep.row(3).goodput_initial
    assert rep.pairs[0].bound_gap is None


def test_equal_channels_direct_baseline():
    data = {
        "nodes": [{"id": i} for i in (1, 2, 3)],
        "links": [{"from": i, "to": j, "pe": 0.2} for i in (1, 2, 3) for j in (0, 1, 2, 3) if i != j],
        "settings": {"trials": 200},
    }
    rep = run_experiment(scenario_from_dict(data))
    assert rep.pairs == []
    assert all(r.role == "direct" and r.goodput_planned == r.goodput_initial for r in rep.rows)
    assert rep.planned_total == pytest.approx(rep.direct_total)


def test_report_consistency(three_node):
    rep = run_experiment(three_node.with_overrides(trials=200))
    k_in = three_node.k_in
    assert sum(r.goodput_planned for r in rep.rows) == pytest.approx(
        network_objective(rep.plan, three_node.channel, k_in))
    for p in rep.plan.pairs:
        assert check_pair_allocation(p, k_in[p.sender], k_in[p.forwarder], three_node.channel) == []
    for r in rep.rows:
        assert r.goodput_planned >= r.goodput_initial - 1e-9
        if r.goodput_initial > 0:
            assert r.gain_pct == pytest.approx(
                100 * (r.goodput_planned - r.goodput_initial) / r.goodput_initial)


def test_csv_and_json_emission(tmp_path, three_node):
    rep = run_experiment(three_node.with_overrides(trials=200))
    text = emit_report(rep, "csv", tmp_path / "r.csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert (tmp_path / "r.csv").read_text() == text
    doc = json.loads(emit_report(rep, "json", scenario=three_node))
    assert doc["columns"] == list(CSV_COLUMNS)
    assert [r["node_id"] for r in doc["rows"]] == [1, 2, 3]
    assert doc["pairing"][0]["sender"] == 1 and doc["message_count"] == rep.message_count
    assert doc["trace"] == rep.trace and "scenario" in doc
    with pytest.raises(ValueError):
        emit_report(rep, "xml")


def test_direct_only_report(tmp_path):
    data = dict(MINIMAL, settings={"trials": 100})
    data["links"] = MINIMAL["links"]
    rep = run_experiment(scenario_from_dict(data))
    rows = list(csv.DictReader(io.StringIO(emit_report(rep, "csv"))))
    assert all(r["role"] == "direct" for r in rows)
    assert all(r["goodput_planned"] == r["goodput_initial"] for r in rows)
    assert all(r["partner"] == "" for r in rows)


def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "r.json"
    trace = tmp_path / "trace.tsv"
    rc = main(["--three-node", "--trials", "300", "--seed", "4", "-f", "json", "-o", str(out),
               "--trace", str(trace)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 4 and doc["trials"] == 300
    assert trace.read_text().splitlines() == doc["trace"]


def test_cli_stdout_csv(capsys):
    assert main(["--three-node", "--trials", "100"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 4


def test_cli_invalid_scenario_exit_code(tmp_path, capsys):
    data = yaml.safe_load(yaml.safe_dump(MINIMAL))
    data["links"][0]["pe"] = 1.5
    rc = main([str(write(tmp_path, data))])
    assert rc == 2
    assert "(1,0)" in capsys.readouterr().err


def test_cli_requires_scenario(capsys):
    assert main([]) == 2


def test_cli_overrides_and_dump(tmp_path):
    dumped = tmp_path / "eff.yaml"
    rc = main(["--three-node", "--objective", "proportional_fair", "--policy", "FORWARD_ALL",
               "--trials", "50", "--epsilon", "0.1", "--dump-scenario", str(dumped),
               "-o", str(tmp_path / "r.csv")])
    assert rc == 0
    sc = load_scenario(dumped)
    assert (sc.objective, sc.policy.value, sc.trials, sc.epsilon) == (
        "proportional_fair", "FORWARD_ALL", 50, 0.1)


def test_cli_help_documents_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    for token in ("--objective", "--policy", "--trials", "--seed", "--epsilon", "--output",
                  "--format", "10000", "0.5"):
        assert token in text


def test_cli_protocol_fault_exit_code(monkeypatch, capsys):
    from texchange import experiment, protocol

    def broken(*args, **kwargs):
        raise protocol.ProtocolFault("forced")

    monkeypatch.setattr(experiment.protocol, "run_negotiation", broken)
    assert main(["--three-node", "--trials", "10"]) == 3
    assert "protocol fault" in capsys.readouterr().err
