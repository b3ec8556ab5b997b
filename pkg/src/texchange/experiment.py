"""Experiment orchestration: direct baseline vs. negotiated TE plan."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import pair_opt, protocol, simnet
from .model import NetworkPlan, initial_goodputs, network_objective
from .pair_opt import PairProblem
from .scenario import Scenario, scenario_to_dict

CSV_COLUMNS = (
    "node_id", "k_in", "k_te", "role", "partner", "goodput_initial", "goodput_planned",
    "goodput_empirical_mean", "goodput_empirical_stderr", "gain_pct",
)


@dataclass
class NodeRow:
    node_id: int
    k_in: int
    k_te: int
    role: str
    partner: int | None
    goodput_initial: float
    goodput_planned: float
    goodput_empirical_mean: float
    goodput_empirical_stderr: float
    gain_pct: float | None


@dataclass
class PairRow:
    sender: int
    forwarder: int
    k_s_te: int
    k_f_te: int
    r_c: float
    gain: float
    bound_upper: float | None
    bound_lower: float | None
    bound_gap: float | None


@dataclass
class ExperimentReport:
    objective: str
    policy: str
    trials: int
    seed: int
    rows: list[NodeRow]
    pairs: list[PairRow]
    message_count: int
    rounds: int
    trace: list[str] = field(default_factory=list)
    direct_total: float = 0.0
    planned_total: float = 0.0
    empirical_total: float = 0.0
    plan: NetworkPlan | None = field(default=None, repr=False)

    def row(self, node_id: int) -> NodeRow:
        return next(r for r in self.rows if r.node_id == node_id)


def _pct(planned, initial):
    if initial > 0:
        return 100.0 * (planned - initial) / initial
    return None


def run_experiment(scenario: Scenario) -> ExperimentReport:
    sc = scenario
    k_in = sc.k_in
    initial = initial_goodputs(sc.nodes, sc.channel)
    neg = protocol.run_negotiation(sc.nodes, sc.channel, sc.objective, sc.epsilon)

    pairs, pair_rows = [], []
    for e in neg.pairing.matched:
        alloc = e.allocation
        prob = PairProblem.from_channel(alloc.sender, alloc.forwarder, k_in[alloc.sender],
                                        k_in[alloc.forwarder], sc.channel)
        bounds = (None, None, None)
        if sc.objective == "sum":
            b = pair_opt.rounding_lower_bound(prob)
            bounds = (b.upper, b.lower, b.gap)
        pairs.append(alloc)
        pair_rows.append(PairRow(alloc.sender, alloc.forwarder, alloc.k_s_te, alloc.k_f_te,
                                 alloc.r_c, alloc.gain, *bounds))
    plan = NetworkPlan(tuple(pairs), tuple(neg.pairing.unmatched))
    plan = NetworkPlan(plan.pairs, plan.direct, network_objective(plan, sc.channel, k_in))
    sim = simnet.monte_carlo(plan, sc.channel, sc.policy, sc.trials, sc.seed, k_in)

    role, partner, k_te = {}, {}, {}
    for p in pairs:
        role[p.sender], role[p.forwarder] = "sender", "forwarder"
        partner[p.sender], partner[p.forwarder] = p.forwarder, p.sender
        k_te[p.sender], k_te[p.forwarder] = p.k_s_te, p.k_f_te
    rows = []
    for n in sorted(sc.nodes, key=lambda n: n.id):
        planned = sim.analytic[n.id]
        rows.append(NodeRow(
            node_id=n.id, k_in=n.k_in, k_te=k_te.get(n.id, n.k_in),
            role=role.get(n.id, "direct"), partner=partner.get(n.id),
            goodput_initial=initial[n.id], goodput_planned=planned,
            goodput_empirical_mean=float(sim.mean[n.id]),
            goodput_empirical_stderr=sim.stderr(n.id),
            gain_pct=_pct(planned, initial[n.id])))
    return ExperimentReport(
        objective=sc.objective, policy=sc.policy.value, trials=sc.trials, seed=sc.seed,
        rows=rows, pairs=pair_rows, message_count=neg.message_count, rounds=neg.rounds,
        trace=neg.trace, direct_total=sum(initial.values()),
        planned_total=plan.objective_value,
        empirical_total=float(sum(sim.mean.values())), plan=plan)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        text = f"{v:.6f}"
        return text[1:] if text == "-0.000000" else text
    return str(v)


def report_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def report_json(report: ExperimentReport, scenario: Scenario | None = None) -> str:
    doc = {
        "columns": list(CSV_COLUMNS),
        "rows": [asdict(r) for r in report.rows],
        "pairing": [asdict(p) for p in report.pairs],
        "objective": report.objective,
        "policy": report.policy,
        "trials": report.trials,
        "seed": report.seed,
        "message_count": report.message_count,
        "rounds": report.rounds,
        "totals": {
            "direct": report.direct_total,
            "planned": report.planned_total,
            "empirical": report.empirical_total,
        },
        "trace": report.trace,
    }
    if scenario is not None:
        doc["scenario"] = scenario_to_dict(scenario)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_report(report: ExperimentReport, fmt: str = "csv", path=None,
                scenario: Scenario | None = None) -> str:
    """Serialize ``report`` as CSV or JSON; writes to ``path`` when given."""
    fmt = fmt.lower()
    if fmt == "csv":
        text = report_csv(report)
    elif fmt == "json":
        text = report_json(report, scenario)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
