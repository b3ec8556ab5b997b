"""Scenario files: YAML (or JSON) with ``nodes``, ``links`` and ``settings``.

Example::

    nodes:
      - id: 1            # k_in defaults to horizon / (N * slot), floored
      - {id: 2, k_in: 83}
    links:
      - {from: 1, to: 0, pe: 0.7831}
      - {from: 1, to: 2, pe: 0.1}
    settings:
      horizon: 3.0
      slot: 0.012
      objective: sum          # or proportional_fair
      policy: BUDGETED        # or FORWARD_ALL
      epsilon: 0.5
      trials: 10000
      seed: 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .model import BS, ChannelModel, ModelError, NodeConfig
from .pair_opt import DEFAULT_EPSILON
from .simnet import HORIZON_SECONDS, SLOT_SECONDS, Policy

OBJECTIVES = ("sum", "proportional_fair")


class ScenarioError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class Scenario:
    nodes: tuple[NodeConfig, ...]
    channel: ChannelModel
    horizon: float = HORIZON_SECONDS
    slot: float = SLOT_SECONDS
    objective: str = "sum"
    policy: Policy = Policy.BUDGETED
    epsilon: float = DEFAULT_EPSILON
    trials: int = 10000
    seed: int = 1
    name: str = ""
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def k_in(self) -> dict[int, int]:
        return {n.id: n.k_in for n in self.nodes}

    @property
    def k_tot(self) -> int:
        return sum(n.k_in for n in self.nodes)

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "policy" in kw:
            kw["policy"] = Policy(kw["policy"])
        out = replace(self, **kw)
        _check_settings(out)
        return out


def default_slots(n_nodes: int, horizon: float = HORIZON_SECONDS, slot: float = SLOT_SECONDS) -> int:
    """Equal initial share of the horizon, whole slots only."""
    return int(math.floor(horizon / (n_nodes * slot) + 1e-9))


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check_settings(sc: Scenario) -> None:
    if sc.objective not in OBJECTIVES:
        raise ScenarioError("settings.objective", f"must be one of {OBJECTIVES}, got {sc.objective!r}")
    if not (sc.horizon > 0):
        raise ScenarioError("settings.horizon", f"must be positive, got {sc.horizon!r}")
    if not (sc.slot > 0):
        raise ScenarioError("settings.slot", f"must be positive, got {sc.slot!r}")
    if not _is_int(sc.trials) or sc.trials < 1:
        raise ScenarioError("settings.trials", f"must be a positive integer, got {sc.trials!r}")
    if not _is_int(sc.seed) or sc.seed < 0:
        raise ScenarioError("settings.seed", f"must be a non-negative integer, got {sc.seed!r}")
    if not (sc.epsilon >= 0):
        raise ScenarioError("settings.epsilon", f"must be non-negative, got {sc.epsilon!r}")
    capacity = int(math.floor(sc.horizon / sc.slot + 1e-9))
    if sc.k_tot > capacity:
        raise ScenarioError("nodes", f"total initial slots {sc.k_tot} exceed the horizon's {capacity} slots")


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a mapping with nodes/links/settings")
    unknown = set(data) - {"name", "nodes", "links", "settings", "notes"}
    if unknown:
        raise ScenarioError("<root>", f"unknown keys {sorted(unknown)}")
    settings = data.get("settings") or {}
    if not isinstance(settings, dict):
        raise ScenarioError("settings", "must be a mapping")
    bad = set(settings) - {"horizon", "slot", "objective", "policy", "epsilon", "trials", "seed"}
    if bad:
        raise ScenarioError("settings", f"unknown keys {sorted(bad)}")
    horizon = float(settings.get("horizon", HORIZON_SECONDS))
    slot = float(settings.get("slot", SLOT_SECONDS))

    raw_nodes = data.get("nodes")
    if not raw_nodes:
        raise ScenarioError("nodes", "node list is empty")
    ids = []
    for k, rn in enumerate(raw_nodes):
        if isinstance(rn, dict):
            nid = rn.get("id")
        else:
            nid = rn
        if not _is_int(nid) or nid <= 0:
            raise ScenarioError(f"nodes[{k}].id", f"must be a positive integer, got {nid!r}")
        ids.append(nid)
    if len(set(ids)) != len(ids):
        raise ScenarioError("nodes", f"duplicate node ids in {ids}")
    fallback = default_slots(len(ids), horizon, slot) if horizon > 0 and slot > 0 else 0
    nodes = []
    for k, rn in enumerate(raw_nodes):
        kin = rn.get("k_in", fallback) if isinstance(rn, dict) else fallback
        if not _is_int(kin):
            raise ScenarioError(f"nodes[{k}].k_in", f"node {ids[k]}: slots must be an integer, got {kin!r}")
        if kin < 0:
            raise ScenarioError(f"nodes[{k}].k_in", f"node {ids[k]}: slots must be non-negative, got {kin}")
        nodes.append(NodeConfig(ids[k], kin))

    per = {}
    for k, link in enumerate(data.get("links") or []):
        where = f"links[{k}]"
        if isinstance(link, dict):
            try:
                i, j, pe = link["from"], link["to"], link["pe"]
            except KeyError as exc:
                raise ScenarioError(where, f"missing key {exc.args[0]!r}") from None
        elif isinstance(link, (list, tuple)) and len(link) == 3:
            i, j, pe = link
        else:
            raise ScenarioError(where, "expected {from, to, pe} or [from, to, pe]")
        name = f"{where} ({i},{j})"
        if i not in ids:
            raise ScenarioError(name, f"unknown source node {i!r}")
        if j != BS and j not in ids:
            raise ScenarioError(name, f"unknown destination node {j!r}")
        if i == j:
            raise ScenarioError(name, "self-links are not allowed")
        if isinstance(pe, bool) or not isinstance(pe, (int, float)) or not 0.0 <= pe <= 1.0:
            raise ScenarioError(name, f"packet error probability must lie in [0, 1], got {pe!r}")
        if (i, j) in per:
            raise ScenarioError(name, "duplicate link")
        per[(i, j)] = float(pe)
    for i in ids:
        if (i, BS) not in per:
            raise ScenarioError(f"links ({i},0)", f"node {i} has no direct link to the base station")
    try:
        channel = ChannelModel(per, tuple(ids))
    except ModelError as exc:  # pragma: no cover - checks above are stricter
        raise ScenarioError("links", str(exc)) from None

    try:
        policy = Policy(settings.get("policy", Policy.BUDGETED.value))
    except ValueError:
        raise ScenarioError("settings.policy", f"must be FORWARD_ALL or BUDGETED, got {settings.get('policy')!r}") from None
    sc = Scenario(
        nodes=tuple(nodes), channel=channel, horizon=horizon, slot=slot,
        objective=settings.get("objective", "sum"), policy=policy,
        epsilon=float(settings.get("epsilon", DEFAULT_EPSILON)),
        trials=settings.get("trials", 10000), seed=settings.get("seed", 1),
        name=str(data.get("name", "")), notes=dict(data.get("notes") or {}))
    _check_settings(sc)
    return sc


def scenario_to_dict(sc: Scenario) -> dict:
    out = {
        "nodes": [{"id": n.id, "k_in": n.k_in} for n in sc.nodes],
        "links": [{"from": i, "to": j, "pe": pe} for (i, j), pe in sorted(sc.channel.per.items())],
        "settings": {
            "horizon": sc.horizon, "slot": sc.slot, "objective": sc.objective,
            "policy": sc.policy.value, "epsilon": sc.epsilon, "trials": sc.trials,
            "seed": sc.seed,
        },
    }
    if sc.name:
        out = {"name": sc.name, **out}
    if sc.notes:
        out["notes"] = dict(sc.notes)
    return out


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read scenario: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(str(path), f"parse error: {exc}") from None
    return scenario_from_dict(data)


def dump_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))


def three_node_scenario() -> Scenario:
    """Three-node reproduction scenario shipped with the package."""
    from importlib import resources
    text = resources.files("texchange").joinpath("scenarios/three_node.yaml").read_text()
    return scenario_from_dict(yaml.safe_load(text))
