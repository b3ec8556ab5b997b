"""Event-driven add/drop negotiation for sender/forwarder pairing.

Each node advertises its direct-link error probability and slot count,
computes the pair gain to every neighbour once its table is complete,
and sends ``ADD`` to its heaviest live neighbour. Mutual ``ADD`` forms a
pair; a newly matched node sends ``DROP`` to its remaining live
neighbours, which then re-pick. The outcome equals the centralized
greedy matching under the same edge order.
"""

from __future__ import annotations

import copy
import enum
import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from . import pair_opt
from .matching import Edge, MatchingResult, edge_order, pair_gain
from .model import BS, ChannelModel, NodeConfig


class ProtocolFault(RuntimeError):
    """Negotiation failed to converge within its message bound."""


class Kind(str, enum.Enum):
    ADVERTISE = "ADVERTISE"
    ADD = "ADD"
    DROP = "DROP"


class Status(str, enum.Enum):
    UNMATCHED = "UNMATCHED"
    MATCHED = "MATCHED"
    EXHAUSTED = "EXHAUSTED"


@dataclass(frozen=True)
class ControlMessage:
    kind: Kind
    src: int
    dst: tuple[int, ...]
    payload: tuple = ()

    def digest(self) -> str:
        if not self.payload:
            return "-"
        text = ";".join(repr(x) for x in self.payload)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass
class NeighborEntry:
    pe_ij: float | None
    pe_ji: float | None
    pe_j0: float | None = None
    k_j_in: int | None = None
    edge: Edge | None = None

    @property
    def gain(self) -> float:
        return self.edge.weight if self.edge is not None else 0.0


@dataclass
class NodeState:
    id: int
    k_in: int
    pe_to_bs: float
    neighbor_table: dict[int, NeighborEntry]
    objective: str = "sum"
    epsilon: float = pair_opt.DEFAULT_EPSILON
    candidate: int | None = None
    status: Status = Status.UNMATCHED
    partner: int | None = None
    sender: int | None = None
    live_edges: set[int] = field(default_factory=set)
    dropped: set[int] = field(default_factory=set)
    pending_adds: set[int] = field(default_factory=set)
    heard: set[int] = field(default_factory=set)
    evaluations: int = 0
    inner_solves: int = 0
    anomalies: int = 0

    @property
    def n_neighbors(self) -> int:
        return len(self.neighbor_table)

    @property
    def ready(self) -> bool:
        return self.heard >= set(self.neighbor_table)

    @property
    def terminal(self) -> bool:
        return self.status is not Status.UNMATCHED


def initial_state(node: NodeConfig, channel: ChannelModel, objective: str = "sum",
                  epsilon: float = pair_opt.DEFAULT_EPSILON) -> NodeState:
    # inter-node PERs are read from the channel model instead of measured
    table = {}
    for j in channel.neighbors(node.id):
        table[j] = NeighborEntry(
            pe_ij=channel.per.get((node.id, j)), pe_ji=channel.per.get((j, node.id)))
    return NodeState(node.id, node.k_in, channel.direct(node.id), table,
                     objective=objective, epsilon=epsilon)


def start(state: NodeState) -> tuple[NodeState, list[ControlMessage]]:
    """Step 3: advertise, and settle at once if there is nobody to talk to."""
    state = copy.deepcopy(state)
    out = [ControlMessage(Kind.ADVERTISE, state.id, tuple(sorted(state.neighbor_table)),
                          (state.pe_to_bs, state.k_in))]
    out += _pick(state)
    return state, out


def _edge_for(state: NodeState, j: int) -> Edge | None:
    e = state.neighbor_table[j]
    per = {(state.id, BS): state.pe_to_bs, (j, BS): e.pe_j0}
    if e.pe_ij is not None:
        per[(state.id, j)] = e.pe_ij
    if e.pe_ji is not None:
        per[(j, state.id)] = e.pe_ji
    local = ChannelModel(per)
    counter = [0]
    edge = pair_gain(NodeConfig(state.id, state.k_in), NodeConfig(j, e.k_j_in), local,
                     state.objective, state.epsilon, counter)
    state.evaluations += 1
    state.inner_solves += counter[0]
    return edge


def _best_live(state: NodeState) -> int | None:
    if not state.live_edges:
        return None
    best = min(state.live_edges, key=lambda j: edge_order(state.neighbor_table[j].edge))
    return best


def _match(state: NodeState, j: int) -> list[ControlMessage]:
    state.status = Status.MATCHED
    state.partner = j
    state.sender = state.neighbor_table[j].edge.sender
    others = sorted(state.live_edges - {j})
    state.live_edges = {j}
    state.pending_adds.clear()
    return [ControlMessage(Kind.DROP, state.id, (k,)) for k in others]


def _pick(state: NodeState) -> list[ControlMessage]:
    """Step 5: (re-)select the candidate and request it."""
    if state.status is not Status.UNMATCHED or not state.ready:
        return []
    best = _best_live(state)
    if best is None:
        state.candidate = None
        state.status = Status.EXHAUSTED
        return []
    if best == state.candidate:
        return []
    state.candidate = best
    out = [ControlMessage(Kind.ADD, state.id, (best,))]
    if best in state.pending_adds:
        out += _match(state, best)
    return out


def handle_message(state: NodeState, msg: ControlMessage) -> tuple[NodeState, list[ControlMessage]]:
    """Apply one delivered message; returns the new state and messages to send."""
    state = copy.deepcopy(state)
    j = msg.src
    if j not in state.neighbor_table:
        state.anomalies += 1
        return state, []
    if msg.kind is Kind.ADVERTISE:
        entry = state.neighbor_table[j]
        entry.pe_j0, entry.k_j_in = msg.payload
        state.heard.add(j)
        entry.edge = _edge_for(state, j)
        if entry.edge is not None and j not in state.dropped:
            state.live_edges.add(j)
        return state, _pick(state)
    if state.terminal:
        # matched nodes already dropped everyone else; exhausted nodes have no edges
        return state, []
    if msg.kind is Kind.ADD:
        if j == state.candidate:
            return state, _match(state, j)
        state.pending_adds.add(j)
        return state, []
    if msg.kind is Kind.DROP:
        state.live_edges.discard(j)
        state.pending_adds.discard(j)
        state.dropped.add(j)
        if j == state.candidate:
            state.candidate = None
            return state, _pick(state)
        return state, []
    raise ValueError(f"unknown message kind {msg.kind!r}")  # pragma: no cover


class ControlPlane:
    """Reliable control plane: FIFO per sender, round-robin across senders.

    A broadcast counts as one message but is traced once per recipient.
    """

    def __init__(self):
        self.queues: dict[int, deque] = {}
        self.sent = 0
        self.by_kind = {k: 0 for k in Kind}

    def send(self, msg: ControlMessage) -> None:
        self.queues.setdefault(msg.src, deque()).append(msg)
        self.sent += 1
        self.by_kind[msg.kind] += 1

    def pending(self) -> bool:
        return any(self.queues.values())

    def round(self) -> list[ControlMessage]:
        """Pop the next message of every sender with queued traffic."""
        out = []
        for src in sorted(self.queues):
            q = self.queues[src]
            if q:
                out.append(q.popleft())
        return out


@dataclass
class ConvergenceReport:
    message_count: int
    rounds: int
    pairing: MatchingResult
    trace: list[str]
    states: dict[int, NodeState]
    messages_by_kind: dict[str, int]
    evaluations: int
    inner_solves: int
    anomalies: int

    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace)


def run_negotiation(nodes: Iterable[NodeConfig], channel: ChannelModel,
                    objective: str = "sum", epsilon: float = pair_opt.DEFAULT_EPSILON,
                    bus: ControlPlane | None = None) -> ConvergenceReport:
    nodes = sorted(nodes, key=lambda n: n.id)
    n = len(nodes)
    bus = bus if bus is not None else ControlPlane()
    limit = n * n + n
    states = {}
    for node in nodes:
        states[node.id], out = start(initial_state(node, channel, objective, epsilon))
        for m in out:
            bus.send(m)
    trace = []
    rounds = 0
    while bus.pending():
        rounds += 1
        for msg in bus.round():
            for dst in msg.dst:
                trace.append(f"{len(trace)}\t{msg.kind.value}\t{msg.src}\t{dst}\t{msg.digest()}")
                if dst not in states:
                    continue
                states[dst], out = handle_message(states[dst], msg)
                for m in out:
                    bus.send(m)
        if bus.sent > limit:
            raise ProtocolFault(f"{bus.sent} control messages exceed the bound {limit} for N={n}")
    stuck = sorted(i for i, s in states.items() if not s.terminal)
    if stuck:
        raise ProtocolFault(f"nodes {stuck} did not reach a terminal state")
    matched = {}
    for s in states.values():
        if s.status is Status.MATCHED:
            partner = states[s.partner]
            if partner.status is not Status.MATCHED or partner.partner != s.id:
                raise ProtocolFault(f"node {s.id} matched to {s.partner} one-sidedly")
            e = s.neighbor_table[s.partner].edge
            matched[e.key] = e
    edges = tuple(sorted(matched.values(), key=lambda e: e.key))
    used = {v for e in edges for v in (e.i, e.j)}
    pairing = MatchingResult(edges, tuple(i for i in sorted(states) if i not in used),
                             sum(e.weight for e in edges))
    return ConvergenceReport(
        message_count=bus.sent, rounds=rounds, pairing=pairing, trace=trace, states=states,
        messages_by_kind={k.value: v for k, v in bus.by_kind.items()},
        evaluations=sum(s.evaluations for s in states.values()),
        inner_solves=sum(s.inner_solves for s in states.values()),
        anomalies=sum(s.anomalies for s in states.values()))
