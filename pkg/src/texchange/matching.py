"""Pair-gain graph and sender/forwarder selection by weighted matching."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from . import pair_opt
from .model import TOL, ChannelModel, ModelError, NodeConfig, PairAllocation
from .pair_opt import PairProblem

EXACT_LIMIT = 16


@dataclass(frozen=True)
class Edge:
    """Undirected pair ``i < j`` with its best role assignment."""

    i: int
    j: int
    weight: float
    sender: int
    allocation: PairAllocation | None = None

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j)

    @property
    def forwarder(self) -> int:
        return self.j if self.sender == self.i else self.i

    def other(self, v: int) -> int:
        return self.j if v == self.i else self.i


@dataclass
class GainGraph:
    vertices: list[int]
    edges: list[Edge] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            if e.i >= e.j:
                raise ModelError(f"edge ({e.i},{e.j}) must be stored with i < j")
            if e.key in seen:
                raise ModelError(f"duplicate edge {e.key}")
            if e.weight <= 0:
                raise ModelError(f"edge {e.key} has non-positive weight {e.weight}")
            seen.add(e.key)

    def edge_map(self) -> dict[tuple[int, int], Edge]:
        return {e.key: e for e in self.edges}

    def adjacent(self, v: int) -> list[Edge]:
        return [e for e in self.edges if v in (e.i, e.j)]


@dataclass(frozen=True)
class MatchingResult:
    matched: tuple[Edge, ...]
    unmatched: tuple[int, ...]
    total_weight: float

    def pairs(self) -> set[tuple[int, int]]:
        """Matched pairs as ``(sender, forwarder)``."""
        return {(e.sender, e.forwarder) for e in self.matched}

    def keys(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(e.key for e in self.matched))


def edge_order(e: Edge):
    """Strict total order used by every greedy decision: heaviest first."""
    return (-e.weight, e.i, e.j)


def pair_gain(i: NodeConfig, j: NodeConfig, channel: ChannelModel,
              objective: str = "sum", epsilon: float = pair_opt.DEFAULT_EPSILON,
              counter: list | None = None) -> Edge | None:
    """Best orientation of the pair ``{i, j}``, or ``None`` without a positive gain.

    The edge weight is the pair's total goodput gain under the chosen
    objective. Orientations violating degradedness are skipped.
    """
    a, b = (i, j) if i.id < j.id else (j, i)
    best = None
    for s, f in ((a, b), (b, a)):
        if not channel.has_link(s.id, f.id):
            continue
        if channel.pe(s.id, f.id) > channel.direct(s.id):
            continue
        prob = PairProblem.from_channel(s.id, f.id, s.k_in, f.k_in, channel)
        alloc = pair_opt.solve(prob, objective, epsilon, counter)
        if alloc.gain > TOL and (best is None or alloc.gain > best.gain + TOL):
            best = alloc
    if best is None:
        return None
    return Edge(a.id, b.id, best.gain, best.sender, best)


def build_gain_graph(nodes: Iterable[NodeConfig], channel: ChannelModel,
                     objective: str = "sum",
                     epsilon: float = pair_opt.DEFAULT_EPSILON) -> GainGraph:
    nodes = sorted(nodes, key=lambda n: n.id)
    edges = []
    for x in range(len(nodes)):
        for y in range(x + 1, len(nodes)):
            e = pair_gain(nodes[x], nodes[y], channel, objective, epsilon)
            if e is not None:
                edges.append(e)
    return GainGraph([n.id for n in nodes], edges)


def _result(graph: GainGraph, chosen: Iterable[Edge]) -> MatchingResult:
    chosen = tuple(sorted(chosen, key=lambda e: e.key))
    used = {v for e in chosen for v in (e.i, e.j)}
    return MatchingResult(
        matched=chosen,
        unmatched=tuple(v for v in sorted(graph.vertices) if v not in used),
        total_weight=sum(e.weight for e in chosen))


def exact_mwm(graph: GainGraph) -> MatchingResult:
    """Maximum weighted matching by exhaustive enumeration over vertex subsets.

    Among matchings of equal weight (within ``TOL``) the one whose sorted
    edge list is lexicographically smallest wins.
    """
    verts = sorted(graph.vertices)
    n = len(verts)
    if n > EXACT_LIMIT:
        raise ModelError(f"exact matching is limited to {EXACT_LIMIT} vertices, got {n}")
    idx = {v: k for k, v in enumerate(verts)}
    nbrs = [[] for _ in range(n)]
    for e in graph.edges:
        a, b = idx[e.i], idx[e.j]
        nbrs[a].append((b, e))
        nbrs[b].append((a, e))
    for lst in nbrs:
        lst.sort(key=lambda t: t[0])

    memo = {0: (0.0, ())}

    def best(mask):
        if mask in memo:
            return memo[mask]
        low = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << low)
        # option: lowest vertex stays unmatched
        w0, edges0 = best(rest)
        top = (w0, edges0)
        for b, e in nbrs[low]:
            if rest >> b & 1:
                w, es = best(rest & ~(1 << b))
                cand = (w + e.weight, (e,) + es)
                if cand[0] > top[0] + TOL:
                    top = cand
                elif cand[0] >= top[0] - TOL and _lex(cand[1]) < _lex(top[1]):
                    top = cand
        memo[mask] = top
        return top

    _, edges = best((1 << n) - 1)
    return _result(graph, edges)


def _lex(edges):
    return tuple(sorted(e.key for e in edges))


def greedy_mwm(graph: GainGraph) -> MatchingResult:
    """Repeatedly lock the heaviest remaining edge (centralized local greedy)."""
    used = set()
    chosen = []
    for e in sorted(graph.edges, key=edge_order):
        if e.i in used or e.j in used:
            continue
        chosen.append(e)
        used.update((e.i, e.j))
    return _result(graph, chosen)
