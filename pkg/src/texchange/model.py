"""Domain types and analytic goodput equations for TE cooperation.

Goodputs are expected counts of distinct error-free packets per horizon;
slot counts are integers. Node ``0`` is the base station.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

BS = 0
TOL = 1e-9


class ModelError(ValueError):
    """Raised when an input violates a model precondition."""


def _check_prob(pe: float, what: str = "probability") -> None:
    if not (0.0 <= pe <= 1.0):
        raise ModelError(f"{what} must lie in [0, 1], got {pe!r}")


@dataclass(frozen=True)
class NodeConfig:
    id: int
    k_in: int

    def __post_init__(self):
        if isinstance(self.k_in, bool) or not isinstance(self.k_in, int):
            raise ModelError(f"node {self.id}: k_in must be an integer, got {self.k_in!r}")
        if self.k_in < 0:
            raise ModelError(f"node {self.id}: k_in must be non-negative, got {self.k_in}")
        if self.id == BS:
            raise ModelError("node id 0 is reserved for the base station")


@dataclass(frozen=True)
class ChannelModel:
    """Packet error probabilities over ordered links ``(i, j)``.

    ``j`` may be the base station (``0``). Every node listed in ``nodes``
    must have a direct link to the BS.
    """

    per: Mapping[tuple[int, int], float]
    nodes: tuple[int, ...] = ()

    def __post_init__(self):
        per = {}
        for (i, j), pe in dict(self.per).items():
            i, j = int(i), int(j)
            if i == j:
                raise ModelError(f"self-link ({i},{j}) is not allowed")
            if i == BS:
                raise ModelError(f"link ({i},{j}) originates at the base station")
            _check_prob(float(pe), f"packet error probability of link ({i},{j})")
            per[(i, j)] = float(pe)
        object.__setattr__(self, "per", per)
        nodes = tuple(sorted(set(self.nodes) | {i for i, _ in per}))
        for n in nodes:
            if (n, BS) not in per:
                raise ModelError(f"node {n} has no direct link ({n},0)")
        object.__setattr__(self, "nodes", nodes)

    def pe(self, i: int, j: int) -> float:
        try:
            return self.per[(i, j)]
        except KeyError:
            raise ModelError(f"missing link ({i},{j})") from None

    def has_link(self, i: int, j: int) -> bool:
        return (i, j) in self.per

    def direct(self, i: int) -> float:
        return self.pe(i, BS)

    def neighbors(self, i: int) -> list[int]:
        """Nodes sharing an inter-node link with ``i`` in either direction."""
        out = set()
        for a, b in self.per:
            if b == BS:
                continue
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return sorted(out)


@dataclass(frozen=True)
class PairAllocation:
    sender: int | None
    forwarder: int | None
    k_s_te: int
    k_f_te: int
    r_c: float
    r_sf: float
    r_s0: float
    r_s_te: float
    r_f_te: float
    gain: float


@dataclass(frozen=True)
class NetworkPlan:
    pairs: tuple[PairAllocation, ...] = ()
    direct: tuple[int, ...] = ()
    objective_value: float = 0.0

    def members(self) -> list[int]:
        out = []
        for p in self.pairs:
            out += [p.sender, p.forwarder]
        return out + list(self.direct)


def direct_goodput(k: int, pe: float) -> float:
    """Expected error-free packets from ``k`` direct transmissions."""
    if k < 0:
        raise ModelError(f"slot count must be non-negative, got {k}")
    _check_prob(pe)
    return k * (1.0 - pe)


def te_pair_goodputs(k_s_te, k_f_te, r_c, pe_s0, pe_f0, pe_sf):
    """Analytic goodputs of a sender/forwarder pair for a fixed split.

    Returns ``(r_s_te, r_f_te, r_sf, r_s0)``. The sender is credited with
    the full cut bound ``min(r_sf, r_s0 + r_c)``.
    """
    for pe in (pe_s0, pe_f0, pe_sf):
        _check_prob(pe)
    if k_s_te < 0 or k_f_te < 0:
        raise ModelError("slot counts must be non-negative")
    if pe_sf > pe_s0:
        raise ModelError(
            f"degradedness violated: pe_sf={pe_sf} exceeds pe_s0={pe_s0}")
    cap = k_f_te * (1.0 - pe_f0)
    if r_c < -TOL or r_c > cap + TOL:
        raise ModelError(f"relay budget {r_c} outside [0, {cap}]")
    r_sf = k_s_te * (1.0 - pe_sf)
    r_s0 = k_s_te * (1.0 - pe_s0)
    r_f_te = cap - r_c
    r_s_te = min(r_sf, r_s0 + r_c)
    return r_s_te, r_f_te, r_sf, r_s0


def check_pair_allocation(alloc: PairAllocation, k_s_in: int, k_f_in: int,
                          channel: ChannelModel, tol: float = TOL) -> list[str]:
    """Re-check every pair constraint; returns the list of violations."""
    s, f = alloc.sender, alloc.forwarder
    pe_s0, pe_f0, pe_sf = channel.direct(s), channel.direct(f), channel.pe(s, f)
    problems = []
    for name in ("k_s_te", "k_f_te"):
        v = getattr(alloc, name)
        if not isinstance(v, int) or v < 0:
            problems.append(f"{name}={v!r} is not a non-negative integer")
    if alloc.k_s_te + alloc.k_f_te > k_s_in + k_f_in:
        problems.append("slot budget exceeded")
    if pe_sf > pe_s0:
        problems.append("degradedness violated")
    if alloc.r_s_te < direct_goodput(k_s_in, pe_s0) - tol:
        problems.append("sender below initial goodput")
    if alloc.r_f_te < direct_goodput(k_f_in, pe_f0) - tol:
        problems.append("forwarder below initial goodput")
    if alloc.r_c < -tol or alloc.r_c > alloc.k_f_te * (1 - pe_f0) + tol:
        problems.append("relay budget out of range")
    if abs(alloc.r_sf - alloc.k_s_te * (1 - pe_sf)) > tol:
        problems.append("r_sf inconsistent with k_s_te")
    if abs(alloc.r_s0 - alloc.k_s_te * (1 - pe_s0)) > tol:
        problems.append("r_s0 inconsistent with k_s_te")
    if alloc.r_s_te > min(alloc.r_sf, alloc.r_s0 + alloc.r_c) + tol:
        problems.append("sender goodput exceeds the cut bound")
    if abs(alloc.r_f_te + alloc.r_c - alloc.k_f_te * (1 - pe_f0)) > tol:
        problems.append("forwarder slot accounting mismatch")
    return problems


def validate_plan(plan: NetworkPlan, all_nodes: Iterable[int] | None = None) -> None:
    members = plan.members()
    if len(members) != len(set(members)):
        raise ModelError("a node appears in more than one pair or in both a pair and the direct set")
    if all_nodes is not None and set(members) != set(all_nodes):
        missing = sorted(set(all_nodes) - set(members))
        extra = sorted(set(members) - set(all_nodes))
        raise ModelError(f"plan does not cover the node set (missing={missing}, extra={extra})")


def network_objective(plan: NetworkPlan, channel: ChannelModel,
                      k_in: Mapping[int, int]) -> float:
    """Network sum goodput of ``plan``.

    Direct nodes contribute their initial goodput; paired nodes contribute
    their TE goodputs.
    """
    validate_plan(plan)
    total = 0.0
    for d in plan.direct:
        total += direct_goodput(k_in[d], channel.direct(d))
    for p in plan.pairs:
        total += p.r_s_te + p.r_f_te
    return total


def pair_gain_objective(plan: NetworkPlan, channel: ChannelModel,
                        k_in: Mapping[int, int]) -> float:
    """Sum over pairs of the goodput gain over non-cooperation."""
    validate_plan(plan)
    total = 0.0
    for p in plan.pairs:
        total += (p.r_s_te + p.r_f_te
                  - direct_goodput(k_in[p.sender], channel.direct(p.sender))
                  - direct_goodput(k_in[p.forwarder], channel.direct(p.forwarder)))
    return total


def initial_goodputs(nodes: Iterable[NodeConfig], channel: ChannelModel) -> dict[int, float]:
    return {n.id: direct_goodput(n.k_in, channel.direct(n.id)) for n in nodes}

