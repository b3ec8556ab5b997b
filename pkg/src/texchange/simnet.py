"""Packet-level TDMA data plane for a negotiated plan.

Within one horizon a sender transmits its ``k_s_te`` packets; one uniform
draw per packet decides reception at the forwarder (``u >= pe_sf``) and
at the BS (``u >= pe_s0``), so a BS success always implies the forwarder
holds the packet. The BS acknowledges successes, the forwarder overhears
the ACKs and relays packets the BS is missing before sending its own.

Forwarding policies:

``FORWARD_ALL``
    relay the whole queue (up to ``k_f_te`` slots), then own data.
``BUDGETED``
    relay each queued packet independently with probability
    ``r_c / ((1 - pe_f0) * E[queue])``, so the expected number of relayed
    deliveries equals the plan's relay budget ``r_c``.

Relayed packets are never retried, and ACKs are lossless and use no slots.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import ChannelModel, ModelError, NetworkPlan, PairAllocation, direct_goodput

SLOT_SECONDS = 0.012
HORIZON_SECONDS = 3.0


class Policy(str, enum.Enum):
    FORWARD_ALL = "FORWARD_ALL"
    BUDGETED = "BUDGETED"


@dataclass(frozen=True)
class Schedule:
    """Ordered slot assignments for one horizon.

    Each entry is ``(slot, node, role)`` with role ``OWN`` or ``RELAY``.
    The forwarder's block starts with its nominal relay reservation
    ``round(r_c / (1 - pe_f0))``; how many slots actually carry relayed
    packets varies per trial.
    """

    slots: tuple[tuple[int, int, str], ...]
    slot_seconds: float = SLOT_SECONDS
    horizon_seconds: float = HORIZON_SECONDS

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, node, _ in self.slots:
            out[node] = out.get(node, 0) + 1
        return out


def build_schedule(plan: NetworkPlan, channel: ChannelModel, k_in: dict[int, int],
                   slot_seconds: float = SLOT_SECONDS,
                   horizon_seconds: float = HORIZON_SECONDS) -> Schedule:
    slots = []
    t = 0
    for p in sorted(plan.pairs, key=lambda a: (a.sender, a.forwarder)):
        for _ in range(p.k_s_te):
            slots.append((t, p.sender, "OWN"))
            t += 1
        pe_f0 = channel.direct(p.forwarder)
        relay = 0
        if p.r_c > 0:
            relay = p.k_f_te if pe_f0 >= 1.0 else min(p.k_f_te, int(round(p.r_c / (1.0 - pe_f0))))
        for m in range(p.k_f_te):
            slots.append((t, p.forwarder, "RELAY" if m < relay else "OWN"))
            t += 1
    for d in sorted(plan.direct):
        for _ in range(k_in[d]):
            slots.append((t, d, "OWN"))
            t += 1
    return Schedule(tuple(slots), slot_seconds, horizon_seconds)


@dataclass
class TrialOutcome:
    goodput: dict[int, int]
    relayed: dict[int, int]
    link_losses: dict[tuple[int, int], int]
    transmissions: dict[int, int]
    relay_queue: dict[int, int]
    coupling_violations: int = 0


@dataclass
class SimReport:
    trials: int
    mean: dict[int, float]
    variance: dict[int, float]
    analytic: dict[int, float]
    policy: Policy
    base_seed: int
    mean_relayed: dict[int, float] = field(default_factory=dict)

    def stderr(self, node: int) -> float:
        return float(np.sqrt(self.variance[node] / self.trials))

    def delta(self, node: int) -> float:
        return self.mean[node] - self.analytic[node]


def relay_probability(alloc: PairAllocation, pe_s0: float, pe_f0: float, pe_sf: float) -> float:
    """Per-packet relay probability realizing the budget ``r_c`` in expectation."""
    if alloc.r_c <= 0:
        return 0.0
    expected_queue = alloc.k_s_te * (pe_s0 - pe_sf)
    if pe_f0 >= 1.0 or expected_queue <= 0:
        return 1.0
    return min(1.0, alloc.r_c / ((1.0 - pe_f0) * expected_queue))


def _check_plan(plan, channel):
    members = plan.members()
    if len(members) != len(set(members)):
        raise ModelError("plan has overlapping pairs / direct set")
    for p in plan.pairs:
        if channel.pe(p.sender, p.forwarder) > channel.direct(p.sender):
            raise ModelError(f"pair ({p.sender},{p.forwarder}) violates degradedness")


def _draw(plan, k_in, rng):
    """All uniforms for one trial, in a fixed order."""
    pairs = []
    for p in sorted(plan.pairs, key=lambda a: (a.sender, a.forwarder)):
        pairs.append((rng.random(p.k_s_te), rng.random(p.k_s_te),
                      rng.random(p.k_f_te), rng.random(p.k_f_te)))
    direct = [rng.random(k_in[d]) for d in sorted(plan.direct)]
    return pairs, direct


def _seed_rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def trial_seed(base_seed: int, index: int) -> tuple[int, int]:
    """Distinct per-trial seed derived from the report's base seed."""
    return (int(base_seed), int(index))


def _simulate(plan, channel, k_in, policy, seeds, backend=None):
    """Run trials for the given seeds; returns per-node arrays of counts."""
    kern = backend or kernels
    pairs = sorted(plan.pairs, key=lambda a: (a.sender, a.forwarder))
    directs = sorted(plan.direct)
    draws = [_draw(plan, k_in, _seed_rng(s)) for s in seeds]
    n = len(seeds)
    res = {}
    for idx, p in enumerate(pairs):
        ps0, pf0, psf = channel.direct(p.sender), channel.direct(p.forwarder), channel.pe(p.sender, p.forwarder)
        u_s = np.array([d[0][idx][0] for d in draws]).reshape(n, p.k_s_te)
        u_t = np.array([d[0][idx][1] for d in draws]).reshape(n, p.k_s_te)
        u_r = np.array([d[0][idx][2] for d in draws]).reshape(n, p.k_f_te)
        u_o = np.array([d[0][idx][3] for d in draws]).reshape(n, p.k_f_te)
        rho = relay_probability(p, ps0, pf0, psf)
        res[p] = (kern.pair_batch(u_s, u_t, u_r, u_o, psf, ps0, pf0, rho,
                                  policy is Policy.FORWARD_ALL), ps0, pf0, psf)
    dres = {}
    for idx, d in enumerate(directs):
        u = np.array([dr[1][idx] for dr in draws]).reshape(n, k_in[d])
        dres[d] = (u >= channel.direct(d)).sum(axis=1)
    return pairs, directs, res, dres


def _outcomes(pairs, directs, res, dres, k_in, n):
    out = []
    for t in range(n):
        good, relayed, losses, tx, queue = {}, {}, {}, {}, {}
        viol = 0
        for p in pairs:
            c = res[p][0][t]
            s, f = p.sender, p.forwarder
            good[s] = int(c[0] + c[4])
            good[f] = int(c[5])
            relayed[f] = int(c[4])
            queue[f] = int(c[2])
            losses[(s, f)] = p.k_s_te - int(c[1])
            losses[(s, 0)] = p.k_s_te - int(c[0])
            losses[(f, 0)] = p.k_f_te - int(c[4] + c[5])
            tx[s] = p.k_s_te
            tx[f] = p.k_f_te
            viol += int(c[6])
        for d in directs:
            good[d] = int(dres[d][t])
            losses[(d, 0)] = k_in[d] - good[d]
            tx[d] = k_in[d]
        out.append(TrialOutcome(good, relayed, losses, tx, queue, viol))
    return out


def _k_in(plan, channel, k_in):
    if k_in is None:
        k_in = {}
    missing = [d for d in plan.direct if d not in k_in]
    if missing:
        raise ModelError(f"initial slot counts missing for direct nodes {missing}")
    return k_in


def run_trial(plan: NetworkPlan, channel: ChannelModel, policy: Policy | str = Policy.BUDGETED,
              seed=0, k_in: dict[int, int] | None = None, backend=None) -> TrialOutcome:
    """Simulate one horizon of the plan with a private random stream."""
    policy = Policy(policy)
    _check_plan(plan, channel)
    k_in = _k_in(plan, channel, k_in)
    pairs, directs, res, dres = _simulate(plan, channel, k_in, policy, [seed], backend)
    return _outcomes(pairs, directs, res, dres, k_in, 1)[0]


def analytic_goodputs(plan: NetworkPlan, channel: ChannelModel, k_in: dict[int, int]) -> dict[int, float]:
    out = {}
    for p in plan.pairs:
        out[p.sender] = p.r_s_te
        out[p.forwarder] = p.r_f_te
    for d in plan.direct:
        out[d] = direct_goodput(k_in[d], channel.direct(d))
    return out


def monte_carlo(plan: NetworkPlan, channel: ChannelModel, policy: Policy | str = Policy.BUDGETED,
                trials: int = 1000, base_seed: int = 0, k_in: dict[int, int] | None = None,
                backend=None, chunk: int = 2000) -> SimReport:
    """Aggregate ``trials`` independent horizons; trial ``t`` uses seed ``(base_seed, t)``."""
    if trials < 1:
        raise ModelError(f"trials must be at least 1, got {trials}")
    policy = Policy(policy)
    _check_plan(plan, channel)
    k_in = _k_in(plan, channel, k_in)
    nodes = [q for p in plan.pairs for q in (p.sender, p.forwarder)] + list(plan.direct)
    sums = {v: 0.0 for v in nodes}
    sq = {v: 0.0 for v in nodes}
    rel = {p.forwarder: 0.0 for p in plan.pairs}
    for start in range(0, trials, chunk):
        seeds = [trial_seed(base_seed, t) for t in range(start, min(trials, start + chunk))]
        pairs, directs, res, dres = _simulate(plan, channel, k_in, policy, seeds, backend)
        for p in pairs:
            c = res[p][0].astype(np.float64)
            s_good = c[:, 0] + c[:, 4]
            f_good = c[:, 5]
            sums[p.sender] += s_good.sum()
            sq[p.sender] += (s_good ** 2).sum()
            sums[p.forwarder] += f_good.sum()
            sq[p.forwarder] += (f_good ** 2).sum()
            rel[p.forwarder] += c[:, 4].sum()
        for d in directs:
            g = dres[d].astype(np.float64)
            sums[d] += g.sum()
            sq[d] += (g ** 2).sum()
    mean = {v: sums[v] / trials for v in nodes}
    var = {}
    for v in nodes:
        var[v] = 0.0 if trials < 2 else max(0.0, (sq[v] - trials * mean[v] ** 2) / (trials - 1))
    return SimReport(trials, mean, var, analytic_goodputs(plan, channel, k_in), policy,
                     base_seed, {f: r / trials for f, r in rel.items()})
