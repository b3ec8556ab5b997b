"""Slot exchange for a fixed sender/forwarder pair.

Three solvers share one problem description:

* ``solve_sum_exhaustive`` scans every integer split of the joint slot
  budget (O(k_s_in + k_f_in) inner solves);
* ``solve_sum`` tries the relaxation bounds first and only falls back to
  the scan when the rounding gap exceeds a tolerance;
* ``solve_proportional_fair`` maximizes the product of the two gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import kernels
from .model import TOL, ModelError, PairAllocation, direct_goodput

DEFAULT_EPSILON = 0.5


@dataclass(frozen=True)
class PairProblem:
    k_s_in: int
    k_f_in: int
    pe_s0: float
    pe_f0: float
    pe_sf: float
    sender: int | None = None
    forwarder: int | None = None
    r_s_in: float = field(init=False)
    r_f_in: float = field(init=False)

    def __post_init__(self):
        for name in ("pe_s0", "pe_f0", "pe_sf"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ModelError(f"{name} must lie in [0, 1], got {v!r}")
        for name in ("k_s_in", "k_f_in"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ModelError(f"{name} must be a non-negative integer, got {v!r}")
        if self.pe_sf > self.pe_s0:
            raise ModelError(
                f"orientation invalid: pe_sf={self.pe_sf} exceeds pe_s0={self.pe_s0}")
        object.__setattr__(self, "r_s_in", direct_goodput(self.k_s_in, self.pe_s0))
        object.__setattr__(self, "r_f_in", direct_goodput(self.k_f_in, self.pe_f0))

    @property
    def total(self) -> int:
        return self.k_s_in + self.k_f_in

    @classmethod
    def from_channel(cls, sender, forwarder, k_s_in, k_f_in, channel):
        return cls(k_s_in, k_f_in, channel.direct(sender), channel.direct(forwarder),
                   channel.pe(sender, forwarder), sender=sender, forwarder=forwarder)


@dataclass(frozen=True)
class BoundResult:
    upper: float
    lower: float
    lower_allocation: PairAllocation | None
    relaxed_k_s: float = math.nan
    relaxed_k_f: float = math.nan

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def inner_solve_sum(k_s_te: int, k_f_te: int, problem: PairProblem):
    """Best relay budget for a fixed split under the sum objective.

    Returns ``(r_c, r_s_te, r_f_te)`` or ``None`` if neither minimum
    goodput can be kept. The smallest sufficient relay budget leaves
    the surplus with the forwarder; the pair sum is the same for any
    larger budget up to ``r_sf - r_s0``.
    """
    if k_s_te + k_f_te > problem.total:
        raise ModelError("split exceeds the joint slot budget")
    r_sf = k_s_te * (1.0 - problem.pe_sf)
    if r_sf < problem.r_s_in - TOL:
        return None
    r_s0 = k_s_te * (1.0 - problem.pe_s0)
    r_c = max(0.0, problem.r_s_in - r_s0)
    r_f = k_f_te * (1.0 - problem.pe_f0) - r_c
    if r_f < problem.r_f_in - TOL:
        return None
    return r_c, min(r_sf, r_s0 + r_c), r_f


def _allocation(problem, k_s_te, k_f_te, r_c) -> PairAllocation:
    r_sf = k_s_te * (1.0 - problem.pe_sf)
    r_s0 = k_s_te * (1.0 - problem.pe_s0)
    r_s = min(r_sf, r_s0 + r_c)
    r_f = k_f_te * (1.0 - problem.pe_f0) - r_c
    return PairAllocation(
        sender=problem.sender, forwarder=problem.forwarder,
        k_s_te=int(k_s_te), k_f_te=int(k_f_te), r_c=r_c, r_sf=r_sf, r_s0=r_s0,
        r_s_te=r_s, r_f_te=r_f, gain=(r_s + r_f) - problem.r_s_in - problem.r_f_in)


def keep_initial(problem: PairProblem) -> PairAllocation:
    return _allocation(problem, problem.k_s_in, problem.k_f_in, 0.0)


def _sum_allocation(problem, k_s_te, k_f_te):
    sol = inner_solve_sum(k_s_te, k_f_te, problem)
    if sol is None:
        return None
    return _allocation(problem, k_s_te, k_f_te, sol[0])


def solve_sum_exhaustive(problem: PairProblem, counter: list | None = None) -> PairAllocation:
    """Integer-optimal sum-goodput split by scanning the whole budget.

    Ties go to the split nearest the initial allotment. ``counter``, when
    given, is a one-element list incremented by the number of inner solves.
    """
    p = problem
    ks, _, n = kernels.scan_sum(p.k_s_in, p.k_f_in, p.pe_s0, p.pe_f0, p.pe_sf,
                                p.r_s_in, p.r_f_in, TOL)
    if counter is not None:
        counter[0] += n
    if ks < 0:
        return keep_initial(p)
    return _sum_allocation(p, ks, p.total - ks)


def _relaxed_feasible(problem, ks, tol=TOL):
    kf = problem.total - ks
    if ks < -tol or kf < -tol:
        return False
    if ks * (1.0 - problem.pe_sf) < problem.r_s_in - tol:
        return False
    r_c = max(0.0, problem.r_s_in - ks * (1.0 - problem.pe_s0))
    return kf * (1.0 - problem.pe_f0) - r_c >= problem.r_f_in - tol


def _relaxed_value(problem, ks):
    kf = problem.total - ks
    r_s = max(problem.r_s_in, ks * (1.0 - problem.pe_s0))
    r_c = max(0.0, problem.r_s_in - ks * (1.0 - problem.pe_s0))
    return r_s + kf * (1.0 - problem.pe_f0) - r_c - problem.r_s_in - problem.r_f_in


def relaxed_optimum(problem: PairProblem) -> tuple[float, float, float]:
    """Optimum of the pair problem with real-valued slot counts.

    The joint budget binds at the optimum, and for a fixed real split the
    pair sum is linear in ``k_s``; the feasible ``k_s`` values form an
    interval whose ends are roots of the constraint pieces. Evaluating
    every candidate root therefore finds the optimum exactly.

    Returns ``(k_s*, k_f*, u0)``.
    """
    p = problem
    T = float(p.total)
    qs, qf, q0 = 1.0 - p.pe_sf, 1.0 - p.pe_f0, 1.0 - p.pe_s0
    cands = {0.0, T, float(p.k_s_in)}
    if qs > 0:
        cands.add(p.r_s_in / qs)
    if q0 > 0:
        cands.add(p.r_s_in / q0)
    if qf > 0:
        cands.add(T - p.r_f_in / qf)
    if qf != q0:
        # forwarder constraint on the piece where relaying is needed
        cands.add((T * qf - p.r_s_in - p.r_f_in) / (qf - q0))
    best = None
    for ks in sorted(cands):
        ks = min(max(ks, 0.0), T)
        if not _relaxed_feasible(p, ks):
            continue
        val = _relaxed_value(p, ks)
        key = (val, -abs(ks - p.k_s_in))
        if best is None or val > best[0] + TOL or (
                abs(val - best[0]) <= TOL and key[1] > best[1]):
            best = (val, key[1], ks)
    if best is None:  # pragma: no cover - keep-initial is always feasible
        return float(p.k_s_in), float(p.k_f_in), 0.0
    ks = best[2]
    return ks, T - ks, max(best[0], 0.0)


def relaxation_upper_bound(problem: PairProblem) -> float:
    return relaxed_optimum(problem)[2]


def rounding_lower_bound(problem: PairProblem) -> BoundResult:
    """Round the relaxed split to integers and re-solve the inner problem.

    Half-integers round ``k_s`` up; if the rounded split overruns the
    budget ``k_f`` is decremented. An infeasible rounded split yields a
    lower bound of 0 with the keep-initial allocation.
    """
    ks_r, kf_r, u0 = relaxed_optimum(problem)
    ks = int(math.floor(ks_r + 0.5))
    kf = int(math.floor(kf_r + 0.5))
    while ks + kf > problem.total:
        kf -= 1
    alloc = _sum_allocation(problem, ks, kf) if kf >= 0 else None
    if alloc is None:
        alloc = keep_initial(problem)
    lower = alloc.gain
    return BoundResult(upper=u0, lower=lower, lower_allocation=alloc,
                       relaxed_k_s=ks_r, relaxed_k_f=kf_r)


def solve_sum(problem: PairProblem, epsilon: float = DEFAULT_EPSILON,
              counter: list | None = None) -> PairAllocation:
    """Sum-goodput split, accepting the rounded solution within ``epsilon``."""
    if epsilon < 0:
        raise ModelError(f"epsilon must be non-negative, got {epsilon}")
    bounds = rounding_lower_bound(problem)
    if bounds.gap <= epsilon:
        return bounds.lower_allocation
    return solve_sum_exhaustive(problem, counter)


def inner_solve_pf(k_s_te: int, k_f_te: int, problem: PairProblem):
    """Product-maximizing relay budget for a fixed split.

    Returns ``(r_c, gain_s, gain_f)`` or ``None`` when the split cannot
    keep both minimum goodputs.
    """
    p = problem
    r_sf = k_s_te * (1.0 - p.pe_sf)
    r_s0 = k_s_te * (1.0 - p.pe_s0)
    cap = k_f_te * (1.0 - p.pe_f0)
    lo = max(0.0, p.r_s_in - r_s0)
    hi = min(cap - p.r_f_in, r_sf - r_s0)
    if lo > hi + TOL:
        return None
    hi = max(hi, lo)
    r_c = min(max(0.5 * (cap - p.r_f_in - r_s0 + p.r_s_in), lo), hi)
    return r_c, min(r_sf, r_s0 + r_c) - p.r_s_in, cap - r_c - p.r_f_in


def solve_proportional_fair(problem: PairProblem, counter: list | None = None) -> PairAllocation:
    """Maximize ``(R_s - R_s_in) * (R_f - R_f_in)`` over integer splits.

    Cooperation requires both gains strictly positive; otherwise the
    pair keeps its initial slots.
    """
    p = problem
    ks, r_c, _, n = kernels.scan_pf(p.k_s_in, p.k_f_in, p.pe_s0, p.pe_f0, p.pe_sf,
                                    p.r_s_in, p.r_f_in, TOL)
    if counter is not None:
        counter[0] += n
    if ks < 0:
        return keep_initial(p)
    return _allocation(p, ks, p.total - ks, r_c)


def solve(problem: PairProblem, objective: str = "sum",
          epsilon: float = DEFAULT_EPSILON, counter: list | None = None) -> PairAllocation:
    if objective == "sum":
        return solve_sum(problem, epsilon, counter)
    if objective == "proportional_fair":
        return solve_proportional_fair(problem, counter)
    raise ValueError(f"unknown objective {objective!r}")
