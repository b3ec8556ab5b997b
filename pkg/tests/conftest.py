import random

import numpy as np
import pytest

from texchange.model import ChannelModel, NetworkPlan, NodeConfig
from texchange.pair_opt import PairProblem, solve_proportional_fair, solve_sum
from texchange.scenario import three_node_scenario

THREE_NODE_PE10 = 1 - 18 / 83
THREE_NODE_PE20 = 1 - 20 / 83


@pytest.fixture
def three_node():
    return three_node_scenario()


@pytest.fixture
def three_node_problem():
    return PairProblem(83, 83, THREE_NODE_PE10, 0.0, 0.1, sender=1, forwarder=3)


def random_problem(rng: random.Random, kmax=200):
    pe_s0 = rng.random()
    return PairProblem(rng.randint(0, kmax), rng.randint(0, kmax), pe_s0, rng.random(),
                       pe_s0 * rng.random())


def random_scenario(rng: random.Random, n_max=10, k_max=40, link_prob=0.8):
    n = rng.randint(1, n_max)
    per = {}
    for i in range(1, n + 1):
        per[(i, 0)] = rng.random()
        for j in range(1, n + 1):
            if i != j and rng.random() < link_prob:
                per[(i, j)] = rng.random() * 0.6
    nodes = [NodeConfig(i, rng.randint(0, k_max)) for i in range(1, n + 1)]
    return nodes, ChannelModel(per, tuple(range(1, n + 1)))


def random_plan(rng):
    """Random vertex-disjoint pairing with solved allocations, rest direct."""
    nodes, ch = random_scenario(rng, n_max=10)
    k_in = {n.id: n.k_in for n in nodes}
    ids = [n.id for n in nodes]
    rng.shuffle(ids)
    pairs, direct, used = [], [], set()
    for i in ids:
        if i in used:
            continue
        partners = [j for j in ids if j not in used and j != i and ch.has_link(i, j)
                    and ch.pe(i, j) <= ch.direct(i)]
        if partners and rng.random() < 0.7:
            j = rng.choice(partners)
            prob = PairProblem.from_channel(i, j, k_in[i], k_in[j], ch)
            solver = solve_sum if rng.random() < 0.5 else solve_proportional_fair
            pairs.append(solver(prob))
            used.update((i, j))
        else:
            direct.append(i)
            used.add(i)
    return NetworkPlan(tuple(pairs), tuple(direct)), ch, k_in


def relaxed_lp_oracle(p: PairProblem) -> float:
    """Continuous pair optimum via a generic LP solver (independent of the closed form).

    Variables: k_s, k_f, r_c, r_s. The sender rate is bounded by both cut
    terms, which is the LP form of ``r_s <= min(r_sf, r_s0 + r_c)``.
    """
    from scipy.optimize import linprog
    qs, q0, qf = 1 - p.pe_sf, 1 - p.pe_s0, 1 - p.pe_f0
    # maximize r_s + k_f*qf - r_c
    c = np.array([0.0, -qf, 1.0, -1.0])
    A = [
        [-qs, 0, 0, 1],       # r_s <= k_s qs
        [-q0, 0, -1, 1],      # r_s <= k_s q0 + r_c
        [0, 0, 0, -1],        # r_s >= r_s_in
        [0, -qf, 1, 0],       # k_f qf - r_c >= r_f_in
        [1, 1, 0, 0],         # budget
        [0, -qf, 1, 0],       # r_c <= k_f qf (implied, kept explicit)
    ]
    b = [0, 0, -p.r_s_in, -p.r_f_in, p.total, 0]
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(0, None)] * 4, method="highs")
    assert res.status == 0, res.message
    return -res.fun - p.r_s_in - p.r_f_in


def grid_max(f, lo, hi, steps=2001, zoom=4):
    """Maximize a vectorized function on [lo, hi] by repeated grid refinement.

    ``f`` maps an array of points to values, with ``nan`` marking
    infeasible points. Returns ``(x, value)`` or ``None`` if no grid point
    is feasible.
    """
    best = None
    a, b = lo, hi
    for _ in range(zoom + 1):
        xs = np.linspace(a, b, steps)
        vals = np.asarray(f(xs), dtype=float)
        if np.all(np.isnan(vals)):
            if best is None:
                return None
        else:
            k = int(np.nanargmax(vals))
            if best is None or vals[k] > best[1]:
                best = (float(xs[k]), float(vals[k]))
        width = (b - a) / (steps - 1)
        a, b = max(lo, best[0] - 2 * width), min(hi, best[0] + 2 * width)
    return best


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
