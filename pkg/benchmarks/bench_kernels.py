"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from texchange.kernels import available_backends, get_backend
from texchange.model import NetworkPlan
from texchange.pair_opt import PairProblem
from texchange.scenario import three_node_scenario
from texchange.matching import build_gain_graph, greedy_mwm
from texchange.simnet import Policy, monte_carlo


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(kern, plan, channel, k_in):
    p = PairProblem(500, 500, 0.8, 0.05, 0.1)
    args = (p.k_s_in, p.k_f_in, p.pe_s0, p.pe_f0, p.pe_sf, p.r_s_in, p.r_f_in, 1e-9)
    rng = np.random.default_rng(0)
    n, ks, kf = 20000, 20, 146
    u = [rng.random((n, ks)), rng.random((n, ks)), rng.random((n, kf)), rng.random((n, kf))]
    return {
        "scan_sum (T=1000) x200": lambda: [kern.scan_sum(*args) for _ in range(200)],
        "scan_pf (T=1000) x200": lambda: [kern.scan_pf(*args) for _ in range(200)],
        "pair_batch 20k trials": lambda: kern.pair_batch(*u, 0.1, 0.78, 0.0, 0.5, False),
        "monte_carlo three_node 10k": lambda: monte_carlo(plan, channel, Policy.BUDGETED, 10_000,
                                                    1, k_in, backend=kern),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    sc = three_node_scenario()
    e = greedy_mwm(build_gain_graph(sc.nodes, sc.channel)).matched[0]
    plan = NetworkPlan((e.allocation,), (2,))
    names = available_backends()
    results = {b: {k: best_of(f, args.repeat) for k, f in cases(get_backend(b), plan, sc.channel, sc.k_in).items()}
               for b in names}
    print(f"{'kernel':28s}" + "".join(f"{b:>12s}" for b in names) + ("     speedup" if len(names) > 1 else ""))
    for k in results["python"]:
        row = f"{k:28s}" + "".join(f"{results[b][k] * 1e3:10.2f}ms" for b in names)
        if len(names) > 1:
            row += f"{results['python'][k] / results['cython'][k]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
