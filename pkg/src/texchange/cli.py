"""Command-line entry point: ``texchange SCENARIO [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import emit_report, run_experiment
from .model import ModelError
from .protocol import ProtocolFault
from .scenario import ScenarioError, dump_scenario, three_node_scenario, load_scenario

log = logging.getLogger("texchange")

EXIT_INVALID = 2
EXIT_PROTOCOL = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="texchange",
        description="Negotiate time-exchange cooperation for a TDMA uplink scenario, "
                    "simulate it, and report per-node goodput against direct transmission.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("scenario", nargs="?",
                   help="scenario file (YAML or JSON); omit with --three-node to use the bundled "
                        "three-node scenario")
    p.add_argument("--three-node", action="store_true",
                   help="run the bundled three-node scenario")
    p.add_argument("--objective", choices=["sum", "proportional_fair"], default=None,
                   help="override the scenario objective (scenario default: sum)")
    p.add_argument("--policy", choices=["BUDGETED", "FORWARD_ALL"], default=None,
                   help="override the forwarding policy (scenario default: BUDGETED)")
    p.add_argument("--trials", type=int, default=None,
                   help="Monte Carlo trials (scenario default: 10000)")
    p.add_argument("--seed", type=int, default=None,
                   help="base random seed (scenario default: 1)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="bound-gap tolerance in expected packets (scenario default: 0.5)")
    p.add_argument("-o", "--output", default=None,
                   help="report path; stdout when omitted")
    p.add_argument("-f", "--format", choices=["csv", "json"], default="csv",
                   help="report format")
    p.add_argument("--trace", default=None,
                   help="write the control-plane trace log to this path")
    p.add_argument("--dump-scenario", default=None, metavar="PATH",
                   help="write the effective scenario (after overrides) to PATH")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.three_node:
            sc = three_node_scenario()
        elif args.scenario:
            sc = load_scenario(args.scenario)
        else:
            print("texchange: a scenario path or --three-node is required", file=sys.stderr)
            return EXIT_INVALID
        sc = sc.with_overrides(objective=args.objective, policy=args.policy,
                               trials=args.trials, seed=args.seed, epsilon=args.epsilon)
        if args.dump_scenario:
            dump_scenario(sc, args.dump_scenario)
        report = run_experiment(sc)
    except (ScenarioError, ModelError) as exc:
        print(f"texchange: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ProtocolFault as exc:
        print(f"texchange: protocol fault: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    log.info("pairs=%s messages=%d rounds=%d", [(p.sender, p.forwarder) for p in report.pairs],
             report.message_count, report.rounds)
    text = emit_report(report, args.format, args.output, scenario=sc)
    if args.output is None:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.writelines(line + "\n" for line in report.trace)
    return 0


if __name__ == "__main__":
    sys.exit(main())
