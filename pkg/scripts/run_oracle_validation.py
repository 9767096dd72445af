#!/usr/bin/env python3
"""Cross-check the dual solver against the exhaustive oracle on tiny instances.

Exits nonzero if any solver result falls outside its certified interval or
the feasibility audit fails to reject an over-budget allocation. Equivalent
to `ofdma-relay validate`.
"""
import argparse
import sys

from ofdma_relay.harness import ExperimentSpec, run_validate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--k", type=int, default=4, dest="K")
    parser.add_argument("--users", type=int, default=2, dest="U")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    spec = ExperimentSpec(kind="validate", trials=args.trials, K=args.K,
                          U=args.U, seed=args.seed,
                          protocols=("proposed", "bp1", "bp2"))
    verdict = run_validate(spec)
    print(f"{verdict['trials']} instances, max relative discrepancy "
          f"{verdict['max_relative_discrepancy']:.3e}, "
          f"{'PASS' if verdict['pass'] else 'FAIL'}")
    return 0 if verdict["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
