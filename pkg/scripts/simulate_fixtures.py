"""Monte-Carlo estimates against exact payoffs for the bundled fixtures."""

import argparse
import math

from ceverify import oracle
from ceverify.chains import payoff_under_advice
from ceverify.fixtures import simulation_fixtures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--horizon", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20241015)
    args = ap.parse_args()

    print(f"{'fixture':40} {'exact':>10} {'estimate':>10} {'z':>7} {'trunc':>9}")
    for name, g, d, p in simulation_fixtures():
        exact = payoff_under_advice(g, d, p, g.initial)
        r = oracle.simulate(g, d, p, g.initial, args.trials, args.horizon, args.seed)
        sigma = math.sqrt(float(exact) * (1 - float(exact)) / args.trials)
        z = (r.estimate - float(exact)) / sigma if sigma else 0.0
        trunc = oracle.truncation_bound(g, d, p, g.initial, args.horizon)
        print(f"{name:40} {float(exact):10.6f} {r.estimate:10.6f} {z:7.2f} {trunc:9.2e}")


if __name__ == "__main__":
    main()
