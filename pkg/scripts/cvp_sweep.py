"""Check the circuit reduction: a circuit is true exactly when the reduced
advice fails the CE check. Exhaustive over small circuits, random beyond."""

import argparse
import random
import time

from ceverify import cvp
from ceverify.verify import verify_ce


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--exhaustive", type=int, default=4, help="all circuits up to this many gates")
    ap.add_argument("--random", type=int, default=500, help="number of random circuits")
    ap.add_argument("--max-gates", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    for n in range(1, args.exhaustive + 1):
        counts = {True: 0, False: 0}
        for c in cvp.all_circuits(n):
            value = cvp.eval_circuit(c)
            g, d = cvp.reduce(c)
            assert verify_ce(g, d).holds is not value, cvp.circuit_to_dict(c)
            counts[value] += 1
        print(f"{n} gates: {counts[True]} true, {counts[False]} false, all agree")
    rng = random.Random(args.seed)
    for _ in range(args.random):
        c = cvp.random_circuit(rng, rng.randint(1, args.max_gates))
        g, d = cvp.reduce(c)
        assert verify_ce(g, d).holds is not cvp.eval_circuit(c), cvp.circuit_to_dict(c)
    print(f"{args.random} random circuits agree; {time.perf_counter() - t0:.1f}s total")


if __name__ == "__main__":
    main()
