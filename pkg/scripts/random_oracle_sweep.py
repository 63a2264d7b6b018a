"""Compare the verifiers against brute-force policy enumeration on random games."""

import argparse
import collections
import random
import time

from ceverify import oracle
from ceverify.verify import verify_ce, verify_spce


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--max-states", type=int, default=4)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    tally = collections.Counter()
    t0 = time.perf_counter()
    for k in range(args.n):
        g, d = oracle.random_instance(rng, max_states=args.max_states)
        ce, spce = verify_ce(g, d), verify_spce(g, d)
        bce, bspce = oracle.brute_force_ce(g, d), oracle.brute_force_spce(g, d)
        tally[(ce.holds, spce.holds)] += 1
        if ce.holds != bce.holds or spce.holds != bspce.holds:
            tally["mismatch"] += 1
            print("mismatch on instance", k)
    secs = time.perf_counter() - t0
    print(f"{args.n} games in {secs:.1f}s, mismatches: {tally.pop('mismatch', 0)}")
    for (ce, spce), n in sorted(tally.items()):
        print(f"  CE {'holds' if ce else 'fails'}, SPCE {'holds' if spce else 'fails'}: {n}")


if __name__ == "__main__":
    main()
