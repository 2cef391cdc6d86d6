"""Run every exact bound suite and print a per-suite summary plus any failures."""

import argparse
from collections import Counter
from fractions import Fraction

from lcsfluct import bounds_lab as bl
from lcsfluct.mc_estimators import breakability_exact


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k-max", type=int, default=12)
    args = ap.parse_args()
    suites = {
        "appendix": bl.appendix_suite(),
        "binomial": bl.binomial_suite(),
        "counting": bl.counting_suite(),
        "slope": bl.slope_lemma_suite(1000, seed=args.seed),
    }
    for name, checks in suites.items():
        tally = Counter(c.holds for c in checks)
        print(f"{name}: {tally[True]} hold, {tally[False]} fail")
        for c in checks:
            if not c.holds:
                print(f"  FAIL {c.name} {c.parameters}: {c.exact_value} vs {c.bound_value}")
    print("k,|V(k)|,sparse complement")
    for k in range(args.k_max + 1):
        print(f"{k},{bl.l1_ball_count(k, 2 * k)},{bl.count_V1pct_complement_closed(k)}")
    print("eps,exact breakability,q(eps)")
    for eps in ("1/10", "3/10", "1/2"):
        e = Fraction(eps)
        print(f"{eps},{float(breakability_exact(e)):.6f},{float(bl.breakability_lower_bound(e)):.6f}")


if __name__ == "__main__":
    main()
