"""Estimate gamma and Var(L)/n over a grid of text lengths and eps values."""

import argparse

from lcsfluct.mc_estimators import default_workers, estimate_gamma, variance_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="500,1000,2000,4000")
    ap.add_argument("--eps", default="0.05,0.1,0.3,0.5")
    ap.add_argument("--replicas", type=int, default=300)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args()
    ns = [int(s) for s in args.ns.split(",")]
    print("eps,n,gamma,gamma_se,var,var_se,var_over_n,steele_ceiling")
    for eps in (float(s) for s in args.eps.split(",")):
        for rep in variance_scan(ns, eps, args.replicas, args.seed, args.workers):
            g = estimate_gamma(rep.n, eps, args.replicas, args.seed * 1_000_003 + rep.n, args.workers)
            print(f"{eps},{rep.n},{g.estimate:.6f},{g.stderr:.6f},{rep.estimate:.4f},{rep.stderr:.4f},"
                  f"{rep.estimate / rep.n:.6f},{rep.extra['steele_ceiling']:.1f}")


if __name__ == "__main__":
    main()
