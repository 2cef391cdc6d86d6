"""Drift of L under a random one-to-zero flip, and slopes of the coupling chain."""

import argparse

from lcsfluct.mc_estimators import default_workers, estimate_drift, slope_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", default="250,500,1000,2000")
    ap.add_argument("--eps", default="0.02,0.05,0.1,0.2")
    ap.add_argument("--replicas", type=int, default=400)
    ap.add_argument("--chains", type=int, default=40)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args()
    print("eps,n,p_plus,p_zero,p_minus,diff,z,mean_min_slope,min_min_slope,gap")
    for eps in (float(s) for s in args.eps.split(",")):
        for n in (int(s) for s in args.ns.split(",")):
            d = estimate_drift(n, eps, args.replicas, args.seed, args.workers)
            s = slope_scan(n, eps, args.chains, args.seed, args.workers)
            print(f"{eps},{n},{d.p_plus:.4f},{d.p_zero:.4f},{d.p_minus:.4f},{d.difference:.4f},"
                  f"{d.z_score:.1f},{s['mean_min_slope']:.4f},{s['min_min_slope']:.4f},{s['gap']}")


if __name__ == "__main__":
    main()
