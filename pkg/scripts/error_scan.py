"""E(X; q, a) for square-free q near X^theta; CSV plus a per-theta summary."""
import argparse
import time
from collections import defaultdict

import numpy as np

from gl2dist.experiments import SCAN_COLUMNS, exponent_scan, to_csv
from gl2dist.hecke import build_hecke_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--X", type=int, default=1_000_000)
    ap.add_argument("--theta-min", type=float, default=0.45)
    ap.add_argument("--theta-max", type=float, default=0.53)
    ap.add_argument("--theta-step", type=float, default=0.01)
    ap.add_argument("--samples", type=int, default=3)
    ap.add_argument("--residues", type=int, default=5)
    ap.add_argument("--threads", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="error_scan.csv")
    args = ap.parse_args()

    n = int(round((args.theta_max - args.theta_min) / args.theta_step)) + 1
    thetas = [round(args.theta_min + i * args.theta_step, 10) for i in range(n)]
    t = build_hecke_table(args.X)
    t0 = time.perf_counter()
    scan = exponent_scan(t, args.X, thetas, args.samples, args.residues, args.seed, args.threads)
    with open(args.out, "w") as fh:
        fh.write(to_csv(scan.records, SCAN_COLUMNS))
    by_q = defaultdict(list)
    for r in scan.records:
        by_q[r.q].append(r.normalized)
    print(f"{len(scan.records)} records in {time.perf_counter() - t0:.1f}s -> {args.out}")
    print("q, theta, max |E| q/X, telescoping")
    for q in sorted(by_q):
        print(f"{q:>6} {np.log(q) / np.log(args.X):.4f} {max(by_q[q]):.4e} {scan.telescoping[q]:.1e}")


if __name__ == "__main__":
    main()
