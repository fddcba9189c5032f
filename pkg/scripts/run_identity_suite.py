"""Run the identity checks over primes q <= 37 and a few composites; write JSON reports."""
import argparse
import json
import time

from gl2dist.hecke import build_hecke_table
from gl2dist.identities import default_cases, run_suite
from gl2dist.weights import TransformConfig, bump


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-3)
    ap.add_argument("--M", type=float, default=200.0)
    ap.add_argument("--L", type=float, default=50.0)
    ap.add_argument("--N", type=int, default=250_000, help="Hecke table size")
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", default="identity_suite.json")
    args = ap.parse_args()

    t = build_hecke_table(args.N)
    cases = default_cases(M=args.M, L=args.L)
    V, W = bump(args.M, 2 * args.M), bump(args.L, 2 * args.L)
    cases += [(name, q, 2, V, W) for q in (15, 35) for name in ("dual_formula", "decomposition")]
    t0 = time.perf_counter()
    reports = run_suite(t, cases, TransformConfig(rel_tol=args.tol), workers=args.workers)
    with open(args.out, "w") as fh:
        json.dump(reports, fh, indent=1)
    for r in reports:
        flag = " flagged" if r["flagged"] else ""
        print(f"{r['identity']:>14} q={r['q']:<3} a={r['a']:<3} rel={r['rel_residual']:.2e}{flag}")
    print(f"{len(reports)} reports in {time.perf_counter() - t0:.1f}s -> {args.out}")


if __name__ == "__main__":
    main()
