"""Observed |S(M, L)| for the Kl_3 bilinear sum against the three reference curves."""
import argparse

from gl2dist.experiments import BILINEAR_COLUMNS, bilinear_ratio_scan, to_csv
from gl2dist.hecke import build_hecke_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=1009)
    ap.add_argument("--a", type=int, default=2)
    ap.add_argument("--M", default="16,32,64,128,256,512")
    ap.add_argument("--L", default="16,32,64,128,256,512")
    ap.add_argument("--out", default="bilinear.csv")
    args = ap.parse_args()

    Ms = [float(x) for x in args.M.split(",")]
    Ls = [float(x) for x in args.L.split(",")]
    t = build_hecke_table(int(2 * max(Ms)) + 2)
    rows = bilinear_ratio_scan(t, args.q, args.a, Ms, Ls)
    with open(args.out, "w") as fh:
        fh.write(to_csv(rows, BILINEAR_COLUMNS))
    for r in rows:
        print(f"M={r.M:6g} L={r.L:6g} |S|={r.observed:.4e} trivial={r.trivial:.4e} ratio={r.ratio:.3e}")


if __name__ == "__main__":
    main()
