"""Decay of the Fourier and Bessel transforms against the (1 + tL)^{-E} envelope,
and the derivative scaling of the log-scale partition of unity."""
import argparse

from gl2dist.experiments import to_csv
from gl2dist.weights import bump, decay_profile, fouvry_partition, partition_derivative_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=float, default=100.0)
    ap.add_argument("--M", type=float, default=200.0)
    ap.add_argument("--E", type=int, default=3)
    ap.add_argument("--prefix", default="decay")
    args = ap.parse_args()

    cols = ["t", "abs_transform", "envelope", "ratio"]
    for kind, scale in (("fourier", args.L), ("bessel", args.M)):
        rows = decay_profile(kind, bump(scale, 2 * scale), scale, E=args.E)
        path = f"{args.prefix}_{kind}.csv"
        with open(path, "w") as fh:
            fh.write(to_csv([dict(zip(cols, r)) for r in rows], cols))
        print(f"{kind}: max ratio {max(r[3] for r in rows):.3e}, "
              f"ratio at largest t {rows[-1][3]:.3e} -> {path}")

    print("Delta, v, sup t^v |b^(v)|, (1/log Delta)^v, ratio")
    for Delta in (4.0, 2.0, 1.2, 1.05):
        for v, sup, ref, ratio in partition_derivative_report(fouvry_partition(1e4, Delta), 1e4):
            print(f"{Delta:5.2f} {v} {sup:.4e} {ref:.4e} {ratio:.3f}")


if __name__ == "__main__":
    main()
