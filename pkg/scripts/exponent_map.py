"""Coverage maps of the exponent case analysis for several delta values."""
import argparse

from gl2dist.experiments import case3_margin, theta_from_delta, verify_case_analysis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", default="0.0208333333333333,0.0416666666666667,0.0833333333333333,0.166666666666667")
    ap.add_argument("--eta", type=float, default=0.001)
    ap.add_argument("--kappa", type=float, default=0.001)
    ap.add_argument("--step", type=float, default=0.005)
    ap.add_argument("--prefix", default="coverage")
    args = ap.parse_args()

    print("delta, theta, sup_best, argmax, uncovered, uncovered sup, case maxima (holds)")
    for d in (float(x) for x in args.deltas.split(",")):
        ca = verify_case_analysis(d, args.eta, args.kappa, args.step)
        path = f"{args.prefix}_delta{d:.4f}.csv"
        with open(path, "w") as fh:
            fh.write(ca.coverage_csv())
        cases = " ".join(f"{v['case']}:{v['max_bound']:.4f}({v['holds']})" for v in ca.verdicts)
        print(f"{d:.4f} {theta_from_delta(d):.4f} {ca.sup_best:.4f} {ca.argmax} {ca.uncovered} "
              f"{ca.uncovered_sup_best:.4f} {cases} margin3={case3_margin(d, args.kappa):.4f} -> {path}")


if __name__ == "__main__":
    main()
