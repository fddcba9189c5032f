"""Command-line front end.

Every run writes a `# gl2dist <subcommand> key=value ...` header with the
resolved configuration (CSV outputs) or embeds it in each report (JSON).
Exit status: 0 success, 1 validation or usage error, 2 numerical
non-convergence.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import experiments as ex
from . import identities as idn
from .arith import as_modulus, is_squarefree
from .errors import QuadratureNotConverged, ValidationError
from .expsum import PeriodicTable, hyper_kloosterman_direct, kl_table, write_kl_csv
from .hecke import MAX_N, build_hecke_table, convolve_unit
from .weights import TransformConfig, bump

IDENTITIES = ("poisson_ap", "poisson_twisted", "voronoi", "dual_formula", "decomposition", "suite")


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    return ex._fmt(x)


def _round15(obj):
    if isinstance(obj, float):
        return float(f"{obj:.15g}") if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round15(v) for v in obj]
    return obj


def _header(name: str, config: dict) -> str:
    return "# gl2dist " + name + " " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(config.items())) + "\n"


def _need(cond: bool, flag: str, msg: str) -> None:
    if not cond:
        raise UsageError(f"{flag}: {msg}")


def _modulus(q: int, flag: str = "--q"):
    _need(q >= 1, flag, f"must be >= 1, got {q}")
    _need(is_squarefree(q), flag, f"{q} is not square-free")
    return as_modulus(q)


def _coprime(a: int, q: int) -> None:
    _need(math.gcd(a, q) == 1, "--a", f"{a} is not coprime to q = {q}")


def _threads(value) -> int:
    if value is None:
        value = os.environ.get("GL2DIST_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"--threads: invalid value {value!r}")
    _need(n >= 1, "--threads", "must be >= 1")
    return n


# --- subcommands --------------------------------------------------------------

def cmd_kl(args) -> str:
    _need(args.k >= 2, "--k", "must be >= 2")
    mod = _modulus(args.q)
    v = hyper_kloosterman_direct(args.k, args.n, mod)
    cfg = {"k": args.k, "q": args.q, "n": args.n}
    return _header("kl", cfg) + f"{_fmt(v.real)},{_fmt(v.imag)}\n"


def cmd_kl_table(args) -> str:
    _need(args.k >= 2, "--k", "must be >= 2")
    mod = _modulus(args.q)
    return _header("kl-table", {"k": args.k, "q": args.q}) + write_kl_csv(kl_table(args.k, mod), args.k)


def _table_size(flag_N, need: int) -> int:
    N = need if flag_N is None else flag_N
    _need(1 <= N <= MAX_N, "--N", f"must be in [1, {MAX_N}], got {N}")
    return N


def cmd_tau(args) -> str:
    N = _table_size(args.N, args.N or 0)
    t = build_hecke_table(N)
    lines = ["n,tau,lambda"] + [f"{n},{t.tau[n]},{_fmt(float(t.lam[n]))}" for n in range(1, N + 1)]
    return _header("tau", {"N": N}) + "\n".join(lines) + "\n"


def cmd_conv(args) -> str:
    N = _table_size(args.N, args.N or 0)
    c = convolve_unit(build_hecke_table(N))
    lines = ["n,lambda_conv"] + [f"{n},{_fmt(float(c[n]))}" for n in range(1, N + 1)]
    return _header("conv", {"N": N}) + "\n".join(lines) + "\n"


def _auto_table(q: int, M: float) -> int:
    # dual sums reach roughly x ~ 3e4 / M in Vcheck(n / q^2)
    return min(MAX_N, max(int(4 * M) + 10, math.ceil(3e4 / M) * q * q))


def cmd_check(args) -> str:
    _need(args.identity in IDENTITIES, "--identity", f"must be one of {', '.join(IDENTITIES)}")
    _need(0 < args.tol <= 1e-2, "--tol", "must be in (0, 1e-2]")
    _need(args.M > 1, "--M", "must exceed 1")
    _need(args.L > 1, "--L", "must exceed 1")
    cfg = TransformConfig(rel_tol=args.tol)
    mod = _modulus(args.q)
    V = bump(args.M, 2 * args.M)
    W = bump(args.L, 2 * args.L)
    config = {"identity": args.identity, "q": args.q, "a": args.a, "M": args.M, "L": args.L,
              "tol": args.tol, "kernel": args.kernel, "refine": args.refine}
    if args.identity not in ("poisson_twisted", "suite"):
        _coprime(args.a, args.q)
    if args.identity in ("dual_formula", "decomposition"):
        _need(args.q >= 2, "--q", "dual formula needs q >= 2")
    t = None
    if args.identity in ("voronoi", "dual_formula", "decomposition", "suite"):
        need = _auto_table(37 if args.identity == "suite" else args.q, args.M)
        N = _table_size(args.N, need)
        config["N"] = N
        t = build_hecke_table(N)

    if args.identity == "suite":
        cases = idn.default_cases(M=args.M, L=args.L)
        reports = idn.run_suite(t, cases, cfg, workers=_threads(args.threads))
    else:
        if args.identity == "poisson_ap":
            fn, fargs = idn.poisson_ap_check, (V, mod, args.a, cfg)
        elif args.identity == "poisson_twisted":
            if args.kernel == "one":
                K = PeriodicTable.constant(1.0, mod)
            elif args.kernel == "delta":
                _coprime(args.a, args.q)
                K = PeriodicTable.delta(args.a, mod)
            else:
                K = kl_table(2, mod)
            fn, fargs = idn.poisson_twisted_check, (K, V, cfg)
        elif args.identity == "voronoi":
            fn, fargs = idn.voronoi_check, (t, V, args.a, mod, cfg)
        elif args.identity == "dual_formula":
            fn, fargs = idn.dual_formula_check, (t, V, W, mod, args.a, cfg)
        else:
            fn, fargs = idn.decomposition_check, (t, V, W, mod, args.a, cfg)
        rep = fn(*fargs).to_dict()
        if args.refine:
            r = idn.refine(fn, *fargs)
            rep["refinement"] = {"truncations": r.truncations, "residuals": r.residuals,
                                 "monotone": r.monotone}
        reports = [rep]
    for r in reports:
        r["config"] = dict(config)
    return json.dumps(_round15(reports), indent=1, sort_keys=True) + "\n"


def _float_list(text: str, flag: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}")
    _need(bool(vals) and all(v >= 1 for v in vals), flag, "values must be >= 1")
    return vals


def cmd_bilinear(args) -> str:
    mod = _modulus(args.q)
    _coprime(args.a, args.q)
    Ms = _float_list(args.M, "--M")
    Ls = _float_list(args.L, "--L")
    N = _table_size(args.N, int(2 * max(Ms)) + 2)
    t = build_hecke_table(N)
    rows = ex.bilinear_ratio_scan(t, mod, args.a, Ms, Ls)
    cfg = {"q": args.q, "a": args.a, "M": args.M, "L": args.L, "N": N}
    return _header("bilinear", cfg) + ex.to_csv(rows, ex.BILINEAR_COLUMNS)


def cmd_scan(args) -> str:
    _need(args.X >= 2, "--X", "must be >= 2")
    N = _table_size(args.N, args.X)
    _need(N >= args.X, "--N", "must be >= X")
    if args.q is not None:
        mod = _modulus(args.q)
        cfg = {"X": args.X, "q": args.q, "a": args.a}
        _coprime(args.a, args.q)
        t = build_hecke_table(N)
        rec = ex.error_term(t, args.X, mod, args.a)
        return _header("scan", cfg) + ex.to_csv([rec], ex.SCAN_COLUMNS)
    _need(0 < args.theta_min <= args.theta_max < 1, "--theta-min", "need 0 < theta-min <= theta-max < 1")
    _need(args.theta_step > 0, "--theta-step", "must be positive")
    _need(args.residues >= 1, "--residues", "must be >= 1")
    _need(args.samples >= 1, "--samples", "must be >= 1")
    n = int(math.floor((args.theta_max - args.theta_min) / args.theta_step + 1e-9)) + 1
    thetas = [round(args.theta_min + i * args.theta_step, 12) for i in range(n)]
    t = build_hecke_table(N)
    res = ex.exponent_scan(t, args.X, thetas, args.samples, args.residues, args.seed, _threads(args.threads))
    cfg = {"X": args.X, "theta_min": args.theta_min, "theta_max": args.theta_max,
           "theta_step": args.theta_step, "residues": args.residues, "samples": args.samples,
           "seed": args.seed}
    out = _header("scan", cfg) + ex.to_csv(res.records, ex.SCAN_COLUMNS)
    for q, r in sorted(res.telescoping.items()):
        out += f"# telescoping q={q} residual={_fmt(r)}\n"
    return out


def cmd_exponent(args) -> str:
    _need(args.delta >= 0, "--delta", "must be >= 0")
    _need(args.eta >= 0, "--eta", "must be >= 0")
    _need(args.kappa >= 0, "--kappa", "must be >= 0")
    _need(0 < args.step <= 1e-2, "--step", "must be in (0, 1e-2]")
    ca = ex.verify_case_analysis(args.delta, args.eta, args.kappa, args.step)
    cfg = {"delta": args.delta, "eta": args.eta, "kappa": args.kappa, "step": args.step}
    out = _header("exponent", cfg) + ca.coverage_csv()
    out += f"# sup_best={_fmt(ca.sup_best)} argmax=({_fmt(ca.argmax[0])},{_fmt(ca.argmax[1])})\n"
    out += f"# uncovered_points={ca.uncovered} uncovered_sup_best={_fmt(ca.uncovered_sup_best)}\n"
    for v in ca.verdicts:
        out += (f"# case={v['case']} points={v['points']} max_bound={_fmt(v['max_bound'])} "
                f"holds={v['holds']}\n")
    return out


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gl2dist", description="Hyper-Kloosterman sums, GL(2) coefficients and "
                                             "progression error terms.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(fn=fn)
        s.add_argument("--out", default=None, help="output path (default stdout)")
        return s

    s = add("kl", cmd_kl, "one value of Kl_k(n; q)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--n", type=int, required=True)

    s = add("kl-table", cmd_kl_table, "Kl_k(n; q) for all n mod q")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--q", type=int, required=True)

    s = add("tau", cmd_tau, "tau(n) and lambda(n) for n <= N")
    s.add_argument("--N", type=int, required=True)

    s = add("conv", cmd_conv, "(lambda * 1)(n) for n <= N")
    s.add_argument("--N", type=int, required=True)

    s = add("check", cmd_check, "identity check report (JSON)")
    s.add_argument("--identity", required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--M", type=float, default=200.0)
    s.add_argument("--L", type=float, default=50.0)
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--kernel", choices=("one", "delta", "kl2"), default="kl2")
    s.add_argument("--N", type=int, default=None, help="Hecke table size (default: automatic)")
    s.add_argument("--refine", action="store_true")
    s.add_argument("--threads", default=None)

    s = add("bilinear", cmd_bilinear, "bilinear sums against the reference bounds (CSV)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--M", required=True, help="comma-separated M values")
    s.add_argument("--L", required=True, help="comma-separated L values")
    s.add_argument("--N", type=int, default=None)

    s = add("scan", cmd_scan, "error terms E(X; q, a) (CSV)")
    s.add_argument("--X", type=int, required=True)
    s.add_argument("--q", type=int, default=None, help="single modulus instead of a theta grid")
    s.add_argument("--a", type=int, default=1)
    s.add_argument("--theta-min", type=float, default=0.45)
    s.add_argument("--theta-max", type=float, default=0.53)
    s.add_argument("--theta-step", type=float, default=0.01)
    s.add_argument("--residues", type=int, default=5)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", default=None)
    s.add_argument("--N", type=int, default=None)

    s = add("exponent", cmd_exponent, "exponent case analysis coverage map (CSV)")
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--eta", type=float, default=0.001)
    s.add_argument("--kappa", type=float, default=0.001)
    s.add_argument("--step", type=float, default=0.005)
    return p


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:  # --help
            return int(e.code or 0)
        if args.command is None:
            raise UsageError("a subcommand is required")
        text = args.fn(args)
    except QuadratureNotConverged as e:
        print(f"gl2dist: not converged: {e}", file=stderr)
        return 2
    except ValidationError as e:
        print(f"gl2dist: error: {e}", file=stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
