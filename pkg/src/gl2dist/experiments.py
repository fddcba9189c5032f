"""Measurement harness: bilinear forms against the reference bounds, the
progression error term E(X; q, a), and the exponent case analysis."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arith import as_modulus, is_squarefree, nearest_squarefree
from .errors import NotCoprime, TableTooSmall, ValidationError
from .expsum import PeriodicTable, kl_table
from .hecke import HeckeTable, convolve_unit
from .weights import bump


def theta_from_delta(delta: float) -> float:
    """X = q^{2 - delta} means q = X^theta with theta = 1/(2 - delta)."""
    return 1.0 / (2.0 - delta)


def delta_from_theta(theta: float) -> float:
    return 2.0 - 1.0 / theta


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.15g}"
    return str(x)


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in rows:
        vals = [getattr(r, c) if not isinstance(r, dict) else r[c] for c in columns]
        buf.write(",".join(_fmt(v) for v in vals) + "\n")
    return buf.getvalue()


# --- bilinear forms -----------------------------------------------------------

@dataclass(frozen=True)
class BilinearValue:
    value: complex
    alpha_l1: float
    alpha_l2: float
    beta_l1: float
    beta_l2: float


def bilinear_form(alpha, beta, K: PeriodicTable, l_values=None) -> BilinearValue:
    """B = sum_{m <= M} sum_l alpha_m beta_l K(ml), with alpha indexed from m = 1.

    beta sits on l_values (default 1..len(beta)).  The sum is exact: either
    an outer product, or residue-class buckets when that is smaller.
    """
    alpha = np.asarray(alpha, dtype=np.complex128)
    beta = np.asarray(beta, dtype=np.complex128)
    m = np.arange(1, alpha.size + 1, dtype=np.int64)
    l = np.arange(1, beta.size + 1, dtype=np.int64) if l_values is None else np.asarray(l_values, dtype=np.int64)
    if l.size != beta.size:
        raise ValidationError("beta and l_values differ in length")
    q = K.q
    if alpha.size * beta.size <= q * q:
        val = alpha @ K.values[np.outer(m, l) % q] @ beta
    else:
        A = np.zeros(q, dtype=np.complex128)
        B = np.zeros(q, dtype=np.complex128)
        np.add.at(A, m % q, alpha)
        np.add.at(B, l % q, beta)
        r = np.arange(q)
        val = A @ K.values[np.outer(r, r) % q] @ B
    na = np.abs(alpha)
    nb = np.abs(beta)
    return BilinearValue(complex(val), float(na.sum()), float(np.sqrt((na * na).sum())),
                         float(nb.sum()), float(np.sqrt((nb * nb).sum())))


def lemma_bracket(which: int, M: float, L: float, q: float) -> float:
    """The bracketed three-term sum of the reference bound `which` (1, 2 or 3)."""
    if min(M, L, q) < 1:
        raise ValidationError("M, L, q must be >= 1")
    if which == 1:
        return q ** (-1 / 3) * M ** 0.5 + M ** 0.5 * L ** -0.5 + q ** (1 / 3) * L ** -0.5
    if which == 2:
        # exponent pair (1/2, 1/2)
        return q ** 0.25 * M ** -0.5 + q ** -0.25 + L ** -0.5
    if which == 3:
        return q ** -0.25 + q ** 0.375 * M ** -0.5 + q ** 0.75 / M
    raise ValidationError(f"which must be 1, 2 or 3, got {which}")


def lemma_bound(which: int, M: float, L: float, q: float, norms: tuple[float, float] | None = None) -> float:
    """Reference curve with all q^eps, Q^C factors set to 1.

    1: ML * bracket.  2: |alpha|_2 |beta|_2 (ML)^{1/2} * bracket, with
    unit-normalised norms (M^{1/2}, L^{1/2}) by default.  3: the single-l
    bound M * bracket summed trivially over L values of l.
    """
    br = lemma_bracket(which, M, L, q)
    if which == 1:
        return M * L * br
    if which == 2:
        a2, b2 = norms if norms is not None else (math.sqrt(M), math.sqrt(L))
        return a2 * b2 * math.sqrt(M * L) * br
    return L * M * br


@dataclass(frozen=True)
class BilinearRow:
    q: int
    a: int
    M: float
    L: float
    observed: float
    bound1: float
    bound2: float
    bound3: float
    trivial: float
    ratio: float


BILINEAR_COLUMNS = ["q", "a", "M", "L", "observed", "bound1", "bound2", "bound3", "trivial", "ratio"]


def smoothed_sum(t: HeckeTable, q, a: int, M: float, L: float) -> BilinearValue:
    """S = sum lambda(m) Kl_3(aml; q) V(m) W(l) with bumps on [M, 2M] and [L, 2L]."""
    mod = as_modulus(q)
    if math.gcd(a, mod.q) != 1:
        raise NotCoprime(f"(a, q) = ({a}, {mod.q}) is not coprime")
    m = np.arange(1, int(math.ceil(2 * M)) + 1)
    if m[-1] > t.N:
        raise TableTooSmall(f"needs lambda up to {m[-1]}, table has {t.N}")
    alpha = t.lam[m] * bump(M, 2 * M).eval(m.astype(float))
    l = np.arange(1, int(math.ceil(2 * L)) + 1)
    beta = bump(L, 2 * L).eval(l.astype(float))
    kl3 = kl_table(3, mod)
    Ka = PeriodicTable(mod, kl3.values[(a * np.arange(mod.q)) % mod.q], f"Kl3(a.;{mod.q})")
    return bilinear_form(alpha, beta, Ka, l)


def bilinear_ratio_scan(t: HeckeTable, q, a: int, M_grid, L_grid) -> list[BilinearRow]:
    """Observed |S| and the three reference curves over an (M, L) grid.

    ratio = observed / min(bound1, bound2, bound3); trivial = |alpha|_1 |beta|_1 max|Kl_3|.
    """
    mod = as_modulus(q)
    kmax = float(np.abs(kl_table(3, mod).values).max())
    rows = []
    for M in M_grid:
        for L in L_grid:
            bv = smoothed_sum(t, mod, a, M, L)
            obs = abs(bv.value)
            b1 = lemma_bound(1, M, L, mod.q)
            b2 = lemma_bound(2, M, L, mod.q, (bv.alpha_l2, bv.beta_l2))
            b3 = lemma_bound(3, M, L, mod.q)
            rows.append(BilinearRow(mod.q, a, float(M), float(L), obs, b1, b2, b3,
                                    bv.alpha_l1 * bv.beta_l1 * kmax, obs / min(b1, b2, b3)))
    return rows


# --- error term ---------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    X: int
    q: int
    a: int
    prog_sum: float
    main_term: float
    error_E: float
    normalized: float
    theta: float


SCAN_COLUMNS = ["X", "q", "a", "theta", "prog_sum", "main_term", "error_E", "normalized"]


def _residue_sums(t: HeckeTable, X: int, q: int) -> np.ndarray:
    """sum_{n <= X, n = r (q)} (lambda * 1)(n) for every r, in one pass."""
    X = int(X)
    if X > t.N:
        raise TableTooSmall(f"X = {X} exceeds table size {t.N}")
    conv = convolve_unit(t)
    n = np.arange(1, X + 1)
    return np.bincount(n % q, weights=conv[1:X + 1], minlength=q)


def _records(X: int, q: int, residues, sums: np.ndarray) -> list[ScanRecord]:
    units = np.gcd(np.arange(q), q) == 1
    phi = int(units.sum())
    main = float(sums[units].sum()) / phi
    theta = math.log(q) / math.log(X) if X > 1 else 0.0
    out = []
    for a in residues:
        prog = float(sums[a % q])
        err = prog - main
        out.append(ScanRecord(X, q, int(a), prog, main, err, abs(err) * q / X, theta))
    return out


def error_term(t: HeckeTable, X: int, q, a: int) -> ScanRecord:
    """E(X; q, a) for (lambda * 1) with the 1/phi(q) main term."""
    mod = as_modulus(q)
    if math.gcd(a, mod.q) != 1:
        raise NotCoprime(f"(a, q) = ({a}, {mod.q}) is not coprime")
    return _records(int(X), mod.q, [a], _residue_sums(t, X, mod.q))[0]


def telescoping_residual(t: HeckeTable, X: int, q) -> float:
    """|sum over all units a of E(X; q, a)|, which vanishes identically."""
    mod = as_modulus(q)
    sums = _residue_sums(t, X, mod.q)
    units = [int(u) for u in mod.units()]
    return abs(sum(r.error_E for r in _records(int(X), mod.q, units, sums)))


@dataclass(frozen=True)
class ExponentScan:
    records: list[ScanRecord]
    telescoping: dict[int, float]


def _pick_residues(q: int, count: int, seed: int) -> list[int]:
    units = np.array([u for u in range(q) if math.gcd(u, q) == 1])
    if count >= units.size:
        return [int(u) for u in units]
    rng = np.random.default_rng([seed, q])
    return sorted(int(u) for u in rng.choice(units, size=count, replace=False))


def moduli_for_theta(X: int, theta: float, samples: int = 1) -> list[int]:
    """The `samples` square-free integers nearest X^theta."""
    target = X ** theta
    out = [nearest_squarefree(target)]
    lo, hi = out[0] - 1, out[0] + 1
    while len(out) < samples:
        # alternate outward from the nearest one
        cand = lo if abs(lo - target) <= abs(hi - target) and lo >= 1 else hi
        if cand == lo:
            lo -= 1
        else:
            hi += 1
        if cand >= 1 and is_squarefree(cand):
            out.append(cand)
    return sorted(out)


def exponent_scan(t: HeckeTable, X: int, thetas, samples_per_theta: int = 1, residues_per_q: int = 5,
                  seed: int = 0, threads: int = 1) -> ExponentScan:
    """ScanRecords for square-free q near X^theta, sorted by (theta grid value, q, a).

    Residues are drawn with an RNG seeded by (seed, q), so the output does not
    depend on the thread count.  For each q the telescoping residual over all
    units is recorded as well.
    """
    X = int(X)
    if X > t.N:
        raise TableTooSmall(f"X = {X} exceeds table size {t.N}")
    if residues_per_q < 1 or samples_per_theta < 1:
        raise ValidationError("residues_per_q and samples_per_theta must be >= 1")
    convolve_unit(t)  # build the shared sieve before any threads start
    cells = []
    for th in thetas:
        for q in moduli_for_theta(X, float(th), samples_per_theta):
            cells.append((float(th), q))

    def work(cell):
        th, q = cell
        sums = _residue_sums(t, X, q)
        recs = _records(X, q, _pick_residues(q, residues_per_q, seed), sums)
        units = [u for u in range(q) if math.gcd(u, q) == 1]
        tele = abs(sum(r.error_E for r in _records(X, q, units, sums)))
        return th, q, recs, tele

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(work, cells))
    else:
        results = [work(c) for c in cells]
    results.sort(key=lambda r: (r[0], r[1]))
    records = [rec for _, _, recs, _ in results for rec in recs]
    tele = {q: tl for _, q, _, tl in results}
    return ExponentScan(records, tele)


# --- exponent case analysis -------------------------------------------------------

@dataclass(frozen=True)
class ExponentPoint:
    mu_p: float
    nu_p: float
    delta: float
    eta: float
    kappa: float
    bound1: float = math.nan
    bound2: float = math.nan
    bound3: float = math.nan
    trivial: float = math.nan
    best: float = math.nan
    bound2_full: float = math.nan
    bound3_full: float = math.nan
    reduced: bool = False


def tau_bounds(p: ExponentPoint) -> ExponentPoint:
    """Fill the three exponent bounds, the trivial exponent mu'+nu' and best.

    bound2 and bound3 drop their constant -1/4 branch when mu'+nu'-1/4 < 1;
    the unreduced forms are kept in bound2_full, bound3_full.
    """
    mu, nu = p.mu_p, p.nu_p
    if mu < 0 or nu < 0:
        raise ValidationError("mu', nu' must be nonnegative")
    s = mu + nu
    b1 = s + max(-1 / 3 + mu / 2, mu / 2 - nu / 2, 1 / 3 - nu / 2)
    b2f = s + max(1 / 4 - mu / 2, -1 / 4, -nu / 2)
    b3f = s + max(-1 / 4, 3 / 8 - mu / 2, 3 / 4 - mu)
    reduced = s - 0.25 < 1
    b2 = s + max(1 / 4 - mu / 2, -nu / 2) if reduced else b2f
    b3 = s + max(3 / 8 - mu / 2, 3 / 4 - mu) if reduced else b3f
    best = min(s, b1, b2, b3)
    return ExponentPoint(mu, nu, p.delta, p.eta, p.kappa, b1, b2, b3, s, best, b2f, b3f, reduced)


def covering_case(mu: float, nu: float, delta: float, kappa: float) -> int:
    """First of the three cases whose literal hypotheses hold at (mu', nu'); 0 if none."""
    if mu < 2 / 3 and nu > 2 / 3:
        return 1
    if mu > 0.5 + (2 * delta + kappa) and nu > 2 * (delta + kappa):
        return 2
    if mu > 0.75 and nu <= 2 * (delta + kappa):
        return 3
    return 0


def case3_margin(delta: float, kappa: float) -> float:
    return 1 - 1.5 * (1 / 12 - delta) + kappa


@dataclass
class CaseAnalysis:
    sup_best: float
    argmax: tuple[float, float]
    points: list[ExponentPoint]
    cases: list[int]
    verdicts: list[dict]
    uncovered: int
    uncovered_sup_best: float

    def coverage_csv(self) -> str:
        rows = [{"mu_p": p.mu_p, "nu_p": p.nu_p, "bound1": p.bound1, "bound2": p.bound2,
                 "bound3": p.bound3, "trivial": p.trivial, "best": p.best, "covering_case": c}
                for p, c in zip(self.points, self.cases)]
        return to_csv(rows, COVERAGE_COLUMNS)


COVERAGE_COLUMNS = ["mu_p", "nu_p", "bound1", "bound2", "bound3", "trivial", "best", "covering_case"]


def verify_case_analysis(delta: float, eta: float, kappa: float, grid_step: float = 0.005) -> CaseAnalysis:
    """Grid the feasible region mu' in [0, 2], nu' in [0, 1], mu' + nu' <= 1 + delta + eta.

    Each point gets best = min(trivial, bound1..3) and the case that claims it.
    Per case, the verdict records the largest value of that case's designated
    bound (bound1, reduced bound2, reduced bound3) over its points and whether
    it stays at or below 1 - kappa.  sup_best is reported, never asserted.
    """
    if not 0 < grid_step <= 1e-2:
        raise ValidationError("grid_step must be in (0, 1e-2]")
    if delta < 0 or eta < 0 or kappa < 0:
        raise ValidationError("delta, eta, kappa must be nonnegative")
    cap = 1 + delta + eta
    nmu = int(round(2 / grid_step))
    nnu = int(round(1 / grid_step))
    points, cases = [], []
    for i in range(nmu + 1):
        mu = i * grid_step
        for j in range(nnu + 1):
            nu = j * grid_step
            if mu + nu > cap + 1e-12:
                break
            p = tau_bounds(ExponentPoint(mu, nu, delta, eta, kappa))
            points.append(p)
            cases.append(covering_case(mu, nu, delta, kappa))
    best = np.array([p.best for p in points])
    k = int(np.argmax(best))
    designated = {1: "bound1", 2: "bound2", 3: "bound3"}
    verdicts = []
    for c, attr in designated.items():
        idx = [i for i, cc in enumerate(cases) if cc == c]
        if not idx:
            verdicts.append({"case": c, "points": 0, "max_bound": math.nan, "argmax": None,
                             "holds": None})
            continue
        vals = np.array([getattr(points[i], attr) for i in idx])
        w = idx[int(np.argmax(vals))]
        verdicts.append({"case": c, "points": len(idx), "max_bound": float(vals.max()),
                         "argmax": (points[w].mu_p, points[w].nu_p),
                         "holds": bool(vals.max() <= 1 - kappa)})
    unc = [i for i, cc in enumerate(cases) if cc == 0]
    return CaseAnalysis(float(best[k]), (points[k].mu_p, points[k].nu_p), points, cases, verdicts,
                        len(unc), float(best[unc].max()) if unc else math.nan)


__all__ = [
    "theta_from_delta", "delta_from_theta", "to_csv", "BilinearValue", "bilinear_form", "lemma_bracket",
    "lemma_bound", "BilinearRow", "BILINEAR_COLUMNS", "smoothed_sum", "bilinear_ratio_scan", "ScanRecord",
    "SCAN_COLUMNS", "error_term", "telescoping_residual", "ExponentScan", "moduli_for_theta",
    "exponent_scan", "ExponentPoint", "tau_bounds", "covering_case", "case3_margin", "CaseAnalysis",
    "COVERAGE_COLUMNS", "verify_case_analysis",
]
