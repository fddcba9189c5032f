"""Finite-truncation checks of the exact summation identities.

Every check computes both sides independently and returns an IdentityReport.
Dual sums are truncated adaptively: a cut is grown by 1.5x until the terms in
the last geometric bin below the cut (times a safety factor of 10) fall under
rel_tol / 10 of the running total.  A cut that cannot be grown far enough
(table exhausted) is reported with converged=False and flagged=True rather
than raised, so suites never fail silently.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .arith import SquarefreeModulus, as_modulus, inv_mod
from .errors import NotCoprime, TableTooSmall, ValidationError
from .expsum import PeriodicTable, e_q, fourier_periodic, k_tilde, kl_table, kloosterman_matrix
from .hecke import HeckeTable
from .weights import SmoothWeight, TransformConfig, bessel_transform, fourier_weight, transform_cutoff

BIN_RATIO = 1.25
GROWTH = 1.5
TAIL_SAFETY = 10.0


@dataclass
class IdentityReport:
    identity: str
    q: int
    a: int | None
    M: float | None
    L: float | None
    lhs: complex
    rhs: complex
    abs_residual: float
    rel_residual: float
    truncation_used: int
    tail_estimate: float
    flagged: bool = False
    converged: bool = True
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("lhs", "rhs"):
            z = complex(d[key])
            d[key] = [z.real, z.imag]
        d["extras"] = _jsonable(d["extras"])
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def rel_residual(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)


def _report(identity, q, a, M, L, lhs, rhs, trunc, tail, cfg, flagged=False, converged=True,
            extras=None) -> IdentityReport:
    lhs, rhs = complex(lhs), complex(rhs)
    rel = rel_residual(lhs, rhs)
    # no silent failures: anything over tolerance or unconverged carries a flag
    flagged = flagged or not converged or rel > cfg.rel_tol
    return IdentityReport(identity, int(q), a, M, L, lhs, rhs, abs(lhs - rhs), rel, int(trunc),
                          float(tail), bool(flagged), bool(converged), dict(extras or {}))


def _require_coprime(a: int, q: int) -> None:
    if math.gcd(int(a), int(q)) != 1:
        raise NotCoprime(f"(a, q) = ({a}, {q}) is not coprime")


def _abar(a: int, q: int) -> int:
    return 0 if q == 1 else inv_mod(a, q)


def _quad_cfg(cfg: TransformConfig) -> TransformConfig:
    # transforms are resolved well below the identity tolerance
    return replace(cfg, rel_tol=min(1e-10, cfg.rel_tol * 1e-3))


def _support_integers(V: SmoothWeight) -> np.ndarray:
    c1, c2 = V.support
    lo = max(1, math.floor(c1) + 1)
    hi = math.ceil(c2) - 1
    return np.arange(lo, hi + 1, dtype=np.int64)


def _lambda(t: HeckeTable, n: np.ndarray) -> np.ndarray:
    if n.size and int(n.max()) > t.N:
        raise TableTooSmall(f"needs lambda up to {int(n.max())}, table has {t.N}")
    return t.lam[n]


# --- cached transform lattices ---------------------------------------------

_lattice_cache: dict = {}
_CACHE_WEIGHTS = 32


def _weight_store(W: SmoothWeight) -> dict:
    # named weights (bumps, partition pieces) are determined by their parameters
    key = (W.name, W.c1, W.c2, W.Q) if W.name != "weight" else W
    if key not in _lattice_cache and len(_lattice_cache) >= _CACHE_WEIGHTS:
        _lattice_cache.clear()
    return _lattice_cache.setdefault(key, {})


def _vcheck_lattice(V: SmoothWeight, d: int, n_max: int, k: int, qcfg: TransformConfig) -> np.ndarray:
    """Vcheck(n / d^2) for n = 1..n_max, extended incrementally and cached per weight."""
    store = _weight_store(V)
    key = ("bessel", d, k, qcfg)
    have = store.get(key, np.empty(0, dtype=np.complex128))
    if have.size < n_max:
        n = np.arange(have.size + 1, n_max + 1, dtype=np.float64)
        have = np.concatenate([have, bessel_transform(V, n / (d * d), k, qcfg)])
        store[key] = have
    return have[:n_max]


def _fourier_lattice(W: SmoothWeight, q: int, m_max: int, qcfg: TransformConfig) -> np.ndarray:
    """What(m / q) for m = -m_max..m_max (W real, so negative m are conjugates)."""
    store = _weight_store(W)
    key = ("fourier", q, qcfg)
    have = store.get(key, np.empty(0, dtype=np.complex128))
    if have.size < m_max + 1:
        m = np.arange(have.size, m_max + 1, dtype=np.float64)
        have = np.concatenate([have, fourier_weight(W, m / q, qcfg)])
        store[key] = have
    pos = have[:m_max + 1]
    return np.concatenate([np.conj(pos[:0:-1]), pos])


def _initial_cut(transform, start: float, rel_tol: float) -> float:
    return transform_cutoff(transform, start, cut=max(rel_tol * 1e-2, 1e-15))


def _grow(evaluate, cut: float, rel_tol: float, limit: float, fixed: bool):
    """Grow cut until the last-bin tail is negligible.

    evaluate(cut) -> (total, last_bin_abs).  Returns (cut, total, tail, converged).
    """
    while True:
        total, last = evaluate(cut)
        tail = TAIL_SAFETY * last
        if fixed or tail <= 0.1 * rel_tol * abs(total) + 1e-300:
            return cut, total, tail, True
        if cut * GROWTH > limit:
            if cut < limit:
                cut = limit
                continue
            return cut, total, tail, False
        cut *= GROWTH


# --- Poisson ----------------------------------------------------------------

def _poisson_dual(V, q, coeff, cfg, truncation):
    """(1/sqrt q)-free part: sum_{|m| <= m_max} coeff(m mod q) Vhat(m/q)."""
    qcfg = _quad_cfg(cfg)
    width = V.c2 - V.c1
    if truncation is None:
        xi = _initial_cut(lambda t: fourier_weight(V, t, qcfg), 1e-3 / width, cfg.rel_tol)
        cut = max(1, math.ceil(xi * q))
    else:
        cut = int(truncation)

    def evaluate(cut):
        cut = int(math.ceil(cut))
        m = np.arange(-cut, cut + 1)
        terms = coeff[m % q] * _fourier_lattice(V, q, cut, qcfg)
        last = np.abs(terms[np.abs(m) > cut / BIN_RATIO]).sum()
        return terms.sum(), last

    cut, total, tail, conv = _grow(evaluate, cut, cfg.rel_tol, 1e7, truncation is not None)
    cut = int(math.ceil(cut))
    m = np.arange(-cut, cut + 1)
    terms = coeff[m % q] * _fourier_lattice(V, q, cut, qcfg)
    return total, cut, tail, conv, terms, m


def poisson_ap_check(V: SmoothWeight, q, a: int, cfg: TransformConfig | None = None,
                     truncation: int | None = None) -> IdentityReport:
    """sum_{n = a (q)} V(n) against (1/q) sum_{m in Z} e(am/q) Vhat(m/q)."""
    cfg = cfg or TransformConfig()
    mod = as_modulus(q)
    qq = mod.q
    _require_coprime(a, qq)
    if V.c1 < 0:
        raise ValidationError("V must be supported in the positives")
    n = _support_integers(V)
    lhs = V.eval(n[n % qq == a % qq].astype(float)).sum()
    coeff = e_q(a * np.arange(qq), qq)
    total, cut, tail, conv, terms, m = _poisson_dual(V, qq, coeff, cfg, truncation)
    rhs = total / qq
    literal = terms[m >= 1].sum() / qq
    extras = {"literal_rhs_m_ge_1": complex(literal),
              "literal_rel_residual": rel_residual(lhs, literal)}
    return _report("poisson_ap", qq, a, None, None, lhs, rhs, cut, tail / qq, cfg,
                   converged=conv, extras=extras)


def poisson_twisted_check(K: PeriodicTable, V: SmoothWeight, cfg: TransformConfig | None = None,
                          truncation: int | None = None) -> IdentityReport:
    """sum_n K(n) V(n) against q^{-1/2} sum_{m in Z} Khat(m) Vhat(m/q)."""
    cfg = cfg or TransformConfig()
    qq = K.q
    if V.c1 < 0:
        raise ValidationError("V must be supported in the positives")
    n = _support_integers(V)
    lhs = (K.values[n % qq] * V.eval(n.astype(float))).sum()
    khat = fourier_periodic(K).values
    total, cut, tail, conv, _, _ = _poisson_dual(V, qq, khat, cfg, truncation)
    s = math.sqrt(qq)
    return _report("poisson_twisted", qq, None, None, None, lhs, total / s, cut, tail / s, cfg,
                   converged=conv, extras={"label": K.label})


# --- Voronoi ----------------------------------------------------------------

def voronoi_check(t: HeckeTable, V: SmoothWeight, a: int, q, cfg: TransformConfig | None = None,
                  truncation: int | None = None) -> IdentityReport:
    """sum lambda(n) e(an/q) V(n) against (1/q) sum lambda(n) e(-abar n/q) Vcheck(n/q^2).

    The dual phase carries abar with a minus sign; extras record the residual
    of the +abar variant, which gives the complex conjugate instead.
    """
    cfg = cfg or TransformConfig()
    mod = as_modulus(q)
    qq = mod.q
    _require_coprime(a, qq)
    k = t.weight_k
    n = _support_integers(V)
    lhs = (_lambda(t, n) * e_q(a * n, qq) * V.eval(n.astype(float))).sum()
    qcfg = _quad_cfg(cfg)
    abar = _abar(a, qq)
    q2 = qq * qq
    if truncation is None:
        x0 = _initial_cut(lambda x: bessel_transform(V, x, k, qcfg), 1e-3 / V.c2, cfg.rel_tol)
        cut = max(1, math.ceil(x0 * q2))
    else:
        cut = int(truncation)
    if cut > t.N:
        raise TableTooSmall(f"dual sum needs lambda up to {cut}, table has {t.N}")

    def terms_upto(cut):
        m = np.arange(1, int(math.ceil(cut)) + 1)
        return m, _lambda(t, m) * _vcheck_lattice(V, qq, m.size, k, qcfg)

    def evaluate(cut):
        m, base = terms_upto(cut)
        terms = base * e_q(-abar * m, qq)
        return terms.sum(), np.abs(terms[m > cut / BIN_RATIO]).sum()

    cut, total, tail, conv = _grow(evaluate, cut, cfg.rel_tol, t.N, truncation is not None)
    m, base = terms_upto(cut)
    plus = (base * e_q(abar * m, qq)).sum() / qq
    extras = {"plus_abar_rhs": complex(plus), "plus_abar_rel_residual": rel_residual(lhs, plus)}
    return _report("voronoi", qq, a, float(V.c1), None, lhs, total / qq, int(math.ceil(cut)),
                   tail / qq, cfg, converged=conv, extras=extras)


# --- E tilde ----------------------------------------------------------------

def _residue_sums(t: HeckeTable, V: SmoothWeight, W: SmoothWeight, qq: int):
    m = _support_integers(V)
    l = _support_integers(W)
    A = np.bincount(m % qq, weights=_lambda(t, m) * V.eval(m.astype(float)), minlength=qq)
    B = np.bincount(l % qq, weights=W.eval(l.astype(float)), minlength=qq)
    return A, B


def _unit_mask(qq: int) -> np.ndarray:
    return np.gcd(np.arange(qq), qq) == 1


def etilde_parts(t: HeckeTable, V: SmoothWeight, W: SmoothWeight, q, a: int) -> tuple[float, float]:
    """(sum_{ml = a (q)} lambda(m) V(m) W(l), (1/q) sum_{(ml,q)=1} lambda(m) V(m) W(l))."""
    qq = as_modulus(q).q
    _require_coprime(a, qq)
    A, B = _residue_sums(t, V, W, qq)
    units = np.nonzero(_unit_mask(qq))[0]
    first = sum(A[(a * _abar(int(s), qq)) % qq] * B[s] for s in units) if qq > 1 else A[0] * B[0]
    main = A[units].sum() * B[units].sum() / qq
    return float(first), float(main)


def etilde_direct(t: HeckeTable, V: SmoothWeight, W: SmoothWeight, q, a: int) -> complex:
    """E~(V, W; q, a) evaluated exactly from the finite double sum."""
    first, main = etilde_parts(t, V, W, q, a)
    return complex(first - main)


# --- dual formula -------------------------------------------------------------

def dual_kernels(q, a: int) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """For each d | q: G_d[r, s] and R_d[r].

    G_d(r, s) = sum_{y in (Z/q)^x} S(-a ybar, -r; d) e(s y / q)
    R_d(r)    = sum_{b in (Z/q)^x} S(-b, -r; d)
    with S the unnormalised Kloosterman sum modulo d.  At d = q and unit r, s
    one has G_q(r, s) = q Kl_3(a r s; q).
    """
    mod = as_modulus(q)
    qq = mod.q
    units = np.nonzero(_unit_mask(qq))[0]
    ybar = np.array([_abar(int(y), qq) for y in units], dtype=np.int64)
    out = {}
    for d in mod.divisors():
        S = kloosterman_matrix(d) if d > 1 else np.ones((1, 1), dtype=np.complex128)
        r = np.arange(d)
        f = np.zeros((d, qq), dtype=np.complex128)
        f[:, units] = S[(-a * ybar[None, :]) % d, (-r[:, None]) % d]
        G = qq * np.fft.ifft(f, axis=1)
        R = S[(-units[None, :]) % d, (-r[:, None]) % d].sum(axis=1)
        out[d] = (G, R)
    return out


def _ramanujan(qq: int) -> np.ndarray:
    units = np.nonzero(_unit_mask(qq))[0]
    return e_q(np.arange(qq)[:, None] * units[None, :], qq).sum(axis=1)


def _fourier_residue_sums(W: SmoothWeight, qq: int, cfg: TransformConfig):
    """sum_{l = s (q)} What(l/q) over l in Z and over l >= 1, near machine precision."""
    qcfg = _quad_cfg(cfg)
    width = W.c2 - W.c1
    xi = transform_cutoff(lambda x: fourier_weight(W, x, qcfg), 1e-3 / width, cut=1e-14)
    cut = max(qq, math.ceil(xi * qq))
    vals = _fourier_lattice(W, qq, cut, qcfg)
    ell = np.arange(-cut, cut + 1)
    all_s = np.bincount(ell % qq, weights=vals.real, minlength=qq) \
        + 1j * np.bincount(ell % qq, weights=vals.imag, minlength=qq)
    pos = ell >= 1
    pos_s = np.bincount(ell[pos] % qq, weights=vals[pos].real, minlength=qq) \
        + 1j * np.bincount(ell[pos] % qq, weights=vals[pos].imag, minlength=qq)
    return all_s, pos_s, cut


class _DualSum:
    """sum_{d | q} (1/(q^2 d)) sum_{n <= x_cut d^2} lambda(n) Vcheck(n/d^2) H_d(n mod d)."""

    def __init__(self, t, V, kernels, k, qcfg):
        self.t, self.V, self.kernels, self.k, self.qcfg = t, V, kernels, k, qcfg

    def parts(self, x_cut: float, qq: int):
        totals, lasts = {}, {}
        for d, H in self.kernels.items():
            n_max = int(math.floor(x_cut * d * d))
            if n_max < 1:
                totals[d], lasts[d] = 0j, 0.0
                continue
            n = np.arange(1, n_max + 1)
            terms = _lambda(self.t, n) * _vcheck_lattice(self.V, d, n_max, self.k, self.qcfg) * H[n % d]
            terms /= qq * qq * d
            totals[d] = complex(terms.sum())
            lasts[d] = float(np.abs(terms[n > n_max / BIN_RATIO]).sum())
        return totals, lasts


def _dual_setup(t, V, W, q, a, cfg, truncation):
    mod = as_modulus(q)
    qq = mod.q
    if qq < 2:
        raise ValidationError("dual formula needs q >= 2")
    _require_coprime(a, qq)
    k = t.weight_k
    qcfg = _quad_cfg(cfg)
    Wall, Wpos, l_cut = _fourier_residue_sums(W, qq, cfg)
    kern = dual_kernels(mod, a)
    cq = _ramanujan(qq)
    if truncation is None:
        x0 = _initial_cut(lambda x: bessel_transform(V, x, k, qcfg), 1e-3 / V.c2, cfg.rel_tol)
    else:
        x0 = int(truncation) / (qq * qq)
    limit = t.N / (qq * qq)
    if x0 > limit:
        raise TableTooSmall(f"dual sum needs lambda up to {math.ceil(x0 * qq * qq)}, table has {t.N}")
    return mod, qq, k, qcfg, Wall, Wpos, l_cut, kern, cq, x0, limit


def dual_formula_check(t: HeckeTable, V: SmoothWeight, W: SmoothWeight, q, a: int,
                       cfg: TransformConfig | None = None, truncation: int | None = None) -> IdentityReport:
    """E~(V, W; q, a) against its dual bilinear expansion.

    The exact expansion runs the frequency l over all of Z and includes the
    terms with m or l sharing a factor with q.  For composite q every divisor
    d | q contributes a Kloosterman-twisted piece; the d = q piece restricted
    to units is the Kl_3 kernel q^{-2} sum Kl_3(aml) lambda(m) Vcheck(m/q^2) What(l/q).
    extras carry that kernel part, the version with l >= 1 only, and each
    divisor's contribution.
    """
    cfg = cfg or TransformConfig()
    mod, qq, k, qcfg, Wall, Wpos, l_cut, kern, cq, x0, limit = _dual_setup(t, V, W, q, a, cfg, truncation)
    lhs = etilde_direct(t, V, W, mod, a)

    H = {d: G @ Wall - R * (cq @ Wall) / qq for d, (G, R) in kern.items()}
    Hmain = {d: R * (cq @ Wall) / qq for d, (G, R) in kern.items()}
    engine = _DualSum(t, V, H, k, qcfg)

    def evaluate(x):
        totals, lasts = engine.parts(x, qq)
        return sum(totals.values()), sum(lasts.values())

    x_cut, total, tail, conv = _grow(evaluate, x0, cfg.rel_tol, limit, truncation is not None)
    totals, _ = engine.parts(x_cut, qq)
    main_parts, _ = _DualSum(t, V, Hmain, k, qcfg).parts(x_cut, qq)
    n_max = int(math.floor(x_cut * qq * qq))

    # Kl_3 kernel on units: l over Z, and the l >= 1 display
    kl3 = kl_table(3, mod).values
    r = np.arange(qq)
    P_all = kl3[(a * r[:, None] * r[None, :]) % qq] @ Wall
    P_pos = kl3[(a * r[:, None] * r[None, :]) % qq] @ Wpos
    n = np.arange(1, n_max + 1)
    base = _lambda(t, n) * _vcheck_lattice(V, qq, n_max, k, qcfg)
    kl3_part = (base * P_all[n % qq]).sum() / (qq * qq)
    literal = (base * P_pos[n % qq]).sum() / (qq * qq)

    extras = {
        "kl3_part": complex(kl3_part),
        "literal_l_ge_1": complex(literal),
        "literal_rel_residual": rel_residual(lhs, literal),
        "kl3_part_rel_residual": rel_residual(lhs, kl3_part),
        "degenerate_part": complex(totals[qq] - kl3_part),
        "divisor_parts": {d: complex(v) for d, v in totals.items()},
        "main_parts": {d: complex(v) for d, v in main_parts.items()},
        "x_cut": float(x_cut),
        "l_cut": int(l_cut),
    }
    composite = not mod.is_prime()
    if composite:
        extras["note"] = "composite modulus: divisor terms d | q, 1 < d < q, contribute"
    return _report("dual_formula", qq, a, float(V.c1), float(W.c1), lhs, total, n_max, tail, cfg,
                   flagged=composite, converged=conv, extras=extras)


def decomposition_check(t: HeckeTable, V: SmoothWeight, W: SmoothWeight, q, a: int,
                        cfg: TransformConfig | None = None, truncation: int | None = None) -> IdentityReport:
    """sum K(ml) lambda(m) V(m) W(l) for K = delta_a against (1/q)(T1 - T2) + q^{-3/2} T3.

    T1 = sum lambda(m)V(m) sum W(l), T2 = sum lambda(m)V(m) sum W(ql), and
    T3 = sum_{m >= 1, l in Z} Ktilde(m, l) lambda(m) Vcheck(m/q^2) What(l/q),
    where Ktilde is k_tilde(delta_a, ml) on units and is extended to the
    remaining residues by the exact Kloosterman kernel.  The alternative
    reading with V in place of W in T1, T2 is evaluated too and reported.
    For composite q the decomposition omits the proper divisor terms and the
    report is flagged.
    """
    cfg = cfg or TransformConfig()
    mod, qq, k, qcfg, Wall, Wpos, l_cut, kern, cq, x0, limit = _dual_setup(t, V, W, q, a, cfg, truncation)
    first, _ = etilde_parts(t, V, W, mod, a)
    lhs = first

    m = _support_integers(V)
    lv = _lambda(t, m) * V.eval(m.astype(float))
    S_lv = lv.sum()
    l = _support_integers(W)
    wl = W.eval(l.astype(float))
    T1 = S_lv * wl.sum()
    T2 = S_lv * W.eval(qq * np.arange(1, int(W.c2 // qq) + 1, dtype=float)).sum()
    T1_v = S_lv * V.eval(m.astype(float)).sum()
    T2_v = S_lv * V.eval(qq * np.arange(1, int(V.c2 // qq) + 1, dtype=float)).sum()

    G, _ = kern[qq]
    Kt = G / qq ** 1.5
    r = np.arange(qq)
    unit = _unit_mask(qq)
    ur = r[unit]
    Kt[np.ix_(unit, unit)] = k_tilde(PeriodicTable.delta(a, mod), ur[:, None] * ur[None, :])
    H3 = Kt @ Wall
    engine = _DualSum(t, V, {qq: H3 * qq * qq * qq}, k, qcfg)  # undo the 1/(q^2 d) scaling

    def t3(x):
        totals, lasts = engine.parts(x, qq)
        return totals[qq], lasts[qq]

    def evaluate(x):
        T3, last = t3(x)
        return T1 / qq - T2 / qq + T3 / qq ** 1.5, last / qq ** 1.5

    x_cut, total, tail, conv = _grow(evaluate, x0, cfg.rel_tol, limit, truncation is not None)
    T3, _ = t3(x_cut)
    rhs = total
    rhs_v = (T1_v - T2_v) / qq + T3 / qq ** 1.5

    # T3 restricted to the displayed range m, l >= 1 on units only
    Kt_units = np.where(unit[:, None] & unit[None, :], Kt, 0)
    lit = _DualSum(t, V, {qq: (Kt_units @ Wpos) * qq ** 3}, k, qcfg).parts(x_cut, qq)[0][qq]
    rhs_lit = (T1 - T2) / qq + lit / qq ** 1.5

    w_res, v_res = rel_residual(lhs, rhs), rel_residual(lhs, rhs_v)
    extras = {
        "T1": float(T1), "T2": float(T2), "T3": complex(T3),
        "t3_term": complex(T3 / qq ** 1.5),
        "v_reading_rhs": complex(rhs_v),
        "v_reading_rel_residual": v_res,
        "matching_reading": "W" if w_res <= v_res else "V",
        "literal_rhs": complex(rhs_lit),
        "literal_rel_residual": rel_residual(lhs, rhs_lit),
        "x_cut": float(x_cut),
    }
    composite = not mod.is_prime()
    if composite:
        extras["note"] = "composite modulus: the l | q versus (l, q) = 1 split misses proper divisors"
    return _report("decomposition", qq, a, float(V.c1), float(W.c1), lhs, rhs,
                   int(math.floor(x_cut * qq * qq)), tail, cfg, flagged=composite, converged=conv,
                   extras=extras)


# --- refinement and suites ---------------------------------------------------

@dataclass
class Refinement:
    truncations: list[int]
    residuals: list[float]
    monotone: bool


def refine(check, *args, factors=(0.5, 1.0, 2.0, 4.0), floor: float = 1e-9, **kwargs) -> Refinement:
    """Rerun check at multiples of its own adaptive truncation.

    Residuals must be nonincreasing up to an absolute noise floor.
    """
    base = check(*args, **kwargs)
    truncs = [max(1, int(round(f * base.truncation_used))) for f in factors]
    res = [check(*args, truncation=n, **kwargs).rel_residual for n in truncs]
    mono = all(b <= a + floor for a, b in zip(res, res[1:]))
    return Refinement(truncs, res, mono)


def run_suite(t: HeckeTable, cases, cfg: TransformConfig | None = None, workers: int = 1) -> list[dict]:
    """Run identity checks for (identity, q, a, V, W) cases; reports sorted by (q, a, identity)."""
    from concurrent.futures import ThreadPoolExecutor

    cfg = cfg or TransformConfig()

    def one(case):
        name, q, a, V, W = case
        if name == "poisson_ap":
            return poisson_ap_check(V, q, a, cfg)
        if name == "voronoi":
            return voronoi_check(t, V, a, q, cfg)
        if name == "dual_formula":
            return dual_formula_check(t, V, W, q, a, cfg)
        if name == "decomposition":
            return decomposition_check(t, V, W, q, a, cfg)
        raise ValidationError(f"unknown identity {name!r}")

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            reports = list(ex.map(one, cases))
    else:
        reports = [one(c) for c in cases]
    reports.sort(key=lambda r: (r.q, r.a if r.a is not None else -1, r.identity))
    return [r.to_dict() for r in reports]


def default_cases(primes=(2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37), M: float = 200.0,
                  L: float = 50.0, identities=("poisson_ap", "voronoi", "dual_formula")):
    from .weights import bump

    V = bump(M, 2 * M)
    W = bump(L, 2 * L)
    cases = []
    for q in primes:
        a = 2 if q > 2 else 1
        for name in identities:
            cases.append((name, q, a, V, W))
    return cases


__all__ = [
    "IdentityReport", "rel_residual", "poisson_ap_check", "poisson_twisted_check", "voronoi_check",
    "etilde_parts", "etilde_direct", "dual_kernels", "dual_formula_check", "decomposition_check",
    "Refinement", "refine", "run_suite", "default_cases", "SquarefreeModulus",
]
