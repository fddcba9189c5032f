"""Complete exponential sums modulo a square-free integer.

Classical Kloosterman sums, normalized hyper-Kloosterman sums Kl_k(n; q)
(direct enumeration, all-residue tables and the CRT factorization), the
normalized periodic Fourier transform, and the transformed kernel used in
the bilinear decomposition.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import SquarefreeModulus, as_modulus, mult_functions, squarefree_up_to

PARSEVAL_RTOL = 1e-9
COMPENSATED_ABOVE_Q = 10_000


def e_q(x, q: int = 1):
    """exp(2 pi i (x mod q) / q); works elementwise on integer arrays."""
    q = int(q)
    out = _roots_of_unity(q)[np.mod(x, q)]
    return complex(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=512)
def _roots_of_unity(q: int) -> np.ndarray:
    r = np.exp(2j * np.pi * np.arange(q) / q)
    r.setflags(write=False)
    return r


@lru_cache(maxsize=256)
def _units_and_inverses(q: int) -> tuple[np.ndarray, np.ndarray]:
    if q == 1:
        return np.array([0]), np.array([0])
    r = np.arange(q)
    units = r[np.gcd(r, q) == 1]
    inv = np.array([pow(int(u), -1, q) for u in units])
    return units, inv


@lru_cache(maxsize=256)
def _inverse_lookup(q: int) -> np.ndarray:
    """inv[n] = n^{-1} mod q for units, -1 elsewhere."""
    out = -np.ones(q, dtype=np.int64)
    units, inv = _units_and_inverses(q)
    out[units] = inv
    return out


@dataclass(frozen=True)
class PeriodicTable:
    """A q-periodic complex function stored as its values on 0..q-1."""

    modulus: SquarefreeModulus
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.modulus.q,):
            raise ValueError(f"expected {self.modulus.q} values, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def q(self) -> int:
        return self.modulus.q

    def __call__(self, n):
        return self.values[np.mod(n, self.q)]

    def __len__(self):
        return self.q

    @classmethod
    def delta(cls, a: int, q) -> "PeriodicTable":
        mod = as_modulus(q)
        v = np.zeros(mod.q, dtype=np.complex128)
        v[a % mod.q] = 1.0
        return cls(mod, v, f"delta_{a % mod.q}")

    @classmethod
    def constant(cls, c: complex, q) -> "PeriodicTable":
        mod = as_modulus(q)
        return cls(mod, np.full(mod.q, c, dtype=np.complex128), "constant")


def kloosterman(a: int, b: int, q) -> complex:
    """S(a, b; q) = sum over units x of e((a x + b x^{-1}) / q), unnormalized."""
    mod = as_modulus(q)
    units, inv = _units_and_inverses(mod.q)
    return complex(np.sum(e_q(a * units + b * inv, mod.q)))


def kloosterman_matrix(q) -> np.ndarray:
    """All S(a, b; q) as a q x q array indexed [a, b], via one FFT per row."""
    mod = as_modulus(q)
    qq = mod.q
    units, inv = _units_and_inverses(qq)
    f = np.zeros((qq, qq), dtype=np.complex128)  # f[b, x] = 1_unit(x) e(b xbar / q)
    b = np.arange(qq)[:, None]
    f[:, units] = e_q(b * inv[None, :], qq)
    s = qq * np.fft.ifft(f, axis=1)  # s[b, a] = sum_x f[b, x] e(a x / q)
    return s.T


def weil_ratio(q) -> float:
    """max over (a, b) of |S(a,b;q)| / (d(q) gcd(a,b,q)^{1/2} q^{1/2})."""
    mod = as_modulus(q)
    qq = mod.q
    s = np.abs(kloosterman_matrix(mod))
    a = np.arange(qq)
    g = np.gcd(np.gcd(a[:, None], a[None, :]), qq)
    bound = mult_functions(qq).d * np.sqrt(g) * math.sqrt(qq)
    return float(np.max(s / bound))


def hyper_kloosterman_direct(k: int, n: int, q) -> complex:
    """Normalized Kl_k(n; q) by enumerating all (k-1)-tuples of units."""
    if k < 2:
        raise ValueError("k must be >= 2")
    mod = as_modulus(q)
    qq = mod.q
    if math.gcd(int(n), qq) != 1:
        return 0j
    s, pinv = _unit_tuples(k, qq)
    last = (int(n) * pinv) % qq
    total = np.sum(e_q(s + last, qq))
    return complex(total) / qq ** ((k - 1) / 2)


@lru_cache(maxsize=32)
def _unit_tuples(k: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Sums and inverse products of all (k-1)-tuples of units mod q."""
    units, _ = _units_and_inverses(q)
    inv = _inverse_lookup(q) if q > 1 else np.array([0])
    s = units.copy()
    p = units.copy()
    for _ in range(k - 2):
        s = (s[:, None] + units[None, :]).ravel()
        p = (p[:, None] * units[None, :] % q).ravel()
    return s, inv[p]


def _accumulate(acc, comp, term):
    """One vectorized Kahan step; returns the updated (acc, comp)."""
    y = term - comp
    t = acc + y
    comp = (t - acc) - y
    return t, comp


def kl_table(k: int, q) -> PeriodicTable:
    """Kl_k(n; q) for every residue n, by iterated multiplicative convolution.

    A_1(n) = e(n/q) on units, A_{j+1}(n) = sum_x A_j(n xbar) e(x/q); the
    table is q^{-(k-1)/2} A_k.  Cost O(k q phi(q)).
    """
    mod = as_modulus(q)
    return _kl_table_cached(int(k), mod)


@lru_cache(maxsize=64)
def _kl_table_cached(k: int, mod: SquarefreeModulus) -> PeriodicTable:
    if k < 2:
        raise ValueError("k must be >= 2")
    qq = mod.q
    units, inv = _units_and_inverses(qq)
    base = np.zeros(qq, dtype=np.complex128)
    base[units] = e_q(units, qq)
    ex = e_q(units, qq)
    n = np.arange(qq)
    compensated = qq > COMPENSATED_ABOVE_Q
    chunk = max(1, 2_000_000 // qq)
    a = base
    for _ in range(k - 1):
        acc = np.zeros(qq, dtype=np.complex128)
        comp = np.zeros(qq, dtype=np.complex128)
        for start in range(0, len(units), chunk):
            xb = inv[start:start + chunk]
            idx = (n[None, :] * xb[:, None]) % qq
            part = (a[idx] * ex[start:start + chunk, None]).sum(axis=0)
            if compensated:
                acc, comp = _accumulate(acc, comp, part)
            else:
                acc += part
        a = acc
    vals = a / qq ** ((k - 1) / 2)
    nonunit = np.gcd(n, qq) != 1
    assert np.all(np.abs(vals[nonunit]) == 0.0), "Kl table must vanish off units"
    return PeriodicTable(mod, vals, f"Kl{k}")


def kl_max_abs(k: int, q) -> float:
    """Largest |Kl_k(n; q)| over units n (the quantity compared to k and k^omega)."""
    t = kl_table(k, q)
    units, _ = _units_and_inverses(t.q)
    return float(np.max(np.abs(t.values[units])))


_CRT_GATE_LIMIT = 210
_crt_validated: set[int] = set()


def validate_crt_twist(k: int, limit: int = _CRT_GATE_LIMIT, atol: float = 1e-9) -> float:
    """Compare the CRT factorization with direct enumeration on all square-free q <= limit.

    Returns the largest deviation; raises AssertionError if any exceeds atol.
    """
    worst = 0.0
    for qq in squarefree_up_to(limit):
        if qq < 2:
            continue
        mod = as_modulus(qq)
        for n in range(qq):
            d = abs(_kl_crt_unchecked(k, n, mod) - hyper_kloosterman_direct(k, n, mod))
            worst = max(worst, d)
    if worst >= atol:
        raise AssertionError(f"CRT twist for Kl_{k} disagrees with enumeration: {worst:.3e}")
    return worst


def _kl_crt_unchecked(k: int, n: int, mod: SquarefreeModulus) -> complex:
    out = 1 + 0j
    for p in mod.primes:
        cofactor = mod.q // p
        twist = pow(pow(cofactor, k, p), -1, p)
        out *= kl_table(k, p).values[(n * twist) % p]
    return out


def hyper_kloosterman_crt(k: int, n: int, q) -> complex:
    """Kl_k(n; q) as the product over p | q of Kl_k(n (q/p)^{-k}; p)."""
    k = int(k)
    if k not in _crt_validated:
        validate_crt_twist(k)
        _crt_validated.add(k)
    return _kl_crt_unchecked(k, int(n), as_modulus(q))


def _check_parseval(before: np.ndarray, after: np.ndarray):
    e0 = float(np.sum(np.abs(before) ** 2))
    e1 = float(np.sum(np.abs(after) ** 2))
    if abs(e0 - e1) > PARSEVAL_RTOL * max(e0, e1, 1e-300):
        raise ArithmeticError(f"Parseval violated: {e0!r} vs {e1!r}")


def fourier_periodic(K: PeriodicTable) -> PeriodicTable:
    """Khat(n) = q^{-1/2} sum_h K(h) e(h n / q)."""
    qq = K.q
    vals = math.sqrt(qq) * np.fft.ifft(K.values)
    _check_parseval(K.values, vals)
    return PeriodicTable(K.modulus, vals, f"hat({K.label})")


def inverse_fourier_periodic(Khat: PeriodicTable) -> PeriodicTable:
    """K(h) = q^{-1/2} sum_n Khat(n) e(-h n / q)."""
    qq = Khat.q
    vals = np.fft.fft(Khat.values) / math.sqrt(qq)
    _check_parseval(Khat.values, vals)
    return PeriodicTable(Khat.modulus, vals, f"invhat({Khat.label})")


def k_tilde(K: PeriodicTable, m):
    """Ktilde(m) = q^{-1/2} sum_{(u,q)=1} K(u) Kl_3(m u; q); m may be an array."""
    qq = K.q
    units, _ = _units_and_inverses(qq)
    kl3 = kl_table(3, K.modulus).values
    m = np.asarray(m)
    idx = (np.mod(m, qq)[..., None] * units) % qq
    out = (kl3[idx] * K.values[units]).sum(axis=-1) / math.sqrt(qq)
    return complex(out) if out.ndim == 0 else out


def k_tilde_alternate(K: PeriodicTable, m):
    """q^{-1/2} sum_{(u,q)=1} Khat(u) Kl_2(m ubar; q): equals k_tilde when K lives on units."""
    qq = K.q
    units, inv = _units_and_inverses(qq)
    kl2 = kl_table(2, K.modulus).values
    khat = fourier_periodic(K).values
    m = np.asarray(m)
    idx = (np.mod(m, qq)[..., None] * inv) % qq
    out = (kl2[idx] * khat[units]).sum(axis=-1) / math.sqrt(qq)
    return complex(out) if out.ndim == 0 else out


def write_kl_csv(table: PeriodicTable, k: int, fh=None) -> str:
    buf = io.StringIO()
    buf.write(f"# kl_table k={k} q={table.q}\n")
    buf.write("n,re,im\n")
    for n, v in enumerate(table.values):
        buf.write(f"{n},{v.real:.15g},{v.imag:.15g}\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_kl_csv(text: str) -> tuple[int, PeriodicTable]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    heads = [i for i, ln in enumerate(lines) if ln.startswith("# kl_table")]
    if not heads:
        raise ValueError("missing '# kl_table' header")
    h = heads[0]
    fields = dict(tok.split("=") for tok in lines[h].split()[2:])
    k, q = int(fields["k"]), int(fields["q"])
    vals = np.zeros(q, dtype=np.complex128)
    for ln in lines[h + 2:]:
        n, re_, im_ = ln.split(",")
        vals[int(n)] = complex(float(re_), float(im_))
    return k, PeriodicTable(as_modulus(q), vals, f"Kl{k}")
