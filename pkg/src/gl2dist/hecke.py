"""Hecke eigenvalues of the discriminant form Delta (level 1, weight 12).

tau(n) is computed exactly as the coefficients of q * prod (1 - q^n)^24,
the 24th power of the pentagonal-number series.  Series products are done
by Kronecker substitution: each truncated series is packed into one big
integer, multiplied with GMP, and unpacked with signed digits.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from .arith import sigma_table
from .errors import IndexOutOfRange, TableTooSmall, ValidationError

WEIGHT = 12
MAX_N = 10_000_000


def pentagonal_series(N: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - x^n) up to x^N (Euler)."""
    c = [0] * (N + 1)
    c[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > N:
            break
        sign = -1 if k % 2 else 1
        c[g1] += sign
        g2 = k * (3 * k + 1) // 2
        if g2 <= N:
            c[g2] += sign
        k += 1
    return c


def _pack(coeffs: list[int], width: int) -> gmpy2.mpz:
    pos = bytearray(len(coeffs) * width)
    neg = bytearray(len(coeffs) * width)
    for i, c in enumerate(coeffs):
        if c > 0:
            pos[i * width:(i + 1) * width] = c.to_bytes(width, "little")
        elif c < 0:
            neg[i * width:(i + 1) * width] = (-c).to_bytes(width, "little")
    return gmpy2.mpz.from_bytes(bytes(pos), "little") - gmpy2.mpz.from_bytes(bytes(neg), "little")


def series_mul(a: list[int], b: list[int], N: int) -> list[int]:
    """Exact product of two integer series truncated at degree N."""
    ma = max(abs(x) for x in a)
    mb = max(abs(x) for x in b)
    # |c_n| <= (N+1) max|a| max|b| < 2^(bits-1)
    bits = ma.bit_length() + mb.bit_length() + (N + 1).bit_length() + 2
    width = (bits + 7) // 8
    A = _pack(a, width)
    prod = A * A if a is b else A * _pack(b, width)
    nslots = len(a) + len(b) - 1
    prod += gmpy2.mpz.from_bytes((b"\x00" * (width - 1) + b"\x80") * nslots, "little")
    raw = prod.to_bytes(nslots * width, "little")
    half = 1 << (8 * width - 1)
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") - half
            for i in range(min(N + 1, nslots))]


def tau_eta_product(N: int) -> list[int]:
    """[0, tau(1), ..., tau(N)] from the 24th power of the pentagonal series."""
    e1 = pentagonal_series(N - 1)
    e2 = series_mul(e1, e1, N - 1)
    e3 = series_mul(e2, e1, N - 1)
    e6 = series_mul(e3, e3, N - 1)
    e12 = series_mul(e6, e6, N - 1)
    e24 = series_mul(e12, e12, N - 1)
    return [0] + e24


def tau_niebur(N: int) -> list[int]:
    """Independent O(N^2) oracle: tau(n) = n^4 s(n) - 24 sum i^2 (35i^2 - 52in + 18n^2) s(i) s(n-i)."""
    s = sigma_table(N)
    out = [0] * (N + 1)
    for n in range(1, N + 1):
        acc = 0
        for i in range(1, n):
            acc += i * i * (35 * i * i - 52 * i * n + 18 * n * n) * s[i] * s[n - i]
        out[n] = n ** 4 * s[n] - 24 * acc
    return out


@dataclass
class HeckeTable:
    N: int
    tau: list[int]
    lam: np.ndarray
    weight_k: int = WEIGHT
    _conv: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.lam.setflags(write=False)

    def require(self, n: int):
        if n > self.N:
            raise TableTooSmall(f"needs lambda up to {n}, table has N={self.N}")


def build_hecke_table(N: int) -> HeckeTable:
    N = int(N)
    if N < 1:
        raise ValidationError(f"N must be >= 1, got {N}")
    if N > MAX_N:
        raise ValidationError(f"N={N} exceeds the supported cap {MAX_N}")
    tau = tau_eta_product(N)
    n = np.arange(N + 1, dtype=np.float64)
    lam = np.zeros(N + 1)
    lam[1:] = np.array([float(t) for t in tau[1:]]) / n[1:] ** 5 / np.sqrt(n[1:])
    return HeckeTable(N, tau, lam)


def convolve_unit(t: HeckeTable) -> np.ndarray:
    """(lambda * 1)(n) = sum_{m | n} lambda(m), by a divisor sieve; index 0 unused."""
    if t._conv is None:
        conv = np.zeros(t.N + 1)
        lam = t.lam
        for m in range(1, t.N + 1):
            conv[m::m] += lam[m]
        conv.setflags(write=False)
        t._conv = conv
    return t._conv


def hecke_relation_check(t: HeckeTable, m: int, n: int) -> float:
    """|lambda(m) lambda(n) - sum_{d | (m,n)} lambda(mn/d^2)|."""
    if m < 1 or n < 1 or m * n > t.N:
        raise IndexOutOfRange(f"need 1 <= m, n and m*n <= {t.N}")
    g = math.gcd(m, n)
    rhs = sum(t.lam[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
    return abs(t.lam[m] * t.lam[n] - rhs)


def write_hecke_csv(t: HeckeTable, N: int | None = None, fh=None) -> str:
    N = t.N if N is None else min(N, t.N)
    conv = convolve_unit(t)
    buf = io.StringIO()
    buf.write("n,tau,lambda,lambda_conv\n")
    for n in range(1, N + 1):
        buf.write(f"{n},{t.tau[n]},{t.lam[n]:.15g},{conv[n]:.15g}\n")
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
