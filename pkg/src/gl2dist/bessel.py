"""Bessel functions of the first kind J_n(x) for integer order, vectorized over x.

Three regimes:
  * ascending power series for small x,
  * Miller's downward recurrence normalized by J_0 + 2 sum J_{2k} = 1,
  * Hankel's asymptotic expansion for large x.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

MAX_ORDER = 64
_HANKEL_TERMS = 40
_RESCALE = 1e150


def series_limit(order: int) -> float:
    # keeps the largest ascending-series term near 1e2, so cancellation stays ~1e-14
    return min(order + 8.0, 2.0 * math.sqrt(order + 1.0) + 6.0)


def asymptotic_limit(order: int) -> float:
    # beyond n^2/2 the Hankel terms decrease from the first one on (ratio ~ 4n^2/8kx)
    # until k ~ 2x, so 40 terms reach rounding level
    return max(25.0, order * order / 2.0)


def _series(order: int, x: np.ndarray) -> np.ndarray:
    h = x / 2.0
    term = h ** order / math.factorial(order)
    out = term.copy()
    h2 = h * h
    for m in range(1, 200):
        term = -term * h2 / (m * (m + order))
        out += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(out), 1e-300)):
            break
    return out


def _miller(order: int, x: np.ndarray) -> np.ndarray:
    xmax = float(np.max(x))
    top = max(order, int(math.ceil(xmax)))
    start = 2 * ((top + int(math.sqrt(160.0 * top)) + 20) // 2)
    bjp = np.zeros_like(x)
    bj = np.full_like(x, 1e-300)
    ans = np.zeros_like(x)
    norm = np.zeros_like(x)
    two_over_x = 2.0 / x
    for j in range(start, 0, -1):
        bjm = j * two_over_x * bj - bjp
        bjp, bj = bj, bjm
        big = np.abs(bj) > _RESCALE
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            bj *= s
            bjp *= s
            ans *= s
            norm *= s
        # bj now holds J_{j-1} (unnormalized)
        if j - 1 == order:
            ans = bj.copy()
        if (j - 1) % 2 == 0 and j - 1 > 0:
            norm += 2.0 * bj
    norm += bj  # J_0
    return ans / norm


@lru_cache(maxsize=128)
def _hankel_coeffs(order: int) -> list[float]:
    mu = 4.0 * order * order
    coeffs = [1.0]
    for k in range(1, _HANKEL_TERMS):
        coeffs.append(coeffs[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return coeffs


def _hankel_terms(order: int, xmin: float) -> int:
    a = _hankel_coeffs(order)
    for k in range(1, _HANKEL_TERMS):
        if abs(a[k]) / xmin ** k < 1e-17:
            return k
    return _HANKEL_TERMS


def _hankel(order: int, x: np.ndarray) -> np.ndarray:
    # band by magnitude so large arguments use few terms
    out = np.empty_like(x)
    lo = float(np.min(x))
    edges = [lo * 2.0 ** i for i in range(64)]
    band = np.clip(np.floor(np.log2(x / lo)).astype(np.int64), 0, 63)
    for b in np.unique(band):
        m = band == b
        out[m] = _hankel_band(order, x[m], _hankel_terms(order, edges[b]))
    return out


def _hankel_band(order: int, x: np.ndarray, nterms: int) -> np.ndarray:
    a = _hankel_coeffs(order)
    inv = 1.0 / x
    w = inv * inv
    # P, Q as polynomials in 1/x^2, Horner from the top
    pc = [(-1) ** j * a[2 * j] for j in range((nterms + 1) // 2)]
    qc = [(-1) ** j * a[2 * j + 1] for j in range(nterms // 2)]
    P = np.full_like(x, pc[-1])
    for c in reversed(pc[:-1]):
        P *= w
        P += c
    if qc:
        Q = np.full_like(x, qc[-1])
        for c in reversed(qc[:-1]):
            Q *= w
            Q += c
        Q *= inv
    else:
        Q = np.zeros_like(x)
    phase = (order / 2.0 + 0.25) * math.pi
    c, s = math.cos(phase), math.sin(phase)
    cosx, sinx = np.cos(x), np.sin(x)
    cos_chi = cosx * c + sinx * s
    sin_chi = sinx * c - cosx * s
    return np.sqrt(2.0 / (math.pi * x)) * (P * cos_chi - Q * sin_chi)


def bessel_j(order: int, x):
    """J_order(x) for integer 0 <= order <= 64 and x >= 0 (scalar or array)."""
    order = int(order)
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 0):
        raise ValueError("bessel_j needs x >= 0")
    flat = xa.ravel()
    out = np.empty_like(flat)
    lo, hi = series_limit(order), asymptotic_limit(order)
    m_series = flat <= lo
    m_asym = flat > hi
    m_mid = ~(m_series | m_asym)
    if np.any(m_series):
        out[m_series] = _series(order, flat[m_series])
    if np.any(m_mid):
        out[m_mid] = _miller(order, flat[m_mid])
    if np.any(m_asym):
        out[m_asym] = _hankel(order, flat[m_asym])
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out
