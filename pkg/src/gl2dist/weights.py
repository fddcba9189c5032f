"""Smooth compactly supported weights and their Fourier / Bessel transforms.

Derivatives are exact: every weight is built from truncated Taylor "jets"
(arrays whose row j holds f^(j)(x)/j!), so composition with exp, 1/x and
log propagates derivatives analytically up to MAX_DERIV.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bessel import bessel_j
from .errors import BadInterval, QuadratureNotConverged, ValidationError

MAX_DERIV = 4
# exp(1 - 1/g) is below 1e-300 once 1/g > 692
_BUMP_EDGE = 1.0 / 690.0


# --- jet arithmetic -------------------------------------------------------

def _jet_var(x: np.ndarray, order: int, scale: float = 1.0, shift: float = 0.0) -> np.ndarray:
    j = np.zeros((order + 1,) + x.shape)
    j[0] = scale * x + shift
    if order >= 1:
        j[1] = scale
    return j


def _jmul(a, b):
    out = np.zeros_like(a)
    for k in range(a.shape[0]):
        for i in range(k + 1):
            out[k] += a[i] * b[k - i]
    return out


def _jrecip(a):
    out = np.zeros_like(a)
    out[0] = 1.0 / a[0]
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0])
        for i in range(1, k + 1):
            acc += a[i] * out[k - i]
        out[k] = -acc * out[0]
    return out


def _jexp(a):
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0])
        for i in range(1, k + 1):
            acc += i * a[i] * out[k - i]
        out[k] = acc / k
    return out


def _jlog(a):
    out = np.zeros_like(a)
    out[0] = np.log(a[0])
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0])
        for i in range(1, k):
            acc += i * out[i] * a[k - i]
        out[k] = (a[k] - acc / k) / a[0]
    return out


def _master_bump_jet(s: np.ndarray) -> np.ndarray:
    """Jet of exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; peak value 1 at s = 0."""
    out = np.zeros_like(s)
    g0 = 1.0 - s[0] ** 2
    inside = g0 > _BUMP_EDGE
    if not np.any(inside):
        return out
    si = s[:, inside]
    g = -_jmul(si, si)
    g[0] += 1.0
    h = -_jrecip(g)
    h[0] += 1.0
    out[:, inside] = _jexp(h)
    return out


# --- weights --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SmoothWeight:
    """A smooth function supported in [c1, c2] with derivatives up to order 4.

    Q is the derivative scale: sup |W^(j)| is of size Q^j / (c2 - c1)^j up to
    the recorded constants of the bump family.
    """

    c1: float
    c2: float
    jet_fn: Callable[[np.ndarray, int], np.ndarray] = field(repr=False)
    Q: float = 1.0
    name: str = "weight"

    @property
    def support(self) -> tuple[float, float]:
        return (self.c1, self.c2)

    def jet(self, x, order: int = MAX_DERIV) -> np.ndarray:
        if not 0 <= order <= MAX_DERIV:
            raise ValidationError(f"derivative order must be in [0, {MAX_DERIV}]")
        xa = np.asarray(x, dtype=np.float64)
        return self.jet_fn(xa, order)

    def eval(self, x):
        out = self.jet(x, 0)[0]
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def deriv(self, x, j: int):
        out = self.jet(x, j)[j] * math.factorial(j)
        return float(out) if out.ndim == 0 else out

    def integral(self) -> float:
        return _integral(self)


def bump(c1: float, c2: float) -> SmoothWeight:
    """exp(1 - 1/(1 - s^2)) with s the affine map of [c1, c2] onto [-1, 1]."""
    c1, c2 = float(c1), float(c2)
    if not (0 < c1 < c2) or not math.isfinite(c2):
        raise BadInterval(f"need 0 < c1 < c2, got [{c1}, {c2}]")
    scale = 2.0 / (c2 - c1)
    shift = -(c1 + c2) / (c2 - c1)

    def jet_fn(x, order):
        return _master_bump_jet(_jet_var(x, order, scale, shift))

    return SmoothWeight(c1, c2, jet_fn, 1.0, f"bump[{c1:g},{c2:g}]")


@lru_cache(maxsize=1)
def bump_derivative_constants() -> tuple[float, ...]:
    """C_j = sup_s |d^j/ds^j exp(1 - 1/(1-s^2))| * 2^j, j = 0..4.

    For the bump on [c1, c2], sup |W^(j)| = C_j / (c2 - c1)^j.
    """
    s = np.linspace(-1, 1, 400_001)
    jet = _master_bump_jet(_jet_var(s, MAX_DERIV))
    return tuple(float(np.max(np.abs(jet[j])) * math.factorial(j) * 2.0 ** j)
                 for j in range(MAX_DERIV + 1))


def fouvry_partition(T: float, Delta: float) -> list[SmoothWeight]:
    """Weights b_l, l = 0..L, supported in [Delta^(l-1), Delta^(l+1)], summing to 1 on [1, T].

    b_l(t) = rho(s - l) / sum_j rho(s - j) with s = log t / log Delta and rho the
    master bump on [-1, 1], so the family is a fixed profile translated in log scale.
    """
    if not Delta > 1:
        raise ValidationError(f"Delta must exceed 1, got {Delta}")
    if not T >= 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    logd = math.log(Delta)
    lmax = int(math.floor(math.log(T) / logd)) + 1
    out = []
    for l in range(lmax + 1):
        out.append(SmoothWeight(Delta ** (l - 1), Delta ** (l + 1),
                                _partition_jet_fn(l, logd), 1.0 / logd, f"b_{l}[{Delta:.17g}]"))
    return out


def _partition_jet_fn(l: int, logd: float):
    def jet_fn(x, order):
        x = np.asarray(x, dtype=np.float64)
        shape = x.shape
        xf = np.atleast_1d(x).ravel()
        res = np.zeros((order + 1, xf.size))
        pos = xf > 0
        if np.any(pos):
            t = _jet_var(xf[pos], order)
            s = _jlog(t) / logd
            base = np.floor(s[0])
            num_s = s.copy()
            num_s[0] = s[0] - l
            num = _master_bump_jet(num_s)
            d0 = s.copy()
            d0[0] = s[0] - base
            d1 = s.copy()
            d1[0] = s[0] - base - 1.0
            den = _master_bump_jet(d0) + _master_bump_jet(d1)
            res[:, pos] = _jmul(num, _jrecip(den))
        return res.reshape((order + 1,) + shape)
    return jet_fn


def partition_derivative_report(weights: list[SmoothWeight], T: float, points: int = 4000):
    """Rows (v, sup_t |b^(v)(t)| t^v, (1/log Delta)^v, ratio) over the family on [1, T]."""
    t = np.geomspace(1.0, T, points)
    Q = weights[0].Q
    rows = []
    for v in range(MAX_DERIV + 1):
        sup = 0.0
        for w in weights:
            m = (t > w.c1) & (t < w.c2)
            if np.any(m):
                sup = max(sup, float(np.max(np.abs(w.deriv(t[m], v)) * t[m] ** v)))
        rows.append((v, sup, Q ** v, sup / Q ** v))
    return rows


# --- quadrature -----------------------------------------------------------

@dataclass(frozen=True)
class TransformConfig:
    rel_tol: float = 1e-10
    max_panels: int = 1 << 15
    truncation_exponent_E: int = 3
    gl_order: int = 8
    min_panels: int = 32

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ValidationError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol}")
        if self.max_panels < 16:
            raise ValidationError(f"max_panels must be >= 16, got {self.max_panels}")


@lru_cache(maxsize=16)
def _gl(order: int):
    return leggauss(order)


def _panel_nodes(a: float, b: float, panels: int, order: int):
    xg, wg = _gl(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    return nodes, wts


def _integral(w: SmoothWeight) -> float:
    nodes, wts = _panel_nodes(w.c1, w.c2, 256, 8)
    return float(np.sum(w.eval(nodes) * wts))


def _adaptive_oscillatory(freqs: np.ndarray, base_panels: np.ndarray, integrate, scale: float,
                          cfg: TransformConfig) -> np.ndarray:
    """Integrate for each frequency with panel doubling until two levels agree.

    integrate(freq_subset, panels) -> complex array.  Frequencies are grouped
    by panel level; within a group the panel count is settled on the group's
    extreme members (highest frequencies, which are the least resolved, and
    the lowest), then the whole group is evaluated once at that count.
    """
    out = np.empty(freqs.shape, dtype=np.complex128)
    p0 = np.maximum(base_panels, cfg.min_panels)
    levels = 2 ** np.ceil(np.log2(p0)).astype(np.int64)
    for lev in np.unique(levels):
        idx = np.nonzero(levels == lev)[0]
        order = idx[np.argsort(freqs[idx], kind="stable")]
        reps = np.unique(np.concatenate([order[:2], order[-6:]]))
        panels = int(lev)
        prev = integrate(freqs[reps], panels)
        while True:
            if 2 * panels > cfg.max_panels:
                raise QuadratureNotConverged(
                    f"no convergence at {panels} panels for frequency {freqs[idx].max():.6g}")
            cur = integrate(freqs[reps], 2 * panels)
            tol = cfg.rel_tol * np.abs(cur) + 1e-13 * scale
            if np.all(np.abs(cur - prev) <= tol):
                break
            panels *= 2
            prev = cur
        out[idx] = integrate(freqs[idx], panels)
    return out


def fourier_weight(W: SmoothWeight, t, cfg: TransformConfig | None = None):
    """What(t) = int W(x) e(-x t) dx over the support, for scalar or array t."""
    cfg = cfg or TransformConfig()
    ta = np.atleast_1d(np.asarray(t, dtype=np.float64)).ravel()
    width = W.c2 - W.c1
    scale = abs(W.integral()) + 1e-300
    chunk_nodes = 4_000_000

    def integrate(freqs, panels):
        nodes, wts = _panel_nodes(W.c1, W.c2, panels, cfg.gl_order)
        g = W.eval(nodes) * wts
        res = np.empty(freqs.size, dtype=np.complex128)
        step = max(1, chunk_nodes // nodes.size)
        for s in range(0, freqs.size, step):
            f = freqs[s:s + step]
            res[s:s + step] = np.exp(-2j * np.pi * f[:, None] * nodes[None, :]) @ g
        return res

    base = np.ceil(4.0 * np.abs(ta) * width).astype(np.int64)
    out = _adaptive_oscillatory(ta, base, integrate, scale, cfg)
    return complex(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def bessel_transform(V: SmoothWeight, x, k: int = 12, cfg: TransformConfig | None = None):
    """Vcheck(x) = 2 pi i^k int V(t) J_{k-1}(4 pi sqrt(x t)) dt, for scalar or array x >= 0.

    Integrated in u = sqrt(t), where the kernel oscillates at the fixed
    frequency 2 sqrt(x); panels are at most a quarter period wide.
    """
    cfg = cfg or TransformConfig()
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()
    if np.any(xa < 0):
        raise ValidationError("bessel_transform needs x >= 0")
    u1, u2 = math.sqrt(V.c1), math.sqrt(V.c2)
    prefactor = 2 * math.pi * (1j ** k)
    scale = 2 * math.pi * abs(V.integral()) + 1e-300
    chunk_nodes = 4_000_000

    def integrate(xs, panels):
        nodes, wts = _panel_nodes(u1, u2, panels, cfg.gl_order)
        g = V.eval(nodes * nodes) * 2.0 * nodes * wts
        res = np.empty(xs.size, dtype=np.complex128)
        step = max(1, chunk_nodes // nodes.size)
        for s in range(0, xs.size, step):
            arg = 4 * math.pi * np.sqrt(xs[s:s + step])[:, None] * nodes[None, :]
            res[s:s + step] = prefactor * (bessel_j(k - 1, arg) @ g)
        return res

    base = np.ceil(8.0 * np.sqrt(xa) * (u2 - u1)).astype(np.int64)
    out = _adaptive_oscillatory(xa, base, integrate, scale, cfg)
    return complex(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))


# --- decay profiles ---------------------------------------------------------

def transform_cutoff(transform, start: float, cut: float, ratio: float = 1.25,
                     samples: int = 8, quiet_bins: int = 4, limit: float = 1e9) -> float:
    """Smallest probe point past which |transform| stays below cut * peak.

    transform(array) -> complex array.  The axis is scanned in geometric bins
    [z, ratio z], each sampled at `samples` points; the scan ends after
    `quiet_bins` consecutive bins whose maximum is below the threshold.
    """
    peak = 0.0
    quiet = 0
    z = start
    while z < limit:
        pts = np.linspace(z, z * ratio, samples, endpoint=False)
        m = float(np.max(np.abs(transform(pts))))
        peak = max(peak, m)
        quiet = quiet + 1 if (peak > 0 and m <= cut * peak) else 0
        z *= ratio
        if quiet >= quiet_bins:
            return z
    raise QuadratureNotConverged(f"transform did not decay below {cut:g} of its peak")


def decay_profile(kind: str, w: SmoothWeight, scale_len: float, cfg: TransformConfig | None = None,
                  k: int = 12, t=None, E: int | None = None):
    """Rows (t, |transform|, envelope, ratio) against scale_len (1 + t L)^{-E}.

    kind is "fourier" or "bessel"; the default grid is t in [1e-3, 1e3] / scale_len.
    """
    cfg = cfg or TransformConfig()
    E = cfg.truncation_exponent_E if E is None else E
    t = np.geomspace(1e-3, 1e3, 61) / scale_len if t is None else np.asarray(t, dtype=float)
    if kind == "fourier":
        vals = np.abs(fourier_weight(w, t, cfg))
    elif kind == "bessel":
        vals = np.abs(bessel_transform(w, t, k, cfg))
    else:
        raise ValidationError(f"unknown transform kind {kind!r}")
    env = scale_len * (1.0 + t * scale_len) ** (-E)
    return [(float(a), float(b), float(c), float(b / c)) for a, b, c in zip(t, vals, env)]
