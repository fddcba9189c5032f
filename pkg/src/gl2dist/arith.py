"""Modular arithmetic, square-free factorization and small multiplicative functions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModuliNotCoprime, NotInvertible, NotSquarefree, ValidationError


@dataclass(frozen=True)
class SquarefreeModulus:
    q: int
    primes: tuple[int, ...]
    phi: int = field(init=False)
    omega: int = field(init=False)

    def __post_init__(self):
        prod = 1
        for p in self.primes:
            prod *= p
        if prod != self.q or list(self.primes) != sorted(set(self.primes)):
            raise ValidationError(f"inconsistent factorization {self.primes} for q={self.q}")
        object.__setattr__(self, "phi", math.prod(p - 1 for p in self.primes))
        object.__setattr__(self, "omega", len(self.primes))

    def __int__(self):
        return self.q

    def units(self) -> np.ndarray:
        """Residues in [0, q-1] coprime to q (for q = 1 this is [0])."""
        r = np.arange(self.q)
        return r[np.gcd(r, self.q) == 1]

    def is_prime(self) -> bool:
        return self.omega == 1

    def divisors(self) -> list[int]:
        divs = [1]
        for p in self.primes:
            divs += [d * p for d in divs]
        return sorted(divs)


def as_modulus(q) -> SquarefreeModulus:
    if isinstance(q, SquarefreeModulus):
        return q
    return factor_squarefree(int(q))


def factor_squarefree(n: int) -> SquarefreeModulus:
    """Trial-division factorization; raises NotSquarefree when p^2 | n."""
    n = int(n)
    if n < 1:
        raise ValidationError(f"modulus must be >= 1, got {n}")
    primes = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                raise NotSquarefree(f"{n} is divisible by {p}^2")
            primes.append(p)
        p += 1 if p == 2 else 2
    if m > 1:
        primes.append(m)
    return SquarefreeModulus(n, tuple(primes))


def is_squarefree(n: int) -> bool:
    try:
        factor_squarefree(n)
    except NotSquarefree:
        return False
    return True


def inv_mod(x: int, q: int) -> int:
    q = int(q)
    if q < 2:
        raise ValidationError(f"inv_mod needs q >= 2, got {q}")
    if math.gcd(int(x), q) != 1:
        raise NotInvertible(f"gcd({x}, {q}) = {math.gcd(int(x), q)}")
    return pow(int(x) % q, -1, q)


def crt_combine(r1: int, q1, r2: int, q2) -> int:
    """The residue mod q1*q2 congruent to r1 mod q1 and r2 mod q2."""
    a, b = int(q1), int(q2)
    if math.gcd(a, b) != 1:
        raise ModuliNotCoprime(f"gcd({a}, {b}) = {math.gcd(a, b)}")
    r1 %= a
    t = ((r2 - r1) * pow(a, -1, b)) % b if b > 1 else 0
    return (r1 + a * t) % (a * b)


@dataclass(frozen=True)
class MultFunctions:
    d: int
    d3: int
    mu: int
    sigma: int


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mult_functions(n: int) -> MultFunctions:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    fac = _factor(int(n))
    d = math.prod(e + 1 for e in fac.values())
    d3 = math.prod((e + 1) * (e + 2) // 2 for e in fac.values())
    mu = 0 if any(e > 1 for e in fac.values()) else (-1) ** len(fac)
    sigma = math.prod((p ** (e + 1) - 1) // (p - 1) for p, e in fac.items())
    return MultFunctions(d, d3, mu, sigma)


def divisor_count_table(N: int) -> np.ndarray:
    """d(n) for 0 <= n <= N (entry 0 is 0)."""
    d = np.zeros(N + 1, dtype=np.int64)
    for k in range(1, N + 1):
        d[k::k] += 1
    return d


def sigma_table(N: int) -> list[int]:
    s = np.zeros(N + 1, dtype=np.int64)
    for k in range(1, N + 1):
        s[k::k] += k
    return [int(v) for v in s]


def squarefree_up_to(N: int) -> list[int]:
    flag = np.ones(N + 1, dtype=bool)
    flag[0] = False
    p = 2
    while p * p <= N:
        flag[p * p::p * p] = False
        p += 1
    return [int(n) for n in np.nonzero(flag)[0]]


def primes_up_to(N: int) -> list[int]:
    if N < 2:
        return []
    sieve = np.ones(N + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(N ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def nearest_squarefree(target: float) -> int:
    """Square-free integer closest to target; ties go to the smaller one."""
    width = 8
    while True:
        lo = max(1, int(math.floor(target)) - width)
        cands = sorted(range(lo, int(math.ceil(target)) + width + 1),
                       key=lambda m: (abs(m - target), m))
        for m in cands:
            if abs(m - target) > width:
                break
            if is_squarefree(m):
                return m
        width *= 2
