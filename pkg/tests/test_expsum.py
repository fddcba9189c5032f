import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gl2dist.arith import as_modulus, mult_functions, primes_up_to, squarefree_up_to
from gl2dist.expsum import (
    PeriodicTable, e_q, fourier_periodic, hyper_kloosterman_crt, hyper_kloosterman_direct,
    inverse_fourier_periodic, k_tilde, k_tilde_alternate, kl_max_abs, kl_table, kloosterman,
    kloosterman_matrix, read_kl_csv, validate_crt_twist, weil_ratio, write_kl_csv,
)


def naive_kl(k, n, q):
    """Pure-python enumeration over all k-tuples of units with product n."""
    units = [x for x in range(1, q + 1) if math.gcd(x, q) == 1] if q > 1 else [0]
    total = 0j
    for xs in itertools.product(units, repeat=k):
        if math.prod(xs) % q == n % q:
            total += cmath.exp(2j * math.pi * sum(xs) / q)
    return total / q ** ((k - 1) / 2)


def naive_kloosterman(a, b, q):
    return sum(cmath.exp(2j * math.pi * (a * x + b * pow(x, -1, q)) / q)
               for x in range(1, q) if math.gcd(x, q) == 1)


def test_e_q_examples():
    assert e_q(0, 7) == 1
    assert abs(e_q(1, 2) + 1) < 1e-15
    assert abs(e_q(1, 4) - 1j) < 1e-15
    assert abs(e_q(-3, 10) - e_q(7, 10)) == 0
    assert np.allclose(np.abs(e_q(np.arange(-50, 50), 13)), 1)


def test_kloosterman_examples():
    assert abs(kloosterman(0, 0, 30) - 8) < 1e-12
    assert abs(kloosterman(1, 1, 2) - 1) < 1e-12
    assert abs(kloosterman(1, 1, 5) - 0.381966011250105) < 1e-12
    for a, b in [(1, 1), (2, 3), (0, 5)]:
        s = kloosterman(a, b, 35)
        assert abs(s.imag) < 1e-9
        assert abs(s - naive_kloosterman(a, b, 35)) < 1e-9


@pytest.mark.parametrize("q", [2, 6, 7, 15, 30])
def test_kloosterman_matrix_matches_scalar(q):
    S = kloosterman_matrix(q)
    for a in range(q):
        for b in range(q):
            assert abs(S[a, b] - kloosterman(a, b, q)) < 1e-9


def test_weil_bound_all_squarefree_up_to_200():
    assert max(weil_ratio(q) for q in squarefree_up_to(200) if q > 1) <= 1 + 1e-12


def test_hyper_kloosterman_examples():
    assert abs(hyper_kloosterman_direct(2, 1, 2) - 2 ** -0.5) < 1e-12
    assert abs(hyper_kloosterman_direct(3, 1, 2) + 0.5) < 1e-12
    assert abs(hyper_kloosterman_direct(3, 1, 3) - complex(-1 / 6, -math.sqrt(3) / 2)) < 1e-12
    assert hyper_kloosterman_direct(3, 5, 15) == 0


@pytest.mark.parametrize("k,q", [(2, 7), (3, 7), (2, 15), (3, 15), (2, 30), (3, 30)])
def test_direct_matches_naive(k, q):
    for n in range(q):
        assert abs(hyper_kloosterman_direct(k, n, q) - naive_kl(k, n, q)) < 1e-9


@pytest.mark.parametrize("q", [7, 15, 105])
@pytest.mark.parametrize("k", [2, 3])
def test_table_matches_direct(k, q):
    t = kl_table(k, q)
    for n in range(q):
        assert abs(t(n) - hyper_kloosterman_direct(k, n, q)) < 1e-9


def test_table_vanishes_off_units_and_bound():
    for q in [30, 105, 210, 1001]:
        mod = as_modulus(q)
        for k in (2, 3):
            t = kl_table(k, mod)
            g = np.gcd(np.arange(q), q)
            assert np.all(t.values[g > 1] == 0)
            assert kl_max_abs(k, mod) <= k ** mod.omega + 1e-9


def test_table_compensated_path_large_q():
    q = 10_007  # prime above the compensated-summation threshold
    t = kl_table(2, q)
    for n in [1, 2, 5000, 10_006]:
        assert abs(t(n) - hyper_kloosterman_direct(2, n, q)) < 1e-9


def test_crt_gate_and_values():
    assert validate_crt_twist(2) < 1e-9
    assert validate_crt_twist(3) < 1e-9
    for q in [6, 10, 15, 30, 105, 210]:
        for k in (2, 3):
            for n in range(q):
                assert abs(hyper_kloosterman_crt(k, n, q) - hyper_kloosterman_direct(k, n, q)) < 1e-9
    assert abs(hyper_kloosterman_crt(2, 1, 15) - naive_kl(2, 1, 15)) < 1e-9
    assert hyper_kloosterman_crt(3, 4, 13) == kl_table(3, 13)(4)


def test_deligne_per_prime():
    for p in primes_up_to(499):
        for k in (2, 3):
            assert kl_max_abs(k, p) <= k + 1e-9


@pytest.mark.parametrize("q", [5, 7, 30, 105])
def test_conjugation_symmetry(q):
    for k in (2, 3):
        t = kl_table(k, q).values
        n = np.arange(q)
        assert np.allclose(np.conj(t), t[((-1) ** k * n) % q], atol=1e-12)


def test_fourier_examples():
    q = 11
    d0 = fourier_periodic(PeriodicTable.delta(0, q))
    assert np.allclose(d0.values, q ** -0.5)
    K = PeriodicTable(as_modulus(q), e_q(np.arange(q), q))
    kh = fourier_periodic(K).values
    expect = np.zeros(q, dtype=complex)
    expect[q - 1] = math.sqrt(q)
    assert np.allclose(kh, expect, atol=1e-12)
    da = fourier_periodic(PeriodicTable.delta(3, q))
    assert abs(da(0) - q ** -0.5) < 1e-15


@given(st.sampled_from([2, 3, 5, 6, 7, 30, 77, 210]), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_fourier_round_trip(q, seed):
    rng = np.random.default_rng(seed)
    K = PeriodicTable(as_modulus(q), rng.normal(size=q) + 1j * rng.normal(size=q))
    back = inverse_fourier_periodic(fourier_periodic(K))
    assert np.allclose(back.values, K.values, atol=1e-9)
    # sign convention against the defining sum
    h = np.arange(q)
    n = int(rng.integers(q))
    direct = (K.values * np.exp(2j * np.pi * h * n / q)).sum() / math.sqrt(q)
    assert abs(fourier_periodic(K)(n) - direct) < 1e-9


def test_k_tilde_examples():
    q = 13
    for a in (1, 2, 7):
        for m in range(q):
            assert abs(k_tilde(PeriodicTable.delta(a, q), m) - q ** -0.5 * kl_table(3, q)(a * m)) < 1e-12
    assert abs(k_tilde(PeriodicTable.delta(1, 2), 1) + 1 / (2 * math.sqrt(2))) < 1e-12


@given(st.sampled_from([3, 5, 7, 10, 15, 21, 30]), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_k_tilde_alternate_on_unit_supported(q, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=q) + 1j * rng.normal(size=q)
    v[np.gcd(np.arange(q), q) > 1] = 0
    K = PeriodicTable(as_modulus(q), v)
    m = np.arange(q)
    assert np.allclose(k_tilde(K, m), k_tilde_alternate(K, m), atol=1e-8)


def test_k_tilde_alternate_fails_off_units():
    # delta_0 lives off the units: the primary form vanishes but the alternate does not
    found = False
    for q in squarefree_up_to(30):
        if q < 2:
            continue
        K = PeriodicTable.delta(0, q)
        m = np.arange(q)
        assert np.allclose(k_tilde(K, m), 0)
        if not np.allclose(k_tilde_alternate(K, m), 0, atol=1e-8):
            found = True
    assert found


def test_csv_round_trip():
    t = kl_table(3, 15)
    text = write_kl_csv(t, 3)
    assert text.splitlines()[0] == "# kl_table k=3 q=15"
    assert text.splitlines()[1] == "n,re,im"
    k, back = read_kl_csv("# gl2dist kl-table k=3 q=15\n" + text)
    assert k == 3 and np.allclose(back.values, t.values, atol=1e-14)


def test_periodic_table_is_read_only():
    t = kl_table(2, 7)
    with pytest.raises(ValueError):
        t.values[0] = 1
    with pytest.raises(ValueError):
        PeriodicTable(as_modulus(7), np.zeros(6))
