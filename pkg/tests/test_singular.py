"""Singular-series machinery: complete exponential sums, Euler products,
L-values, Dirichlet-form partial sums and tails, and the product sandwich.

Brute-force oracles are defined at the top of the file and kept independent
of the package internals (math/cmath only, except where a test explicitly
cross-checks two package functions against each other).
"""

import cmath
import math

import numpy as np
import pytest

from quadprime.arith import jacobi, mobius_phi
from quadprime.errors import VerificationError
from quadprime.singular import (
    SingularCfg,
    chi_k,
    dirichlet_partial,
    l_value,
    sandwich_bounds,
    sandwich_check,
    sigma_q,
    singular_series,
    singular_series_euler,
    singular_series_euler_bulk,
    singular_series_lmethod,
    sl_product,
    tail_phi,
)


def sigma_brute(q, k):
    """Double exponential sum over r mod q and a coprime to q, term by term."""
    total = 0.0 + 0.0j
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        for r in range(q):
            total += cmath.exp(-2j * cmath.pi * a * (k + r * r) / q)
    return total


def digamma_l_oracle(k):
    """L(1, chi) = -(1/m) * sum_r chi(r) psi0(r/m) with m = 4k."""
    from scipy.special import digamma

    m = 4 * k
    s = 0.0
    for r in range(1, m):
        if r % 2 == 1 and math.gcd(r, m) == 1:
            s += jacobi(-k, r) * digamma(r / m)
    return -s / m


def squarefree(n):
    return mobius_phi(n)[0] != 0


# ---------------------------------------------------------------------------
# sigma_q


def test_sigma_matches_brute_double_sum():
    for q in range(1, 31):
        for k in range(1, 16):
            b = sigma_brute(q, k)
            assert abs(b.imag) < 1e-9
            assert sigma_q(q, k) == round(b.real), (q, k)


SIGMA_FROZEN = {
    (1, 1): 1, (2, 1): 0, (3, 1): -3, (4, 1): -4, (5, 1): 5,
    (9, 1): 0, (12, 1): 12, (15, 1): -15, (45, 1): 0,
    (3, 5): 3, (4, 5): -4, (5, 5): 0, (12, 5): -12,
}


@pytest.mark.parametrize("q,k,expect", [(q, k, v) for (q, k), v in sorted(SIGMA_FROZEN.items())])
def test_sigma_frozen_values(q, k, expect):
    assert sigma_q(q, k) == expect


def test_sigma_closed_form_odd_squarefree():
    for q in range(1, 100, 2):
        if not squarefree(q):
            continue
        for k in (1, 2, 7, 30):
            assert sigma_q(q, k) == q * jacobi(-k, q)


def test_sigma_vanishes_on_even_squarefree():
    for q in range(2, 100, 2):
        if squarefree(q):
            assert sigma_q(q, 3) == 0


def test_sigma_multiplicative_sample():
    pairs = [(3, 4), (5, 8), (9, 25), (7, 16), (27, 5)]
    for q1, q2 in pairs:
        for k in (1, 6, 11):
            assert sigma_q(q1, k) * sigma_q(q2, k) == sigma_q(q1 * q2, k)


def test_sigma_rejects_bad_arguments():
    with pytest.raises(ValueError):
        sigma_q(0, 1)
    with pytest.raises(ValueError):
        sigma_q(5, 0)


# ---------------------------------------------------------------------------
# the character n -> jacobi(-k, n)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 6, 11])
def test_chi_periodic_mod_4k(k):
    for n in range(1, 8 * k + 1):
        assert chi_k(k, n) == chi_k(k, n + 4 * k)


@pytest.mark.parametrize("k", [1, 3, 10])
def test_chi_completely_multiplicative(k):
    for a in range(1, 30):
        for b in range(1, 30):
            assert chi_k(k, a * b) == chi_k(k, a) * chi_k(k, b)


@pytest.mark.parametrize("k", [1, 2, 5, 12])
def test_chi_supported_on_units_and_nonprincipal(k):
    m = 4 * k
    total = 0
    for n in range(1, m + 1):
        v = chi_k(k, n)
        if math.gcd(n, m) > 1:
            assert v == 0
        else:
            assert v in (-1, 1)
        total += v
    assert total == 0  # a principal character would sum to phi(4k)


# ---------------------------------------------------------------------------
# Euler-product evaluations

EULER_1E4 = {
    1: 1.3710225146423305,
    2: 0.7125444279950458,
    3: 1.1188777652460067,
    5: 0.5272026287808633,
    6: 0.7115879795112698,
    10: 1.08144358860152,
    11: 0.5092888854724004,
}


@pytest.mark.parametrize("k,expect", sorted(EULER_1E4.items()))
def test_euler_frozen_values(k, expect):
    assert singular_series_euler(k, 10**4) == pytest.approx(expect, rel=1e-13)


def test_euler_tiny_cutoff_by_hand():
    # k=1: jacobi(-1,3) = -1 gives factor 1 + 1/2; jacobi(-1,5) = 1 gives factor 1 - 1/4
    assert singular_series_euler(1, 5) == pytest.approx(1.5 * 0.75, rel=1e-15)
    assert singular_series_euler(1, 4) == pytest.approx(1.5, rel=1e-15)


def test_euler_bulk_matches_scalar():
    bulk = singular_series_euler_bulk(200, 10**4)
    for k in range(1, 201):
        assert bulk[k] == pytest.approx(singular_series_euler(k, 10**4), rel=1e-12), k


# ---------------------------------------------------------------------------
# L-values

L_FROZEN = {
    1: 0.7853981633974483,   # pi/4 exactly
    2: 1.1107207345395915,
    3: 0.906899682117109,
    5: 1.4049629462081452,
    7: 0.5937052058618629,
}


@pytest.mark.parametrize("k,expect", sorted(L_FROZEN.items()))
def test_l_value_against_digamma_formula(k, expect):
    # frozen values come from the digamma identity; recompute the oracle too
    assert digamma_l_oracle(k) == pytest.approx(expect, abs=1e-12)
    assert l_value(k, 1e-9) == pytest.approx(expect, abs=1e-9)


@pytest.mark.parametrize("tol", [1e-2, 1e-4, 1e-6, 1e-8])
def test_l_value_tolerance_is_honored(tol):
    assert abs(l_value(1, tol) - math.pi / 4) <= tol


def test_l_value_ceiling_diagnostic():
    with pytest.raises(ValueError, match="ceiling"):
        l_value(1, 1e-6, n_ceiling=10)


def test_l_value_rejects_bad_arguments():
    with pytest.raises(ValueError):
        l_value(0, 1e-6)
    with pytest.raises(ValueError):
        l_value(3, 0.0)


# ---------------------------------------------------------------------------
# accelerated product, cross-method agreement


def test_sl_product_equals_euler_times_l():
    for k in (1, 2, 3, 7, 10):
        sl = sl_product(k, 1e-7)
        approx = singular_series_euler(k, 10**6) * l_value(k, 1e-7)
        assert sl == pytest.approx(approx, abs=5e-4), k


def test_lmethod_agrees_with_high_accuracy_reference():
    # reference: 4/pi times the accelerated product over p <= 1e8
    assert singular_series_lmethod(1, 1e-6) == pytest.approx(1.3728134628181987, abs=1e-6)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 6, 7, 10, 11])
def test_lmethod_agrees_with_euler(k):
    assert singular_series_lmethod(k, 1e-6) == pytest.approx(
        singular_series_euler(k, 10**6), abs=2e-3
    )


def test_dispatch_by_config():
    assert singular_series(5, SingularCfg()) == singular_series_euler(5, 10**4)
    assert singular_series(5, SingularCfg(method="lmethod", tol=1e-6)) == singular_series_lmethod(5, 1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        SingularCfg(method="nope")
    with pytest.raises(ValueError):
        SingularCfg(tol=-1.0)
    with pytest.raises(ValueError):
        SingularCfg(euler_cutoff=1)


# ---------------------------------------------------------------------------
# Dirichlet form: partial sums and tails

PARTIAL_FROZEN = {
    (1, 1): 1.0,
    (1, 3): 1.5,
    (1, 5): 1.25,
    (2, 9): 0.9166666666666666,
    (3, 25): 1.1523989898989897,
}


@pytest.mark.parametrize("k,qmax,expect", [(k, q, v) for (k, q), v in sorted(PARTIAL_FROZEN.items())])
def test_dirichlet_partial_frozen(k, qmax, expect):
    assert dirichlet_partial(k, qmax) == pytest.approx(expect, rel=1e-15)


def test_dirichlet_partial_matches_term_by_term():
    # mu(q)/phi(q) * jacobi(-k, q) over odd q, straight from the definitions
    for k in (1, 4, 9):
        expect = 0.0
        for q in range(1, 60, 2):
            mu, phi = mobius_phi(q)
            expect += mu / phi * jacobi(-k, q)
        assert dirichlet_partial(k, 59) == pytest.approx(expect, rel=1e-12)


TAIL_FROZEN = {
    (1, 101): -0.022959245669505135,
    (2, 101): 0.01617756520928404,
    (5, 501): -0.031389330308144836,
}


@pytest.mark.parametrize("k,q1,expect", [(k, q, v) for (k, q), v in sorted(TAIL_FROZEN.items())])
def test_tail_phi_frozen(k, q1, expect):
    assert tail_phi(k, q1, 1e-6) == pytest.approx(expect, abs=1e-9)


def test_tail_plus_partial_reconstructs_full_value():
    for k in (1, 2, 5):
        full = singular_series_lmethod(k, 1e-7)
        assert tail_phi(k, 101, 1e-7) + dirichlet_partial(k, 101) == pytest.approx(full, abs=1e-6)


# ---------------------------------------------------------------------------
# sandwich bounds


def test_sandwich_endpoints_match_known_constants():
    # twin-prime constant C2 and pi^2/8, via direct products over p <= 1e6
    lo, hi = sandwich_bounds(10**6)
    assert lo == pytest.approx(0.6601618158468696, abs=1e-6)
    assert hi == pytest.approx(math.pi**2 / 8, abs=1e-6)


def test_sandwich_holds_on_small_squarefree_range():
    lo, hi = sandwich_bounds(10**6)
    for k in range(1, 301):
        if not squarefree(k):
            continue
        report = sandwich_check(k, tol=1e-4, bounds_cutoff=10**6)
        assert report.passed, (k, report)
        assert lo - 1e-4 <= report.product <= hi + 1e-4


def test_sandwich_report_fields():
    report = sandwich_check(1, tol=1e-4, bounds_cutoff=10**6)
    assert report.k == 1
    assert report.product == pytest.approx(sl_product(1, 2.5e-5), abs=1e-6)
