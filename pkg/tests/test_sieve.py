import math

import numpy as np
import pytest

from quadprime.arith import mobius_phi, von_mangoldt
from quadprime.sieve import (
    build_lambda_table,
    build_mobius_phi_tables,
    build_prime_table,
    build_squarefree_table,
    load_lambda_table,
    load_prime_table,
    load_squarefree_table,
    memory_budget,
    save_lambda_table,
    save_prime_table,
    save_squarefree_table,
)

# pi(10^n) for n = 1..7
PRIME_COUNTS = {10: 4, 100: 25, 1000: 168, 10**4: 1229, 10**5: 9592, 10**6: 78498, 10**7: 664579}


@pytest.mark.parametrize("limit,count", sorted(PRIME_COUNTS.items()))
def test_prime_counts(limit, count):
    assert build_prime_table(limit).count() == count


def test_prime_table_small_limits():
    assert build_prime_table(0).primes.tolist() == []
    assert build_prime_table(1).primes.tolist() == []
    assert build_prime_table(2).primes.tolist() == [2]
    assert build_prime_table(30).primes.tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_lambda_table_matches_pointwise_definition():
    table = build_lambda_table(1, 3000)
    for m in range(1, 3001):
        assert table.lookup(m) == pytest.approx(von_mangoldt(m), abs=1e-12), m


def test_lambda_table_offset_window():
    lo, hi = 10**6, 10**6 + 2000
    table = build_lambda_table(lo, hi)
    assert table.lo == lo and table.hi == hi
    for m in range(lo, hi + 1, 97):
        assert table.lookup(m) == pytest.approx(von_mangoldt(m), abs=1e-12), m


def test_lambda_table_segment_size_does_not_change_values():
    a = build_lambda_table(500, 5000, segment_size=64)
    b = build_lambda_table(500, 5000, segment_size=4096)
    c = build_lambda_table(500, 5000)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.values, c.values)


def test_lambda_table_window_and_bounds():
    table = build_lambda_table(100, 200)
    win = table.window(150, 160)
    assert win.shape == (11,)
    assert win[0] == table.lookup(150)
    with pytest.raises(IndexError):
        table.lookup(99)
    with pytest.raises(IndexError):
        table.window(150, 201)


def test_lambda_builder_rejects_bad_windows():
    with pytest.raises(ValueError):
        build_lambda_table(0, 10)
    with pytest.raises(ValueError):
        build_lambda_table(10, 5)


def mobius_formula_squarefree_count(limit):
    """#{n <= limit squarefree} = sum_d mu(d) * floor(limit / d^2)."""
    total = 0
    for d in range(1, math.isqrt(limit) + 1):
        total += mobius_phi(d)[0] * (limit // (d * d))
    return total


def test_squarefree_count_to_1e6():
    table = build_squarefree_table(10**6)
    got = int(np.count_nonzero(table.flags[1:]))
    assert got == mobius_formula_squarefree_count(10**6) == 607926


def test_squarefree_flags_pointwise():
    table = build_squarefree_table(2000)
    for n in range(1, 2001):
        assert bool(table.flags[n]) == (mobius_phi(n)[0] != 0), n
    assert table.is_squarefree(10)
    assert not table.is_squarefree(12)
    with pytest.raises(IndexError):
        table.is_squarefree(2001)


def test_mobius_phi_tables_match_scalar():
    mu, phi = build_mobius_phi_tables(2000)
    for n in range(1, 2001):
        assert (int(mu[n]), int(phi[n])) == mobius_phi(n), n


# ---------------------------------------------------------------------------
# binary caches


def test_lambda_cache_roundtrip(tmp_path):
    table = build_lambda_table(50, 4000)
    path = str(tmp_path / "window.lam")
    save_lambda_table(table, path)
    back = load_lambda_table(path)
    assert back.lo == table.lo and back.hi == table.hi
    assert np.array_equal(back.values, table.values)


def test_prime_cache_roundtrip(tmp_path):
    table = build_prime_table(10**5)
    path = str(tmp_path / "primes.prm")
    save_prime_table(table, path)
    back = load_prime_table(path)
    assert back.limit == table.limit
    assert np.array_equal(back.primes, table.primes)


def test_squarefree_cache_roundtrip(tmp_path):
    table = build_squarefree_table(5000)
    path = str(tmp_path / "flags.sqf")
    save_squarefree_table(table, path)
    back = load_squarefree_table(path)
    assert back.limit == table.limit
    assert np.array_equal(back.flags, table.flags)


def test_cache_rejects_bad_magic(tmp_path):
    path = tmp_path / "bogus.lam"
    path.write_bytes(b"NOPE" + b"\x00" * 30)
    with pytest.raises(ValueError, match="magic"):
        load_lambda_table(str(path))


def test_cache_rejects_truncated_payload(tmp_path):
    table = build_lambda_table(1, 100)
    path = tmp_path / "cut.lam"
    save_lambda_table(table, str(path))
    good = path.read_bytes()
    path.write_bytes(good[:-8])
    with pytest.raises(ValueError, match="length"):
        load_lambda_table(str(path))


# ---------------------------------------------------------------------------
# memory budget


def test_budget_blocks_oversized_builds():
    with pytest.raises(MemoryError, match="budget"):
        build_prime_table(10**9, budget=10**6)
    with pytest.raises(MemoryError, match="budget"):
        build_lambda_table(1, 10**9, budget=10**6)


def test_budget_resolution_order(monkeypatch):
    monkeypatch.delenv("QUADPRIME_BUDGET_BYTES", raising=False)
    assert memory_budget() == 2 << 30
    monkeypatch.setenv("QUADPRIME_BUDGET_BYTES", "12345678")
    assert memory_budget() == 12345678
    assert memory_budget(999) == 999  # explicit argument wins
