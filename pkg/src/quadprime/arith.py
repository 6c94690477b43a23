"""Exact scalar number theory: Jacobi symbols, 64-bit primality, pointwise Lambda, mu, phi.

Everything in this module is integer-exact (the only float is the log in
von_mangoldt).  Bulk/table variants of these functions live in `sieve`.
"""

from __future__ import annotations

import math

# Deterministic Miller-Rabin witness set for every n < 2^64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_U64_MAX = (1 << 64) - 1


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 1.

    Negative a is fine (it is reduced mod n, which folds in the (-1/n)
    factor).  Even or non-positive n is a hard error, not a value.
    """
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"jacobi: modulus must be odd and positive, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def is_prime(n: int) -> bool:
    """Deterministic primality for 0 <= n < 2^64 (Miller-Rabin, fixed witnesses)."""
    if n < 0 or n > _U64_MAX:
        raise ValueError(f"is_prime: n must fit in an unsigned 64-bit word, got {n}")
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _iroot(n: int, k: int) -> int:
    """Floor of the k-th root of n >= 0, exact (float seed + integer correction)."""
    if k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    if n == 0:
        return 0
    r = int(round(n ** (1.0 / k)))
    while r > 1 and r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def prime_power_base(n: int) -> int | None:
    """Return p when n = p^e for a prime p (e >= 1), else None."""
    if n < 2:
        return None
    # Walk exponents from the top; the first exact root is not itself a
    # perfect power, so n is a prime power iff that base is prime.
    for e in range(n.bit_length() - 1, 1, -1):
        r = _iroot(n, e)
        if r**e == n:
            return r if is_prime(r) else None
    return n if is_prime(n) else None


def von_mangoldt(n: int) -> float:
    """Lambda(n): log p when n = p^e, else 0.0."""
    if n < 1:
        raise ValueError(f"von_mangoldt: n must be >= 1, got {n}")
    p = prime_power_base(n)
    return math.log(p) if p is not None else 0.0


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as [(p, e), ...] by trial division."""
    if n < 1:
        raise ValueError(f"factorize: n must be >= 1, got {n}")
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    p = 5
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        # 6k +/- 1 wheel
        p += 2 if p % 6 == 5 else 4
    if n > 1:
        out.append((n, 1))
    return out


def mobius_phi(n: int) -> tuple[int, int]:
    """(mu(n), phi(n)) for n >= 1, via one factorization."""
    mu, phi = 1, 1
    for p, e in factorize(n):
        phi *= (p - 1) * p ** (e - 1)
        mu = 0 if e > 1 else -mu
    return mu, phi


def divisors(n: int) -> list[int]:
    """All positive divisors of n >= 1, ascending."""
    out = [1]
    for p, e in factorize(n):
        out = [d * p**j for d in out for j in range(e + 1)]
    return sorted(out)
