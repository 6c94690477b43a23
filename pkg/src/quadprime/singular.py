"""Singular series for the quadratic progression n^2 + k, and its building blocks.

The density constant attached to k is

    S(k) = prod_{p > 2} (1 - chi_k(p) / (p - 1)),        chi_k(p) = jacobi(-k, p),

with equivalent forms used here:

  * truncated Euler product over odd p <= P          (singular_series_euler)
  * Dirichlet form  sum_{q odd} mu(q)/phi(q) chi_k(q) (dirichlet_partial, tail_phi)
  * accelerated form S(k) = SL(k) / L(k), where

        SL(k) = prod_{p > 2} (p^2 - p - p chi) / (p^2 - p - (p-1) chi)

    has 1 + O(p^-2) factors (absolutely convergent) and
    L(k) = sum_{n odd} chi_k(n)/n is a nonzero Dirichlet L-value at 1 for a
    real character of modulus 4k                      (singular_series_lmethod)

SL(k) is sandwiched between prod (p^2-2p)/(p^2-2p+1) and prod p^2/(p^2-1)
over odd primes, which sandwich_check verifies numerically.

Also here: sigma_q, the exact complete exponential sum
sum_r sum_{a coprime q} e(-(a/q)(k + r^2)), evaluated in integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import divisors, jacobi, mobius_phi
from .errors import VerificationError
from .sieve import build_mobius_phi_tables, build_prime_table

L_SUM_CEILING = 100_000_000
_SUM_CHUNK = 1 << 20

_prime_cache: dict[str, object] = {"table": None}


def _primes_upto(limit: int) -> np.ndarray:
    """Shared ascending-prime array; grows monotonically, slices served by bisection."""
    table = _prime_cache["table"]
    if table is None or table.limit < limit:
        table = build_prime_table(limit)
        _prime_cache["table"] = table
    primes = table.primes
    return primes[: np.searchsorted(primes, limit, side="right")]


def _odd_primes_upto(limit: int) -> np.ndarray:
    return _primes_upto(limit)[1:]  # drop 2


@dataclass
class SingularCfg:
    """How to evaluate S(k): truncated Euler product or the L-accelerated form."""

    method: str = "euler"
    euler_cutoff: int = 10_000
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.method not in ("euler", "lmethod"):
            raise ValueError(f"SingularCfg: unknown method {self.method!r}")
        if self.euler_cutoff < 3:
            raise ValueError(f"SingularCfg: euler_cutoff must be >= 3, got {self.euler_cutoff}")
        if not self.tol > 0:
            raise ValueError(f"SingularCfg: tol must be positive, got {self.tol}")


def sigma_q(q: int, k: int) -> int:
    """Exact value of sum_{r=1}^{q} sum_{a<=q, gcd(a,q)=1} e(-(a/q)(k + r^2)).

    The inner sum over a is the Ramanujan sum c_q(k + r^2), which is the
    integer mu(q/g) phi(q)/phi(q/g) with g = gcd(q, k + r^2); so the whole
    double sum collapses to q exact integer terms.
    """
    if q < 1:
        raise ValueError(f"sigma_q: q must be >= 1, got {q}")
    if k < 1:
        raise ValueError(f"sigma_q: k must be >= 1, got {k}")
    mp = {d: mobius_phi(d) for d in divisors(q)}
    phi_q = mp[q][1]
    total = 0
    for r in range(1, q + 1):
        g = math.gcd(q, k + r * r)
        mu_d, phi_d = mp[q // g]
        total += mu_d * (phi_q // phi_d)
    return total


@lru_cache(maxsize=128)
def _chi_table(k: int) -> np.ndarray:
    """chi_k(r) = jacobi(-k, r) for odd r, 0 for even r, tabulated on one period.

    The map n -> jacobi(-k, n) on odd n is completely multiplicative and
    periodic mod 4k, so the table is filled from values at primes by strided
    multiplication (one factor per p-adic valuation level).
    """
    m = 4 * k
    chi = np.zeros(m, dtype=np.int8)
    chi[1::2] = 1
    for p in _odd_primes_upto(m - 1) if m > 3 else []:
        p = int(p)
        v = jacobi(-k, p)
        if v == 1:
            continue
        pe = p
        while pe < m:
            chi[pe::pe] *= v
            pe *= p
    return chi


def chi_k(k: int, n: int) -> int:
    """jacobi(-k, n) for odd n via the period-4k table (0 on even n)."""
    return int(_chi_table(k)[n % (4 * k)])


def singular_series_euler(k: int, cutoff: int, *, primes: np.ndarray | None = None) -> float:
    """Truncated Euler product over odd primes p <= cutoff.

    Args:
        k: progression offset, >= 1.
        cutoff: prime cutoff P >= 3.
        primes: optional ascending prime array covering [2, cutoff].
    """
    if k < 1:
        raise ValueError(f"singular_series_euler: k must be >= 1, got {k}")
    if cutoff < 3:
        raise ValueError(f"singular_series_euler: cutoff must be >= 3, got {cutoff}")
    if primes is None:
        p = _odd_primes_upto(cutoff)
    else:
        lo = np.searchsorted(primes, 3, side="left")
        hi = np.searchsorted(primes, cutoff, side="right")
        p = np.asarray(primes[lo:hi], dtype=np.int64)
    chi = _chi_table(k)[p % (4 * k)].astype(np.float64)
    pf = p.astype(np.float64)
    return float(np.prod(1.0 - chi / (pf - 1.0)))


def _legendre_table(p: int) -> np.ndarray:
    """(m/p) for m = 0..p-1 as int8, by enumerating the nonzero squares."""
    t = np.full(p, -1, dtype=np.int8)
    t[0] = 0
    r = np.arange(1, p, dtype=np.int64)
    t[(r * r) % p] = 1
    return t


def singular_series_euler_bulk(y: int, cutoff: int) -> np.ndarray:
    """Truncated Euler product for every k = 1..y at once.

    One pass per odd prime p <= cutoff with a length-p Legendre lookup table,
    so the cost is O(pi(cutoff) * y) vectorised operations instead of
    y separate Jacobi evaluations per prime.  Index 0 of the result is unused
    (set to 0).
    """
    if y < 1:
        raise ValueError(f"singular_series_euler_bulk: y must be >= 1, got {y}")
    if cutoff < 3:
        raise ValueError(f"singular_series_euler_bulk: cutoff must be >= 3, got {cutoff}")
    ks = np.arange(0, y + 1, dtype=np.int64)
    acc = np.ones(y + 1, dtype=np.float64)
    for p in _odd_primes_upto(cutoff):
        p = int(p)
        leg = _legendre_table(p).astype(np.float64)
        acc *= 1.0 - leg[np.mod(-ks, p)] / (p - 1.0)
    acc[0] = 0.0
    return acc


def l_value(k: int, tol: float, *, n_ceiling: int = L_SUM_CEILING) -> float:
    """L(k) = sum over odd n of jacobi(-k, n)/n, to absolute accuracy tol.

    Direct summation to N plus the tail's partial-summation main term.  The
    character partial sums S(n) are periodic mod 4k (the full-period sum is 0
    because the character is non-principal), so two rounds of partial
    summation give

        tail = (mu - S(N))/(N+1) + remainder,   |remainder| <= B/(N+1)^2,

    where mu is the period mean of S and B the window bound for the zero-mean
    walk S - mu (both computed exactly from one period, and both controlled by
    the Polya-Vinogradov bound for the modulus).  N = sqrt(2B/tol); if that
    exceeds n_ceiling the call fails with a diagnostic rather than degrading
    accuracy.
    """
    if k < 1:
        raise ValueError(f"l_value: k must be >= 1, got {k}")
    if not tol > 0:
        raise ValueError(f"l_value: tol must be positive, got {tol}")
    m = 4 * k
    chi = _chi_table(k)
    s_walk = np.cumsum(chi[np.arange(1, m + 1) % m].astype(np.int64))  # S(1)..S(m)
    if s_walk[-1] != 0:
        raise VerificationError(f"l_value: character mod {m} does not sum to 0 over a period")
    mu = float(np.sum(s_walk)) / m
    centered = np.cumsum(s_walk.astype(np.float64) - mu)
    b_window = float(np.max(centered) - np.min(centered))
    n_terms = max(int(math.ceil(math.sqrt(2.0 * b_window / tol))), m, 16)
    if n_terms > n_ceiling:
        raise ValueError(
            f"l_value: direct summation needs N = {n_terms} terms for tol = {tol} "
            f"(walk bound {b_window:.1f}, modulus {m}), over the ceiling {n_ceiling}"
        )
    chi_f = chi.astype(np.float64)
    parts = []
    for lo in range(1, n_terms + 1, _SUM_CHUNK):
        n = np.arange(lo, min(lo + _SUM_CHUNK, n_terms + 1), dtype=np.int64)
        parts.append(float(np.sum(chi_f[n % m] / n)))
    s_at_n = float(s_walk[(n_terms - 1) % m])
    total = math.fsum(parts) + (mu - s_at_n) / (n_terms + 1)
    if total == 0.0:
        raise VerificationError(f"l_value: got exactly 0 for k = {k}, which the theory forbids")
    return total


def _sl_cutoff(tol: float) -> int:
    # |log tail| <= sum_{n > P} 1/(n-1)^2 < 1/(P-1); SL < 1.3, so P = 1.5/tol is safe.
    return max(int(math.ceil(1.5 / tol)) + 1, 11)


def sl_product(k: int, tol: float, *, cutoff: int | None = None) -> float:
    """S(k) * L(k) as the absolutely convergent product over odd primes.

    Factor at p: (p^2 - p - p chi) / (p^2 - p - (p-1) chi), which is
    1 - 1/(p-1)^2, exactly 1, or 1 + 1/(p^2-1) according to chi = +1, 0, -1.
    """
    if k < 1:
        raise ValueError(f"sl_product: k must be >= 1, got {k}")
    if not tol > 0:
        raise ValueError(f"sl_product: tol must be positive, got {tol}")
    p = _odd_primes_upto(cutoff if cutoff is not None else _sl_cutoff(tol))
    chi = _chi_table(k)[p % (4 * k)].astype(np.float64)
    pf = p.astype(np.float64)
    base = pf * pf - pf
    return float(np.prod((base - pf * chi) / (base - (pf - 1.0) * chi)))


def sl_product_bulk(y: int, tol: float) -> np.ndarray:
    """sl_product for every k = 1..y, vectorised per prime (index 0 unused)."""
    if y < 1:
        raise ValueError(f"sl_product_bulk: y must be >= 1, got {y}")
    ks = np.arange(0, y + 1, dtype=np.int64)
    acc = np.ones(y + 1, dtype=np.float64)
    for p in _odd_primes_upto(_sl_cutoff(tol)):
        p = int(p)
        chi = _legendre_table(p).astype(np.float64)[np.mod(-ks, p)]
        base = float(p) * (p - 1.0)
        acc *= (base - p * chi) / (base - (p - 1.0) * chi)
    acc[0] = 0.0
    return acc


@lru_cache(maxsize=4096)
def singular_series_lmethod(k: int, tol: float) -> float:
    """S(k) = SL(k)/L(k) with the tolerance split between the two factors.

    A coarse pass sizes the split: the product needs absolute accuracy
    ~ tol*L/4 and the L-value ~ tol*L^2/(4*SL), which keeps the quotient
    within tol.  Results are cached per (k, tol) since sweeps over Q1 revisit
    the same k.
    """
    if k < 1:
        raise ValueError(f"singular_series_lmethod: k must be >= 1, got {k}")
    if not tol > 0:
        raise ValueError(f"singular_series_lmethod: tol must be positive, got {tol}")
    l_coarse = l_value(k, 0.02)
    sl_coarse = sl_product(k, 0.01)
    tol_sl = tol * abs(l_coarse) / 4.0
    tol_l = tol * l_coarse * l_coarse / (4.0 * abs(sl_coarse))
    value = sl_product(k, tol_sl) / l_value(k, tol_l)
    if not value > 0.0:
        raise VerificationError(f"singular_series_lmethod: S({k}) came out non-positive ({value})")
    return value


def dirichlet_partial(
    k: int,
    q_max: int,
    *,
    mu: np.ndarray | None = None,
    phi: np.ndarray | None = None,
) -> float:
    """sum over odd q <= q_max of mu(q)/phi(q) * jacobi(-k, q)."""
    if k < 1:
        raise ValueError(f"dirichlet_partial: k must be >= 1, got {k}")
    if q_max < 1:
        raise ValueError(f"dirichlet_partial: q_max must be >= 1, got {q_max}")
    if mu is None or phi is None:
        mu, phi = build_mobius_phi_tables(q_max)
    q = np.arange(1, q_max + 1, 2, dtype=np.int64)
    chi = _chi_table(k)[q % (4 * k)].astype(np.float64)
    terms = mu[q].astype(np.float64) / phi[q].astype(np.float64) * chi
    return float(np.sum(terms))


def tail_phi(
    k: int,
    q1: int,
    tol: float,
    *,
    mu: np.ndarray | None = None,
    phi: np.ndarray | None = None,
) -> float:
    """Phi(k) = S(k) - (partial Dirichlet sum over odd q <= q1), i.e. the q > q1 tail.

    Computed by subtraction: the accelerated full value minus the exact
    partial sum.  Direct tail summation would converge too slowly to be
    trustworthy at any usable cutoff.
    """
    return singular_series_lmethod(k, tol) - dirichlet_partial(k, q1, mu=mu, phi=phi)


_sandwich_cache: dict[int, tuple[float, float]] = {}

SANDWICH_PRIME_CUTOFF = 100_000_000


def sandwich_bounds(cutoff: int = SANDWICH_PRIME_CUTOFF) -> tuple[float, float]:
    """(lower, upper) endpoints for SL: prod (1 - 1/(p-1)^2) and prod p^2/(p^2-1).

    Truncating at 10^8 leaves a tail below 1e-9 (the log-tail is under
    sum_{p > P} 1/(p-1)^2 ~ 1/(P log P)).  Computed once per cutoff and cached;
    the first call costs a sieve to the cutoff.
    """
    if cutoff not in _sandwich_cache:
        p = _odd_primes_upto(cutoff).astype(np.float64)
        lower = math.exp(float(np.sum(np.log1p(-1.0 / ((p - 1.0) ** 2)))))
        upper = math.exp(-float(np.sum(np.log1p(-1.0 / (p * p)))))
        _sandwich_cache[cutoff] = (lower, upper)
    return _sandwich_cache[cutoff]


@dataclass
class SandwichReport:
    k: int
    product: float
    lower: float
    upper: float
    passed: bool


def sandwich_check(k: int, tol: float = 1e-4, *, bounds_cutoff: int = SANDWICH_PRIME_CUTOFF) -> SandwichReport:
    """Check lower - tol <= SL(k) <= upper + tol for squarefree k."""
    lower, upper = sandwich_bounds(bounds_cutoff)
    product = sl_product(k, tol / 4.0)
    passed = (lower - tol) <= product <= (upper + tol)
    return SandwichReport(k, product, lower, upper, passed)


def singular_series(k: int, cfg: SingularCfg) -> float:
    """Dispatch on cfg.method."""
    if cfg.method == "euler":
        return singular_series_euler(k, cfg.euler_cutoff)
    return singular_series_lmethod(k, cfg.tol)
