"""Bulk sieved tables: primes, von Mangoldt values over a window, squarefree flags, mu/phi.

All builders are pure numpy and deterministic.  The von Mangoldt builder works
in fixed-size segments so the peak footprint beyond the output array stays
bounded; every builder checks a memory budget (default 2 GiB, overridable via
the QUADPRIME_BUDGET_BYTES environment variable or a keyword) before
allocating.

Binary cache layout (optional, never consulted implicitly)
----------------------------------------------------------
Little-endian throughout::

    magic   4 bytes   b"QPTB"
    version u32       currently 1
    lo      u64       first index covered
    hi      u64       last index covered
    payload           raw array values, dtype by file kind:
                        .lam  float64  Lambda(m) for m = lo..hi
                        .prm  int64    ascending primes <= hi   (lo = 0)
                        .sqf  uint8    squarefree flags, index 0..hi (lo = 0)
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

DEFAULT_SEGMENT = 1 << 20
DEFAULT_BUDGET_BYTES = 2 << 30

_MAGIC = b"QPTB"
_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def memory_budget(budget: int | None = None) -> int:
    """Resolve the effective byte budget: explicit arg, else env, else 2 GiB."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("QUADPRIME_BUDGET_BYTES")
    if env is not None:
        return int(env)
    return DEFAULT_BUDGET_BYTES


def _check_budget(nbytes: int, budget: int | None, what: str) -> None:
    limit = memory_budget(budget)
    if nbytes > limit:
        raise MemoryError(
            f"{what} needs {nbytes} bytes, over the {limit}-byte budget "
            f"(raise QUADPRIME_BUDGET_BYTES to allow this)"
        )


@dataclass
class PrimeTable:
    """Ascending primes up to and including `limit`.

    Attributes:
        limit: inclusive sieving bound.
        primes: int64 array of all primes <= limit.
    """

    limit: int
    primes: np.ndarray

    def count(self) -> int:
        return len(self.primes)


def build_prime_table(limit: int, budget: int | None = None) -> PrimeTable:
    """Sieve of Eratosthenes up to `limit` (inclusive).

    Args:
        limit: inclusive upper bound, >= 0.
        budget: optional byte budget override.

    Returns:
        PrimeTable with an int64 prime array.
    """
    if limit < 0:
        raise ValueError(f"build_prime_table: limit must be >= 0, got {limit}")
    _check_budget(limit + 1, budget, f"prime sieve to {limit}")
    if limit < 2:
        return PrimeTable(limit, np.empty(0, dtype=np.int64))
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return PrimeTable(limit, np.nonzero(flags)[0].astype(np.int64))


@dataclass
class LambdaTable:
    """Von Mangoldt values Lambda(m) for m in the window [lo, hi].

    Attributes:
        lo: first index covered (>= 1).
        values: float64 array, values[m - lo] = Lambda(m).
    """

    lo: int
    values: np.ndarray

    @property
    def hi(self) -> int:
        return self.lo + len(self.values) - 1

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def lookup(self, m: int) -> float:
        if not self.lo <= m <= self.hi:
            raise IndexError(f"Lambda table covers [{self.lo}, {self.hi}], asked for {m}")
        return float(self.values[m - self.lo])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """View of the values for m = lo..hi (both inside the table)."""
        if not self.covers(lo, hi):
            raise IndexError(f"Lambda table covers [{self.lo}, {self.hi}], asked for [{lo}, {hi}]")
        return self.values[lo - self.lo : hi - self.lo + 1]


def build_lambda_table(
    lo: int,
    hi: int,
    segment_size: int = DEFAULT_SEGMENT,
    budget: int | None = None,
) -> LambdaTable:
    """Segmented sieve of Lambda(m) over [lo, hi].

    Primes in a segment get log m; afterwards every proper prime power p^j
    (j >= 2, p <= sqrt(hi)) inside the window is overwritten with log p.
    Segments are independent, so segment size only affects the working set,
    never the output.

    Args:
        lo: window start, >= 1.
        hi: window end, >= lo.
        segment_size: working segment length (default 2**20).
        budget: optional byte budget override.

    Returns:
        LambdaTable covering [lo, hi].
    """
    if lo < 1 or hi < lo:
        raise ValueError(f"build_lambda_table: need 1 <= lo <= hi, got [{lo}, {hi}]")
    if segment_size < 1:
        raise ValueError(f"build_lambda_table: segment_size must be >= 1, got {segment_size}")
    root = math.isqrt(hi)
    _check_budget(8 * (hi - lo + 1) + root + 1, budget, f"Lambda table over [{lo}, {hi}]")

    base = build_prime_table(root, budget=budget).primes
    values = np.zeros(hi - lo + 1, dtype=np.float64)

    for seg_lo in range(lo, hi + 1, segment_size):
        seg_hi = min(seg_lo + segment_size - 1, hi)
        is_p = np.ones(seg_hi - seg_lo + 1, dtype=bool)
        if seg_lo == 1:
            is_p[0] = False
        for p in base:
            p = int(p)
            start = max(p * p, ((seg_lo + p - 1) // p) * p)
            if start > seg_hi:
                continue
            is_p[start - seg_lo :: p] = False
        idx = np.nonzero(is_p)[0]
        values[idx + (seg_lo - lo)] = np.log(idx.astype(np.float64) + seg_lo)

    # Proper prime powers: Lambda(p^j) = log p, not log(p^j).
    for p in base:
        p = int(p)
        pj = p * p
        while pj <= hi:
            if pj >= lo:
                values[pj - lo] = math.log(p)
            pj *= p
    return LambdaTable(lo, values)


@dataclass
class SquarefreeTable:
    """Boolean squarefree flags for 0..limit (index 0 is False)."""

    limit: int
    flags: np.ndarray

    def is_squarefree(self, k: int) -> bool:
        if not 1 <= k <= self.limit:
            raise IndexError(f"squarefree table covers [1, {self.limit}], asked for {k}")
        return bool(self.flags[k])

    def count(self) -> int:
        return int(np.count_nonzero(self.flags))


def build_squarefree_table(limit: int, budget: int | None = None) -> SquarefreeTable:
    """Flag squarefree integers up to `limit` by striking p^2 multiples."""
    if limit < 1:
        raise ValueError(f"build_squarefree_table: limit must be >= 1, got {limit}")
    _check_budget(limit + 1, budget, f"squarefree table to {limit}")
    flags = np.ones(limit + 1, dtype=bool)
    flags[0] = False
    for p in build_prime_table(math.isqrt(limit), budget=budget).primes:
        sq = int(p) * int(p)
        flags[sq::sq] = False
    return SquarefreeTable(limit, flags)


def build_mobius_phi_tables(limit: int, budget: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mu and phi for 0..limit as (int8, int64) arrays.

    mu[0] and phi[0] are 0 by convention.  Each prime is applied once:
    phi picks up its (1 - 1/p) factor by exact subtraction, mu flips sign
    on multiples of p and zeroes on multiples of p^2.
    """
    if limit < 1:
        raise ValueError(f"build_mobius_phi_tables: limit must be >= 1, got {limit}")
    _check_budget(9 * (limit + 1), budget, f"mu/phi tables to {limit}")
    mu = np.ones(limit + 1, dtype=np.int8)
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in build_prime_table(limit, budget=budget).primes:
        p = int(p)
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p :: p * p] = 0
        phi[p::p] -= phi[p::p] // p
    mu[0] = 0
    return mu, phi


# --- binary cache ---------------------------------------------------------


def _save(path: str, lo: int, hi: int, payload: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, lo, hi))
        fh.write(payload.tobytes())


def _load(path: str, dtype: str, count: int | None = None) -> tuple[int, int, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, lo, hi = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        data = np.frombuffer(fh.read(), dtype=dtype)
    if count is not None and len(data) != count:
        raise ValueError(f"{path}: payload length {len(data)} != expected {count}")
    return lo, hi, data


def save_lambda_table(table: LambdaTable, path: str) -> None:
    _save(path, table.lo, table.hi, table.values.astype("<f8"))


def load_lambda_table(path: str) -> LambdaTable:
    lo, hi, data = _load(path, "<f8")
    if len(data) != hi - lo + 1:
        raise ValueError(f"{path}: payload length {len(data)} != window [{lo}, {hi}]")
    return LambdaTable(lo, data.astype(np.float64))


def save_prime_table(table: PrimeTable, path: str) -> None:
    _save(path, 0, table.limit, table.primes.astype("<i8"))


def load_prime_table(path: str) -> PrimeTable:
    _, hi, data = _load(path, "<i8")
    return PrimeTable(hi, data.astype(np.int64))


def save_squarefree_table(table: SquarefreeTable, path: str) -> None:
    _save(path, 0, table.limit, table.flags.astype("<u1"))


def load_squarefree_table(path: str) -> SquarefreeTable:
    _, hi, data = _load(path, "<u1")
    if len(data) != hi + 1:
        raise ValueError(f"{path}: payload length {len(data)} != limit {hi}")
    return SquarefreeTable(hi, data.astype(bool))
