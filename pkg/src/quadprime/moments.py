"""Error statistics for psi(x; k) = sum_{n <= x} Lambda(n^2 + k) against S(k) x.

A sweep fixes x, runs k over 1..y, and compares the sieved count psi(x; k)
with the predicted main term S(k) * x.  The headline statistics are the
second moment of the error over squarefree k, its normalisation by y x^2,
and exceptional counts at thresholds x / (log x)^B.

Determinism contract: a sweep's output is bit-identical across runs and
worker counts.  psi accumulation is one ascending-n array add per n into
disjoint k-shards (so shard layout cannot change any float), and every moment
is reduced with math.fsum (exact summation) in ascending k.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .sieve import LambdaTable, build_lambda_table, build_squarefree_table, build_mobius_phi_tables
from .singular import (
    SingularCfg,
    singular_series_euler_bulk,
    singular_series_lmethod,
    singular_series,
    tail_phi,
)

EXCEPTIONAL_B_GRID = (0.5, 1.0, 1.5, 2.0)


@dataclass
class ErrorRecord:
    """One progression offset k: sieved count, predicted main term, difference."""

    k: int
    squarefree: bool
    psi: float
    singular: float
    error: float


@dataclass
class MomentSummary:
    """Sweep-level statistics at one (x, y)."""

    x: int
    y: int
    count_squarefree: int
    second_moment: float
    normalized: float
    exceptional: dict[float, int] = field(default_factory=dict)


@dataclass
class SweepResult:
    """Full per-k arrays from a sweep plus its summary (index = k, 0 unused)."""

    summary: MomentSummary
    squarefree: np.ndarray
    psi: np.ndarray
    singular: np.ndarray
    error: np.ndarray

    def records(self) -> list[ErrorRecord]:
        return [
            ErrorRecord(
                k=k,
                squarefree=bool(self.squarefree[k]),
                psi=float(self.psi[k]),
                singular=float(self.singular[k]),
                error=float(self.error[k]),
            )
            for k in range(1, self.summary.y + 1)
        ]


def psi_value(x: int, k: int, lam: LambdaTable) -> float:
    """sum_{n <= x} Lambda(n^2 + k) from a prebuilt table."""
    if x < 1 or k < 1:
        raise ValueError(f"psi_value: need x >= 1 and k >= 1, got x={x}, k={k}")
    n = np.arange(1, x + 1, dtype=np.int64)
    idx = n * n + k
    if not lam.covers(1 + k, x * x + k):
        raise IndexError(f"Lambda table covers [{lam.lo}, {lam.hi}], psi needs up to {x * x + k}")
    return float(np.sum(lam.values[idx - lam.lo]))


def error_record(
    k: int,
    x: int,
    lam: LambdaTable,
    cfg: SingularCfg,
    squarefree: bool | None = None,
) -> ErrorRecord:
    """psi, main term and error for a single k (squarefree flag computed if absent)."""
    if squarefree is None:
        from .arith import mobius_phi

        squarefree = mobius_phi(k)[0] != 0
    psi = psi_value(x, k, lam)
    sing = singular_series(k, cfg)
    return ErrorRecord(k=k, squarefree=bool(squarefree), psi=psi, singular=sing, error=psi - sing * x)


def _psi_bulk(x: int, y: int, lam: LambdaTable, workers: int) -> np.ndarray:
    """psi(x; k) for all k = 1..y: one window add per n, k-sharded for threads.

    Each k belongs to exactly one shard and its adds happen in ascending n,
    so the result is bit-identical for every worker count.
    """
    psi = np.zeros(y + 1, dtype=np.float64)

    def fill(k_lo: int, k_hi: int) -> None:
        out = psi[k_lo : k_hi + 1]
        for n in range(1, x + 1):
            base = n * n - lam.lo
            out += lam.values[base + k_lo : base + k_hi + 1]

    if workers <= 1:
        fill(1, y)
    else:
        bounds = np.linspace(1, y + 1, workers + 1, dtype=np.int64)
        spans = [(int(bounds[i]), int(bounds[i + 1] - 1)) for i in range(workers)]
        spans = [(lo, hi) for lo, hi in spans if hi >= lo]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda span: fill(*span), spans))
    return psi


def run_sweep(
    x: int,
    y: int,
    cfg: SingularCfg,
    workers: int = 1,
    *,
    segment_size: int | None = None,
    budget: int | None = None,
    warn_exponent: float = 3.0,
) -> SweepResult:
    """Full error sweep over k = 1..y at fixed x.

    The Euler cutoff is raised to max(cfg.euler_cutoff, x) so the main-term
    truncation error stays well below the psi fluctuation being measured.
    Warns (without failing) if y falls outside [x^2/(log x)^warn_exponent, x^2].
    """
    if x < 2:
        raise ValueError(f"run_sweep: x must be >= 2, got {x}")
    if y < 1:
        raise ValueError(f"run_sweep: y must be >= 1, got {y}")
    if workers < 1:
        raise ValueError(f"run_sweep: workers must be >= 1, got {workers}")
    lo_ok = x * x / math.log(x) ** warn_exponent
    if not lo_ok <= y <= x * x:
        warnings.warn(
            f"sweep at x={x}: y={y} outside the designed window [{lo_ok:.1f}, {x * x}]",
            stacklevel=2,
        )

    kwargs = {} if segment_size is None else {"segment_size": segment_size}
    lam = build_lambda_table(1, x * x + y, budget=budget, **kwargs)
    psi = _psi_bulk(x, y, lam, workers)

    if cfg.method == "euler":
        sing = singular_series_euler_bulk(y, max(cfg.euler_cutoff, x))
    else:
        sing = np.zeros(y + 1)
        for k in range(1, y + 1):
            sing[k] = singular_series_lmethod(k, cfg.tol)

    error = psi - sing * float(x)
    error[0] = 0.0
    sf = build_squarefree_table(y, budget=budget).flags

    sf_errors = error[1:][sf[1:]]
    second_moment = math.fsum(v * v for v in sf_errors.tolist())
    count_sf = int(np.count_nonzero(sf))
    normalized = second_moment / (y * float(x) * float(x))
    exceptional = {}
    for b in EXCEPTIONAL_B_GRID:
        threshold = x / math.log(x) ** b
        exceptional[b] = int(np.count_nonzero(np.abs(sf_errors) > threshold))

    summary = MomentSummary(
        x=x,
        y=y,
        count_squarefree=count_sf,
        second_moment=second_moment,
        normalized=normalized,
        exceptional=exceptional,
    )
    return SweepResult(summary=summary, squarefree=sf, psi=psi, singular=sing, error=error)


def moment_sweep(x: int, y: int, cfg: SingularCfg, workers: int = 1, **kwargs) -> MomentSummary:
    """Summary-only wrapper around run_sweep."""
    return run_sweep(x, y, cfg, workers, **kwargs).summary


def exceptional_count(records: list[ErrorRecord], x: int, b: float) -> int:
    """How many squarefree records exceed |error| > x / (log x)^b."""
    if x < 2:
        raise ValueError(f"exceptional_count: x must be >= 2, got {x}")
    threshold = x / math.log(x) ** b
    return sum(1 for r in records if r.squarefree and abs(r.error) > threshold)


def phi_moment(y: int, q1: int, tol: float) -> float:
    """sum over squarefree k <= y of |Phi(k)|^2, the truncated-tail second moment.

    Phi(k) is the q > q1 tail of the Dirichlet form of S(k), computed by
    subtraction (accelerated full value minus exact partial sum); the square
    sum is reduced with fsum in ascending k.
    """
    if y < 1:
        raise ValueError(f"phi_moment: y must be >= 1, got {y}")
    if q1 < 1:
        raise ValueError(f"phi_moment: q1 must be >= 1, got {q1}")
    mu, phi = build_mobius_phi_tables(q1)
    sf = build_squarefree_table(y)
    terms = []
    for k in range(1, y + 1):
        if not sf.flags[k]:
            continue
        t = tail_phi(k, q1, tol, mu=mu, phi=phi)
        terms.append(t * t)
    return math.fsum(terms)


# --- CSV emission ------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(v, ".12g")


def write_errors_csv(result: SweepResult, path: str) -> None:
    """Per-k rows: k, squarefree, psi, singular, error (floats at 12 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "squarefree", "psi", "singular", "error"])
        for k in range(1, result.summary.y + 1):
            w.writerow(
                [
                    k,
                    int(result.squarefree[k]),
                    _fmt(float(result.psi[k])),
                    _fmt(float(result.singular[k])),
                    _fmt(float(result.error[k])),
                ]
            )


def write_moments_csv(summaries: list[MomentSummary], path: str) -> None:
    """One row per (x, y) with the moment and exceptional-count columns."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["x", "y", "count_squarefree", "second_moment", "normalized"]
            + [f"exc_B{b:g}" for b in EXCEPTIONAL_B_GRID]
        )
        for s in summaries:
            w.writerow(
                [s.x, s.y, s.count_squarefree, _fmt(s.second_moment), _fmt(s.normalized)]
                + [s.exceptional[b] for b in EXCEPTIONAL_B_GRID]
            )
