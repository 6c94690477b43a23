"""Command-line front end.

Subcommands: psi, singular, sigma, sweep, phi-moment, check, tables.
Exit codes: 0 success, 1 usage error, 2 a verification/invariant check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import random
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .arith import jacobi, mobius_phi
from .errors import VerificationError
from .expsum import (
    ArcPoint,
    build_character_table,
    circle_psi_oracle,
    decompose_s1,
    decompose_s2,
    g_quadratic,
    gauss_sum,
    pv_check,
    s1,
    s2,
    weyl_ratio,
)
from .moments import phi_moment, run_sweep, write_errors_csv, write_moments_csv, psi_value
from .sieve import (
    build_lambda_table,
    build_mobius_phi_tables,
    build_prime_table,
    build_squarefree_table,
    save_lambda_table,
    save_prime_table,
    save_squarefree_table,
)
from .singular import SingularCfg, sandwich_check, sigma_q, singular_series

# Max |s2| / Weyl envelope over the seeded calibration grid (seed 0, see check_weyl).
# Re-runs must stay within 5% of this recorded value.
WEYL_CALIBRATION_C = 0.039036613241745885


@dataclass
class RunConfig:
    """Validated knobs shared by the heavier subcommands."""

    x: int = 0
    y: int = 0
    euler_cutoff: int = 10_000
    q1: int = 1
    tol: float = 1e-6
    segment_size: int | None = None
    memory_budget: int | None = None
    workers: int = 1
    output_dir: str = "."
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _meta(started: float, workers: int = 1) -> dict:
    return {
        "version": __version__,
        "wall_time_s": round(time.monotonic() - started, 3),
        "workers": workers,
    }


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        json.dump(payload, sys.stdout, indent=2)
        print()
    elif fmt == "csv":
        scalars = {k: v for k, v in payload.items() if k != "meta"}
        writer = csv.writer(sys.stdout)
        writer.writerow(scalars.keys())
        writer.writerow(scalars.values())
    else:
        for key, value in payload.items():
            if key == "meta":
                continue
            print(f"{key} = {value}")


def cmd_psi(args: argparse.Namespace) -> int:
    started = time.monotonic()
    z = args.x * args.x + max(args.y, args.k)
    lam = build_lambda_table(1, z, budget=args.budget_bytes)
    value = psi_value(args.x, args.k, lam)
    payload = {"x": args.x, "k": args.k, "psi": value}
    if args.x <= 20:
        oracle = circle_psi_oracle(args.x, args.k, max(args.y, args.k), lam)
        payload["oracle"] = oracle
        if abs(oracle - value) > 1e-6:
            print(f"psi mismatch: sieve {value} vs circle oracle {oracle}", file=sys.stderr)
            return 2
    payload["meta"] = _meta(started)
    _emit(payload, args.format)
    return 0


def cmd_singular(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = SingularCfg(method=args.method, euler_cutoff=args.p, tol=args.tol)
    value = singular_series(args.k, cfg)
    payload = {"k": args.k, "method": args.method, "singular": value, "meta": _meta(started)}
    _emit(payload, args.format)
    return 0


def cmd_sigma(args: argparse.Namespace) -> int:
    started = time.monotonic()
    value = sigma_q(args.q, args.k)
    payload = {"q": args.q, "k": args.k, "sigma": value, "meta": _meta(started)}
    _emit(payload, args.format)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.monotonic()
    cfg = SingularCfg(method=args.method, euler_cutoff=args.p, tol=args.tol)
    result = run_sweep(
        args.x,
        args.y,
        cfg,
        workers=args.workers,
        segment_size=args.segment_size,
        budget=args.budget_bytes,
    )
    os.makedirs(args.out, exist_ok=True)
    s = result.summary
    if args.format != "json":
        write_errors_csv(result, os.path.join(args.out, "errors.csv"))
        write_moments_csv([s], os.path.join(args.out, "moments.csv"))
    else:
        data = {
            "errors": [
                {
                    "k": k,
                    "squarefree": bool(result.squarefree[k]),
                    "psi": float(result.psi[k]),
                    "singular": float(result.singular[k]),
                    "error": float(result.error[k]),
                }
                for k in range(1, args.y + 1)
            ],
            "moments": {
                "x": s.x,
                "y": s.y,
                "count_squarefree": s.count_squarefree,
                "second_moment": s.second_moment,
                "normalized": s.normalized,
                "exceptional": {f"B{b:g}": n for b, n in s.exceptional.items()},
            },
            "meta": _meta(started, args.workers),
        }
        with open(os.path.join(args.out, "sweep.json"), "w") as fh:
            json.dump(data, fh, indent=2)
    print(
        f"x={s.x} y={s.y} squarefree={s.count_squarefree} "
        f"second_moment={s.second_moment:.6g} normalized={s.normalized:.6g} "
        f"exceptional={[s.exceptional[b] for b in sorted(s.exceptional)]}"
    )
    return 0


def cmd_phi_moment(args: argparse.Namespace) -> int:
    started = time.monotonic()
    value = phi_moment(args.y, args.q1, args.tol)
    payload = {"y": args.y, "q1": args.q1, "tol": args.tol, "phi_moment": value, "meta": _meta(started)}
    _emit(payload, args.format)
    return 0


def cmd_tables(args: argparse.Namespace) -> int:
    os.makedirs(args.out, exist_ok=True)
    primes = build_prime_table(args.limit, budget=args.budget_bytes)
    lam = build_lambda_table(1, args.limit, budget=args.budget_bytes)
    sf = build_squarefree_table(args.limit, budget=args.budget_bytes)
    build_mobius_phi_tables(args.limit, budget=args.budget_bytes)
    print(f"primes <= {args.limit}: {primes.count()}")
    print(f"squarefree <= {args.limit}: {sf.count()}")
    if args.cache:
        save_prime_table(primes, os.path.join(args.out, f"primes_{args.limit}.prm"))
        save_lambda_table(lam, os.path.join(args.out, f"lambda_{args.limit}.lam"))
        save_squarefree_table(sf, os.path.join(args.out, f"squarefree_{args.limit}.sqf"))
        print(f"cache written to {args.out}")
    return 0


# --- invariant suites (check ...) -------------------------------------------


def check_weyl(seed: int, report: bool = True) -> tuple[float, bool]:
    """Max Weyl ratio over the seeded random grid; pass iff within 5% of the record."""
    rng = random.Random(seed)
    worst = 0.0
    for x in (100, 1000, 10_000):
        for _ in range(50):
            q = rng.randint(1, x)
            if q == 1:
                a = 0
            else:
                a = rng.randrange(1, q)
                while math.gcd(a, q) != 1:
                    a = rng.randrange(1, q)
            beta = rng.uniform(-1.0 / (q * q), 1.0 / (q * q))
            worst = max(worst, weyl_ratio(ArcPoint(a, q, beta), x))
    passed = worst <= 1.05 * WEYL_CALIBRATION_C
    if report:
        print(f"weyl: max ratio {worst:.6f}, calibration {WEYL_CALIBRATION_C:.6f} -> {'ok' if passed else 'FAIL'}")
    return worst, passed


def check_pv(q_max: int) -> bool:
    worst_q, worst_excess = 0, 0.0
    ok = True
    for q in range(2, q_max + 1):
        rep = pv_check(q)
        if not rep.passed:
            ok = False
            print(f"pv: q={q} max window sum {rep.max_sum:.3f} exceeds bound {rep.bound:.3f}")
        excess = rep.max_sum / rep.bound
        if excess > worst_excess:
            worst_q, worst_excess = q, excess
    print(f"pv: q <= {q_max}, tightest at q={worst_q} (ratio {worst_excess:.3f}) -> {'ok' if ok else 'FAIL'}")
    return ok


def _coprime_as(q: int, how_many: int = 3) -> list[int]:
    if q == 1:
        return [0]
    out = [a for a in range(1, q) if math.gcd(a, q) == 1]
    return out[:how_many]


def check_decompose(q_max: int = 60) -> bool:
    lam = build_lambda_table(1, 1000)
    worst1 = worst2 = 0.0
    r_bound_ok = True
    for q in range(1, q_max + 1):
        for a in _coprime_as(q):
            for beta in (0.0, 1e-4, -1e-4):
                arc = ArcPoint(a, q, beta)
                for x in (10, 100):
                    t2, e2 = decompose_s2(arc, x)
                    worst2 = max(worst2, abs((t2 + e2) - s2(arc.theta, x)) / x)
                for z in (100, 1000):
                    t1, e1, r = decompose_s1(arc, z, lam)
                    worst1 = max(worst1, abs((t1 + e1 + r) - s1(arc.theta, z, lam)) / z)
                    if abs(r) > math.log(z) ** 2 + 1:
                        r_bound_ok = False
    ok = worst1 <= 1e-8 and worst2 <= 1e-8 and r_bound_ok
    print(
        f"decompose: worst |T1+E1+R-s1|/z = {worst1:.3e}, worst |T2+E2-s2|/x = {worst2:.3e}, "
        f"residual bound {'ok' if r_bound_ok else 'FAIL'} -> {'ok' if ok else 'FAIL'}"
    )
    return ok


def check_gauss(q_max: int = 50) -> bool:
    ok = True
    worst_mod = 0.0
    for q in range(1, q_max + 1):
        table = build_character_table(q)
        for ch in table.chars:
            if ch.is_primitive:
                worst_mod = max(worst_mod, abs(abs(gauss_sum(ch)) - math.sqrt(q)))
    if worst_mod > 1e-9:
        ok = False
    worst_id = 0.0
    for q in range(1, q_max + 1, 2):
        if mobius_phi(q)[0] == 0:
            continue
        table = build_character_table(q)
        real = [ch for ch in table.chars if ch.order <= 2]
        for a in range(1, q + 1):
            if math.gcd(a, q) != 1:
                continue
            via_chars = sum(
                complex(np.dot(np.conj(ch.values), np.exp(2j * np.pi * np.arange(q) / q))) * ch((-a) % q)
                for ch in real
            )
            worst_id = max(worst_id, abs(via_chars - g_quadratic(a, q)))
    if worst_id > 1e-9:
        ok = False
    print(f"gauss: worst | |tau|-sqrt(q) | = {worst_mod:.3e}, worst quadratic-identity gap = {worst_id:.3e} -> {'ok' if ok else 'FAIL'}")
    return ok


def check_sandwich(k_max: int, tol: float) -> bool:
    sf = build_squarefree_table(k_max)
    bad = []
    for k in range(1, k_max + 1):
        if not sf.flags[k]:
            continue
        rep = sandwich_check(k, tol)
        if not rep.passed:
            bad.append((k, rep.product))
    ok = not bad
    print(f"sandwich: squarefree k <= {k_max} at tol {tol:g}, {len(bad)} violations -> {'ok' if ok else 'FAIL'}")
    for k, product in bad[:10]:
        print(f"  k={k}: product {product}")
    return ok


def cmd_check(args: argparse.Namespace) -> int:
    ok = True
    if args.suite == "weyl":
        _, ok = check_weyl(args.seed)
    elif args.suite == "pv":
        ok = check_pv(args.qmax)
    elif args.suite == "decompose":
        ok = check_decompose(min(args.qmax, 60))
    elif args.suite == "gauss":
        ok = check_gauss(min(args.qmax, 50))
    elif args.suite == "sandwich":
        ok = check_sandwich(args.kmax, args.tol)
    return 0 if ok else 2


def _build_parser() -> _Parser:
    parser = _Parser(prog="quadprime", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("plain", "csv", "json"), default="plain")
        p.add_argument("--budget-bytes", type=int, default=None, help="memory budget override")

    p = sub.add_parser("psi", help="psi(x; k) from the sieve (+ circle oracle at small x)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--y", type=int, default=10, help="Lambda-table headroom above x^2")
    add_common(p)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("singular", help="singular series S(k)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("euler", "lmethod"), default="euler")
    p.add_argument("--p", type=int, default=10_000, help="Euler product cutoff")
    p.add_argument("--tol", type=float, default=1e-6)
    add_common(p)
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("sigma", help="exact complete exponential sum Sigma(q) at offset k")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("sweep", help="error sweep over k = 1..y at fixed x; writes errors + moments")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--method", choices=("euler", "lmethod"), default="euler")
    p.add_argument("--p", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--segment-size", type=int, default=None)
    p.add_argument("--out", default=".")
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phi-moment", help="second moment of the Dirichlet tail Phi(k)")
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--q1", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    add_common(p)
    p.set_defaults(func=cmd_phi_moment)

    p = sub.add_parser("check", help="run an invariant suite")
    p.add_argument("suite", choices=("weyl", "pv", "decompose", "gauss", "sandwich"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qmax", type=int, default=500)
    p.add_argument("--kmax", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("tables", help="prebuild sieve tables, optionally cache to disk")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--cache", action="store_true")
    p.add_argument("--budget-bytes", type=int, default=None)
    p.set_defaults(func=cmd_tables)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors funnel to exit 1, --help to 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, MemoryError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
