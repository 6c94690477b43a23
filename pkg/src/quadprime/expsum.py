"""Exponential sums over primes and squares, and their exact arc decompositions.

Core objects:

    s1(theta, z)  = sum_{m <= z} Lambda(m) e(theta m)
    s2(theta, x)  = sum_{n <= x} e(-theta n^2)

At a rational point with drift, alpha = a/q + beta, both split exactly into a
main term, a character error term, and (for s1) a residual over m sharing a
factor with q:

    s1 = T1 + E1 + R         (decompose_s1)
    s2 = T2 + E2             (decompose_s2)

The splits use full Dirichlet character tables mod q (unit-group generators,
CRT across prime powers) and quadratic Gauss sums; they are identities, so the
reassembled values must match the direct sums to float accuracy, which is the
main correctness lever for this module.

circle_psi_oracle integrates s1 * s2 * e(-alpha k) over [0, 1) by uniform
sampling at a power-of-two rate high enough to be exact for the trigonometric
polynomial involved, giving an independent route to psi(x; k).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .arith import divisors, factorize, mobius_phi
from .errors import VerificationError
from .sieve import LambdaTable, memory_budget

CHARACTER_Q_CEILING = 10_000
ORACLE_WORK_CEILING = 1 << 28

TWO_PI = 2.0 * math.pi


def e_of(theta: float) -> complex:
    """e(theta) = exp(2 pi i theta)."""
    return cmath.exp(2j * math.pi * (theta % 1.0))


@dataclass(frozen=True)
class ArcPoint:
    """A rational point a/q with drift beta: alpha = a/q + beta."""

    a: int
    q: int
    beta: float

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError(f"ArcPoint: q must be >= 1, got {self.q}")
        if not 0 <= self.a < self.q and not (self.a == 0 and self.q == 1):
            raise ValueError(f"ArcPoint: need 0 <= a < q, got a={self.a}, q={self.q}")
        if self.a == 0 and self.q != 1:
            raise ValueError("ArcPoint: a = 0 only allowed with q = 1")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError(f"ArcPoint: gcd(a, q) must be 1, got a={self.a}, q={self.q}")

    @property
    def theta(self) -> float:
        return self.a / self.q + self.beta


def s1(theta: float, z: int, lam: LambdaTable) -> complex:
    """sum_{m <= z} Lambda(m) e(theta m), directly."""
    if z < 1:
        raise ValueError(f"s1: z must be >= 1, got {z}")
    m = np.arange(1, z + 1, dtype=np.float64)
    return complex(np.sum(lam.window(1, z) * np.exp(2j * np.pi * (theta * m % 1.0))))


def s2(theta: float, x: int) -> complex:
    """sum_{n <= x} e(-theta n^2), directly."""
    if x < 1:
        raise ValueError(f"s2: x must be >= 1, got {x}")
    nsq = np.arange(1, x + 1, dtype=np.float64) ** 2
    return complex(np.sum(np.exp(-2j * np.pi * (theta * nsq % 1.0))))


# --- Dirichlet characters --------------------------------------------------


def _primitive_root_mod_p(p: int) -> int:
    rest = [r for r, _ in factorize(p - 1)]
    g = 2
    while True:
        if all(pow(g, (p - 1) // r, p) != 1 for r in rest):
            return g
        g += 1


def _component_cycles(p: int, e: int) -> list[tuple[int, int]]:
    """Generators (g, order) of the unit group mod p^e."""
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [(3, 2)]
        return [(2**e - 1, 2), (5, 2 ** (e - 2))]
    g = _primitive_root_mod_p(p)
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    phi = (p - 1) * p ** (e - 1)
    return [(g, phi)]


@dataclass
class Character:
    """One Dirichlet character mod q as a dense value row (0 off the units)."""

    q: int
    index: int
    values: np.ndarray
    order: int
    is_principal: bool
    is_real: bool
    conductor: int

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.q

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.q])


@dataclass
class CharacterTable:
    """All phi(q) Dirichlet characters mod q.  Treat rows as read-only."""

    q: int
    chars: list[Character] = field(repr=False)

    @property
    def phi(self) -> int:
        return len(self.chars)

    @property
    def principal(self) -> Character:
        return next(ch for ch in self.chars if ch.is_principal)


@lru_cache(maxsize=128)
def build_character_table(q: int, q_ceiling: int = CHARACTER_Q_CEILING) -> CharacterTable:
    """Character table mod q from the unit-group cycle structure.

    Odd prime powers contribute one cycle (primitive root, lifted to p^e);
    2^e contributes {+-1} x <5> for e >= 3.  A character is a choice of
    exponent on each cycle; its dense value row is assembled by CRT gathers.
    Results are cached, q is capped by q_ceiling, and the full table must fit
    the memory budget.
    """
    if q < 1:
        raise ValueError(f"build_character_table: q must be >= 1, got {q}")
    if q > q_ceiling:
        raise ValueError(f"build_character_table: q = {q} over the ceiling {q_ceiling}")

    comps = []  # (modulus, [(order, dlog array per residue)])
    cycle_orders: list[int] = []
    for p, e in factorize(q) if q > 1 else []:
        pe = p**e
        cycles = _component_cycles(p, e)
        if len(cycles) == 2:
            # mod 2^e, e >= 3: every odd residue is (-1)^s 5^t; recover (s, t) jointly
            o1, o2 = cycles[0][1], cycles[1][1]
            dl1 = np.full(pe, -1, dtype=np.int64)
            dl2 = np.full(pe, -1, dtype=np.int64)
            for s in range(o1):
                for t in range(o2):
                    r = pow(pe - 1, s, pe) * pow(5, t, pe) % pe
                    dl1[r], dl2[r] = s, t
            dlogs = [(o1, dl1), (o2, dl2)]
        else:
            dlogs = []
            for g, order in cycles:
                dl = np.full(pe, -1, dtype=np.int64)
                x = 1
                for t in range(order):
                    dl[x] = t
                    x = x * g % pe
                dlogs.append((order, dl))
        comps.append((pe, dlogs))
        cycle_orders.extend(order for order, _ in dlogs)

    phi_q = 1
    for o in cycle_orders:
        phi_q *= o
    if phi_q * q * 16 > memory_budget(None):
        raise MemoryError(f"character table mod {q}: {phi_q}x{q} complex entries exceed the byte budget")

    n = np.arange(q, dtype=np.int64)
    unit_mask = np.ones(q, dtype=bool) if q == 1 else (np.gcd(n, q) == 1)

    # per-cycle discrete logs of every n (valid only on the unit mask)
    cycle_logs = []
    for pe, dlogs in comps:
        idx = n % pe
        for order, dl in dlogs:
            cycle_logs.append((order, dl[idx]))

    # induction masks for conductor search: units congruent to 1 mod d
    # (1 % d rather than literal 1 so the d = 1 mask covers every unit)
    div_masks = [(d, unit_mask & (n % d == 1 % d)) for d in divisors(q)]

    chars: list[Character] = []
    for index in range(phi_q):
        # mixed-radix digits of `index` are the cycle exponents
        rem, exps = index, []
        for o in cycle_orders:
            exps.append(rem % o)
            rem //= o
        frac = np.zeros(q, dtype=np.float64)
        for (order, logs), j in zip(cycle_logs, exps):
            frac += (j * logs) / order
        values = np.where(unit_mask, np.exp(2j * np.pi * frac), 0.0 + 0.0j)
        order = 1
        for o, j in zip(cycle_orders, exps):
            order = math.lcm(order, o // math.gcd(o, j))
        conductor = q
        for d, mask in div_masks:
            if np.all(np.abs(values[mask] - 1.0) < 1e-9):
                conductor = d
                break
        chars.append(
            Character(
                q=q,
                index=index,
                values=values,
                order=order,
                is_principal=(order == 1),
                is_real=(order <= 2),
                conductor=conductor,
            )
        )
    return CharacterTable(q=q, chars=chars)


def _roots_of_unity(q: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(q) / q)


def gauss_sum(chi: Character) -> complex:
    """tau(chi) = sum_{n mod q} chi(n) e(n/q)."""
    return complex(np.dot(chi.values, _roots_of_unity(chi.q)))


def _tau_bar(chi: Character) -> complex:
    """tau(conj(chi))."""
    return complex(np.dot(np.conj(chi.values), _roots_of_unity(chi.q)))


def g_quadratic(a: int, q: int) -> complex:
    """G(a, q) = sum over l <= q coprime to q of e(-a l^2 / q)."""
    if q < 1:
        raise ValueError(f"g_quadratic: q must be >= 1, got {q}")
    l = np.arange(1, q + 1, dtype=np.int64)
    l = l[np.gcd(l, q) == 1]
    phase = (-a * (l * l % q)) % q
    return complex(np.sum(np.exp(2j * np.pi * phase / q)))


# --- exact arc decompositions ----------------------------------------------


def decompose_s1(arc: ArcPoint, z: int, lam: LambdaTable) -> tuple[complex, complex, complex]:
    """Split s1(a/q + beta, z) into (T1, E1, R) with T1 + E1 + R = s1 exactly.

    T1 = mu(q)/phi(q) * sum_{m <= z} e(beta m).
    E1 = (1/phi(q)) sum_chi tau(conj chi) chi(a) * S_chi, where S_chi sums
         chi(m) Lambda(m) e(beta m); the principal term carries a -1 correction
         (chi0(m) Lambda(m) - 1) so the identity holds without error terms.
    R  = the exact sum of Lambda(m) e(alpha m) over m sharing a factor with q
         (size O((log z)^2); this is the piece asymptotics may discard, kept
         here so everything adds back).
    """
    if z < 1:
        raise ValueError(f"decompose_s1: z must be >= 1, got {z}")
    q, a, beta = arc.q, arc.a, arc.beta
    m = np.arange(1, z + 1, dtype=np.int64)
    lamv = lam.window(1, z)
    ebm = np.exp(2j * np.pi * (beta * m.astype(np.float64) % 1.0))
    geom = complex(np.sum(ebm))

    mu_q, phi_q = mobius_phi(q)
    t1 = mu_q / phi_q * geom

    table = build_character_table(q)
    idx = m % q
    lam_e = lamv * ebm
    e1 = 0j
    for ch in table.chars:
        inner = complex(np.dot(ch.values[idx], lam_e))
        if ch.is_principal:
            inner -= geom
        e1 += _tau_bar(ch) * ch(a) * inner
    e1 /= phi_q

    mask = np.gcd(m, q) > 1
    mr = m[mask]
    frac = (a * (mr % q) % q).astype(np.float64) / q + beta * mr.astype(np.float64)
    r = complex(np.sum(lamv[mask] * np.exp(2j * np.pi * (frac % 1.0))))
    return t1, e1, r


def decompose_s2(arc: ArcPoint, x: int) -> tuple[complex, complex]:
    """Split s2(a/q + beta, x) into (T2, E2) with T2 + E2 = s2 exactly.

    Terms are grouped by d = gcd(n, q), writing n = d n*, q* = q/d,
    d* = d/gcd(d, q*), q1 = q*/gcd(d, q*) (d* and q1 are coprime):

    T2 = sum_d  G(a d*, q1)/phi(q1) * sum_{n* <= x/d, (n*, q*)=1} e(-beta d^2 n*^2)
    E2 = sum_d  (1/phi(q1)) sum_{chi mod q1, chi^2 != chi0}
                tau(conj chi) chi(-a d*) sum_{n*} chi^2(n*) e(-beta d^2 n*^2)

    T2 is the square-character part: G(a d*, q1) equals the sum of
    tau(conj chi) chi(-a d*) over chi with chi^2 = chi0.
    """
    if x < 1:
        raise ValueError(f"decompose_s2: x must be >= 1, got {x}")
    q, a, beta = arc.q, arc.a, arc.beta
    t2 = 0j
    e2 = 0j
    for d in divisors(q):
        if x // d < 1:
            continue
        q_star = q // d
        g = math.gcd(d, q_star)
        d_star = d // g
        q1 = q_star // g
        n_star = np.arange(1, x // d + 1, dtype=np.int64)
        n_star = n_star[np.gcd(n_star, q_star) == 1]
        if len(n_star) == 0:
            continue
        nf = (d * n_star).astype(np.float64)
        w = np.exp(-2j * np.pi * (beta * nf * nf % 1.0))

        phi_q1 = mobius_phi(q1)[1]
        t2 += g_quadratic(a * d_star % q1, q1) / phi_q1 * complex(np.sum(w))

        if q1 > 2:  # mod 1 and mod 2 every character is principal
            table = build_character_table(q1)
            idx = n_star % q1
            neg_ad = (-a * d_star) % q1
            for ch in table.chars:
                if ch.order <= 2:
                    continue
                chi_sq = ch.values * ch.values
                e2 += _tau_bar(ch) * ch(neg_ad) * complex(np.dot(chi_sq[idx], w)) / phi_q1
    return t2, e2


# --- circle-method oracle ---------------------------------------------------


def circle_psi_oracle(
    x: int,
    k: int,
    y: int,
    lam: LambdaTable,
    *,
    work_ceiling: int = ORACLE_WORK_CEILING,
) -> float:
    """psi(x; k) recovered by integrating s1 * s2 * e(-alpha k) over [0, 1).

    The integrand is a trigonometric polynomial with frequencies spanning
    fewer than N = (smallest power of two > z + x^2 + y) values, so uniform
    sampling at rate N integrates it exactly; the result must be real up to
    float noise (checked at 1e-6) and equals sum_{n <= x} Lambda(n^2 + k).
    """
    if x < 1 or k < 1 or y < k:
        raise ValueError(f"circle_psi_oracle: need x >= 1, 1 <= k <= y, got x={x}, k={k}, y={y}")
    z = x * x + y
    n_samples = 1 << (z + x * x + y).bit_length()
    if n_samples * (z + x) > work_ceiling:
        raise MemoryError(
            f"circle_psi_oracle: {n_samples} samples x {z + x} terms exceeds the work ceiling"
        )
    lamv = lam.window(1, z)
    m = np.arange(1, z + 1, dtype=np.float64)
    nsq = np.arange(1, x + 1, dtype=np.float64) ** 2

    total = 0j
    chunk = max(1, (1 << 20) // (z + x))
    for j0 in range(0, n_samples, chunk):
        j = np.arange(j0, min(j0 + chunk, n_samples), dtype=np.float64)[:, None]
        s1_vals = np.exp(2j * np.pi * ((j * m) / n_samples % 1.0)) @ lamv
        s2_vals = np.sum(np.exp(-2j * np.pi * ((j * nsq) / n_samples % 1.0)), axis=1)
        total += complex(np.sum(s1_vals * s2_vals * np.exp(-2j * np.pi * ((j[:, 0] * k) / n_samples % 1.0))))
    total /= n_samples
    if abs(total.imag) > 1e-6:
        raise VerificationError(
            f"circle_psi_oracle: imaginary part {total.imag} did not vanish (x={x}, k={k})"
        )
    return total.real


# --- bound checks -----------------------------------------------------------


def weyl_ratio(arc: ArcPoint, x: int) -> float:
    """|s2(alpha, x)| divided by log x * (x q^(-1/2) + (qx)^(1/2)), on |beta| <= 1/q^2."""
    if x < 2:
        raise ValueError(f"weyl_ratio: x must be >= 2, got {x}")
    if abs(arc.beta) > 1.0 / (arc.q * arc.q):
        raise ValueError(f"weyl_ratio: |beta| must be <= 1/q^2, got beta={arc.beta}, q={arc.q}")
    denom = math.log(x) * (x / math.sqrt(arc.q) + math.sqrt(arc.q * x))
    return abs(s2(arc.theta, x)) / denom


@dataclass
class PvReport:
    q: int
    max_sum: float
    bound: float
    passed: bool


def _diameter(points: np.ndarray) -> float:
    """Exact max pairwise distance among complex points."""
    pts = np.unique(points)
    if len(pts) == 1:
        return 0.0
    if np.all(np.abs(pts.imag) < 1e-12):
        return float(np.max(pts.real) - np.min(pts.real))
    xy = np.column_stack([pts.real, pts.imag])
    try:
        hull = xy[ConvexHull(xy).vertices]
    except QhullError:  # collinear points
        hull = xy
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))


def pv_check(q: int) -> PvReport:
    """Largest |sum of chi(n) over a window| vs the 6 sqrt(q) log q bound.

    For non-principal chi mod q the partial-sum walk is periodic, so the
    supremum over every window M < n <= M + N (N <= q) is the diameter of the
    walk's point set over one period -- computed exactly, no window scan.
    """
    if q < 2:
        raise ValueError(f"pv_check: q must be >= 2, got {q}")
    table = build_character_table(q)
    max_sum = 0.0
    for ch in table.chars:
        if ch.is_principal:
            continue
        walk = np.concatenate([[0.0 + 0.0j], np.cumsum(ch.values[1:])])
        max_sum = max(max_sum, _diameter(walk))
    bound = 6.0 * math.sqrt(q) * math.log(q)
    return PvReport(q=q, max_sum=max_sum, bound=bound, passed=max_sum <= bound)
