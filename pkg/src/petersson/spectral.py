"""Hecke eigenvalue systems and Petersson averages over cusp-form bases.

Three families of evaluators live here:

* ``delta_geometric``: the Kloosterman/Bessel side of the trace identity,
  a truncated sum over moduli in one arithmetic progression, carrying a
  rigorous truncation bound.
* ``delta_star_truncated`` / ``delta_tilde``: sieved averages that isolate
  newforms of exact level (or interpolate between the full and new averages
  in two level variables), assembled from ``delta_geometric`` values through
  a finite combinatorial expansion with Chebyshev-coefficient weights.
* ``delta_spectral``: the eigenvalue side, for explicitly supplied systems.

Eigenvalue systems are either synthetic (random Satake angles, seeded) or
derived from geometric ratios of one-dimensional spaces; no external
modular-forms tables are consulted.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as iproduct
from typing import Callable, Sequence

import numpy as np

from . import _ksums
from .arith import Factored, divisors_factored, factor, iter_smooth, mobius, nu, tau
from .bessel import bessel_envelope, besselj
from .chebyshev import GAMMA0, cheb_coeff

__all__ = [
    "HeckeSystem",
    "synthetic_system",
    "derived_system",
    "SignCharacter",
    "sign_characters",
    "lambda_f_phi",
    "rho_f",
    "rho_inv_truncated",
    "DeltaEstimate",
    "delta_geometric",
    "delta_spectral",
    "delta_star_truncated",
    "delta_tilde",
    "sieve_terms",
    "RelationSpec",
    "forward_relation",
    "invert_relation",
    "petersson_relation_spec",
    "t_mn_identity_check",
    "newform_census",
    "DegenerateSystemError",
]


class DegenerateSystemError(ValueError):
    """A synthetic eigenvalue system hit a vanishing normalization factor."""


# ---------------------------------------------------------------------------
# eigenvalue systems


@dataclass
class HeckeSystem:
    """A multiplicative eigenvalue system lambda(n).

    Unramified primes follow the standard second-order recurrence driven by
    lambda(p) with |lambda(p)| <= 2; primes dividing the level carry
    lambda(p) = sign * p^(-1/2) and extend completely multiplicatively.
    """

    level: Factored
    weight: int
    provenance: str
    ramified_signs: dict[int, int]
    ap_source: Callable[[int], float]
    _cache: dict[int, float] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.level.is_squarefree():
            raise ValueError("level must be square-free")
        if self.weight % 2 or self.weight < 2:
            raise ValueError("weight must be even and >= 2")
        if set(self.ramified_signs) != set(self.level.primes):
            raise ValueError("ramified signs must cover exactly the level primes")

    def lambda_p(self, p: int) -> float:
        if p in self.ramified_signs:
            return self.ramified_signs[p] / math.sqrt(p)
        v = self._cache.get(p)
        if v is None:
            v = self.ap_source(p)
            if abs(v) > 2 + 1e-12:
                raise ValueError(f"lambda({p}) = {v} violates |lambda(p)| <= 2")
            self._cache[p] = v
        return v

    def lambda_n(self, n: int | Factored) -> float:
        f = n if isinstance(n, Factored) else factor(n)
        out = 1.0
        for p, e in f.factors:
            if p in self.ramified_signs:
                out *= self.lambda_p(p) ** e
            else:
                lp = self.lambda_p(p)
                prev, cur = 1.0, lp
                for _ in range(e - 1):
                    prev, cur = cur, lp * cur - prev
                out *= cur
        return out

    @property
    def epsilon_f(self) -> int:
        """Sign of the completed-series functional equation, i^kappa eta_N."""
        eta = 1
        for p in self.level.primes:
            eta *= -self.ramified_signs[p]
        return (-1) ** (self.weight // 2) * eta


def synthetic_system(
    level: int | Factored, weight: int, seed: int, ramified_signs: dict[int, int] | None = None
) -> HeckeSystem:
    """Random Satake angles, deterministic in (seed, p)."""
    f = level if isinstance(level, Factored) else factor(level)
    if ramified_signs is None:
        ramified_signs = {
            p: (1 if random.Random(f"{seed}:eps:{p}").random() < 0.5 else -1) for p in f.primes
        }

    def ap(p: int) -> float:
        theta = random.Random(f"{seed}:{p}").uniform(0.0, math.pi)
        return 2.0 * math.cos(theta)

    return HeckeSystem(f, weight, "synthetic", dict(ramified_signs), ap)


# ---------------------------------------------------------------------------
# sign characters on the divisors of a square-free level


@dataclass(frozen=True)
class SignCharacter:
    L: Factored
    signs: tuple[tuple[int, int], ...]  # (prime, +-1)

    def __call__(self, d: int) -> int:
        out = 1
        for p, s in self.signs:
            if d % p == 0:
                out *= s
        return out

    def sign_at(self, p: int) -> int:
        for q, s in self.signs:
            if q == p:
                return s
        raise KeyError(p)


def sign_characters(L: int | Factored) -> list[SignCharacter]:
    f = L if isinstance(L, Factored) else factor(L)
    if not f.is_squarefree():
        raise ValueError("L must be square-free")
    out = []
    for signs in iproduct((1, -1), repeat=len(f.primes)):
        out.append(SignCharacter(f, tuple(zip(f.primes, signs))))
    return out


def lambda_f_phi(f: HeckeSystem, phi: SignCharacter, m: int) -> float:
    """Coefficients of the sign-twisted combination: sum over u | (m, L)."""
    if math.gcd(int(phi.L), int(f.level)) != 1:
        raise ValueError("sign-character support must be coprime to the level")
    total = 0.0
    g = math.gcd(m, int(phi.L))
    for u in divisors_factored(factor(g)):
        total += phi(int(u)) * math.sqrt(int(u)) * f.lambda_n(m // int(u))
    return total


def rho_f(f: HeckeSystem, L: int | Factored) -> float:
    """prod over p | L of (1 - p lambda(p)^2 / (p+1)^2)."""
    fL = L if isinstance(L, Factored) else factor(L)
    if not fL.is_squarefree():
        raise ValueError("L must be square-free")
    if math.gcd(int(fL), int(f.level)) != 1:
        raise ValueError("L must be coprime to the level")
    out = 1.0
    for p in fL.primes:
        out *= 1.0 - p * f.lambda_p(p) ** 2 / (p + 1) ** 2
    if abs(out) < 1e-12:
        raise DegenerateSystemError(f"rho_f({fL.n}) vanishes for this system")
    return out


def rho_inv_truncated(f: HeckeSystem, L: int | Factored, Y: int) -> float:
    """Truncation of the series for 1/rho_f(L) over ell | L^inf, ell <= Y.

    Each ell contributes (ell/nu(ell)^2) (sum_{d | ell} c_ell(d) lambda(d))^2,
    the inner sum being the completely multiplicative extension at ell.
    """
    fL = L if isinstance(L, Factored) else factor(L)
    ps = fL.primes
    total = 0.0
    for val, expo in iter_smooth(ps, Y):
        inner = 1.0
        nul = 1.0
        for p, e in zip(ps, expo):
            if e:
                lp = f.lambda_p(p)
                prev, cur = 1.0, lp
                powers = [1.0, lp]
                for _ in range(e - 1):
                    prev, cur = cur, lp * cur - prev
                    powers.append(cur)
                inner *= sum(cheb_coeff(j, e) * powers[j] for j in range(e % 2, e + 1, 2))
                nul *= float(p + 1) ** e
        total += val * inner * inner / (nul * nul)
    return total


# ---------------------------------------------------------------------------
# geometric side


@dataclass
class DeltaEstimate:
    value: float
    kappa: int
    level: int
    m: int
    n: int
    c_max: int
    tail_bound: float
    mode: str

    def __float__(self) -> float:
        return self.value


def _tau_tail(Y: float, s: float) -> float:
    """Upper bound for sum over j > Y of tau(j) j^(-s), Y >= 1."""
    Y = max(Y, 1.0)
    if s <= 1.5 + 1e-9:
        return (2.0 * math.log(Y) + 7.3) / math.sqrt(Y)
    return 2.0 * (Y ** (1.5 - s) / (s - 1.5) + Y ** (0.5 - s))


def _tail_bound(N: int, kappa: int, m: int, n: int, c_max: int) -> float:
    """Rigorous bound on the omitted c > c_max part of the progression sum."""
    nuo = kappa - 1
    g = math.sqrt(math.gcd(m, n))
    x0 = 4.0 * math.pi * math.sqrt(m * n)
    total = 0.0
    c1 = max(c_max, int(x0 / 2.0) + 1)
    if c1 > c_max:
        # region where the Bessel argument exceeds 2: flat envelope, exact sum
        if (c1 - c_max) // N > 2 * 10**6:
            raise ValueError("tail computation too long; raise c_max")
        j0 = c_max // N + 1
        for j in range(j0, c1 // N + 1):
            c = N * j
            total += 2.0 * math.pi * tau(c) * g / math.sqrt(c) * bessel_envelope(nuo, x0 / c)
    # small-argument region: |J_nu(x)| <= (x/2)^nu/nu! e^(x/2)^2 <= e (x0/2c)^nu/nu!
    lead = 2.0 * math.pi * g * math.e * (x0 / 2.0) ** nuo / math.factorial(nuo)
    total += lead * tau(N) * float(N) ** (-0.5 - nuo) * _tau_tail(c1 / N, nuo + 0.5)
    return total


def default_c_max(N: int, m: int, n: int) -> int:
    return max(10**4, int(200 * N * math.sqrt(m * n)) + 1)


_CHUNK = 8192  # fixed reduction blocks keep sums identical across thread counts


def _chunked_dot(a: np.ndarray, b: np.ndarray) -> float:
    parts = []
    for lo in range(0, len(a), _CHUNK):
        parts.append(float(np.dot(a[lo : lo + _CHUNK], b[lo : lo + _CHUNK])))
    return math.fsum(parts)


_delta_memo: dict[tuple[int, int, int, int, int], "DeltaEstimate"] = {}


def delta_geometric(
    N: int | Factored,
    kappa: int,
    m: int,
    n: int,
    c_max: int | None = None,
    tol: float | None = None,
) -> DeltaEstimate:
    """Diagonal term plus the Kloosterman/Bessel sum over c = 0 mod N, c <= c_max."""
    Nn = int(N)
    if kappa % 2 or not 2 <= kappa <= 20:
        raise ValueError("kappa must be even, between 2 and 20")
    if m < 1 or n < 1 or Nn < 1:
        raise ValueError("N, m, n must be positive")
    if c_max is None:
        c_max = default_c_max(Nn, m, n)
    if c_max < Nn:
        raise ValueError("c_max must be at least N")
    key = (Nn, kappa, m, n, c_max)
    hit = _delta_memo.get(key)
    if hit is not None:
        return hit
    svals = _ksums.kloosterman_over_multiples(m, n, Nn, c_max)
    cs = Nn * np.arange(1, len(svals) + 1, dtype=np.float64)
    x = 4.0 * math.pi * math.sqrt(m * n) / cs
    jv = besselj(kappa - 1, x)
    total = _chunked_dot(svals / cs, jv)
    value = (1.0 if m == n else 0.0) + 2.0 * math.pi * (-1) ** (kappa // 2) * total
    tail = _tail_bound(Nn, kappa, m, n, c_max)
    if tol is not None and tail > tol:
        import warnings

        warnings.warn(f"tail bound {tail:.3g} exceeds requested tolerance {tol:.3g}")
    est = DeltaEstimate(value, kappa, Nn, m, n, c_max, tail, "geometric")
    if len(_delta_memo) < 500000:
        _delta_memo[key] = est
    return est


def delta_spectral(basis: Sequence[tuple[HeckeSystem, float]], m: int, n: int) -> float:
    """sum over (f, w) of w lambda_f(m) lambda_f(n); empty basis gives 0."""
    total = 0.0
    for f, w in basis:
        if w <= 0:
            raise ValueError("spectral weights must be positive")
        total += w * f.lambda_n(m) * f.lambda_n(n)
    return total


# ---------------------------------------------------------------------------
# the sieve expansion shared by the newform and hybrid averages


@lru_cache(maxsize=200000)
def _local_combos(p: int, e: int, vm: int, vn: int) -> tuple[tuple[float, int, int], ...]:
    """Local factors at p of the level-lowering expansion.

    For p dividing the sieved-out level part, with p^e || ell and p-adic
    valuations vm, vn of the outer arguments, yields (weight, dm, dn): the
    inner average is evaluated at arguments scaled by p^dm, p^dn and the
    weight collects every local arithmetic factor including 1/nu(p) and
    ell/nu(ell)^2.
    """
    base = (1.0 / (p + 1)) * (p**e / float(p + 1) ** (2 * e))
    out = []
    us = [0] + ([1] if vm >= 1 else [])
    vs = [0] + ([1] if vn >= 1 else [])
    for j1 in range(e % 2, e + 1, 2):
        c1 = cheb_coeff(j1, e)
        if c1 == 0:
            continue
        for j2 in range(e % 2, e + 1, 2):
            c2 = cheb_coeff(j2, e)
            if c2 == 0:
                continue
            for vu in us:
                for vv in vs:
                    vg = min(vu, vv)
                    vt = vu + vv - 2 * vg  # t = uv/(u,v)^2, square-free
                    w_uv = float(p) ** (vu + vv - vg)
                    w_t = (-1.0 / (p + 1)) if vt else 1.0
                    a_choices = [0] + ([1] if (vu - vg >= 1 and vm - vu >= 1) else [])
                    b_choices = [0] + ([1] if (vv - vg >= 1 and vn - vv >= 1) else [])
                    for va in a_choices:
                        for vb in b_choices:
                            t1max = min(j1, vm - 2 * va - vg)
                            t2max = min(j2, vn - 2 * vb - vg)
                            if t1max < 0 or t2max < 0:
                                continue
                            for t1 in range(t1max + 1):
                                for t2 in range(t2max + 1):
                                    w = base * c1 * c2 * w_uv * w_t
                                    dm = j1 - 2 * va - 2 * t1 - vg
                                    dn = j2 - 2 * vb - 2 * t2 - vg
                                    out.append((w, dm, dn))
    return tuple(out)


@lru_cache(maxsize=100000)
def _sieve_templates(
    Nn: int, prof: tuple[tuple[int, int, int], ...], Y: int
) -> tuple[tuple[float, int, tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]], ...]:
    """Scale-free expansion templates: (weight, M, m-shifts, n-shifts).

    ``prof`` lists (p, v_p(m), v_p(n)) for the primes of N; shifts are
    (p, exponent delta) pairs to apply to the outer arguments.  Everything
    depends on the arguments only through these valuations, so the template
    is shared across all (m, n) with the same profile.
    """
    fN = factor(Nn)
    acc: dict[tuple[int, tuple, tuple], float] = {}
    vms = {p: vm for p, vm, _ in prof}
    vns = {p: vn for p, _, vn in prof}
    for Ld in divisors_factored(fN):
        Lp = Ld.primes
        M = Nn // int(Ld)
        sign = (-1) ** len(Lp)
        for _, expo in iter_smooth(Lp, Y) if Lp else [(1, ())]:
            locals_ = [_local_combos(p, e, vms[p], vns[p]) for p, e in zip(Lp, expo)]
            for combo in iproduct(*locals_):
                w = float(sign)
                dms = []
                dns = []
                for p, (wp, dm, dn) in zip(Lp, combo):
                    w *= wp
                    if dm:
                        dms.append((p, dm))
                    if dn:
                        dns.append((p, dn))
                key = (M, tuple(dms), tuple(dns))
                acc[key] = acc.get(key, 0.0) + w
    return tuple((w, M, dms, dns) for (M, dms, dns), w in acc.items() if w != 0.0)


def sieve_terms(N: int | Factored, m: int, n: int, Y: int) -> list[tuple[float, int, int, int]]:
    """Expansion of the sieved average: [(weight, M, m', n')] with sum over
    complementary divisors L*M = N, mu(L)-signed, and smooth ell <= Y."""
    fN = N if isinstance(N, Factored) else factor(N)
    if not fN.is_squarefree():
        raise ValueError("N must be square-free")
    prof = tuple((p, _valuation(m, p), _valuation(n, p)) for p in fN.primes)
    out = []
    for w, M, dms, dns in _sieve_templates(int(fN), prof, Y):
        m2, n2 = m, n
        for p, dm in dms:
            m2 = m2 * p**dm if dm > 0 else m2 // p ** (-dm)
        for p, dn in dns:
            n2 = n2 * p**dn if dn > 0 else n2 // p ** (-dn)
        out.append((w, M, m2, n2))
    return out


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0 and n:
        n //= p
        v += 1
    return v


def _ell_tail_term(N: int, m: int, n: int, Y: int, eps: float = 0.05) -> float:
    """Recorded truncation allowance for the smooth-parameter tail."""
    return float((m * n * N * Y) ** eps * N * Y ** (-2 * GAMMA0))


def _inner_cutoff_policy(full_level: int, m: int, n: int) -> Callable[[int, int, int], int]:
    """Default cutoffs for the sieve's inner averages.

    The dominant term (the full level at the original arguments) gets the
    standalone default; smooth-inflated side terms, whose weights decay
    geometrically, are capped so their much larger arguments do not force
    very long progressions.  The cap's effect is covered by the recorded
    budget through the inner tail bounds.
    """
    cap = max(30000, default_c_max(full_level, m, n))

    def cm(M: int, m2: int, n2: int) -> int:
        return max(10**4, min(default_c_max(M, m2, n2), cap))

    return cm


def delta_star_truncated(
    N: int | Factored,
    kappa: int,
    m: int,
    n: int,
    Y: int = 10**4,
    c_max: Callable[[int, int, int], int] | int | None = None,
) -> DeltaEstimate:
    """Newform-only average via the finite sieve, inner sums geometric."""
    fN = N if isinstance(N, Factored) else factor(N)
    if c_max is None:
        c_max = _inner_cutoff_policy(int(fN), m, n)
    value = 0.0
    budget = _ell_tail_term(int(fN), m, n, Y)
    for w, M, m2, n2 in sieve_terms(fN, m, n, Y):
        cm = c_max(M, m2, n2) if callable(c_max) else c_max
        inner = delta_geometric(M, kappa, m2, n2, cm)
        value += w * inner.value
        budget += abs(w) * inner.tail_bound
    return DeltaEstimate(value, kappa, int(fN), m, n, 0, budget, "star")


def delta_tilde(
    N: int | Factored,
    q: int | Factored,
    kappa: int,
    m: int,
    n: int,
    Y: int = 10**4,
    c_max: Callable[[int, int, int], int] | int | None = None,
) -> DeltaEstimate:
    """Hybrid average: newform sieve in the N variable, full average mod q."""
    fN = N if isinstance(N, Factored) else factor(N)
    qn = int(q)
    if not factor(int(fN) * qn).is_squarefree():
        raise ValueError("N*q must be square-free")
    if math.gcd(m * n * int(fN), qn) != 1:
        raise ValueError("m, n, N must be coprime to q")
    if c_max is None:
        c_max = _inner_cutoff_policy(int(fN) * qn, m, n)
    value = 0.0
    budget = _ell_tail_term(int(fN), m, n, Y)
    for w, M, m2, n2 in sieve_terms(fN, m, n, Y):
        cm = c_max(M * qn, m2, n2) if callable(c_max) else c_max
        inner = delta_geometric(M * qn, kappa, m2, n2, cm)
        value += w * inner.value
        budget += abs(w) * inner.tail_bound
    return DeltaEstimate(value, kappa, int(fN), m, n, 0, budget, "tilde")


# ---------------------------------------------------------------------------
# generic inversion over square-free levels


@dataclass(frozen=True)
class RelationSpec:
    """Multiplicative relation data for the level-inversion lemma.

    ``local_terms(p, parts)`` receives the p-parts of the argument tuple and
    returns (weight, new_parts) pairs; weights and replacements multiply over
    the primes of the sieved part L.  Finite support per prime keeps both the
    forward and inverse sums exact.
    """

    arity: int
    local_terms: Callable[[int, tuple[int, ...]], Sequence[tuple[float, tuple[int, ...]]]]


def _apply_relation(
    spec: RelationSpec,
    H: Callable[[tuple[int, ...], int], float],
    m: tuple[int, ...],
    N: Factored,
    moebius_signed: bool,
) -> float:
    if len(m) != spec.arity:
        raise ValueError("argument tuple has wrong arity")
    if not N.is_squarefree():
        raise ValueError("N must be square-free")
    total = 0.0
    for Ld in divisors_factored(N):
        Lp = Ld.primes
        M = int(N) // int(Ld)
        sign = (-1) ** len(Lp) if moebius_signed else 1.0
        combos = [(1.0, tuple(m))]
        for p in Lp:
            parts = tuple(p ** _valuation(mi, p) for mi in m)
            stripped_idx = parts
            new_combos = []
            for w0, args in combos:
                for w, repl in spec.local_terms(p, parts):
                    new_args = tuple(
                        ai // pi * ri for ai, pi, ri in zip(args, stripped_idx, repl)
                    )
                    new_combos.append((w0 * w, new_args))
            combos = new_combos
        for w, args in combos:
            total += sign * w * H(args, M)
    return total


def forward_relation(
    spec: RelationSpec, G: Callable[[tuple[int, ...], int], float], m: tuple[int, ...], N: int | Factored
) -> float:
    fN = N if isinstance(N, Factored) else factor(N)
    return _apply_relation(spec, G, m, fN, moebius_signed=False)


def invert_relation(
    spec: RelationSpec, F: Callable[[tuple[int, ...], int], float], m: tuple[int, ...], N: int | Factored
) -> float:
    """Recover G from F when F(m, N) = sum over LM = N of the spec applied to G."""
    fN = N if isinstance(N, Factored) else factor(N)
    return _apply_relation(spec, F, m, fN, moebius_signed=True)


def petersson_relation_spec(Y: int = 10**4) -> RelationSpec:
    """The level-lowering relation shape with per-prime smooth support <= Y."""

    def local_terms(p: int, parts: tuple[int, int]) -> list[tuple[float, tuple[int, int]]]:
        vm = _valuation(parts[0], p)
        vn = _valuation(parts[1], p)
        emax = 0
        while p ** (emax + 1) <= Y:
            emax += 1
        out = []
        for e in range(emax + 1):
            for w, dm, dn in _local_combos(p, e, vm, vn):
                out.append((w, (p ** (vm + dm), p ** (vn + dn))))
        return out

    return RelationSpec(2, local_terms)


# ---------------------------------------------------------------------------
# sign-character diagonalization identity


def t_mn_identity_check(f: HeckeSystem, L: int | Factored, m: int, n: int) -> dict:
    """Both evaluations of the weighted oldclass average T(m, n).

    Direct: sum over the 2^omega(L) sign characters of the twisted
    coefficients against their norms.  Closed: the double divisor sum with
    the square-detection collapsed.  Unit norm for the base system.
    """
    fL = L if isinstance(L, Factored) else factor(L)
    rho = rho_f(f, fL)
    direct = 0.0
    for phi in sign_characters(fL):
        norm = float(tau(fL))
        for p in fL.primes:
            factor_p = 1.0 + phi.sign_at(p) * f.lambda_p(p) * math.sqrt(p) / (p + 1)
            if abs(factor_p) < 1e-12:
                raise DegenerateSystemError(f"vanishing norm factor at p = {p}")
            norm *= factor_p
        direct += lambda_f_phi(f, phi, m) * lambda_f_phi(f, phi, n) / norm
    closed = 0.0
    gm = math.gcd(m, int(fL))
    gn = math.gcd(n, int(fL))
    for u in divisors_factored(factor(gm)):
        for v in divisors_factored(factor(gn)):
            un, vn_ = int(u), int(v)
            g = math.gcd(un, vn_)
            t = un * vn_ // (g * g)
            closed += (
                math.sqrt(un) * f.lambda_n(m // un)
                * math.sqrt(vn_) * f.lambda_n(n // vn_)
                * mobius(factor(t)) * f.lambda_n(t) * math.sqrt(t) / nu(factor(t))
            )
    closed /= rho
    return {"direct": direct, "closed": closed, "diff": abs(direct - closed)}


# ---------------------------------------------------------------------------
# derived eigenvalue data from one-dimensional spaces


_EMPTY_THRESHOLD = 5e-3  # |Delta_N(1,1)| below this reads as an empty space


@lru_cache(maxsize=32)
def _delta11(N: int, kappa: int) -> DeltaEstimate:
    return delta_geometric(N, kappa, 1, 1, max(10**5, 2 * 10**4 * N))


def derived_system(N: int | Factored, kappa: int, c_factor: int = 300) -> HeckeSystem:
    """Eigenvalues read off geometric ratios of a one-dimensional space.

    lambda(p) = Delta(p,1)/Delta(1,1), snapped to the nearest integer
    multiple of p^(-1/2) (integrality of the underlying Fourier coefficients
    for a rational one-dimensional space); ramified primes must come out
    within 1e-3 of +-p^(-1/2) before the sign is extracted.
    """
    fN = N if isinstance(N, Factored) else factor(N)
    Nn = int(fN)
    base = _delta11(Nn, kappa)
    if abs(base.value) < _EMPTY_THRESHOLD:
        raise ValueError(f"space of level {Nn}, weight {kappa} reads as empty")
    signs = {}
    for p in fN.primes:
        r = delta_geometric(Nn, kappa, p, 1, max(3 * 10**4, int(c_factor * Nn * math.sqrt(p)))).value
        lam = r / base.value
        if abs(abs(lam) - p**-0.5) > 1e-3:
            raise ValueError(f"ramified ratio at p = {p} is {lam}, not close to p^-1/2")
        signs[p] = 1 if lam > 0 else -1

    def ap(p: int) -> float:
        r = delta_geometric(Nn, kappa, p, 1, max(3 * 10**4, int(c_factor * Nn * math.sqrt(p)))).value
        lam = r / base.value
        t = lam * math.sqrt(p)
        k = round(t)
        if abs(t - k) > 0.25:
            raise ValueError(f"derived coefficient at p = {p} not near an integer: {t}")
        if abs(k) > 2 * math.sqrt(p):
            raise ValueError(f"derived coefficient at p = {p} outside the admissible range")
        return k / math.sqrt(p)

    return HeckeSystem(fN, kappa, "derived-geometric", signs, ap)


def newform_census(N: int | Factored, kappa: int, census_y: int = 512) -> list[HeckeSystem]:
    """Newform systems of exact level N: [] when the new space is empty,
    one derived system when it is one-dimensional; anything else raises.

    The emptiness read uses its own smooth cutoff: the read only has to
    resolve the gap between zero and the smallest positive diagonal, so a
    moderate cutoff suffices and is verified by a doubling step.
    """
    fN = N if isinstance(N, Factored) else factor(N)
    Nn = int(fN)
    star = delta_star_truncated(fN, kappa, 1, 1, Y=census_y)
    if abs(star.value) < _EMPTY_THRESHOLD:
        confirm = delta_star_truncated(fN, kappa, 1, 1, Y=2 * census_y)
        if abs(confirm.value) >= _EMPTY_THRESHOLD:
            raise NotImplementedError(f"emptiness read unstable at level {Nn}")
        return []
    # the one-dimensional read requires every lower level to be empty, so the
    # full average coincides with the new one and ratios are well defined
    for Md in divisors_factored(fN):
        if int(Md) != Nn and newform_census(Md, kappa):
            raise NotImplementedError(
                f"level {Nn} has oldforms from level {int(Md)}; explicit bases beyond "
                "one dimension are not supported"
            )
    base = _delta11(Nn, kappa)
    pairs = [(2, 3), (2, 2), (3, 3)]
    for m, n in pairs:
        if math.gcd(m * n, Nn) != 1:
            continue
        lhs = delta_geometric(Nn, kappa, m, n).value * base.value
        rhs = delta_geometric(Nn, kappa, m, 1).value * delta_geometric(Nn, kappa, 1, n).value
        if abs(lhs - rhs) > 5e-3:
            raise NotImplementedError(
                f"level {Nn} weight {kappa} fails the rank-one check: |{lhs} - {rhs}|"
            )
    return [derived_system(fN, kappa)]
