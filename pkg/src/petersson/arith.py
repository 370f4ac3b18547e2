"""Exact integer arithmetic: factorization and multiplicative functions.

Everything downstream (characters, exponential sums, newform sieving)
manipulates levels and moduli through their prime factorizations, so the
central type here is :class:`Factored`, an integer bundled with its canonical
factorization.  All functions are pure and operate on immutable values.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

__all__ = [
    "Factored",
    "factor",
    "mobius",
    "nu",
    "radical",
    "euler_phi",
    "tau",
    "sigma",
    "divisors",
    "divisors_factored",
    "smooth_divisors_up_to",
    "iter_smooth",
    "gcd",
    "lcm",
    "mod_inverse",
    "crt",
    "coprime_split",
    "is_squarefree",
]

_MAX_INPUT = 2**63  # inputs are 64-bit; Python ints make intermediates exact

# deterministic Miller-Rabin witness set, valid for all n < 3.3 * 10^24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_LIMIT = 10**6


@dataclass(frozen=True)
class Factored:
    """A positive integer together with its prime factorization.

    Invariants: ``prod(p**e) == n``, primes strictly increasing, exponents
    >= 1, and ``n == 1`` iff ``factors`` is empty.
    """

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        m = 1
        last = 0
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization for {self.n}: {self.factors}")
            m *= p**e
            last = p
        if m != self.n or self.n < 1:
            raise ValueError(f"factorization {self.factors} does not reassemble {self.n}")

    def __int__(self) -> int:
        return self.n

    def __index__(self) -> int:
        return self.n

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def valuation(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
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


def _pollard_rho(n: int) -> int:
    """Brent-cycle Pollard rho; returns a nontrivial factor of composite odd n."""
    if n % 2 == 0:
        return 2
    # deterministic parameter sweep keeps results reproducible
    for c in range(1, 100):
        y, m = 2, 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"rho failed to split {n}")  # unreachable for 64-bit inputs


def _factor_dict(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    # wheel over 30 avoids multiples of 2, 3, 5
    increments = (4, 2, 4, 2, 4, 6, 2, 6)
    p, i = 7, 0
    while p * p <= n and p < _TRIAL_LIMIT:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += increments[i]
        i = (i + 1) % 8
    if n == 1:
        return out
    if n < _TRIAL_LIMIT * _TRIAL_LIMIT or _is_probable_prime(n):
        # no prime factor below the trial limit, so n < limit^2 means n is prime
        out[n] = out.get(n, 0) + 1
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if _is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


@lru_cache(maxsize=65536)
def factor(n: int) -> Factored:
    """Canonical factorization of ``n`` with ``1 <= n < 2**63``."""
    if not isinstance(n, int):
        n = int(n)
    if n < 1:
        raise ValueError(f"factor requires a positive integer, got {n}")
    if n >= _MAX_INPUT:
        raise ValueError(f"input {n} exceeds the 64-bit bound")
    if n == 1:
        return Factored(1, ())
    fd = _factor_dict(n)
    return Factored(n, tuple(sorted(fd.items())))


def _as_factored(n: int | Factored) -> Factored:
    return n if isinstance(n, Factored) else factor(n)


def mobius(n: int | Factored) -> int:
    f = _as_factored(n)
    if any(e >= 2 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def nu(n: int | Factored) -> int:
    """Completely multiplicative with nu(p) = p + 1; nu(1) = 1."""
    f = _as_factored(n)
    out = 1
    for p, e in f.factors:
        out *= (p + 1) ** e
    return out


def radical(n: int | Factored) -> Factored:
    f = _as_factored(n)
    r = 1
    for p, _ in f.factors:
        r *= p
    return Factored(r, tuple((p, 1) for p, _ in f.factors))


def euler_phi(n: int | Factored) -> int:
    f = _as_factored(n)
    out = 1
    for p, e in f.factors:
        out *= (p - 1) * p ** (e - 1)
    return out


def tau(n: int | Factored) -> int:
    f = _as_factored(n)
    out = 1
    for _, e in f.factors:
        out *= e + 1
    return out


def sigma(n: int | Factored) -> int:
    f = _as_factored(n)
    out = 1
    for p, e in f.factors:
        out *= (p ** (e + 1) - 1) // (p - 1)
    return out


def divisors(n: int | Factored) -> list[int]:
    """All positive divisors of n, sorted ascending."""
    f = _as_factored(n)
    ds = [1]
    for p, e in f.factors:
        ds = [d * p**k for d in ds for k in range(e + 1)]
    ds.sort()
    return ds


def divisors_factored(n: int | Factored) -> list[Factored]:
    """Divisors with factorizations attached (cheap: exponent tuples only)."""
    f = _as_factored(n)
    out: list[tuple[int, tuple[tuple[int, int], ...]]] = [(1, ())]
    for p, e in f.factors:
        nxt = []
        for d, fac in out:
            pk = 1
            for k in range(e + 1):
                nxt.append((d * pk, fac + ((p, k),) if k else fac))
                pk *= p
        out = nxt
    out.sort()
    return [Factored(d, fac) for d, fac in out]


def is_squarefree(n: int | Factored) -> bool:
    return _as_factored(n).is_squarefree()


def iter_smooth(primes: Iterable[int], bound: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Yield (value, exponents) for every integer <= bound supported on ``primes``.

    Heap merge of prime-power multiples: values come out in increasing order
    without materializing anything beyond the frontier.
    """
    ps = sorted(set(primes))
    if bound < 1:
        return
    zero = tuple(0 for _ in ps)
    heap: list[tuple[int, tuple[int, ...]]] = [(1, zero)]
    seen = {1}
    while heap:
        val, expo = heapq.heappop(heap)
        yield val, expo
        for i, p in enumerate(ps):
            nxt = val * p
            if nxt <= bound and nxt not in seen:
                seen.add(nxt)
                e2 = list(expo)
                e2[i] += 1
                heapq.heappush(heap, (nxt, tuple(e2)))


def smooth_divisors_up_to(L: int | Factored, Y: int) -> list[Factored]:
    """All ell <= Y with every prime factor dividing L (square-free), ascending."""
    f = _as_factored(L)
    if not f.is_squarefree():
        raise ValueError(f"L = {f.n} must be square-free")
    if Y < 1:
        raise ValueError("Y must be >= 1")
    ps = f.primes
    out = []
    for val, expo in iter_smooth(ps, Y):
        fac = tuple((p, e) for p, e in zip(ps, expo) if e)
        out.append(Factored(val, fac))
    return out


def gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    return math.lcm(a, b)


def mod_inverse(a: int, m: int) -> int:
    """Inverse of a modulo m; raises ValueError when gcd(a, m) != 1."""
    if m == 1:
        return 0
    try:
        return pow(a, -1, m)
    except ValueError as exc:
        raise ValueError(f"{a} is not invertible modulo {m}") from exc


def crt(residues: Iterable[int], moduli: Iterable[int]) -> tuple[int, int]:
    """Combine x = r_i mod m_i for pairwise coprime moduli; returns (x, prod m_i)."""
    x, m = 0, 1
    for r, mi in zip(residues, moduli, strict=True):
        if math.gcd(m, mi) != 1:
            raise ValueError(f"moduli are not pairwise coprime: {m}, {mi}")
        # lift x to the combined modulus
        t = (r - x) * mod_inverse(m % mi, mi) % mi
        x += m * t
        m *= mi
    return x % m, m


def coprime_split(n: int, s: int) -> tuple[int, int]:
    """Split n = n1 * n2 with gcd(n1, s) = 1 and every prime of n2 dividing s."""
    if n < 1:
        raise ValueError("n must be positive")
    n1, n2 = n, 1
    g = math.gcd(n1, s)
    while g > 1:
        n1 //= g
        n2 *= g
        g = math.gcd(n1, s)
    return n1, n2
