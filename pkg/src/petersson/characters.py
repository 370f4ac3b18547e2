"""Dirichlet characters and the real primitive character of a given conductor.

The real primitive character of conductor q factors as the Jacobi symbol of
the odd part times a character of conductor 1, 4, or 8; conductor 8 has two
real primitive characters and callers pick one through ``eight_variant``.

General Dirichlet characters to small moduli are stored as full value tables,
with phases kept as exact integers modulo the group exponent so orthogonality
relations hold to rounding error.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import Factored, euler_phi, factor, mod_inverse

__all__ = [
    "jacobi_symbol",
    "QuadraticCharacter",
    "chi_q",
    "DirichletCharacter",
    "enumerate_characters",
    "principal_character",
    "gauss_sum",
    "kahan_complex_sum",
]

_MAX_MODULUS = 10**4


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a|n) for odd positive n, by binary reciprocity."""
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs odd positive n, got {n}")
    a %= n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _chi4(n: int) -> int:
    if n % 2 == 0:
        return 0
    return 1 if n % 4 == 1 else -1


def _chi8(n: int) -> int:
    # the even character of conductor 8 (value +1 at -1)
    if n % 2 == 0:
        return 0
    return 1 if n % 8 in (1, 7) else -1


@dataclass(frozen=True)
class QuadraticCharacter:
    """The real primitive character chi of conductor q = q_odd * q_even.

    ``q_even`` is 1, 4, or 8; ``q_odd`` is odd and square-free.  For
    ``q_even == 8`` the two primitive choices are distinguished by
    ``eight_variant`` (+1: even variant, -1: the odd one, i.e. times chi_4).
    """

    q: Factored
    q_odd: int
    q_even: int
    eight_variant: int = 1

    @classmethod
    def from_conductor(cls, q: int | Factored, eight_variant: int = 1) -> "QuadraticCharacter":
        f = q if isinstance(q, Factored) else factor(q)
        two = f.valuation(2)
        q_even = 2**two
        if q_even not in (1, 4, 8):
            raise ValueError(f"invalid conductor {f.n}: even part must be 1, 4, or 8")
        q_odd = f.n // q_even
        for p, e in f.factors:
            if p != 2 and e != 1:
                raise ValueError(f"invalid conductor {f.n}: odd part must be square-free")
        if eight_variant not in (1, -1):
            raise ValueError("eight_variant must be +1 or -1")
        return cls(f, q_odd, q_even, eight_variant)

    def __call__(self, n: int) -> int:
        v = jacobi_symbol(n, self.q_odd)
        if v == 0:
            return 0
        if self.q_even == 4:
            v *= _chi4(n)
        elif self.q_even == 8:
            c = _chi8(n)
            if self.eight_variant == -1:
                c *= _chi4(n)
            v *= c
        return v

    @property
    def parity(self) -> int:
        """chi(-1); +1 for an even character, -1 for an odd one."""
        return self(self.q.n - 1) if self.q.n > 1 else 1

    def values_mod(self, modulus: int) -> np.ndarray:
        """Value table chi(0..modulus-1); modulus must be a multiple of q."""
        if modulus % self.q.n != 0:
            raise ValueError("modulus must be divisible by the conductor")
        return np.array([self(x) for x in range(modulus)], dtype=np.float64)


def chi_q(q: int | Factored, n: int, eight_variant: int = 1) -> int:
    """Value of the real primitive character of conductor q at n."""
    return QuadraticCharacter.from_conductor(q, eight_variant)(n)


def _unit_group_structure(m: int) -> tuple[list[int], list[int]]:
    """Generators and their orders for (Z/mZ)^*."""
    gens: list[int] = []
    orders: list[int] = []
    for p, e in factor(m).factors:
        pe = p**e
        rest = m // pe
        # lift a local generator g mod p^e to be 1 modulo the complement
        def lift(g: int) -> int:
            if rest == 1:
                return g % m
            r, _ = _crt2(g, pe, 1, rest)
            return r

        if p == 2:
            if e == 1:
                continue
            if e == 2:
                gens.append(lift(3))
                orders.append(2)
            else:
                gens.append(lift(pe - 1))
                orders.append(2)
                gens.append(lift(5))
                orders.append(2 ** (e - 2))
        else:
            g = _primitive_root(p, e)
            gens.append(lift(g))
            orders.append((p - 1) * p ** (e - 1))
    return gens, orders


def _crt2(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    t = (r2 - r1) * mod_inverse(m1 % m2, m2) % m2
    return (r1 + m1 * t) % (m1 * m2), m1 * m2


@lru_cache(maxsize=None)
def _primitive_root(p: int, e: int) -> int:
    phi = p - 1
    qs = [q for q, _ in factor(phi).factors]
    g = 2
    while True:
        if all(pow(g, phi // q, p) != 1 for q in qs):
            break
        g += 1
    if e == 1:
        return g
    # g or g + p generates mod p^2, hence mod every p^e
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


@dataclass(frozen=True)
class DirichletCharacter:
    """A character mod ``modulus`` held as a full table of unit-phase numerators.

    ``phases[x]`` is defined for units x: the value is e(phases[x]/exponent).
    Non-units carry phase -1 as a sentinel and value 0.
    """

    modulus: int
    exponent: int
    phases: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 1 or self.modulus > _MAX_MODULUS:
            raise ValueError(f"modulus {self.modulus} outside supported range")

    def __call__(self, n: int) -> complex:
        h = self.phases[n % self.modulus]
        if h < 0:
            return 0.0
        return cmath.exp(2j * math.pi * h / self.exponent)

    def value_table(self) -> np.ndarray:
        idx = np.array(self.phases, dtype=np.int64)
        vals = np.exp(2j * np.pi * np.maximum(idx, 0) / self.exponent)
        vals[idx < 0] = 0.0
        return vals

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            raise ValueError("characters must share a modulus")
        e = math.lcm(self.exponent, other.exponent)
        ph = tuple(
            -1 if a < 0 else (a * (e // self.exponent) + b * (e // other.exponent)) % e
            for a, b in zip(self.phases, other.phases)
        )
        return DirichletCharacter(self.modulus, e, ph)

    @property
    def is_principal(self) -> bool:
        return all(h <= 0 for h in self.phases)

    @property
    def order(self) -> int:
        g = 0
        for h in self.phases:
            if h > 0:
                g = math.gcd(g, h)
        if g == 0:
            return 1
        return self.exponent // math.gcd(self.exponent, g)

    def conductor(self) -> int:
        """Smallest f | modulus such that the character is induced mod f."""
        m = self.modulus
        for f in sorted(d for d in _divisors_int(m)):
            ok = True
            for x in range(1, m + 1):
                if x % f == 1 and math.gcd(x, m) == 1 and self.phases[x % m] % self.exponent != 0:
                    ok = False
                    break
            if ok:
                return f
        return m

    @property
    def is_primitive(self) -> bool:
        return self.conductor() == self.modulus

    def is_real(self) -> bool:
        return all(h <= 0 or 2 * h % self.exponent == 0 for h in self.phases)


def _divisors_int(m: int) -> list[int]:
    out = [1]
    for p, e in factor(m).factors:
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def principal_character(modulus: int) -> DirichletCharacter:
    if modulus == 1:
        return DirichletCharacter(1, 1, (0,))
    ph = tuple(0 if math.gcd(x, modulus) == 1 else -1 for x in range(modulus))
    return DirichletCharacter(modulus, 1, ph)


def enumerate_characters(modulus: int) -> list[DirichletCharacter]:
    """All phi(modulus) Dirichlet characters mod ``modulus``.

    The returned list contains the principal character and is closed under
    multiplication.
    """
    if modulus < 1 or modulus > _MAX_MODULUS:
        raise ValueError(f"modulus {modulus} outside supported range")
    if modulus == 1:
        return [principal_character(1)]
    gens, orders = _unit_group_structure(modulus)
    exponent = 1
    for s in orders:
        exponent = math.lcm(exponent, s)

    # discrete log of every unit in generator coordinates
    coords = [(1, tuple(0 for _ in gens))]
    for i, (g, s) in enumerate(zip(gens, orders)):
        new = []
        for base, vec in coords:
            x = base
            for k in range(s):
                v = list(vec)
                v[i] = k
                new.append((x, tuple(v)))
                x = x * g % modulus
        coords = new
    dlog = {x: vec for x, vec in coords}
    assert len(dlog) == euler_phi(modulus)

    chars = []
    kvecs: list[tuple[int, ...]] = [()]
    for s in orders:
        kvecs = [kv + (k,) for kv in kvecs for k in range(s)]
    for kv in kvecs:
        ph = [-1] * modulus
        for x, vec in dlog.items():
            h = 0
            for k, v, s in zip(kv, vec, orders):
                h += k * v * (exponent // s)
            ph[x] = h % exponent
        chars.append(DirichletCharacter(modulus, exponent, tuple(ph)))
    return chars


def kahan_complex_sum(values) -> complex:
    """Compensated (Kahan) summation of an iterable of complex numbers."""
    s = 0.0 + 0.0j
    c = 0.0 + 0.0j
    for v in values:
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum over x mod m of chi(x) e(x/m), Kahan-compensated."""
    m = chi.modulus
    if m == 1:
        return 1.0 + 0.0j
    return kahan_complex_sum(
        chi(x) * cmath.exp(2j * math.pi * x / m) for x in range(m) if chi.phases[x] >= 0
    )


def gauss_sum_quadratic(q: int | Factored, eight_variant: int = 1) -> complex:
    """Gauss sum of the real primitive character of conductor q."""
    ch = QuadraticCharacter.from_conductor(q, eight_variant)
    m = ch.q.n
    if m == 1:
        return 1.0 + 0.0j
    return kahan_complex_sum(
        ch(x) * cmath.exp(2j * math.pi * x / m) for x in range(m)
    )
