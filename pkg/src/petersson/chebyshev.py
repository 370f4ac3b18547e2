"""Coefficients of monomials in the Chebyshev-U basis and their level sums.

``cheb_coeff(j, n)`` is the coordinate of x^n on U_j(x/2); these integers
(Catalan's triangle read along diagonals) drive the conversion between the
completely multiplicative extension of Hecke eigenvalues and the eigenvalues
themselves.  The module also provides the multiplicative extension
``c_ell_d``, the truncated weighted sums ``s_l_y`` over smooth numbers, and
executable checks of the inequalities those sums satisfy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .arith import Factored, factor, iter_smooth, nu, tau

__all__ = [
    "MAX_N",
    "GAMMA0",
    "cheb_coeff",
    "expand_power_in_U",
    "ChebTable",
    "c_ell_d",
    "cheb_divisor_sum",
    "s_l_y",
    "verify_section6_bounds",
    "smooth_tail_sum",
    "Section6Report",
]

MAX_N = 60

# decay exponent log(3/2)/log(2) - 1/2 governing the truncated tails
GAMMA0 = math.log(1.5) / math.log(2.0) - 0.5


def cheb_coeff(j: int, n: int) -> int:
    """Coefficient of U_j(x/2) in x^n; zero unless 0 <= j <= n, j = n mod 2."""
    if n < 0 or n > MAX_N:
        raise ValueError(f"n = {n} out of supported range 0..{MAX_N}")
    if j < 0 or j > n or (n - j) % 2:
        return 0
    k = (n + j) // 2
    return math.comb(n, k) - math.comb(n, k + 1)


def expand_power_in_U(n: int) -> list[int]:
    """Coefficients [c_0, ..., c_n] of x^n in the basis U_j(x/2).

    Independent of :func:`cheb_coeff`: works symbolically from the recurrence
    t*U_j(t/2) = U_{j+1}(t/2) + U_{j-1}(t/2), multiplying by x one power at a
    time with exact integers.
    """
    if n < 0 or n > MAX_N:
        raise ValueError(f"n = {n} out of supported range 0..{MAX_N}")
    coeffs = [0] * (n + 1)
    coeffs[0] = 1  # x^0 = U_0
    for _ in range(n):
        nxt = [0] * (n + 1)
        for j, c in enumerate(coeffs):
            if c == 0:
                continue
            if j + 1 <= n:
                nxt[j + 1] += c
            if j >= 1:
                nxt[j - 1] += c
        coeffs = nxt
    return coeffs


@dataclass(frozen=True)
class ChebTable:
    """Triangle of coefficients c[j][n] for 0 <= j <= n <= max_n, exact."""

    max_n: int
    rows: tuple[tuple[int, ...], ...] = field(default=())

    @classmethod
    def build(cls, max_n: int) -> "ChebTable":
        if max_n > MAX_N:
            raise ValueError(f"max_n exceeds supported bound {MAX_N}")
        rows = tuple(tuple(cheb_coeff(j, n) for j in range(n + 1)) for n in range(max_n + 1))
        return cls(max_n, rows)

    def __call__(self, j: int, n: int) -> int:
        if n > self.max_n:
            raise ValueError("n beyond table range")
        if j < 0 or j > n:
            return 0
        return self.rows[n][j]

    def row_sum(self, n: int) -> int:
        return sum(self.rows[n])

    def diagonal_list(self, count: int) -> list[int]:
        """First ``count`` nonzero-parity entries read as c_{j,n} along rows."""
        out: list[int] = []
        n = 0
        while len(out) < count:
            for j in range(n % 2, n + 1, 2):
                out.append(self(j, n))
                if len(out) == count:
                    break
            n += 1
        return out


def c_ell_d(ell: int | Factored, d: int | Factored) -> int:
    """Product over p of c_{j,n} with p^j || d and p^n || ell; requires d | ell."""
    fe = ell if isinstance(ell, Factored) else factor(ell)
    fd = d if isinstance(d, Factored) else factor(d)
    if fe.n % fd.n != 0:
        raise ValueError(f"d = {fd.n} does not divide ell = {fe.n}")
    out = 1
    for p, n in fe.factors:
        j = fd.valuation(p)
        out *= cheb_coeff(j, n)
        if out == 0:
            return 0
    # primes of d must all occur in ell; d | ell guarantees that
    return out


def cheb_divisor_sum(ell: int | Factored, gamma: float) -> float:
    """sum over d | ell of c_ell(d) * d^gamma, as a per-prime product."""
    fe = ell if isinstance(ell, Factored) else factor(ell)
    out = 1.0
    for p, n in fe.factors:
        out *= sum(cheb_coeff(j, n) * float(p) ** (gamma * j) for j in range(n % 2, n + 1, 2))
    return out


def s_l_y(L: int | Factored, Y: int) -> float:
    """sum over ell | L^inf, ell <= Y of (ell/nu(ell)^2) (sum_d c_ell(d) d^(1/2))^2."""
    fL = L if isinstance(L, Factored) else factor(L)
    if not fL.is_squarefree():
        raise ValueError("L must be square-free")
    ps = fL.primes
    total = 0.0
    for val, expo in iter_smooth(ps, Y):
        inner = 1.0
        nul = 1.0
        for p, e in zip(ps, expo):
            if e:
                inner *= sum(cheb_coeff(j, e) * math.sqrt(float(p) ** j) for j in range(e % 2, e + 1, 2))
                nul *= float(p + 1) ** e
        total += val * inner * inner / (nul * nul)
    return total


@dataclass
class Section6Report:
    L: int
    Y: int
    gamma: float
    count: int
    max_weighted_ratio: float  # max over ell of lhs/rhs for the d^gamma bound
    max_decay_ratio: float  # max over ell of (sum c)/nu(ell) * ell^(log(3/2)/log 2)
    rankin_term_max: float  # max of ell*T_{1/2}(ell)^2/nu(ell)^2 (should be <= 1)
    s_value: float
    s_rankin_bound: float
    near_sharp: list[tuple[int, float]]  # (n, ratio*sqrt(n)) at ell = 2^n, n even

    @property
    def all_hold(self) -> bool:
        return (
            self.max_weighted_ratio <= 1.0 + 1e-12
            and self.max_decay_ratio <= 1.0 + 1e-12
            and self.rankin_term_max <= 1.0 + 1e-12
            and self.s_value <= self.s_rankin_bound * (1 + 1e-12)
        )


def verify_section6_bounds(L: int | Factored, Y: int, gamma: float, eps: float = 0.05) -> Section6Report:
    """Check the divisor-sum inequalities for every ell | L^inf up to Y.

    For each ell:  sum_d c_ell(d) d^gamma <= prod_{p^n||ell} (p^-gamma+p^gamma)^n,
    and (sum_d c_ell(d)) / nu(ell) <= ell^(-log(3/2)/log 2).  Also evaluates
    the Rankin-style bound on s_l_y with the given eps.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    fL = L if isinstance(L, Factored) else factor(L)
    if not fL.is_squarefree():
        raise ValueError("L must be square-free")
    ps = fL.primes
    delta = math.log(1.5) / math.log(2.0)
    max_w = 0.0
    max_d = 0.0
    max_rk = 0.0
    count = 0
    near: list[tuple[int, float]] = []
    for val, expo in iter_smooth(ps, Y):
        count += 1
        lhs_w = 1.0
        rhs_w = 1.0
        sum_c = 1.0
        nul = 1.0
        t_half = 1.0
        for p, e in zip(ps, expo):
            if not e:
                continue
            lhs_w *= sum(cheb_coeff(j, e) * float(p) ** (gamma * j) for j in range(e % 2, e + 1, 2))
            rhs_w *= (float(p) ** (-gamma) + float(p) ** gamma) ** e
            sum_c *= sum(cheb_coeff(j, e) for j in range(e % 2, e + 1, 2))
            nul *= float(p + 1) ** e
            t_half *= sum(cheb_coeff(j, e) * math.sqrt(float(p) ** j) for j in range(e % 2, e + 1, 2))
        max_w = max(max_w, lhs_w / rhs_w)
        max_d = max(max_d, (sum_c / nul) * float(val) ** delta)
        max_rk = max(max_rk, val * t_half * t_half / (nul * nul))
        if len(ps) == 1 and ps[0] == 2 and expo[0] % 2 == 0 and expo[0] > 0:
            n = expo[0]
            near.append((n, (sum_c / nul) * float(val) ** delta * math.sqrt(n)))
    s_val = s_l_y(fL, Y)
    rankin = float(Y) ** eps
    for p in ps:
        rankin /= 1.0 - float(p) ** (-eps)
    return Section6Report(fL.n, Y, gamma, count, max_w, max_d, max_rk, s_val, rankin, near)


def smooth_tail_sum(L: int | Factored, Ylo: int, Yhi: int, eps: float = 0.05) -> tuple[float, float]:
    """(tail, fitted C) for sum over Ylo < ell <= Yhi of ell^(1+eps)/nu^2 (sum c)^2.

    The fitted constant is tail / (Ylo^(-2*gamma0+2*eps) * tau(L)).
    """
    fL = L if isinstance(L, Factored) else factor(L)
    ps = fL.primes
    total = 0.0
    for val, expo in iter_smooth(ps, Yhi):
        if val <= Ylo:
            continue
        sum_c = 1.0
        nul = 1.0
        for p, e in zip(ps, expo):
            if e:
                sum_c *= sum(cheb_coeff(j, e) for j in range(e % 2, e + 1, 2))
                nul *= float(p + 1) ** e
        total += float(val) ** (1 + eps) * sum_c * sum_c / (nul * nul)
    denom = float(Ylo) ** (-2 * GAMMA0 + 2 * eps) * tau(fL)
    return total, total / denom if denom > 0 else math.inf
