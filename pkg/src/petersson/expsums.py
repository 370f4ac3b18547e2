"""Complete exponential sums: Kloosterman, Ramanujan, and the triple sums.

The central object is the normalized triple sum

    G_{A,B}(m1, m2, m3; c) =
        [c,q]^{-3} * sum over x1, x2, x3 mod [c,q] of
        chi_q(x1 x2 x3) S(A x1 x2, B x3; c) e((x1 m1 + x2 m2 + x3 m3)/[c,q]),

where chi_q is the real primitive character of conductor q (omitted when
q = 1).  Besides the brute-force evaluator, which is the ground truth for
everything else, this module implements its multiplicative factorization into
an odd part, an even part, and a part supported on the primes of A*B, and
closed-form evaluations for the latter two factors and for the degenerate
case where one of the m_i vanishes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import Factored, coprime_split, euler_phi, factor, mobius, mod_inverse
from .characters import QuadraticCharacter, gauss_sum_quadratic, kahan_complex_sum

__all__ = [
    "BRUTE_MODULUS_GUARD",
    "WEIL_SWEEP_GUARD",
    "kloosterman",
    "kloosterman_table",
    "weil_bound",
    "ramanujan",
    "GSumResult",
    "gab_bruteforce",
    "gab_bruteforce_reference",
    "gab_crt_factor",
    "gab_closed_c2",
    "gab_closed_even",
    "gab_degenerate",
    "h_table",
    "h_star_table",
    "g_psi",
    "g_principal",
    "ramanujan_series_partial",
    "ramanujan_series_reference",
]

# cost guards; configuration constants rather than hard limits baked into logic
BRUTE_MODULUS_GUARD = 360
WEIL_SWEEP_GUARD = 2000


def _root_table(m: int) -> np.ndarray:
    """e(k/m) for k = 0..m-1; a single table kills per-term trig drift."""
    return np.exp(2j * np.pi * np.arange(m) / m)


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) = sum over x mod c, (x,c)=1 of e((m x + n xbar)/c).

    Real by x -> -x symmetry... rather by x -> xbar and conjugation; the
    imaginary part is asserted tiny and discarded.  c = 1 returns 1.
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    if c == 1:
        return 1.0
    e = _root_table(c)
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    for x in range(1, c):
        if math.gcd(x, c) != 1:
            continue
        xbar = pow(x, -1, c)
        v = e[(m * x + n * xbar) % c]
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    assert abs(total.imag) < 1e-9 * max(1.0, c), f"S({m},{n};{c}) not real: {total}"
    return float(total.real)


@lru_cache(maxsize=128)
def kloosterman_table(c: int) -> np.ndarray:
    """Full table S(a, b; c) for all residues a, b mod c, as a real array.

    Built with one batched inverse DFT: S(a, b; c) is, for fixed b, the
    forward transform of x -> e(b*xbar/c) on units.
    """
    if c == 1:
        return np.ones((1, 1))
    inv = np.zeros(c, dtype=np.int64)
    units = []
    for x in range(1, c):
        if math.gcd(x, c) == 1:
            units.append(x)
            inv[x] = pow(x, -1, c)
    e = _root_table(c)
    f = np.zeros((c, c), dtype=np.complex128)
    xs = np.array(units)
    f[xs, :] = e[(inv[xs][:, None] * np.arange(c)[None, :]) % c]
    tab = c * np.fft.ifft(f, axis=0)
    assert np.max(np.abs(tab.imag)) < 1e-8 * c
    return np.ascontiguousarray(tab.real)


def weil_bound(m: int, n: int, c: int) -> float:
    """tau(c) * gcd(m, n, c)^(1/2) * c^(1/2)."""
    from .arith import tau

    g = math.gcd(math.gcd(abs(m), abs(n)), c)
    if g == 0:
        g = c
    return tau(c) * math.sqrt(g) * math.sqrt(c)


def ramanujan(n: int, k: int) -> int:
    """R_k(n) = S(n, 0; k) = sum over d | (n, k) of d mu(k/d), exact."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = math.gcd(abs(n), k)
    total = 0
    for d in _divisor_list(g):
        total += d * mobius(factor(k // d)) if (k // d) >= 1 else 0
    return total


def _divisor_list(n: int) -> list[int]:
    out = [1]
    for p, e in factor(n).factors:
        out = [d * p**j for d in out for j in range(e + 1)]
    return out


@dataclass
class GSumResult:
    """Value of a G_{A,B} sum plus the route that produced it."""

    value: complex
    route: str
    params: dict = field(default_factory=dict)

    @property
    def real(self) -> float:
        return self.value.real


def _chi_table(q: int | Factored, modulus: int, eight_variant: int) -> np.ndarray:
    qn = int(q)
    if qn == 1:
        return np.ones(modulus)
    ch = QuadraticCharacter.from_conductor(q, eight_variant)
    return ch.values_mod(modulus)


def gab_bruteforce(
    m1: int,
    m2: int,
    m3: int,
    A: int,
    B: int,
    c: int,
    q: int | Factored = 1,
    eight_variant: int = 1,
    guard: int = BRUTE_MODULUS_GUARD,
) -> GSumResult:
    """Evaluate G_{A,B}(m1, m2, m3; c) from the definition.

    The triple sum collapses to O([c,q]^2 + c^2) work: the (x1, x2) plane is
    folded through np.bincount onto the residue A*x1*x2 mod c, after which a
    single Kloosterman table contraction and one x3 pass remain.  This is an
    exact regrouping of the defining sum, not an approximation.
    """
    qn = int(q)
    Q = math.lcm(c, qn)
    if Q > guard:
        raise ValueError(f"modulus lcm(c, q) = {Q} exceeds guard {guard}")
    chi = _chi_table(q, Q, eight_variant)
    e = _root_table(Q)
    x = np.arange(Q)
    u1 = chi * e[(m1 % Q) * x % Q]
    u2 = chi * e[(m2 % Q) * x % Q]
    # fold chi(x1)chi(x2)e((m1 x1 + m2 x2)/Q) onto k = A x1 x2 mod c
    idx = (A % c) * np.outer(x % c, x % c) % c if c > 1 else np.zeros((Q, Q), dtype=np.int64)
    P = np.outer(u1, u2)
    w_re = np.bincount(idx.ravel(), weights=P.real.ravel(), minlength=c)
    w_im = np.bincount(idx.ravel(), weights=P.imag.ravel(), minlength=c)
    W = w_re + 1j * w_im
    S = kloosterman_table(c)
    D = S.T @ W  # D[b] = sum_k W[k] S(k, b; c)
    x3term = chi * e[(m3 % Q) * x % Q] * D[(B % c) * x % c if c > 1 else np.zeros(Q, dtype=np.int64)]
    val = complex(np.sum(x3term)) / Q**3
    return GSumResult(val, "brute", dict(m=(m1, m2, m3), A=A, B=B, c=c, q=qn))


def gab_bruteforce_reference(m1, m2, m3, A, B, c, q=1, eight_variant=1) -> complex:
    """Independent slow oracle: literal triple loop over the definition.

    Kept deliberately naive (per-term gcd, cmath.exp) so that it shares no
    code path with gab_bruteforce; only usable for tiny moduli.
    """
    qn = int(q)
    Q = math.lcm(c, qn)
    ch = QuadraticCharacter.from_conductor(qn, eight_variant) if qn > 1 else None
    total = 0.0 + 0.0j
    for x1 in range(Q):
        for x2 in range(Q):
            s_first = A * x1 * x2
            for x3 in range(Q):
                w = 1.0 if ch is None else ch(x1 * x2 * x3)
                if w == 0:
                    continue
                s = kloosterman(s_first % c, (B * x3) % c, c)
                total += w * s * cmath.exp(2j * cmath.pi * ((m1 * x1 + m2 * x2 + m3 * x3) % Q) / Q)
    return total / Q**3


def _crt_twists(A: int, B: int, c: int, q: int | Factored, eight_variant: int):
    """Split data shared by the CRT factorization and the degenerate route."""
    fq = q if isinstance(q, Factored) else factor(int(q))
    qch = QuadraticCharacter.from_conductor(fq, eight_variant)
    q_o, q_e = qch.q_odd, qch.q_even
    if math.gcd(int(fq), A * B) != 1:
        raise ValueError("the conductor must be coprime to A*B")
    c1, c2 = coprime_split(c, A * B)
    c_e = 1
    cc = c1
    while cc % 2 == 0:
        c_e *= 2
        cc //= 2
    c_o = c1 // c_e
    return qch, q_o, q_e, c1, c2, c_o, c_e


def gab_crt_factor(
    m1: int,
    m2: int,
    m3: int,
    A: int,
    B: int,
    c: int,
    q: int | Factored = 1,
    eight_variant: int = 1,
    guard: int = BRUTE_MODULUS_GUARD,
) -> tuple[float, list[GSumResult]]:
    """Factor G_{A,B}(m; c) = chi_q(AB) * G(odd) * G(even) * G(AB-part).

    Returns (chi_q(AB), [odd factor, even factor, c2 factor]) where each
    factor is evaluated by brute force at its own modulus with the twisted
    third argument.  The product times the prefactor equals the full sum.
    """
    qch, q_o, q_e, c1, c2, c_o, c_e = _crt_twists(A, B, c, q, eight_variant)
    M_o = math.lcm(c_o, q_o)
    M_e = math.lcm(c_e, q_e)
    pref = float(qch(A * B))
    # odd factor: twist by inv(A B c2) * inv([c_e,q_e])^3 * c_e^2
    t_o = (
        mod_inverse(A * B * c2 % M_o, M_o)
        * pow(mod_inverse(M_e % M_o, M_o), 3, M_o if M_o > 1 else 1)
        * c_e**2
    ) % M_o if M_o > 1 else 0
    f_odd = gab_bruteforce(m1, m2, (t_o * m3) % M_o if M_o > 1 else 0, 1, 1, c_o, q_o, eight_variant, guard)
    f_odd.route = "crt-odd"
    # even factor: twist by inv(A B c2) * inv(c_o)
    t_e = (mod_inverse(A * B * c2 % M_e, M_e) * mod_inverse(c_o % M_e, M_e)) % M_e if M_e > 1 else 0
    f_even = gab_bruteforce(m1, m2, (t_e * m3) % M_e if M_e > 1 else 0, 1, 1, c_e, q_e, eight_variant, guard)
    f_even.route = "crt-even"
    # part on the primes of A*B: twist by inv([c1,q])^3 * c1^2, character dropped
    Mq = math.lcm(c1, int(qch.q))
    t_2 = (pow(mod_inverse(Mq % c2, c2), 3, c2) * c1**2) % c2 if c2 > 1 else 0
    f_c2 = gab_bruteforce(m1, m2, (t_2 * m3) % c2 if c2 > 1 else 0, A, B, c2, 1, eight_variant, guard)
    f_c2.route = "crt-c2"
    return pref, [f_odd, f_even, f_c2]


def gab_closed_c2(a1: int, a2: int, a3: int, A: int, B: int, c2: int) -> GSumResult:
    """Closed form for G_{A,B}(a1, a2, a3; c2) when every prime of c2 divides A*B.

    The sum vanishes unless (B, c2) = (a3, c2), (A, c2) | a1, (A, c2) | a2
    and the modulus factor c_z below is trivial; otherwise it is an explicit
    Ramanujan-sum / totient-ratio / single-exponential product.
    """
    if coprime_split(c2, A * B)[0] != 1:
        raise ValueError("c2 must be supported on the primes of A*B")
    params = dict(a=(a1, a2, a3), A=A, B=B, c2=c2)
    if c2 == 1:
        return GSumResult(1.0 + 0.0j, "closed_c2", params)
    gA = math.gcd(A, c2)
    gB = math.gcd(B, c2)
    if math.gcd(a3, c2) != gB or a1 % gA or a2 % gA:
        return GSumResult(0.0j, "closed_c2", params)
    A1 = A // gA
    B1 = B // gB
    c2p = c2 // gB
    a3t = a3 // gB
    g1 = math.gcd(a1 // gA, c2 // gA)
    a1t = a1 // (g1 * gA)
    g2 = math.gcd(a2 // gA, c2 // (g1 * gA))
    a2t = a2 // (g2 * gA)
    c2pp = c2 // (gA * g1 * g2)
    cf = cg = 1
    for p, beta in factor(c2).factors:
        vp_p = _valuation(c2p, p)
        vp_pp = _valuation(c2pp, p)
        if 1 <= vp_p < vp_pp:
            return GSumResult(0.0j, "closed_c2", params)  # c_z nontrivial
        if vp_pp <= vp_p:
            cf *= p**beta
        else:  # vp_p == 0 and vp_pp >= 1
            cg *= p**beta
    cfp = math.gcd(cf, c2p)
    cfpp = math.gcd(cf, c2pp)
    cgpp = math.gcd(cg, c2pp)
    rg = ramanujan(cg // cgpp, cg)
    phi_ratio = euler_phi(factor(cf)) / euler_phi(factor(cfp))
    if cfpp == 1:
        phase = 1.0 + 0.0j
    else:
        num = (
            mod_inverse(A1 * B1 % cfpp, cfpp)
            * (a1t % cfpp) * (a2t % cfpp) * (a3t % cfpp)
            * mod_inverse(cgpp % cfpp, cfpp)
        ) % cfpp
        phase = cmath.exp(2j * cmath.pi * num / cfpp)
    val = (gA / c2) * rg * phi_ratio * phase
    return GSumResult(val, "closed_c2", params)


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _v2(n: int) -> int:
    """2-adic valuation; zero maps to a large sentinel (divisible by all powers)."""
    if n == 0:
        return 1 << 30
    return _valuation(abs(n), 2)


def gab_closed_even(
    a1: int, a2: int, a3: int, q_e: int, c_e: int, eight_variant: int = 1
) -> GSumResult:
    """Closed form for G_{1,1}(a1, a2, a3; c_e) with c_e a power of 2.

    Case table over the relative position of the even conductor q_e in
    {1, 4, 8} and c_e; the q_e | c_e branch runs through the auxiliary sum
    H_{s_e} with its own sub-cases.
    """
    if q_e not in (1, 4, 8):
        raise ValueError("q_e must be 1, 4, or 8")
    if c_e < 1 or c_e & (c_e - 1):
        raise ValueError("c_e must be a power of 2")
    params = dict(a=(a1, a2, a3), q_e=q_e, c_e=c_e)
    ch = QuadraticCharacter.from_conductor(q_e, eight_variant) if q_e > 1 else None
    P = a1 * a2 * a3

    def chi4(n: int) -> int:
        if n % 2 == 0:
            return 0
        return 1 if n % 4 == 1 else -1

    if q_e == 1:
        s_e = c_e
        if math.gcd(a3, s_e) != 1:
            return GSumResult(0.0j, "closed_even", params)
        val = cmath.exp(2j * cmath.pi * (P % c_e) / c_e) / s_e
        return GSumResult(val, "closed_even", params)

    tau_chi = gauss_sum_quadratic(q_e, eight_variant)
    if c_e % q_e != 0:
        # small moduli: the whole sum collapses to one character value
        if c_e in (1, 2):
            val = ch(-1) * tau_chi * ch(P) / q_e**2
        elif q_e == 8 and c_e == 4:
            other = QuadraticCharacter.from_conductor(8, -eight_variant)
            val = ch(-1) * gauss_sum_quadratic(8, -eight_variant) * other(P) / 32
        else:  # pragma: no cover - exhausted by the cases above
            raise AssertionError("unreachable even case")
        return GSumResult(val, "closed_even", params)

    s_e = c_e // q_e
    if math.gcd(a3, s_e) != 1:
        return GSumResult(0.0j, "closed_even", params)
    if s_e % q_e == 0:
        H: complex = (ch(P) ** 2) * tau_chi**2
    elif s_e == 1:
        if q_e == 4:
            H = 0.5 * ramanujan(a1, 4) * ramanujan(a2, 4) * ramanujan(a3, 4)
        else:  # q_e == 8
            v = (_v2(a1), _v2(a2), _v2(a3))
            if all(t >= 2 for t in v):
                H = 0.25 * ramanujan(a1, 8) * ramanujan(a2, 8) * ramanujan(a3, 8)
            elif all(t == 1 for t in v):
                H = 16j * chi4(P // 8)
            else:
                H = 0.0
    elif 2 * s_e == q_e:
        H = -(ch(P) ** 2) * tau_chi**2
    elif s_e == 2 and q_e == 8:
        H = 1j * tau_chi**2 * chi4(P)
    else:  # pragma: no cover
        raise AssertionError("unreachable H case")
    val = ch(-1) / (q_e**2 * s_e) * cmath.exp(2j * cmath.pi * (P % c_e) / c_e) * H
    return GSumResult(val, "closed_even", params)


def gab_degenerate(
    a1: int,
    a2: int,
    a3: int,
    A: int,
    B: int,
    c: int,
    q: int | Factored = 1,
    eight_variant: int = 1,
) -> tuple[GSumResult, complex]:
    """G_{A,B}(a1, a2, a3; c) when some a_i = 0, and the bounded cofactor g.

    Returns (result, g) with c*q*phi(q)*G = g * R_{q_odd}(a1') R(a2') R(a3'),
    the a_i' being the parts of the a_i coprime to 2AB; |g| <= 64 (A,c)(B,c).
    Requires the odd part of the conductor to divide c.
    """
    if a1 and a2 and a3:
        raise ValueError("degenerate route requires some a_i = 0")
    qch, q_o, q_e, c1, c2, c_o, c_e = _crt_twists(A, B, c, q, eight_variant)
    if c_o % q_o != 0:
        raise ValueError("odd part of the conductor must divide c")
    params = dict(a=(a1, a2, a3), A=A, B=B, c=c, q=int(qch.q))
    s_o = c_o // q_o
    h = math.gcd(q_o, s_o)
    # gcd(x, 0) = x, so these conditions force s_o = 1 / h = 1 when a zero
    # sits in the corresponding slot, exactly as the support analysis demands
    odd_ok = math.gcd(s_o, abs(a3)) == 1 and math.gcd(h, abs(a1 * a2)) == 1
    chi_odd_minus1 = 1 if q_o % 4 == 1 or q_o == 1 else -1
    odd_coeff = (chi_odd_minus1 / (c_o * q_o * euler_phi(factor(q_o)))) if odd_ok else 0.0
    # even factor (gcd-level data only; twists by units cannot move it)
    if q_e == 1:
        even_val = (1.0 / c_e) if math.gcd(abs(a3), c_e) == 1 else 0.0
    elif q_e == c_e:
        chi_even = QuadraticCharacter.from_conductor(q_e, eight_variant)
        even_val = (
            chi_even(-1)
            * ramanujan(a1, q_e) * ramanujan(a2, q_e) * ramanujan(a3, q_e)
            / (q_e * c_e * euler_phi(factor(q_e)))
        )
    else:
        even_val = 0.0
    f2 = gab_closed_c2(a1, a2, a3, A, B, c2)
    pref = float(qch(A * B))
    r1 = ramanujan(a1, q_o)
    r2 = ramanujan(a2, q_o)
    r3 = ramanujan(a3, q_o)
    value = pref * odd_coeff * r1 * r2 * r3 * even_val * f2.value
    g = (
        c * int(qch.q) * euler_phi(qch.q)
        * pref * odd_coeff * even_val * f2.value
    )
    return GSumResult(value, "closed_degenerate", params), g


# ---------------------------------------------------------------------------
# numerical extraction of the block function H(w; D) from brute-force values


def h_table(D: int, eight_variant: int = 1) -> dict[int, complex]:
    """H(w; D) for units w mod D, solved from G_{1,1}(w, 1, 1; D) with q = D.

    D must be odd and square-free.  With s_o = 1 the prefactors collapse to
    H(w; D) = D^2 chi_D(-1) e(-w/D) G_{1,1}(w, 1, 1; D).
    """
    fD = factor(D)
    if D % 2 == 0 or not fD.is_squarefree():
        raise ValueError("D must be odd and square-free")
    chi_m1 = 1 if D % 4 == 1 or D == 1 else -1
    out: dict[int, complex] = {}
    for w in range(1, D + 1):
        if math.gcd(w, D) != 1:
            continue
        g = gab_bruteforce(w, 1, 1, 1, 1, D, D, eight_variant)
        out[w % D] = D * D * chi_m1 * cmath.exp(-2j * cmath.pi * w / D) * g.value
    if D == 1:
        out[0] = 1.0 + 0.0j
    return out


@lru_cache(maxsize=64)
def h_star_table(D: int) -> dict[int, complex]:
    """H*(w; D) tables, peeled from H(w; D) over the divisor lattice."""
    if D == 1:
        return {0: 1.0 + 0.0j}
    h = h_table(D)
    out: dict[int, complex] = {}
    for w, val in h.items():
        acc = val
        for d1 in _divisor_list(D):
            if d1 == 1:
                continue
            d2 = D // d1
            chi_m1 = 1 if d1 % 4 == 1 else -1
            sub = h_star_table(d2)
            if d2 == 1:
                sval = sub[0]
            else:
                sval = sub[(mod_inverse(d1 % d2, d2) * w) % d2]
            acc -= mobius(factor(d1)) * chi_m1 * sval
        out[w] = acc
    return out


def g_psi(D: int, psi) -> complex:
    """g(chi_D, psi) = tau(conj(psi))^{-1} sum_w H*(w; D) conj(psi(w))."""
    from .characters import gauss_sum

    hs = h_star_table(D)
    psi_bar = _conj_char(psi)
    tau_bar = gauss_sum(psi_bar)
    if abs(tau_bar) < 1e-9:
        raise ValueError("conj(psi) has vanishing Gauss sum; g is not extractable")
    s = sum(val * psi_bar(w) for w, val in hs.items())
    return s / tau_bar


def _conj_char(psi):
    from .characters import DirichletCharacter

    ph = tuple(-1 if h < 0 else (-h) % psi.exponent for h in psi.phases)
    return DirichletCharacter(psi.modulus, psi.exponent, ph)


def g_principal(D: int) -> complex:
    """g(chi_D, psi_0) for square-free odd D; tau(psi_0) = mu(D)."""
    hs = h_star_table(D)
    if D == 1:
        return 1.0 + 0.0j
    return mobius(factor(D)) * sum(hs.values())


# ---------------------------------------------------------------------------
# Ramanujan-sum Dirichlet series


def ramanujan_series_partial(q_o: int, ab: int, nterms: int, s: float = 2.0) -> float:
    """Partial sum of R_{q_o}(m)/m^s over m <= nterms with (m, 2*ab) = 1."""
    m = np.arange(1, nterms + 1, dtype=np.int64)
    keep = np.gcd(m, 2 * ab) == 1
    m = m[keep]
    g = np.gcd(m, q_o)
    # Hoelder: R_k(n) = mu(k/g) phi(k) / phi(k/g) with g = (n, k)
    vals = np.zeros(m.shape)
    phi_q = euler_phi(factor(q_o))
    for d in _divisor_list(q_o):
        sel = g == d
        if not sel.any():
            continue
        k = q_o // d
        vals[sel] = mobius(factor(k)) * phi_q / euler_phi(factor(k))
    return float(np.sum(vals / m.astype(np.float64) ** s))


def ramanujan_series_reference(q_o: int, ab: int) -> float:
    """mu(q_o) zeta(2) prod_{p | 2ab}(1 - p^-2) prod_{p | q_o}(1 - p^-1) at s = 2."""
    out = mobius(factor(q_o)) * math.pi**2 / 6
    for p, _ in factor(2 * ab).factors:
        out *= 1 - p**-2
    for p, _ in factor(q_o).factors:
        out *= 1 - 1 / p
    return out
