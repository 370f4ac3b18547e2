"""Central values of quadratic twists and the cubic-moment assembly.

The smoothing functions V1, V2 are numerical inverse Mellin transforms of
ratio-of-gamma kernels on a vertical contour; central values come from the
approximate functional equation with those cutoffs; the moment over a family
of newform levels is computed both spectrally (explicit eigenvalue systems,
positive weights, cubes of central values) and geometrically (character-
weighted double sums against the hybrid Petersson average), and the two
totals are cross-checked.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arith import Factored, divisors, euler_phi, factor, mobius, nu, radical, tau
from .characters import QuadraticCharacter
from .chebyshev import GAMMA0
from .spectral import (
    DeltaEstimate,
    HeckeSystem,
    _delta11,
    delta_geometric,
    newform_census,
    rho_f,
    sieve_terms,
)
from . import _ksums
from .bessel import besselj

__all__ = [
    "complex_gamma",
    "VFunction",
    "v_function",
    "root_number",
    "l_half_twisted",
    "l_half_twisted_squared",
    "omega_f",
    "fe_sign_probe",
    "MomentReport",
    "cubic_moment",
]

# Lanczos approximation, g = 7, double-precision coefficient set
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def complex_gamma(z: complex) -> complex:
    """Gamma(z) for complex z by Lanczos; reflection for Re z < 1/2."""
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * complex_gamma(1 - z))
    z -= 1
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def _w_kernel(which: int, kappa: int) -> Callable[[complex], complex]:
    g0 = complex_gamma(complex(kappa / 2.0))

    def w1(u: complex) -> complex:
        return (2 * math.pi) ** (-u) * complex_gamma(u + kappa / 2.0) / (g0 * u)

    def w2(u: complex) -> complex:
        return (2 * math.pi) ** (-2 * u) * complex_gamma(u + kappa / 2.0) ** 2 / (g0 * g0 * u)

    return w1 if which == 1 else w2


class VFunction:
    """Smooth cutoff V(y) = (2 pi i)^-1 int_(sigma) W(u) y^-u du.

    Evaluated by trapezoid quadrature on vertical lines (spectrally accurate
    for these analytic, gamma-decaying integrands), sampled on a log-spaced
    grid with cubic interpolation between nodes.  Below ``y_switch`` the
    contour is shifted left of the unit-residue pole at u = 0, so the small-y
    regime is computed as 1 + (small shifted integral) instead of through a
    cancellation catastrophe; V(y) = 1 below the grid and 0 above it.
    """

    def __init__(
        self,
        kernel: Callable[[complex], complex],
        sigma: float = 2.0,
        sigma_left: float = -0.5,
        y_switch: float = 0.01,
        t_max: float = 60.0,
        dt: float = 0.02,
        y_lo: float = 1e-8,
        y_hi: float = 1e3,
        grid_points: int = 12000,
    ) -> None:
        self.sigma = sigma
        self.t_max = t_max
        self.dt = dt
        self.y_lo = y_lo
        self.y_hi = y_hi
        self.y_switch = y_switch
        self._grid_points = grid_points
        self._grid: np.ndarray | None = None
        self._vals: np.ndarray | None = None
        ts = np.arange(-t_max, t_max + dt / 2, dt)
        self._us = sigma + 1j * ts
        self._wt = np.array([kernel(u) for u in self._us]) * (dt / (2 * math.pi))
        self._us_l = sigma_left + 1j * ts
        self._wt_l = np.array([kernel(u) for u in self._us_l]) * (dt / (2 * math.pi))

    @classmethod
    def for_weight(cls, which: int, kappa: int, sigma: float = 2.0, **kw) -> "VFunction":
        if kappa % 2 or kappa < 2:
            raise ValueError("kappa must be even and >= 2")
        return cls(_w_kernel(which, kappa), sigma=sigma, **kw)

    def _quad(self, y: np.ndarray) -> np.ndarray:
        out = np.empty(len(y))
        small = y <= self.y_switch
        block = 4096
        for sel, us, wt, shift in (
            (small, self._us_l, self._wt_l, 1.0),
            (~small, self._us, self._wt, 0.0),
        ):
            ys = y[sel]
            vals = np.empty(len(ys))
            for lo in range(0, len(ys), block):
                yy = ys[lo : lo + block]
                e = np.exp(-np.outer(np.log(yy), us))
                vals[lo : lo + block] = (e @ wt).real
            out[sel] = vals + shift
        return out

    def _build(self) -> None:
        g = np.exp(np.linspace(math.log(self.y_lo), math.log(self.y_hi), self._grid_points))
        self._grid = np.log(g)
        self._vals = self._quad(g)

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        if np.any(y <= 0):
            raise ValueError("y must be positive")
        if self._grid is None:
            self._build()
        out = np.empty(len(y))
        lo = y <= self.y_lo
        hi = y >= self.y_hi
        mid = ~(lo | hi)
        out[lo] = 1.0
        out[hi] = 0.0
        if mid.any():
            out[mid] = self._interp(np.log(y[mid]))
        return float(out[0]) if scalar else out

    def _interp(self, x: np.ndarray) -> np.ndarray:
        g, v = self._grid, self._vals
        h = g[1] - g[0]
        i = np.clip(((x - g[0]) / h).astype(np.int64), 1, len(g) - 3)
        t = (x - g[i]) / h
        # Catmull-Rom through the four surrounding nodes
        p0, p1, p2, p3 = v[i - 1], v[i], v[i + 1], v[i + 2]
        return p1 + 0.5 * t * (
            p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0))
        )

    def exact(self, y: float) -> float:
        """Single-point quadrature value, bypassing the grid (oracle hook)."""
        return float(self._quad(np.array([y]))[0])


_vcache: dict[tuple[int, int], VFunction] = {}


def v_function(which: int, kappa: int, y) -> float | np.ndarray:
    """V_which(y) for the weight-kappa kernel, cached per (which, kappa)."""
    key = (which, kappa)
    vf = _vcache.get(key)
    if vf is None:
        vf = _vcache[key] = VFunction.for_weight(which, kappa)
    return vf(y)


# ---------------------------------------------------------------------------
# root numbers


def root_number(
    f: HeckeSystem, r: int | Factored, q_prime: int | Factored, q: int | Factored,
    eight_variant: int = 1,
) -> int:
    """Sign of the functional equation of the twisted central series.

    With the base system of square-free level r*q', conductor coprime
    conditions enforced, the sign is chi_q(-r) mu(q') q'^(1/2) lambda(q')
    times the untwisted sign; the q'-product collapses to the product of
    ramified signs.
    """
    fr = r if isinstance(r, Factored) else factor(r)
    fq_ = q_prime if isinstance(q_prime, Factored) else factor(q_prime)
    qch = QuadraticCharacter.from_conductor(q, eight_variant)
    rn, qpn = int(fr), int(fq_)
    if int(f.level) != rn * qpn:
        raise ValueError("system level must equal r * q'")
    if not factor(rn * qpn).is_squarefree():
        raise ValueError("r * q' must be square-free")
    if math.gcd(rn, int(qch.q)) != 1:
        raise ValueError("r must be coprime to q")
    if radical(qch.q).n % qpn != 0:
        raise ValueError("q' must divide the square-free kernel of q")
    sign = qch(-rn)
    if sign == 0:
        raise ValueError("r shares a factor with q")
    sign *= mobius(fq_)
    for p in fq_.primes:
        # q'^(1/2) lambda(q') is exactly the product of ramified signs
        sign *= f.ramified_signs[p]
    return sign * f.epsilon_f


# ---------------------------------------------------------------------------
# central values by approximate functional equation


def _chi_vals(qch: QuadraticCharacter, n_max: int) -> np.ndarray:
    return np.array([qch(n) for n in range(n_max + 1)], dtype=np.float64)


def l_half_twisted(
    f: HeckeSystem,
    q: int | Factored,
    r: int | Factored,
    eight_variant: int = 1,
    n_factor: float = 20.0,
) -> float:
    """(1 + eps) * sum of lambda(n) chi(n) n^(-1/2) V1(n / (q sqrt r)).

    Vanishes exactly when the root number is -1.
    """
    fr = r if isinstance(r, Factored) else factor(r)
    qch = QuadraticCharacter.from_conductor(q, eight_variant)
    qp = int(f.level) // int(fr)
    eps = root_number(f, fr, qp, qch.q, eight_variant)
    if eps == -1:
        return 0.0
    scale = int(qch.q) * math.sqrt(int(fr))
    n_max = math.ceil(n_factor * scale)
    chi = _chi_vals(qch, n_max)
    ns = np.arange(1, n_max + 1)
    lam = np.array([f.lambda_n(int(n)) if chi[n] else 0.0 for n in ns])
    v = v_function(1, f.weight, ns / scale)
    return float((1 + eps) * np.sum(lam * chi[1:] * v / np.sqrt(ns)))


def l_half_twisted_squared(
    f: HeckeSystem,
    q: int | Factored,
    r: int | Factored,
    eight_variant: int = 1,
    n_factor: float = 20.0,
) -> float:
    """2 sum over (d, qr) = 1 of d^-1 sum_m lambda(m) tau(m) chi(m) m^-1/2 V2(d^2 m/(r q^2))."""
    fr = r if isinstance(r, Factored) else factor(r)
    qch = QuadraticCharacter.from_conductor(q, eight_variant)
    qn, rn = int(qch.q), int(fr)
    box = n_factor * qn * qn * rn
    d_max = math.floor(math.sqrt(box))
    total = 0.0
    for d in range(1, d_max + 1):
        if math.gcd(d, qn * rn) != 1:
            continue
        m_max = math.floor(box / (d * d))
        ms = np.arange(1, m_max + 1)
        chi = _chi_vals(qch, m_max)
        lam = np.array([f.lambda_n(int(m)) * tau(int(m)) if chi[m] else 0.0 for m in ms])
        v = v_function(2, f.weight, (d * d) * ms / (rn * qn * qn))
        total += float(np.sum(lam * chi[1:] * v / np.sqrt(ms))) / d
    return 2.0 * total


def omega_f(
    f: HeckeSystem,
    r: int | Factored,
    q_prime: int | Factored,
    q: int | Factored,
    delta_source: DeltaEstimate | None = None,
) -> float:
    """Weight attached to a level-(r q') system in the moment over q' | rad(q).

    The inner-product factor comes from the geometric diagonal of the
    one-dimensional space: delta_source defaults to Delta_{rq'}(1, 1).
    """
    fr = r if isinstance(r, Factored) else factor(r)
    fq_ = q_prime if isinstance(q_prime, Factored) else factor(q_prime)
    qt = radical(factor(int(q))).n
    rest = qt // int(fq_)
    if qt % int(fq_) != 0:
        raise ValueError("q' must divide the square-free kernel of q")
    if delta_source is None:
        delta_source = _delta11(int(fr) * int(fq_), f.weight)
    return delta_source.value / (nu(factor(rest)) * rho_f(f, factor(rest)))


# ---------------------------------------------------------------------------
# functional-equation sign probe (smoothed series, no sign assumptions)


def _v_sign_kernel() -> VFunction:
    # W(u) = Gamma(u+4)/(6u): unit mass at u = 0, first correction at u = -4,
    # so the smoothed series differs from the series value by O(T^-4)
    return VFunction(lambda u: complex_gamma(u + 4) / (6 * u), y_hi=300.0)


_vsign: VFunction | None = None


def fe_sign_probe(
    f: HeckeSystem,
    q: int | Factored,
    eight_variant: int = 1,
    delta: float = 0.1,
    T: float = 100.0,
) -> int:
    """Observed sign relation of the completed series at 1/2 +- delta.

    Computes smoothed partial sums L(s; T) = sum lambda chi(n) n^-s V(n/T)
    whose difference from L(s) is O(T^-4) here, and returns the product of
    the two signs; the functional equation forces this to equal the root
    number whenever the central derivative behavior is nondegenerate.
    """
    global _vsign
    if _vsign is None:
        _vsign = _v_sign_kernel()
    qch = QuadraticCharacter.from_conductor(q, eight_variant)
    n_max = int(45 * T)
    chi = _chi_vals(qch, n_max)
    ns = np.arange(1, n_max + 1)
    lam = np.array([f.lambda_n(int(n)) if chi[n] else 0.0 for n in ns])
    cut = _vsign(ns / T)
    signs = []
    for s in (0.5 + delta, 0.5 - delta):
        val = float(np.sum(lam * chi[1:] * cut / ns.astype(np.float64) ** s))
        signs.append(1 if val > 0 else -1)
    return signs[0] * signs[1]


# ---------------------------------------------------------------------------
# the cubic moment, spectrally and geometrically


@dataclass
class MomentReport:
    r: int
    q: int
    kappa: int
    mode: str
    total: float
    levels: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    budgets: dict = field(default_factory=dict)

    @property
    def sanity_ratio(self) -> float:
        """total / (q r)^1.05; logged against a fixed generosity constant."""
        return self.total / float(self.q * self.r) ** 1.05


def _moment_ranges(r: int, q: int, eps: float = 0.05, const: float = 20.0):
    n_max = math.ceil(const * r ** (0.5 + eps) * q ** (1 + eps))
    m_box = const * r ** (1 + eps) * q ** (2 + eps)
    return n_max, m_box


def cubic_moment(
    r: int | Factored,
    q: int | Factored,
    kappa: int,
    mode: str,
    eight_variant: int = 1,
    Y: int = 10**4,
    c_floor: int = 2 * 10**4,
    c_factor: float = 16.0,
    c_cap: int = 24 * 10**4,
    skip_ratio: float = 1e-12,
    threads: int = 1,
) -> MomentReport:
    """Weighted sum of cubes of twisted central values over levels r*q', q' | rad(q).

    ``spectral`` enumerates the newform systems (derived, dimension <= 1
    required) and sums omega_f L(1/2)^3.  ``geometric`` evaluates the same
    quantity through the hybrid Petersson average: a character-weighted
    (m, n) double sum with V1/V2 cutoffs against the sieve expansion, the
    inner progressions truncated by a per-pair budget rule recorded in the
    report.
    """
    fr = r if isinstance(r, Factored) else factor(r)
    qch = QuadraticCharacter.from_conductor(q, eight_variant)
    rn, qn = int(fr), int(qch.q)
    qt = radical(qch.q).n
    if math.gcd(rn, qn) != 1 or not factor(rn * qt).is_squarefree():
        raise ValueError("need square-free r * rad(q) with (r, q) = 1")
    if mode == "spectral":
        return _moment_spectral(fr, qch, kappa, eight_variant)
    if mode == "geometric":
        return _moment_geometric(
            fr, qch, kappa, Y, c_floor, c_factor, c_cap, skip_ratio, threads
        )
    raise ValueError(f"unknown mode {mode!r}")


def _moment_spectral(fr: Factored, qch: QuadraticCharacter, kappa: int, eight_variant: int) -> MomentReport:
    rn, qn = int(fr), int(qch.q)
    qt = radical(qch.q).n
    levels = {}
    total = 0.0
    for qp in divisors(qt):
        forms = newform_census(rn * qp, kappa)
        rows = []
        for f in forms:
            w = omega_f(f, fr, qp, qch.q)
            lv = l_half_twisted(f, qch.q, fr, eight_variant)
            eps = root_number(f, fr, qp, qch.q, eight_variant)
            total += w * lv**3
            rows.append({"omega": w, "L": lv, "eps": eps})
        levels[rn * qp] = rows
    rep = MomentReport(rn, qn, kappa, "spectral", total, levels)
    rep.parameters = {"eight_variant": eight_variant}
    return rep


def _moment_geometric(
    fr: Factored,
    qch: QuadraticCharacter,
    kappa: int,
    Y: int,
    c_floor: int,
    c_factor: float,
    c_cap: int,
    skip_ratio: float,
    threads: int,
) -> MomentReport:
    rn, qn = int(fr), int(qch.q)
    qt = radical(qch.q).n
    n_max, m_box = _moment_ranges(rn, qn)
    chi_n = _chi_vals(qch, n_max)
    m_max = math.floor(m_box)
    chi_m = _chi_vals(qch, m_max)
    scale1 = qn * math.sqrt(rn)
    # fold the d-sum into a per-m weight: sum over (d, qr) = 1 of V2(d^2 m/(q^2 r))/d
    ms = np.arange(1, m_max + 1)
    v2_of_m = np.zeros(m_max + 1)
    d = 1
    while d * d <= m_box:
        if math.gcd(d, qn * rn) == 1:
            top = math.floor(m_box / (d * d))
            v2_of_m[1 : top + 1] += v_function(2, kappa, (d * d) * ms[:top] / (qn * qn * rn)) / d
        d += 1
    alpha = np.zeros(m_max + 1)
    for m in range(1, m_max + 1):
        if chi_m[m]:
            alpha[m] = 4.0 * tau(m) * chi_m[m] / math.sqrt(m) * v2_of_m[m]
    beta = np.zeros(n_max + 1)
    nvals = np.arange(1, n_max + 1)
    v1 = v_function(1, kappa, nvals / scale1)
    for n in range(1, n_max + 1):
        if chi_n[n]:
            beta[n] = chi_n[n] / math.sqrt(n) * v1[n - 1]
    a_abs = np.abs(alpha)
    b_abs = np.abs(beta)
    w_max = float(a_abs.max() * b_abs.max()) if m_max and n_max else 1.0
    w_min = skip_ratio * w_max
    # restrict to arguments that can clear the skip threshold at all
    ms_keep = [m for m in range(1, m_max + 1) if a_abs[m] * b_abs.max() >= w_min]
    ns_keep = [n for n in range(1, n_max + 1) if b_abs[n] * a_abs.max() >= w_min]
    skipped_mass = float(
        np.sum(a_abs[1:]) * np.sum(b_abs[1:])
        - sum(a_abs[m] for m in ms_keep) * sum(b_abs[n] for n in ns_keep)
    )
    # assemble the expanded pair list through the sieve, grouped by progression
    grouped: dict[int, dict[tuple[int, int], float]] = {}
    diag_by_level: dict[int, float] = {}
    n_pairs = 0
    for m in ms_keep:
        for n in ns_keep:
            w = alpha[m] * beta[n]
            if abs(w) < w_min:
                skipped_mass += abs(w)
                continue
            n_pairs += 1
            for wt, M, m2, n2 in sieve_terms(fr, m, n, Y):
                ww = w * wt
                if abs(ww) < w_min:
                    skipped_mass += abs(ww)
                    continue
                N0 = M * qt
                if m2 == n2:
                    diag_by_level[N0] = diag_by_level.get(N0, 0.0) + ww
                bucket = grouped.setdefault(N0, {})
                key = (m2, n2) if m2 <= n2 else (n2, m2)
                bucket[key] = bucket.get(key, 0.0) + ww
    # a level whose diagonal average at (1,1) vanishes has no spectrum at
    # all, so its entire contribution (diagonal included) is identically
    # zero; certify that numerically and spend no work on such buckets
    empty_certificates = {}
    total = 0.0
    diag = 0.0
    kloos = 0.0
    pair_counts = {}
    sign = 2.0 * math.pi * (-1) ** (kappa // 2)
    for N0, bucket in sorted(grouped.items()):
        pair_counts[N0] = len(bucket)
        base = delta_geometric(N0, kappa, 1, 1, max(10**5, 2 * 10**4 * N0))
        if abs(base.value) < 5e-3:
            empty_certificates[N0] = base.value
            continue
        diag += diag_by_level.get(N0, 0.0)
        items = sorted(bucket.items())
        parts = []
        for (m2, n2), w in items:
            x_i = max(c_floor, min(int(c_factor * N0 * math.sqrt(m2 * n2)), c_cap))
            svals = _ksums.kloosterman_over_multiples(m2, n2, N0, x_i)
            cs = N0 * np.arange(1, len(svals) + 1, dtype=np.float64)
            jv = besselj(kappa - 1, 4.0 * math.pi * math.sqrt(m2 * n2) / cs)
            parts.append(w * float(np.dot(svals / cs, jv)))
        kloos += sign * math.fsum(parts)
    total = diag + kloos
    rep = MomentReport(rn, qn, kappa, "geometric", total)
    rep.parameters = {
        "Y": Y, "c_floor": c_floor, "c_factor": c_factor, "c_cap": c_cap,
        "n_max": n_max, "m_max": m_max, "skip_ratio": skip_ratio,
        "eight_variant": qch.eight_variant, "threads": threads,
    }
    rep.budgets = {
        "skipped_weight_mass": skipped_mass,
        "pairs": n_pairs,
        "pair_counts": pair_counts,
        "diagonal": diag,
        "kloosterman_part": kloos,
        "empty_level_certificates": empty_certificates,
        "ell_tail_shape": float((qn * rn) ** 0.05 * rn * Y ** (-2 * GAMMA0)),
    }
    return rep
