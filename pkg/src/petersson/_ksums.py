"""Bulk Kloosterman sums over arithmetic progressions of moduli.

The trace-formula evaluators need S(m, n; c) for every c = N0, 2*N0, ... up
to a cutoff.  Twisted multiplicativity reduces each c to its prime-power
parts, S(m, n; c) = prod over p^k || c of S(m * ubar^2, n; p^k) with
u = c / p^k, and whenever p divides at most one of the two arguments the
factor collapses to S(1, w; p^k) with w = m * n * ubar^2.  Those one-
parameter tables are built once per prime power (an inverse DFT) and stored
in one flat array indexed by offset, so the hot loop is pure arithmetic plus
two array reads; everything larger or doubly-ramified falls back to batched
direct sums grouped by modulus.

Determinism: this module returns per-c arrays; callers reduce them in fixed
chunk order so results do not depend on thread count.
"""
from __future__ import annotations

import math
import threading

import numpy as np
from numba import njit

__all__ = ["kloosterman_over_multiples", "kloosterman_single", "clear_caches", "TABLE_LIMIT"]

# prime powers up to this bound get dense S(1, w; q) tables; larger prime
# factors fall back to batched direct sums
TABLE_LIMIT = 12000

_lock = threading.RLock()
_spf: np.ndarray = np.zeros(2, dtype=np.int64)
_offsets: np.ndarray = np.full(TABLE_LIMIT + 1, -1, dtype=np.int64)
_data: np.ndarray = np.zeros(0, dtype=np.float64)
_table_limit_built = 1
_full_vec_cache: dict[tuple[int, int], tuple[int, np.ndarray]] = {}
# large prime powers recur across per-pair calls; give them tables once they
# show up twice, under a memory cap
_aux_tables: dict[int, np.ndarray] = {}
_aux_hits: dict[int, int] = {}
_AUX_BYTES_CAP = 640 * 2**20
_aux_bytes = 0


@njit(cache=True)
def _build_spf(limit):
    spf = np.zeros(limit + 1, dtype=np.int64)
    for i in range(2, limit + 1):
        if spf[i] == 0:
            for j in range(i, limit + 1, i):
                if spf[j] == 0:
                    spf[j] = i
    return spf


@njit(cache=True)
def _inv_unit(a, q):
    if q == 1:
        return 0
    t = 0
    newt = 1
    r = q
    newr = a % q
    while newr != 0:
        quot = r // newr
        t, newt = newt, t - quot * newt
        r, newr = newr, r - quot * newr
    if t < 0:
        t += q
    return t


@njit(cache=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def _kloos_direct(a, b, q):
    """S(a, b; q) by the defining sum; O(phi(q) log q)."""
    if q == 1:
        return 1.0
    s = 0.0
    tw = 2.0 * math.pi / q
    for x in range(1, q):
        if _gcd(x, q) != 1:
            continue
        xb = _inv_unit(x, q)
        s += math.cos(tw * ((a * x + b * xb) % q))
    return s


@njit(cache=True)
def _inv_array_units(q):
    out = np.zeros(q, dtype=np.int64)
    for x in range(1, q):
        if _gcd(x, q) == 1:
            out[x] = _inv_unit(x, q)
    return out


@njit(cache=True)
def _progression_pass(m, n, N0, jmax, spf, offsets, data, table_limit):
    """S(m, n; N0*j) for j = 1..jmax, with untabled factors deferred.

    Returns the partial products plus parallel arrays describing the
    deferred factors (position, arguments, modulus).
    """
    out = np.ones(jmax)
    cap = jmax * 9 + 64  # c <= 1e7 has at most 8 distinct prime factors
    fb_idx = np.empty(cap, dtype=np.int64)
    fb_a = np.empty(cap, dtype=np.int64)
    fb_b = np.empty(cap, dtype=np.int64)
    fb_q = np.empty(cap, dtype=np.int64)
    nfb = 0
    for j in range(1, jmax + 1):
        c = N0 * j
        cc = c
        acc = 1.0
        while cc > 1:
            p = spf[cc]
            q = p
            cc //= p
            while cc % p == 0:
                q *= p
                cc //= p
            u = (c // q) % q
            ub = _inv_unit(u, q)
            mq = ((m % q) * ub % q) * ub % q
            nq = n % q
            # peel doubly-ramified layers: S(pa, pb; p^k) = p S(a, b; p^(k-1))
            while q > p and mq % p == 0 and nq % p == 0:
                acc *= p
                q //= p
                mq = (mq // p) % q
                nq = (nq // p) % q
            if mq % p == 0 and nq % p == 0:
                acc *= p - 1.0  # q = p and both arguments vanish mod p
            else:
                w = mq * nq % q
                if q <= table_limit and offsets[q] >= 0:
                    acc *= data[offsets[q] + w]
                else:
                    fb_idx[nfb] = j - 1
                    fb_a[nfb] = 1
                    fb_b[nfb] = w
                    fb_q[nfb] = q
                    nfb += 1
        out[j - 1] = acc
    return out, fb_idx[:nfb], fb_a[:nfb], fb_b[:nfb], fb_q[:nfb]


@njit(cache=True)
def _batch_direct_prime(p, a_arr, b_arr):
    """S(a_i, b_i; p) for prime p; one inverse table serves every query."""
    inv = np.zeros(p, dtype=np.int64)
    if p > 1:
        inv[1] = 1
    for i in range(2, p):
        inv[i] = (p - (p // i) * inv[p % i] % p) % p
    cos_t = np.empty(p)
    tw = 2.0 * math.pi / p
    for k in range(p):
        cos_t[k] = math.cos(tw * k)
    out = np.empty(a_arr.shape[0])
    for t in range(a_arr.shape[0]):
        a = a_arr[t] % p
        b = b_arr[t] % p
        s = 0.0
        for x in range(1, p):
            s += cos_t[(a * x + b * inv[x]) % p]
        out[t] = s
    return out


@njit(cache=True)
def _batch_direct_general(q, a_arr, b_arr):
    out = np.empty(a_arr.shape[0])
    for t in range(a_arr.shape[0]):
        out[t] = _kloos_direct(a_arr[t] % q, b_arr[t] % q, q)
    return out


@njit(cache=True)
def _scatter_multiply(out, idx, vals):
    for t in range(idx.shape[0]):
        out[idx[t]] *= vals[t]


def _ensure_spf(limit: int) -> np.ndarray:
    global _spf
    if _spf.shape[0] <= limit:
        _spf = _build_spf(int(limit * 1.2) + 16)
    return _spf


def _s1_table(q: int) -> np.ndarray:
    """S(1, w; q) for all w mod q: q * ifft of e(inv(y)/q) over units y."""
    inv = _inv_array_units(q)
    v = np.zeros(q, dtype=np.complex128)
    ys = np.arange(q)
    mask = np.gcd(ys, q) == 1
    v[mask] = np.exp(2j * np.pi * inv[mask] / q)
    tab = q * np.fft.ifft(v)
    return np.ascontiguousarray(tab.real)


def _ensure_tables(limit: int) -> None:
    global _table_limit_built, _data, _offsets
    limit = min(limit, TABLE_LIMIT)
    if limit <= _table_limit_built:
        return
    spf = _ensure_spf(limit)
    new = []
    offs = _offsets.copy()
    pos = _data.shape[0]
    for q in range(_table_limit_built + 1, limit + 1):
        p = spf[q]
        qq = q
        while qq % p == 0:
            qq //= p
        if qq == 1:  # q is a prime power
            tab = _s1_table(q)
            offs[q] = pos
            pos += q
            new.append(tab)
    if new:
        _data = np.concatenate([_data] + new)
        _offsets = offs
    _table_limit_built = limit


def clear_caches() -> None:
    global _full_vec_cache
    with _lock:
        _full_vec_cache = {}


def kloosterman_over_multiples(m: int, n: int, N0: int, c_max: int) -> np.ndarray:
    """S(m, n; c) for c = N0, 2*N0, ..., floor(c_max/N0)*N0, in order."""
    if N0 < 1 or c_max < N0:
        return np.zeros(0)
    with _lock:
        # a step-1 vector is expensive but serves every coarser step by
        # slicing; build it only when step 1 is actually requested, and let
        # later calls with any N0 reuse it
        hit = _full_vec_cache.get((m, n))
        if hit is not None and hit[0] >= c_max:
            vec = hit[1]
            jmax = c_max // N0
            return vec[N0 - 1 : N0 * jmax : N0].copy()
        if N0 == 1:
            vec = _compute_progression(m, n, 1, c_max)
            _full_vec_cache[(m, n)] = (c_max, vec)
            if len(_full_vec_cache) > 64:
                _full_vec_cache.pop(next(iter(_full_vec_cache)))
            return vec.copy()
        return _compute_progression(m, n, N0, c_max)


def _compute_progression(m: int, n: int, N0: int, c_max: int) -> np.ndarray:
    jmax = c_max // N0
    spf = _ensure_spf(c_max)
    _ensure_tables(min(c_max, TABLE_LIMIT))
    if not (-(2**31) < m < 2**31 and -(2**31) < n < 2**31):
        raise ValueError("arguments must fit in 31 bits")  # keeps int64 products safe
    out, fb_idx, fb_a, fb_b, fb_q = _progression_pass(
        m, n, N0, jmax, spf, _offsets, _data, _table_limit_built
    )
    if fb_idx.shape[0]:
        order = np.argsort(fb_q, kind="stable")
        idx, qa, aa, bb = fb_idx[order], fb_q[order], fb_a[order], fb_b[order]
        start = 0
        while start < len(qa):
            stop = start
            q = int(qa[start])
            while stop < len(qa) and qa[stop] == q:
                stop += 1
            tab = _aux_tables.get(q)
            if tab is None and _aux_hits.get(q, 0) >= 1 and q <= 2 * 10**5:
                tab = _maybe_build_aux(q)
            if tab is not None:
                vals = tab[bb[start:stop] % q]
            else:
                _aux_hits[q] = _aux_hits.get(q, 0) + 1
                p = spf[q]
                if q == p:
                    vals = _batch_direct_prime(int(p), aa[start:stop], bb[start:stop])
                else:
                    vals = _batch_direct_general(q, aa[start:stop], bb[start:stop])
            _scatter_multiply(out, np.ascontiguousarray(idx[start:stop]), vals)
            start = stop
    return out


def _maybe_build_aux(q: int) -> np.ndarray | None:
    global _aux_bytes
    if _aux_bytes + 8 * q > _AUX_BYTES_CAP:
        return None
    tab = _s1_table(q)
    _aux_tables[q] = tab
    _aux_bytes += 8 * q
    return tab


def kloosterman_single(m: int, n: int, c: int) -> float:
    """One S(m, n; c) through the same multiplicative machinery."""
    return float(_compute_progression(m, n, c, c)[-1])
