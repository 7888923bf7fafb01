"""Batch evaluation of L_{n^2-4}(1/2) for consecutive traces n.

Each value is L(1/2, chi_D0) times the finite conductor factor, with the
character L-value from the balanced approximate functional equation

    L(1/2, chi) = 2 sum_q chi(q) q^{-1/2} W(q sqrt(pi/D0)),
    W(y) = Gamma(1/4, y^2) / Gamma(1/4).

In the variable z = sqrt(y), dW/dz = -4 exp(-z^4) / Gamma(1/4) is smooth, so
W is tabulated on a uniform z grid and linearly interpolated.

chi at odd primes comes from Euler's criterion in float64: p < 2**22 and
residues are kept in (-p, p), so every product is exact below 2**53.  The
engine is therefore limited to n <= 1.6e6.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np
from scipy import special

from .arith import spf_sieve

Y2_CUT = 20.0
N_LIMIT = 1_600_000
_Z_MAX = Y2_CUT**0.25 * 1.001
_GRID = 1 << 20
_EULER_BITS = 22
_CHUNK = 256


def _weight_table():
    h = _Z_MAX / _GRID
    z = np.arange(_GRID + 2) * h
    return special.gammaincc(0.25, z**4), 1.0 / h


@nb.njit(cache=True)
def _merge_factor(m, spf, primes, exps, k):
    while m > 1:
        p = spf[m]
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        found = False
        for j in range(k):
            if primes[j] == p:
                exps[j] += e
                found = True
                break
        if not found:
            primes[k] = p
            exps[k] = e
            k += 1
    return k


@nb.njit(cache=True)
def split_trace_discriminant(n, spf, primes, exps):
    """(D0, f, kf) for D = n^2 - 4; primes/exps[:kf] then factor f."""
    for j in range(primes.shape[0]):
        primes[j] = 0
        exps[j] = 0
    k = _merge_factor(n - 2, spf, primes, exps, 0)
    k = _merge_factor(n + 2, spf, primes, exps, k)
    core = 1
    g = 1
    for j in range(k):
        p = primes[j]
        e = exps[j]
        if e & 1:
            core *= p
        for _ in range(e >> 1):
            g *= p
    if core % 4 == 1:
        D0 = core
        f = g
    else:
        D0 = 4 * core
        f = g // 2
    kf = 0
    m = f
    for j in range(k):
        p = primes[j]
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e > 0:
            primes[kf] = p
            exps[kf] = e
            kf += 1
    return D0, f, kf


@nb.njit(cache=True)
def _kron2(D0):
    if (D0 & 1) == 0:
        return 0
    r = D0 & 7
    if r == 1 or r == 7:
        return 1
    return -1


@nb.njit(cache=True)
def _legendre_small(D0, p):
    a = D0 % p
    if a == 0:
        return 0
    r = 1
    b = a
    e = (p - 1) // 2
    while e:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return 1 if r == 1 else -1


@nb.njit(cache=True)
def conductor_factor_half(D0, fprimes, fexps, kf):
    """sum over squarefree d | f of mu(d) chi(d) d^{-1/2} tau(f/d)."""
    total = 0.0
    for mask in range(1 << kf):
        sign = 1.0
        dval = 1.0
        chi = 1
        tau = 1
        for j in range(kf):
            p = fprimes[j]
            e = fexps[j]
            if (mask >> j) & 1:
                sign = -sign
                dval *= p
                chi *= _kron2(D0) if p == 2 else _legendre_small(D0, p)
                tau *= e
            else:
                tau *= e + 1
        if chi != 0:
            total += sign * chi * tau / math.sqrt(dval)
    return total


@nb.njit(fastmath=True, cache=True)
def _euler_chunk(D0, pint, pf, invp, bits, chi, lo, hi, base, res):
    m = hi - lo
    for i in range(m):
        base[i] = float(D0 % pint[lo + i])
        res[i] = 1.0
    for k in range(bits.shape[0]):
        bk = bits[k]
        for i in range(m):
            p = pf[lo + i]
            ip = invp[lo + i]
            b = base[i]
            prod = res[i] * b
            r = prod - np.rint(prod * ip) * p
            t = bk[lo + i]
            res[i] = t * r + (1.0 - t) * res[i]
            sq = b * b
            base[i] = sq - np.rint(sq * ip) * p
    for i in range(m):
        p = pf[lo + i]
        r = res[i] - math.floor(res[i] / p) * p
        q = int(p)
        chi[q] = 0 if r == 0.0 else (1 if r == 1.0 else -1)


@nb.njit(cache=True)
def _char_L_half(D0, qmax, nodd, pint, pf, invp, bits, comp_q, comp_p, comp_c, ncomp,
                 rsqrt, wtab, winvh, chi, base, res):
    D0f = float(D0)
    chi[1] = 1
    chi[2] = _kron2(D0)
    for lo in range(0, nodd, _CHUNK):
        _euler_chunk(D0, pint, pf, invp, bits, chi, lo, min(nodd, lo + _CHUNK), base, res)
    for j in range(ncomp):
        chi[comp_q[j]] = chi[comp_p[j]] * chi[comp_c[j]]
    c = math.sqrt(math.pi / D0f)
    s = 0.0
    for q in range(1, qmax + 1):
        x = math.sqrt(q * c) * winvh
        i = int(x)
        t = x - i
        w = wtab[i] + t * (wtab[i + 1] - wtab[i])
        s += chi[q] * rsqrt[q] * w
    return 2.0 * s


@nb.njit(cache=True)
def _block(n_lo, n_hi, spf, pint, pf, invp, bits, comp_q, comp_p, comp_c,
           rsqrt, wtab, winvh, y2cut):
    out = np.empty(n_hi - n_lo, dtype=np.float64)
    chi = np.zeros(rsqrt.shape[0], dtype=np.int8)
    base = np.empty(_CHUNK)
    res = np.empty(_CHUNK)
    primes = np.zeros(32, dtype=np.int64)
    exps = np.zeros(32, dtype=np.int64)
    for n in range(n_lo, n_hi):
        D0, f, kf = split_trace_discriminant(n, spf, primes, exps)
        qmax = int(math.sqrt(y2cut / math.pi * D0))
        nodd = np.searchsorted(pf, qmax + 0.5)
        ncomp = np.searchsorted(comp_q, qmax + 1)
        L = _char_L_half(D0, qmax, nodd, pint, pf, invp, bits, comp_q, comp_p, comp_c,
                         ncomp, rsqrt, wtab, winvh, chi, base, res)
        if f > 1:
            L *= conductor_factor_half(D0, primes, exps, kf)
        out[n - n_lo] = L
    return out


class HalfLineEngine:
    """Precomputed tables for evaluating L_{n^2-4}(1/2) with n <= n_max."""

    def __init__(self, n_max: int):
        if n_max > N_LIMIT:
            raise ValueError(f"engine supports n <= {N_LIMIT}")
        self.n_max = int(n_max)
        qlim = int(math.sqrt(Y2_CUT / math.pi) * self.n_max) + 4
        spf = spf_sieve(max(qlim, self.n_max + 3))
        self.spf = spf.astype(np.int64)
        idx = np.arange(qlim + 1)
        is_p = spf[: qlim + 1] == idx
        is_p[:2] = False
        odd = np.nonzero(is_p & (idx % 2 == 1))[0]
        self.pint = odd.astype(np.int64)
        self.pf = odd.astype(np.float64)
        self.invp = 1.0 / self.pf
        ex = (odd - 1) // 2
        self.bits = np.array([(ex >> k) & 1 for k in range(_EULER_BITS)], dtype=np.float64)
        comp = np.nonzero(~is_p & (idx >= 4))[0]
        self.comp_q = comp.astype(np.int64)
        self.comp_p = spf[comp].astype(np.int64)
        self.comp_c = (comp // spf[comp]).astype(np.int64)
        self.rsqrt = np.zeros(qlim + 1)
        self.rsqrt[1:] = 1.0 / np.sqrt(idx[1:])
        self.wtab, self.winvh = _weight_table()

    def values(self, n_lo: int, n_hi: int) -> np.ndarray:
        """L_{n^2-4}(1/2) for n_lo <= n < n_hi."""
        if n_lo < 3 or n_hi - 1 > self.n_max:
            raise ValueError("trace range outside engine tables")
        if n_hi <= n_lo:
            return np.empty(0)
        return _block(n_lo, n_hi, self.spf, self.pint, self.pf, self.invp, self.bits,
                      self.comp_q, self.comp_p, self.comp_c, self.rsqrt,
                      self.wtab, self.winvh, Y2_CUT)


@nb.njit(cache=True)
def _modpow(b, e, m):
    r = 1
    b %= m
    while e:
        if e & 1:
            r = r * b % m
        b = b * b % m
        e >>= 1
    return r


@nb.njit(cache=True)
def _char_table(D0, spf):
    qmax = spf.shape[0] - 1
    chi = np.zeros(qmax + 1, dtype=np.int8)
    if qmax >= 1:
        chi[1] = 1
    for q in range(2, qmax + 1):
        p = spf[q]
        if p == q:
            if p == 2:
                chi[q] = _kron2(D0)
            else:
                a = D0 % p
                if a == 0:
                    chi[q] = 0
                else:
                    chi[q] = 1 if _modpow(a, (p - 1) // 2, p) == 1 else -1
        else:
            chi[q] = chi[p] * chi[q // p]
    return chi


def character_table(D0: int, qmax: int) -> np.ndarray:
    """kronecker(D0, q) for 0 <= q <= qmax (entry 0 is 0), D0 > 0 or < 0.

    Exact integer arithmetic; needs qmax < 3e9 so that p^2 fits in int64.
    """
    spf = spf_sieve(max(qmax, 1))
    return _char_table(int(D0), spf)
