"""Zagier L-series L_n(s) = zeta(2s)/zeta(s) * sum_q c_q(n) q^{-s}, where
c_q(n) counts r mod 2q with r^2 = n (mod 4q).

Values come from the finite decomposition over the conductor,
L_D(s) = L(s, chi_D0) * sum_{d|f} mu(d) chi(d) d^{-s} sigma_{1-2s}(f/d),
which is the only stable route on the critical line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import specfun
from .arith import (decompose_discriminant, divisors, factorize, kronecker, mobius,
                    sigma_z, spf_sieve)
from .halfvalues import half_values


# -- root counts -------------------------------------------------------------

def _valuation(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def _local_count(n: int, p: int, e: int) -> int:
    """#{r mod p^e : r^2 = n (mod p^e)} for n != 0."""
    if e == 0:
        return 1
    v, u = _valuation(n, p)
    if v >= e:
        return p ** (e // 2)
    if v % 2:
        return 0
    k = e - v  # r = p^{v/2} r' with r'^2 = u mod p^k, r' taken mod p^{e - v/2}
    if p == 2:
        if k == 1:
            unit = 1
        elif k == 2:
            unit = 2 if u % 4 == 1 else 0
        else:
            unit = 4 if u % 8 == 1 else 0
    else:
        unit = 1 + kronecker(u, p)
    return p ** (v // 2) * unit


def _local_c(n: int, p: int, e: int) -> int:
    """Factor of c_q at p^e || q (the 4 in 4q is attached to p = 2)."""
    if p == 2:
        return _local_count(n, 2, e + 2) // 2
    return _local_count(n, p, e)


def root_count(n: int, q: int) -> int:
    """#{1 <= r <= 2q : r^2 = n (mod 4q)} from local counts at each p^e || 4q."""
    n, q = int(n), int(q)
    if n % 4 not in (0, 1):
        raise ValueError("n must be 0 or 1 mod 4")
    if q < 1:
        raise ValueError("q must be positive")
    if n == 0:
        return root_count_direct(n, q)
    out = _local_c(n, 2, 0) if q % 2 else 1
    for p, e in factorize(q).factors:
        out *= _local_c(n, p, e)
        if out == 0:
            return 0
    return out


def root_count_direct(n: int, q: int) -> int:
    m = 4 * q
    return sum(1 for r in range(1, 2 * q + 1) if (r * r - n) % m == 0)


def _local_lambda(n: int, p: int, e: int) -> int:
    # Liouville weights (-1)^j against c_{p^{e-j}}
    return sum((-1) ** j * _local_c(n, p, e - j) for j in range(e + 1))


def lambda_q(n: int, q: int) -> int:
    """Dirichlet coefficient of L_n(s): the convolution of Liouville's
    function with the root counts; multiplicative in q."""
    n, q = int(n), int(q)
    if n % 4 not in (0, 1):
        raise ValueError("n must be 0 or 1 mod 4")
    out = 1
    for p, e in factorize(q).factors:
        out *= _local_lambda(n, p, e)
        if out == 0:
            return 0
    return out


def lambda_q_convolution(n: int, q: int) -> int:
    """lambda_q by the literal convolution sum_{m|q} b_m c_{q/m}."""
    total = 0
    for m in divisors(q):
        b = sum(mobius(m // (d * d)) for d in range(1, math.isqrt(m) + 1) if m % (d * d) == 0)
        if b:
            total += b * root_count(n, q // m)
    return total


@dataclass(frozen=True)
class CoefficientTable:
    n: int
    Q: int
    c: np.ndarray
    lam: np.ndarray


@lru_cache(maxsize=64)
def coefficient_table(n: int, Q: int) -> CoefficientTable:
    """c_q(n) and lambda_q(n) for q = 0..Q (index 0 unused) by a multiplicative sieve."""
    n, Q = int(n), int(Q)
    if n % 4 not in (0, 1) or n == 0:
        raise ValueError("n must be a nonzero integer that is 0 or 1 mod 4")
    c = np.ones(Q + 1, dtype=np.int64)
    lam = np.ones(Q + 1, dtype=np.int64)
    c[0] = lam[0] = 0
    c[1::2] *= _local_c(n, 2, 0)
    spf = spf_sieve(max(Q, 2))
    primes = np.nonzero(spf[2:] == np.arange(2, Q + 1))[0] + 2 if Q >= 2 else []
    for p in primes:
        p = int(p)
        pe, e = p, 1
        while pe <= Q:
            idx = np.arange(pe, Q + 1, pe)
            idx = idx[(idx // pe) % p != 0]
            c[idx] *= _local_c(n, p, e)
            lam[idx] *= _local_lambda(n, p, e)
            pe *= p
            e += 1
    c.setflags(write=False)
    lam.setflags(write=False)
    return CoefficientTable(n, Q, c, lam)


# -- L-values ----------------------------------------------------------------

@dataclass(frozen=True)
class ZagierLValue:
    n: int
    s: complex
    value: complex
    method: str
    error_estimate: float


def _finite_factor(D0: int, f: int, s: complex) -> tuple[complex, float]:
    """sum_{d|f} mu(d) chi(d) d^{-s} sigma_{1-2s}(f/d) and the sum of |terms|."""
    total, scale = 0j, 0.0
    for d in divisors(f):
        mu = mobius(d)
        if mu == 0:
            continue
        chi = kronecker(D0, d)
        if chi == 0:
            continue
        term = mu * chi * d ** (-s) * sigma_z(f // d, 1 - 2 * s)
        total += term
        scale += abs(term)
    return total, scale


def _check_trace(n: int) -> int:
    n = int(n)
    if n < 3:
        raise ValueError("trace n must be >= 3")
    return n


def zagier_L(n: int, s: complex, method: str = "auto") -> ZagierLValue:
    """L_{n^2-4}(s) by the conductor decomposition.

    method selects the Dirichlet L route ("auto", "hurwitz" or "afe").
    """
    n = _check_trace(n)
    s = complex(s)
    dec = decompose_discriminant(n * n - 4)
    if method == "auto":
        small = dec.D0 <= specfun.HURWITZ_MAX_CONDUCTOR
        method = "hurwitz" if small or abs(s.imag) > specfun.AFE_MAX_HEIGHT else "afe"
    if method == "afe":
        L, err = specfun.dirichlet_L_afe(s, dec.D0)
    elif method == "hurwitz":
        L = specfun.dirichlet_L(s, dec.D0, method="hurwitz")
        err = 1e3 * specfun.EPS * math.sqrt(dec.D0) * max(1.0, abs(L))
    else:
        raise ValueError(f"unknown method {method!r}")
    fac, scale = _finite_factor(dec.D0, dec.f, s)
    value = L * fac
    error = err * scale + 16 * specfun.EPS * abs(L) * scale
    if s.imag == 0:
        value = complex(value.real, 0.0)
    return ZagierLValue(n, s, value, "decomposition", error)


def _coefficient_bound(n: int) -> float:
    """B with |lambda_q(n^2-4)| <= B for all q: the l1 norm of the finite factor's coefficients."""
    dec = decompose_discriminant(n * n - 4)
    return float(sum(e for d in divisors(dec.f) if mobius(d) for e in divisors(dec.f // d)))


def zagier_L_series(n: int, s: complex, Q: int) -> ZagierLValue:
    """Truncated Dirichlet series sum_{q<=Q} lambda_q q^{-s} for Re(s) > 1.

    Error bound B Q^{1-sigma}/(sigma-1) with B from _coefficient_bound.
    """
    n = _check_trace(n)
    s = complex(s)
    if s.real <= 1:
        raise ValueError("the Dirichlet series needs Re(s) > 1")
    lam = coefficient_table(n * n - 4, int(Q)).lam
    q = np.arange(1, Q + 1, dtype=float)
    value = complex(np.sum(lam[1:] * np.exp(-s * np.log(q))))
    tail = _coefficient_bound(n) * Q ** (1 - s.real) / (s.real - 1)
    return ZagierLValue(n, s, value, "truncated-series", tail)


def smoothed_series_SV(n: int, V: float, Q: int | None = None) -> float:
    """S_V = sum_{q<=Q} lambda_q(n^2-4)/q * exp(-q/V); Q defaults to ceil(20 V)."""
    n = _check_trace(n)
    if V <= 0:
        return 0.0
    if Q is None:
        Q = math.ceil(20 * V)
    if Q < 20 * V:
        warnings.warn(f"Q = {Q} < 20 V; truncation error may exceed 1e-8", stacklevel=2)
    lam = coefficient_table(n * n - 4, int(Q)).lam
    q = np.arange(1, Q + 1, dtype=float)
    return float(np.sum(lam[1:] / q * np.exp(-q / V)))


def afe_residual(n: int, V: float) -> float:
    """L_{n^2-4}(1) - S_V, the remainder left on the shifted line."""
    return zagier_L(n, 1).value.real - smoothed_series_SV(n, V)


@dataclass(frozen=True)
class SubconvexityRow:
    n: int
    abs_value: float
    normalized: float


def subconvexity_scan(N_max: int, data_dir=None, use_cache: bool = True
                      ) -> tuple[list[SubconvexityRow], float]:
    """|L_{n^2-4}(1/2)| and |L|/n^{1/3} for 3 <= n <= N_max, plus the max normalized value."""
    N_max = int(N_max)
    if N_max > 10**5:
        raise ValueError("subconvexity_scan is limited to N_max <= 1e5")
    if N_max < 3:
        return [], 0.0
    vals = np.abs(half_values(3, N_max + 1, data_dir=data_dir, use_cache=use_cache))
    ns = np.arange(3, N_max + 1)
    norm = vals / np.cbrt(ns)
    rows = [SubconvexityRow(int(a), float(b), float(c)) for a, b, c in zip(ns, vals, norm)]
    return rows, float(norm.max())
