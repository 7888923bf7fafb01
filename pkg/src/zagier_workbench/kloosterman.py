"""Kloosterman sums S(m,n;c) = sum_{x mod c, (x,c)=1} e((m x + n xbar)/c),
Linnik-type sums over c, and the weighted double sum
(1/N) sum_n h(n) sum_q S(n,n;q)/q phi(4 pi n/q).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numba as nb
import numpy as np

from .arith import divisor_count
from .smoothing import phi_delta
from .spectral import TestFunctionParams, phi_test, test_function_params

MAX_MODULUS = 10**7
TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class KloostermanValue:
    m: int
    n: int
    c: int
    value: complex

    @property
    def real(self) -> float:
        return self.value.real


# -- inverse tables -------------------------------------------------------------

@nb.njit(cache=True)
def _egcd_inverse(a, c):
    r0, r1 = c, a % c
    s0, s1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % c


@nb.njit(cache=True)
def _unit_inverses(c):
    """(units, inverses) mod c by batch inversion: one extended gcd per modulus."""
    if c == 1:
        return np.zeros(1, np.int64), np.zeros(1, np.int64)
    coprime = np.ones(c, np.bool_)
    coprime[0] = False
    m = c
    p = 2
    while p * p <= m:
        if m % p == 0:
            for k in range(p, c, p):
                coprime[k] = False
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        for k in range(m, c, m):
            coprime[k] = False
    units = np.nonzero(coprime)[0].astype(np.int64)
    k = units.shape[0]
    pref = np.empty(k, np.int64)
    acc = 1
    for i in range(k):
        acc = acc * units[i] % c
        pref[i] = acc
    inv_all = _egcd_inverse(pref[k - 1], c)
    inv = np.empty(k, np.int64)
    for i in range(k - 1, 0, -1):
        inv[i] = inv_all * pref[i - 1] % c
        inv_all = inv_all * units[i] % c
    inv[0] = inv_all
    return units, inv


@nb.njit(cache=True)
def _kloosterman(m, n, c):
    units, inv = _unit_inverses(c)
    re = 0.0
    im = 0.0
    for i in range(units.shape[0]):
        r = (m * units[i] + n * inv[i]) % c
        ang = TWO_PI * r / c
        re += math.cos(ang)
        im += math.sin(ang)
    return re, im


@nb.njit(cache=True)
def _trace_histogram(c):
    """hist[r] = #{x unit mod c : x + xbar = r (mod c)}; S(n,n;c) is its DFT at n."""
    units, inv = _unit_inverses(c)
    hist = np.zeros(c, np.float64)
    for i in range(units.shape[0]):
        hist[(units[i] + inv[i]) % c] += 1.0
    return hist


def _check(c: int) -> int:
    c = int(c)
    if c < 1:
        raise ValueError("modulus must be positive")
    if c > MAX_MODULUS:
        raise ValueError(f"modulus limited to {MAX_MODULUS}")
    return c


def kloosterman(m: int, n: int, c: int) -> KloostermanValue:
    """S(m,n;c) from a sieved table of inverses (numba loop)."""
    c = _check(c)
    re, im = _kloosterman(int(m) % c, int(n) % c, c)
    if abs(im) > 1e-9 * c:
        raise ArithmeticError(f"imaginary residue {im:g} for S({m},{n};{c})")
    return KloostermanValue(int(m), int(n), c, complex(re, im))


def kloosterman_direct(m: int, n: int, c: int) -> complex:
    """S(m,n;c) by the defining loop with pow(x, -1, c); reference route."""
    c = _check(c)
    if c == 1:
        return 1 + 0j
    terms = [cmath.exp(2j * math.pi * ((m * x + n * pow(x, -1, c)) % c) / c)
             for x in range(1, c) if math.gcd(x, c) == 1]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def weil_bound(m: int, n: int, c: int) -> float:
    """d(c) gcd(m,n,c)^{1/2} c^{1/2}."""
    g = math.gcd(math.gcd(int(m), int(n)), int(c))
    return divisor_count(int(c)) * math.sqrt(g) * math.sqrt(c)


def kloosterman_scan(m: int, n: int, c_max: int) -> list[tuple[int, float]]:
    """Rows (c, S(m,n;c)) for 1 <= c <= c_max."""
    return [(c, kloosterman(m, n, c).real) for c in range(1, int(c_max) + 1)]


def self_sums(n_values, c_max: int) -> np.ndarray:
    """S(n,n;c) for each n in n_values (rows) and c = 1..c_max (columns)."""
    ns = np.asarray(n_values, dtype=np.int64)
    out = np.empty((ns.size, int(c_max)))
    for c in range(1, int(c_max) + 1):
        spec = np.fft.rfft(_trace_histogram(c)) if c > 1 else np.ones(1)
        idx = ns % c
        idx = np.where(idx > c // 2, c - idx, idx)  # hist is symmetric under r -> -r
        out[:, c - 1] = spec[idx].real
    return out


# -- Linnik-type sums -------------------------------------------------------------

@nb.njit(cache=True)
def _linnik_table(ns, Ds, C):
    acc = np.zeros((ns.shape[0], Ds.shape[0]), np.complex128)
    for c in range(1, C + 1):
        hist = _trace_histogram(c) if c > 1 else np.ones(1)
        for i in range(ns.shape[0]):
            s = 0.0
            for r in range(c):
                if hist[r] != 0.0:
                    s += hist[r] * math.cos(TWO_PI * ((ns[i] * r) % c) / c)
            for j in range(Ds.shape[0]):
                ang = TWO_PI * (Ds[j] % c) / c
                acc[i, j] += complex(math.cos(ang), math.sin(ang)) * s / c
    return acc


def linnik_sum(n: int, C: float, D: int) -> complex:
    """sum_{c <= C} e(D/c)/c S(n,n;c)."""
    if C > 1e5:
        raise ValueError("linnik_sum is limited to C <= 1e5")
    top = math.floor(C)
    if top < 1:
        return 0j
    return complex(_linnik_table(np.array([int(n)]), np.array([int(D)]), top)[0, 0])


def linnik_sum_reverse(n: int, C: float, D: int) -> complex:
    """Same sum, terms from kloosterman() taken in descending c and fsum-ed."""
    top = math.floor(C)
    terms = [cmath.exp(2j * math.pi * (D % c) / c) * kloosterman(n, n, c).real / c
             for c in range(top, 0, -1)]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


LINNIK_HEADER = ["C", "D", "n", "re", "im", "abs"]


def linnik_scan(n_values, C_values, D_values) -> list[tuple]:
    """Rows (C, D, n, re, im, abs) for every combination."""
    rows = []
    ns = np.array([int(n) for n in n_values])
    Ds = np.array([int(d) for d in D_values])
    for C in C_values:
        tab = _linnik_table(ns, Ds, int(math.floor(C)))
        for j, D in enumerate(Ds):
            for i, n in enumerate(ns):
                z = complex(tab[i, j])
                rows.append((C, int(D), int(n), z.real, z.imag, abs(z)))
    return rows


def linnik_growth(rows, exponent: float = 0.2) -> float:
    """sup |sum| / (n C D)^exponent over linnik_scan rows."""
    return max(r[5] / (r[2] * r[0] * r[1]) ** exponent for r in rows)


# -- weighted double sum ------------------------------------------------------------

def bump_weight(x, N: float):
    """h(x) = N phi_{N/2}(x - 3N/2): smooth, supported on [N, 2N], int h = N,
    h^{(j)} << N^{-j}."""
    return N * np.asarray(phi_delta(np.asarray(x, dtype=float) - 1.5 * N, 0.5 * N))


@dataclass(frozen=True)
class WeightedSum:
    N: float
    X: float
    T: float
    Q: int
    params: TestFunctionParams
    value: complex
    tail_bound: float  # Weil-bound estimate of the discarded q > Q


def default_cutoff(N: float, params: TestFunctionParams) -> int:
    """Twice the largest damping scale 4 pi (2N) a."""
    return int(math.ceil(2 * 4 * math.pi * 2 * N * params.a))


@lru_cache(maxsize=4)
def _self_sum_table(n_lo: int, n_hi: int, Q: int) -> np.ndarray:
    table = self_sums(np.arange(n_lo, n_hi), Q)
    table.setflags(write=False)
    return table


def _setup(N, X, T, Q):
    if N > 1e3:
        raise ValueError("weighted sums are limited to N <= 1e3")
    params = test_function_params(X, T)
    if Q is None:
        Q = default_cutoff(N, params)
    Q = int(Q)
    knee = 4 * math.pi * 2 * N * params.a
    if Q < knee:
        warnings.warn(f"Q = {Q} is below the damping scale {knee:.0f}; most of the sum is cut off",
                      stacklevel=3)
    ns = np.arange(math.floor(N) + 1, math.ceil(2 * N))
    h = bump_weight(ns, N)
    return params, Q, ns, h


def _tail_bound(N, params, Q, ns, h):
    # |S(n,n;q)/q phi(4 pi n/q)| <= d(q) q^{-1/2} |sinh^2 beta| 8 pi n^2 q^{-2}
    pref = 8 * math.pi * abs(np.sinh(params.beta)) ** 2 * float(np.sum(h * ns**2.0)) / N
    return pref * 2 * Q ** -1.5 * (math.log(Q) + 2)


def weighted_kloosterman_sum(N: float, X: float, T: float, Q: int | None = None) -> WeightedSum:
    """(1/N) sum_n h(n) sum_{q<=Q} S(n,n;q)/q phi(4 pi n/q), phi from phi_test.

    Small q are killed by the factor exp(-4 pi n a/q); the terms decay like
    q^{-5/2} beyond q ~ 4 pi n a.  The default Q is twice that scale.
    """
    params, Q, ns, h = _setup(N, X, T, Q)
    S = _self_sum_table(int(ns[0]), int(ns[-1]) + 1, Q)
    q = np.arange(1, Q + 1, dtype=float)
    total = 0j
    for i, n in enumerate(ns):
        total += h[i] * np.sum(S[i] / q * phi_test(4 * math.pi * n / q, params))
    return WeightedSum(N, X, T, Q, params, total / N, _tail_bound(N, params, Q, ns, h))


def weighted_kloosterman_sum_partial(N: float, X: float, T: float,
                                     Q: int | None = None) -> WeightedSum:
    """The same truncated sum after summation by parts in q:

        sum_{q<=Q} A(q) g(q) = A(Q) g(Q) - int_1^Q A(y) g'(y) dy,
        A(y) = sum_{q<=y} S(n,n;q)/q e(2 b n/q),  g(y) = y^{-2} exp(-4 pi a n/y),

    with the integral taken by 8-point Gauss-Legendre on each [q, q+1].
    """
    params, Q, ns, h = _setup(N, X, T, Q)
    S = _self_sum_table(int(ns[0]), int(ns[-1]) + 1, Q)
    a, b = params.a, params.b
    q = np.arange(1, Q + 1, dtype=float)
    gx, gw = np.polynomial.legendre.leggauss(8)
    y = (q[:-1, None] + 0.5 + 0.5 * gx).ravel()  # nodes on [q, q+1], q = 1..Q-1
    pref = 8 * math.pi * complex(np.sinh(params.beta)) ** 2 / N
    total = 0j
    for i, n in enumerate(ns):
        k = 4 * math.pi * n
        A = np.cumsum(S[i] / q * np.exp(1j * b * k / q))
        gp = np.exp(-a * k / y) * (-2 / y**3 + a * k / y**4)
        panel = (gp.reshape(-1, 8) * (0.5 * gw)).sum(axis=1)
        gQ = Q ** -2.0 * math.exp(-a * k / Q)
        inner = A[-1] * gQ - np.sum(A[:-1] * panel)
        total += h[i] * n * n * inner
    return WeightedSum(N, X, T, Q, params, pref * total, _tail_bound(N, params, Q, ns, h))
