"""Psi(X) = sum over closed geodesics of norm <= X of Lambda(P), computed from
reduced indefinite binary quadratic forms and Pell automorphs, and via the
identity Psi(X) = 2 sum_n sqrt(n^2-4) L_{n^2-4}(1).

Hyperbolic classes of trace n correspond to SL2(Z)-classes of all forms of
discriminant n^2-4.  A class of content g lives over the primitive
discriminant (n^2-4)/g^2 and has Lambda = 2 log eps_{(n^2-4)/g^2}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from pathlib import Path

import numba as nb
import numpy as np

from .arith import is_square, spf_sieve
from .halfvalues import data_dir as resolve_data_dir
from .zagier import zagier_L

CLASS_CACHE_NAME = "class_data.csv"
CLASS_CACHE_HEADER = ["D", "class_count", "pell_t", "pell_u", "regulator"]


def _check_discriminant(D: int) -> int:
    D = int(D)
    if D <= 0 or D % 4 not in (0, 1) or is_square(D):
        raise ValueError(f"{D} is not a positive nonsquare discriminant")
    return D


@lru_cache(maxsize=4)
def _spf(size: int) -> np.ndarray:
    return spf_sieve(size)


def _spf_for(limit: int) -> np.ndarray:
    return _spf(max(1 << 16, 1 << int(limit).bit_length()))


# -- reduced forms and cycles -------------------------------------------------

@nb.njit(cache=True)
def _divisors(N, spf, out):
    k = 1
    out[0] = 1
    while N > 1:
        p = spf[N]
        e = 0
        while N % p == 0:
            N //= p
            e += 1
        m = k
        pe = 1
        for _ in range(e):
            pe *= p
            for j in range(m):
                out[k] = out[j] * pe
                k += 1
    return k


@nb.njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@nb.njit(cache=True)
def _form_cycles(D, r, spf):
    """Contents of the rho-cycles of reduced forms of discriminant D (r = isqrt(D))."""
    cap = 1024
    A = np.empty(cap, dtype=np.int64)
    B = np.empty(cap, dtype=np.int64)
    divs = np.empty(4096, dtype=np.int64)
    n = 0
    b = 2 - (D & 1)
    while b <= r:
        N = (D - b * b) // 4
        nd = _divisors(N, spf, divs)
        for j in range(nd):
            d = divs[j]
            # sqrt(D) - b < 2d < sqrt(D) + b, exactly in integers
            lo_ok = (2 * d + b) * (2 * d + b) > D
            hi_ok = (2 * d - b < 0) or (2 * d - b) * (2 * d - b) < D
            if lo_ok and hi_ok:
                if n + 2 > cap:
                    cap *= 2
                    A2 = np.empty(cap, dtype=np.int64)
                    B2 = np.empty(cap, dtype=np.int64)
                    A2[:n] = A[:n]
                    B2[:n] = B[:n]
                    A = A2
                    B = B2
                A[n] = d
                B[n] = b
                A[n + 1] = -d
                B[n + 1] = b
                n += 2
        b += 2
    shift = np.int64(1) << 31
    keys = (A[:n] + shift) * shift + B[:n]
    order = np.argsort(keys)
    skeys = keys[order]
    visited = np.zeros(n, dtype=np.bool_)
    contents = np.empty(n, dtype=np.int64)
    ncyc = 0
    for i0 in range(n):
        if visited[i0]:
            continue
        a = A[i0]
        bb = B[i0]
        c = (bb * bb - D) // (4 * a)
        contents[ncyc] = _gcd(_gcd(a, bb), c)
        ncyc += 1
        i = i0
        while not visited[i]:
            visited[i] = True
            a = A[i]
            bb = B[i]
            c = (bb * bb - D) // (4 * a)
            m = 2 * abs(c)
            b2 = -bb + m * ((r + bb) // m)
            key = (c + shift) * shift + b2
            pos = np.searchsorted(skeys, key)
            if pos >= n or skeys[pos] != key:
                return contents[:0] - 1  # rho left the reduced set: never expected
            i = order[pos]
    return contents[:ncyc]


def form_cycle_contents(D: int) -> np.ndarray:
    """Content gcd(a, b, c) of each rho-cycle of reduced forms of discriminant D."""
    D = _check_discriminant(D)
    out = _form_cycles(D, isqrt(D), _spf_for(D // 4 + 1))
    if out.size and out[0] < 0:
        raise RuntimeError(f"reduction cycle broke for D = {D}")
    return out


def reduced_form_cycles(D: int, primitive: bool = False) -> int:
    """Number of rho-cycles of reduced forms (a, b, c) of discriminant D.

    With primitive=True only forms of content 1 count, giving the narrow
    class number; otherwise imprimitive forms are included, which is the
    count of hyperbolic classes of trace sqrt(D+4) when D+4 is a square.
    """
    contents = form_cycle_contents(D)
    return int(np.count_nonzero(contents == 1)) if primitive else int(contents.size)


# -- Pell equation ------------------------------------------------------------

def fundamental_solution(D: int) -> tuple[int, int]:
    """Minimal t, u > 0 with t^2 - D u^2 = 4, from the convergents of sqrt(D).

    Every solution of t^2 - D u^2 = +-4 with D > 16 has t/u a convergent of
    sqrt(D), and gcd(t, u) divides 2.  A norm -4 solution is squared.
    """
    D = _check_discriminant(D)
    if D <= 16:
        u = 1
        while True:
            for sign in (4, -4):
                t2 = D * u * u + sign
                if t2 > 0 and is_square(t2):
                    t = isqrt(t2)
                    return (t, u) if sign == 4 else ((t * t + D * u * u) // 2, t * u)
            u += 1
    a0 = isqrt(D)
    m, d, a = 0, 1, a0
    h_prev, h = 1, a0
    k_prev, k = 0, 1
    while True:
        for mult in (1, 2):
            t, u = mult * h, mult * k
            v = t * t - D * u * u
            if v == 4:
                return t, u
            if v == -4:
                return (t * t + D * u * u) // 2, t * u
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev


def _log_unit(t: int) -> float:
    # log((t + sqrt(t^2-4))/2) for a possibly huge integer t
    if t < 2**500:
        return math.acosh(t / 2)
    return math.log(t)  # the next term, -1/t^2, is below double precision


def regulator(D: int) -> float:
    """log eps_D with eps_D = (t + u sqrt(D))/2."""
    return _log_unit(fundamental_solution(D)[0])


@dataclass(frozen=True)
class FormClassData:
    D: int
    class_count: int
    pell_t: int
    pell_u: int
    regulator: float

    def __post_init__(self):
        if self.pell_t**2 - self.D * self.pell_u**2 != 4:
            raise ValueError(f"Pell check failed for D = {self.D}")
        if self.class_count < 1 or not self.regulator > 0:
            raise ValueError(f"invalid class data for D = {self.D}")


def form_class_data(D: int) -> FormClassData:
    t, u = fundamental_solution(D)
    return FormClassData(D, reduced_form_cycles(D, primitive=True), t, u, _log_unit(t))


class ClassDataCache:
    """Append-only CSV of FormClassData rows, validated on load."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self.rows: dict[int, FormClassData] = {}
        self._pending: list[FormClassData] = []
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self):
        with open(self.path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CLASS_CACHE_HEADER:
                raise ValueError(f"{self.path}: bad header {header}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    D, h, t, u = (int(x) for x in row[:4])
                    rec = FormClassData(D, h, t, u, float(row[4]))
                except (ValueError, IndexError) as exc:
                    raise ValueError(f"{self.path}:{lineno}: {exc}") from None
                self.rows[D] = rec

    def get(self, D: int) -> FormClassData:
        rec = self.rows.get(D)
        if rec is None:
            rec = form_class_data(D)
            self.rows[D] = rec
            self._pending.append(rec)
        return rec

    def flush(self):
        if self.path is None or not self._pending:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        new = not self.path.exists()
        with open(self.path, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(CLASS_CACHE_HEADER)
            for r in self._pending:
                w.writerow([r.D, r.class_count, r.pell_t, r.pell_u, repr(r.regulator)])
        self._pending.clear()


# -- Psi ------------------------------------------------------------------------

@dataclass(frozen=True)
class PsiResult:
    X: float
    value: float
    method: str
    terms: int


def max_trace(X: float) -> int:
    """Largest trace n whose class norm ((n + sqrt(n^2-4))/2)^2 is <= X."""
    if X < 4:
        return 2
    n = int(math.sqrt(X) + 1 / math.sqrt(X)) + 1
    while n >= 3 and 2 * math.acosh(n / 2) > math.log(X):
        n -= 1
    return n


def psi_direct(X: float, data_dir=None, use_cache: bool = True) -> PsiResult:
    """Sum of Lambda(P) over hyperbolic classes of norm <= X from class data."""
    X = float(X)
    if not 4 < X <= 1e8:
        raise ValueError("psi_direct needs 4 < X <= 1e8")
    logX = math.log(X)
    cache = ClassDataCache(resolve_data_dir(data_dir) / CLASS_CACHE_NAME if use_cache else None)
    total = 0.0
    terms = 0
    for t in range(3, max_trace(X) + 1):
        N = t * t - 4
        for u in range(1, isqrt(N) + 1):
            if N % (u * u):
                continue
            D = N // (u * u)
            if D % 4 not in (0, 1) or fundamental_solution(D) != (t, u):
                continue
            rec = cache.get(D)
            lam = 2 * rec.regulator
            kmax = int(logX // lam)
            while (kmax + 1) * lam <= logX:
                kmax += 1
            while kmax and kmax * lam > logX:
                kmax -= 1
            total += rec.class_count * lam * kmax
            terms += rec.class_count * kmax
    cache.flush()
    return PsiResult(X, total, "direct", terms)


def psi_via_zagier(X: float, reading: str = "norm") -> PsiResult:
    """2 sum sqrt(n^2-4) L_{n^2-4}(1) over traces n.

    reading="norm" keeps traces whose class norm is <= X; reading="trace"
    keeps 3 <= n <= X literally.
    """
    X = float(X)
    if not 4 < X <= 1e8:
        raise ValueError("psi_via_zagier needs 4 < X <= 1e8")
    if reading == "norm":
        top = max_trace(X)
    elif reading == "trace":
        top = int(math.floor(X))
    else:
        raise ValueError(f"unknown reading {reading!r}")
    terms = [2 * math.sqrt(n * n - 4) * zagier_L(n, 1).value.real for n in range(3, top + 1)]
    return PsiResult(X, math.fsum(terms), "via_zagier", len(terms))


def trace_classes_lambda(n: int) -> float:
    """Sum of Lambda over all hyperbolic classes of trace n, from form cycles."""
    D = n * n - 4
    contents = form_cycle_contents(D)
    total = []
    for g, count in zip(*np.unique(contents, return_counts=True)):
        total.append(int(count) * 2 * regulator(D // int(g) ** 2))
    return math.fsum(total)


def trace_identity_check(n: int) -> tuple[float, float, float]:
    """(lhs, rhs, relative gap) for 2 sqrt(n^2-4) L_{n^2-4}(1) = sum of Lambda."""
    n = int(n)
    if not 3 <= n <= 10**4:
        raise ValueError("trace_identity_check needs 3 <= n <= 1e4")
    lhs = 2 * math.sqrt(n * n - 4) * zagier_L(n, 1).value.real
    rhs = trace_classes_lambda(n)
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)
