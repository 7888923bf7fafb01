"""Exact integer arithmetic: factorization, multiplicative functions,
the Kronecker symbol and the splitting D = D0 * f**2 of a discriminant."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

MAX_INPUT = 2**63
_TRIAL_LIMIT = 10**6
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


_TRIAL_PRIMES = _small_primes(_TRIAL_LIMIT)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
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


def _brent_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
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
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError("factors must have strictly increasing primes")
            prod *= p**e
            last = p
        if prod != self.value:
            raise ValueError(f"factors do not multiply to {self.value}")

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]


def factorize(n: int) -> FactoredInteger:
    """Canonical factorization of 1 <= n <= 2**63."""
    n = int(n)
    if n < 1 or n > MAX_INPUT:
        raise ValueError(f"factorize needs 1 <= n <= 2**63, got {n}")
    return FactoredInteger(n, tuple(sorted(_factor_dict(n).items())))


@lru_cache(maxsize=65536)
def _factor_dict_cached(n: int) -> tuple:
    return tuple(sorted(_factor_dict_raw(n).items()))


def _factor_dict(n: int) -> dict[int, int]:
    return dict(_factor_dict_cached(n))


def _factor_dict_raw(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in _TRIAL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    if n == 1:
        return out
    if n < _TRIAL_LIMIT**2 or is_prime(n):
        out[n] = out.get(n, 0) + 1
        return out
    rng = random.Random(n)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _brent_rho(m, rng)
        stack.extend((d, m // d))
    return out


def mobius(n: int) -> int:
    f = _factor_dict(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in _factor_dict(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for e in _factor_dict(n).values())


def sigma_z(n: int, z: complex) -> complex:
    """sum of d**z over the divisors d of n."""
    if z == 0:
        return complex(divisor_count(n))
    return complex(sum(complex(d) ** z for d in divisors(n)))


def liouville(n: int) -> int:
    """Coefficients of zeta(2s)/zeta(s): sum over d^2 | n of mu(n/d^2)."""
    return -1 if sum(_factor_dict(n).values()) % 2 else 1


def jacobi(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi needs an odd positive modulus")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(D: int, m: int) -> int:
    """Kronecker symbol (D|m) for m >= 1."""
    if m < 1:
        raise ValueError("kronecker needs m >= 1")
    result = 1
    while m % 2 == 0:
        if D % 2 == 0:
            return 0
        m //= 2
        if D % 8 in (3, 5):
            result = -result
    if m == 1:
        return result
    return result * jacobi(D, m)


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def is_fundamental(D: int) -> bool:
    if D in (0, 1):
        return D == 1
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in _factor_dict(n).values())


@dataclass(frozen=True)
class DiscriminantDecomposition:
    D: int
    D0: int
    f: int

    def __post_init__(self):
        if self.D != self.D0 * self.f**2:
            raise ValueError("D != D0 * f^2")


def decompose_discriminant(D: int) -> DiscriminantDecomposition:
    D = int(D)
    if D <= 0 or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a positive discriminant")
    if is_square(D):
        raise ValueError(f"{D} is a perfect square")
    core, g = 1, 1
    for p, e in _factor_dict(D).items():
        core *= p ** (e % 2)
        g *= p ** (e // 2)
    if core % 4 == 1:
        return DiscriminantDecomposition(D, core, g)
    # D = 0 mod 4 forces g even here
    return DiscriminantDecomposition(D, 4 * core, g // 2)


def spf_sieve(limit: int) -> np.ndarray:
    """Smallest-prime-factor table for 0..limit, with spf[0] = 0 and spf[1] = 1."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    spf[1] = 1
    for p in range(2, isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
            spf[p] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest[rest >= 2]] = rest[rest >= 2]
    return spf
