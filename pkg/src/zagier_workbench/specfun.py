"""Complex special functions: Gamma, Riemann and Hurwitz zeta (with the
derivative), real-character Dirichlet L-functions, the Gauss hypergeometric
series and a checker for the first-derivative bound on oscillatory integrals.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.optimize import minimize_scalar

from ._fastl import character_table
from .arith import is_fundamental, kronecker

EPS = np.finfo(float).eps

# B_{2j} / (2j)! for j = 1..20
_BERN = [special.bernoulli(2 * j)[2 * j] / math.factorial(2 * j) for j in range(1, 21)]


class SpecialFunctionError(ValueError):
    """Raised at poles and for arguments outside the supported domain."""


class ConvergenceError(RuntimeError):
    """Raised when a series or quadrature cannot reach its target accuracy."""


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    error: float
    terms: int


def _finite(z: complex, what: str) -> complex:
    if not cmath.isfinite(z):
        raise SpecialFunctionError(f"{what} is not finite")
    return z


def complex_gamma(s: complex) -> complex:
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and s.real == round(s.real):
        raise SpecialFunctionError(f"Gamma has a pole at {s.real:g}")
    return _finite(complex(special.gamma(s)), "Gamma(s)")


def log_gamma(s: complex) -> complex:
    return complex(special.loggamma(complex(s)))


def _em_params(s: complex) -> tuple[int, int]:
    # shift N past |s| so the Bernoulli terms decay by ~(|s|/2piN)^2 per step
    N = int(abs(s)) + 20
    return N, 18


def _em_hurwitz(s: complex, a: float, deriv: bool) -> complex:
    N, M = _em_params(s)
    k = np.arange(N) + a
    logk = np.log(k)
    terms = np.exp(-s * logk)
    x = N + a
    lx = math.log(x)
    xs = cmath.exp(-s * lx)
    if not deriv:
        # at s = 1 the pole term x^{1-s}/(s-1) is replaced by its finite part -log x
        pole = -lx if s == 1 else x * xs / (s - 1)
        total = complex(terms.sum()) + pole + 0.5 * xs
    else:
        total = complex(-(logk * terms).sum())
        total += -lx * x * xs / (s - 1) - x * xs / (s - 1) ** 2 - 0.5 * lx * xs
    poly = s  # s(s+1)...(s+2j-2)
    dpoly = 1.0 + 0j
    xpow = xs / x  # x^{-s-1}
    for j in range(1, M + 1):
        b = _BERN[j - 1]
        if not deriv:
            total += b * poly * xpow
        else:
            total += b * (dpoly - lx * poly) * xpow
        dpoly = dpoly * (s + 2 * j - 1) * (s + 2 * j) + poly * ((s + 2 * j) + (s + 2 * j - 1))
        poly = poly * (s + 2 * j - 1) * (s + 2 * j)
        xpow /= x * x
    return total


def hurwitz_zeta(s: complex, a: float) -> complex:
    """zeta(s, a) = sum_{k>=0} (k+a)^{-s} for Re(s) > 0, 0 < a <= 1."""
    s = complex(s)
    if s == 1:
        raise SpecialFunctionError("zeta(s, a) has a pole at s = 1")
    if s.real <= 0:
        raise SpecialFunctionError("hurwitz_zeta needs Re(s) > 0")
    if not 0 < a <= 1:
        raise SpecialFunctionError("hurwitz_zeta needs 0 < a <= 1")
    return _finite(_em_hurwitz(s, float(a), False), "zeta(s, a)")


def hurwitz_zeta_derivative(s: complex, a: float) -> complex:
    s = complex(s)
    if s == 1:
        raise SpecialFunctionError("zeta(s, a) has a pole at s = 1")
    if s.real <= 0:
        raise SpecialFunctionError("hurwitz_zeta needs Re(s) > 0")
    return _finite(_em_hurwitz(s, float(a), True), "zeta'(s, a)")


def hurwitz_zeta_regularized_at_one(a: float) -> float:
    """lim_{s->1} (zeta(s, a) - 1/(s-1)) = -digamma(a)."""
    return _em_hurwitz(1 + 0j, float(a), False).real


def riemann_zeta(s: complex) -> complex:
    return hurwitz_zeta(s, 1.0)


def zeta_derivative(s: complex) -> complex:
    return hurwitz_zeta_derivative(s, 1.0)


def zeta_reflected(s: complex) -> complex:
    """zeta(s) for Re(s) < 1 from the functional equation against zeta(1-s)."""
    s = complex(s)
    if s == 0:
        return -0.5 + 0j
    chi = 2**s * cmath.pi ** (s - 1) * cmath.sin(cmath.pi * s / 2) * complex_gamma(1 - s)
    return chi * riemann_zeta(1 - s)


# -- incomplete gamma with complex order -----------------------------------

def upper_gamma_array(alpha: complex, x: np.ndarray) -> np.ndarray:
    """Gamma(alpha, x) elementwise for real x > 0; alpha = 0 gives E1(x).

    Series for small x, Legendre continued fraction (modified Lentz) otherwise.
    """
    alpha = complex(alpha)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise SpecialFunctionError("upper_gamma needs x > 0")
    if alpha == 0:
        return special.exp1(x).astype(complex)
    if alpha.imag == 0 and alpha.real > 0:
        return (special.gammaincc(alpha.real, x) * special.gamma(alpha.real)).astype(complex)
    out = np.empty(x.shape, dtype=complex)
    small = x < abs(alpha) + 1
    if small.any():
        out[small] = complex_gamma(alpha) - _lower_series(alpha, x[small])
    if (~small).any():
        out[~small] = _upper_cf(alpha, x[~small])
    return out


def _lower_series(alpha: complex, x: np.ndarray) -> np.ndarray:
    term = np.full(x.shape, 1 / alpha, dtype=complex)
    total = term.copy()
    done = np.zeros(x.shape, dtype=bool)
    for k in range(1, 4000):
        term *= x / (alpha + k)
        total += term
        done |= np.abs(term) < EPS * np.abs(total)
        if done.all():
            break
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    return total * np.exp(alpha * np.log(x) - x)


def _upper_cf(alpha: complex, x: np.ndarray) -> np.ndarray:
    tiny = 1e-300
    b = x + 1 - alpha
    c = np.full(x.shape, 1 / tiny, dtype=complex)
    d = 1 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, 5000):
        an = -i * (i - alpha)
        b = b + 2
        d = an * d + b
        d[np.abs(d) < tiny] = tiny
        c = b + an / c
        c[np.abs(c) < tiny] = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        done |= np.abs(delta - 1) < 4 * EPS
        if done.all():
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return h * np.exp(alpha * np.log(x) - x)


def upper_gamma(alpha: complex, x: float) -> complex:
    return complex(upper_gamma_array(alpha, np.array([float(x)]))[0])


def upper_gamma_ratio(alpha: complex, x: float) -> complex:
    """Q(alpha, x) = Gamma(alpha, x) / Gamma(alpha) for real x > 0."""
    return upper_gamma(alpha, x) / complex_gamma(alpha)


# -- Dirichlet L-functions of real primitive characters ---------------------

HURWITZ_MAX_CONDUCTOR = 400
# the AFE terms grow like exp(pi |t| / 4) before cancelling
AFE_MAX_HEIGHT = 10.0


def dirichlet_L(s: complex, D0: int, method: str = "auto") -> complex:
    """L(s, chi_D0) for a fundamental discriminant D0 (D0 = 1 gives zeta).

    method: "hurwitz" sums |D0| Hurwitz zeta values, "afe" uses the
    approximate functional equation, "auto" picks by conductor.
    """
    s = complex(s)
    D0 = int(D0)
    if D0 != 1 and not is_fundamental(D0):
        raise SpecialFunctionError(f"{D0} is not a fundamental discriminant")
    if s.real <= 0:
        raise SpecialFunctionError("dirichlet_L needs Re(s) > 0")
    if D0 == 1:
        return riemann_zeta(s)
    if method == "auto":
        small = abs(D0) <= HURWITZ_MAX_CONDUCTOR
        method = "hurwitz" if small or abs(s.imag) > AFE_MAX_HEIGHT else "afe"
    if method == "hurwitz":
        return _L_hurwitz(s, D0)
    if method == "afe":
        return dirichlet_L_afe(s, D0)[0]
    raise ValueError(f"unknown method {method!r}")


def _L_hurwitz(s: complex, D0: int) -> complex:
    k = abs(D0)
    total = 0j
    # the pole parts cancel because the character sums to zero
    hz = hurwitz_zeta_regularized_at_one if s == 1 else (lambda a: hurwitz_zeta(s, a))
    for a in range(1, k + 1):
        c = kronecker(D0, a)
        if c:
            total += c * hz(a / k)
    return _finite(total * k ** (-s), "L(s, chi)")


def dirichlet_L_afe(s: complex, D0: int, cut: float = 36.0) -> tuple[complex, float]:
    """(value, rounding-error estimate) from the balanced approximate
    functional equation; terms are dropped once pi q^2/|D0| > cut.

    The terms grow like exp(pi |Im s| / 4) before cancelling, which the
    error estimate reflects.
    """
    s = complex(s)
    k = abs(D0)
    a = 0 if D0 > 0 else 1
    qmax = int(math.sqrt(cut * k / math.pi)) + 1
    chi = character_table(D0, qmax)[1:].astype(float)
    q = np.nonzero(chi)[0] + 1.0
    chi = chi[chi != 0]
    x = math.pi * q * q / k
    lq = np.log(q)
    al1 = (s + a) / 2
    al2 = (1 - s + a) / 2
    # dual factor (k/pi)^{1/2-s} Gamma(al2)/Gamma(al1); Gamma(al2) is absorbed into
    # the unnormalized Gamma(al2, x), which stays finite at s = 1
    eps = cmath.exp((0.5 - s) * math.log(k / math.pi) - log_gamma(al1))
    g1 = upper_gamma_array(al1, x)
    g2 = g1 if al2 == al1 else upper_gamma_array(al2, x)
    t1 = np.exp(-s * lq) * g1 / complex_gamma(al1)
    t2 = eps * np.exp((s - 1) * lq) * g2
    total = complex(np.sum(chi * (t1 + t2)))
    scale = float(np.sum(np.abs(t1) + np.abs(t2)))
    return _finite(total, "L(s, chi)"), 64 * EPS * scale


# -- Gauss hypergeometric series --------------------------------------------

def gauss_2f1(a: complex, b: complex, c: complex, z: float,
              tol: float = 1e-15, max_terms: int = 100_000) -> SeriesValue:
    """2F1(a, b; c; z) by its power series for real |z| < 0.9.

    The tail after term k is bounded by |t_{k+1}| / (1 - rho_k) with
    rho_k = |z| (1 + |a-1|/(k+1)) (1 + |b-c|/(Re c + k)), a decreasing majorant of
    the term ratios.  The reported error adds a rounding estimate.
    """
    a, b, c = complex(a), complex(b), complex(c)
    z = float(z)
    if abs(z) >= 0.9:
        raise SpecialFunctionError("gauss_2f1 is limited to |z| < 0.9")
    if c.imag == 0 and c.real <= 0 and c.real == round(c.real):
        raise SpecialFunctionError("c is a non-positive integer")
    term = 1 + 0j
    total = term
    absum = 1.0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        absum += abs(term)
        if term == 0:
            return SeriesValue(total, 4 * EPS * absum, k + 1)
        if c.real + k + 1 > 0:
            rho = abs(z) * (1 + abs(a - 1) / (k + 2)) * (1 + abs(b - c) / (c.real + k + 1))
            if rho < 1:
                nxt = abs(term * (a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2)) * z)
                tail = nxt / (1 - rho)
                if tail <= tol * max(abs(total), 1e-300):
                    return SeriesValue(total, tail + 4 * EPS * absum * (k + 2), k + 1)
    err = 4 * EPS * absum
    if err > 1e-8 * abs(total):
        raise ConvergenceError("2F1 series did not reach 1e-8 within the term budget")
    raise ConvergenceError("2F1 series tail bound not reached within the term budget")


def hypergeometric_expansion(r: float, x: float, correction: str = "corrected") -> complex:
    """Large-r expansion of 2F1(1/4+ir, 3/4+ir; 1+2ir; 4/x^2), error O(1/(x^2 r^2)).

    correction="corrected" uses the 1/r coefficient (1 - x/sqrt(x^2-4))/16,
    which matches the series; "printed" uses (1 - (x^2-2)/(x sqrt(x^2-4)))/16,
    whose residual only decays like 1/r; "none" drops the 1/r term.
    """
    r, x = float(r), float(x)
    if x <= 2:
        raise SpecialFunctionError("expansion needs x > 2")
    root = math.sqrt(x * x - 4)
    lead = cmath.exp(2j * r * (math.log(x) - math.acosh(x / 2))) * (x * x / (x * x - 4)) ** 0.25
    if correction == "corrected":
        kappa = (1 - x / root) / 16
    elif correction == "printed":
        kappa = (1 - (x * x - 2) / (x * root)) / 16
    elif correction == "none":
        kappa = 0.0
    else:
        raise ValueError(f"unknown correction {correction!r}")
    return lead * (1 + kappa / (1j * r))


# -- first-derivative bound for oscillatory integrals -----------------------

@dataclass(frozen=True)
class OscillatoryCheck:
    integral: complex
    bound: float
    holds: bool


def oscillatory_bound_check(p: Callable[[float], float], q: Callable[[float], float],
                            a: float, b: float, m: int,
                            dq: Callable[[float], float] | None = None,
                            samples: int = 4001) -> OscillatoryCheck:
    """Compare |int_a^b p e^{iq}| with 2(m+1) max |p/q'| on [a, b].

    m is the number of pieces on which p/q' is monotonic.  Without dq, q' is
    taken by central differences.
    """
    if not b > a:
        raise ValueError("need a < b")
    if dq is None:
        h = 1e-6 * max(1.0, abs(a), abs(b))

        def dq(x):
            return (q(x + h) - q(x - h)) / (2 * h)

    opts = dict(limit=5000, epsabs=1e-12, epsrel=1e-10)
    re, e1 = integrate.quad(lambda x: p(x) * math.cos(q(x)), a, b, **opts)
    im, e2 = integrate.quad(lambda x: p(x) * math.sin(q(x)), a, b, **opts)
    if not (math.isfinite(re) and math.isfinite(im)) or e1 + e2 > 1e-6 * max(1.0, abs(re) + abs(im)):
        raise ConvergenceError("oscillatory quadrature did not converge")
    xs = np.linspace(a, b, samples)
    slopes = np.array([dq(x) for x in xs])
    if np.any(slopes == 0):
        raise SpecialFunctionError("q' vanishes on the support of p")
    ratio = np.array([abs(p(x)) for x in xs]) / np.abs(slopes)
    if not np.all(np.isfinite(ratio)):
        raise SpecialFunctionError("q' vanishes on the support of p")
    # refine the sampled maximum with a local bounded search
    i = int(np.argmax(ratio))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, samples - 1)]
    best = ratio[i]
    if hi > lo:
        res = minimize_scalar(lambda x: -abs(p(x) / dq(x)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, abs(hi))})
        best = max(best, -res.fun)
    bound = 2 * (m + 1) * best
    integral = complex(re, im)
    return OscillatoryCheck(integral, bound, abs(integral) <= bound * (1 + 1e-6))
