"""Partial sums of L_{n^2-4}(1/2+it), the main-term density m_t and the
error term E_t(X) = sum_{2<n<=X} L_{n^2-4}(1/2+it) - int_2^X m_t(u) du.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .halfvalues import half_values
from .specfun import complex_gamma, riemann_zeta, zeta_derivative, zeta_reflected
from .zagier import zagier_L

EULER_GAMMA = float(np.euler_gamma)
MAX_TWIST = 100.0


@dataclass(frozen=True)
class DensityParams:
    t: float
    zeta32: float
    dzeta32: float
    euler_gamma: float
    log_constant: float  # -pi/2 + 3 gamma - 2 zeta'/zeta(3/2) - log 8 pi
    flat: complex  # zeta(1+2it)/zeta(3/2+it)
    oscillating: complex  # coefficient of (x^2-4)^{-it}


def density_params(t: float) -> DensityParams:
    t = float(t)
    if abs(t) > MAX_TWIST:
        raise ValueError(f"|t| must be <= {MAX_TWIST}")
    z32 = riemann_zeta(1.5).real
    dz32 = zeta_derivative(1.5).real
    K = -math.pi / 2 + 3 * EULER_GAMMA - 2 * dz32 / z32 - math.log(8 * math.pi)
    if t == 0:
        return DensityParams(t, z32, dz32, EULER_GAMMA, K, 0j, 0j)
    s = 0.5 + 1j * t
    flat = riemann_zeta(1 + 2j * t) / riemann_zeta(1.5 + 1j * t)
    osc = (2**s * cmath.sin(cmath.pi * s / 2) * cmath.exp(-1j * t * math.log(math.pi))
           * zeta_reflected(1j * t) / riemann_zeta(1.5 - 1j * t) * complex_gamma(1j * t))
    return DensityParams(t, z32, dz32, EULER_GAMMA, K, flat, osc)


def density_m(x: float, t: float, params: DensityParams | None = None) -> complex:
    if not x > 2:
        raise ValueError("density_m needs x > 2")
    p = params if params is not None else density_params(t)
    if p.t == 0:
        return complex((math.log(x * x - 4) + p.log_constant) / (2 * p.zeta32))
    return p.flat + p.oscillating * cmath.exp(-1j * p.t * math.log(x * x - 4))


def main_term_integral(X: float, t: float) -> complex:
    """int_2^X m_t(u) du by quadrature in v with u = 2 cosh v."""
    X = float(X)
    if X < 2:
        raise ValueError("main_term_integral needs X >= 2")
    if X == 2:
        return 0j
    p = density_params(t)
    vmax = math.acosh(X / 2)

    def piece(f):
        # log singularity at v = 0: split off [0, min(1, vmax)] and use unit panels after
        edges = [0.0] + list(np.arange(1.0, vmax, 1.0)) + [vmax]
        total, err = 0.0, 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            if b > a:
                val, e = integrate.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-13)
                total += val
                err += e
        if err > 1e-8 * X:
            raise RuntimeError(f"main-term quadrature error {err:g} exceeds 1e-8 X")
        return total

    if p.t == 0:
        def f(v):
            if v == 0:
                return 0.0
            sh = math.sinh(v)
            return (2 * math.log(2 * sh) + p.log_constant) / (2 * p.zeta32) * 2 * sh
        return complex(piece(f), 0.0)

    def f_re(v):
        return (density_m(2 * math.cosh(v), p.t, p) * 2 * math.sinh(v)).real if v else 0.0

    def f_im(v):
        return (density_m(2 * math.cosh(v), p.t, p) * 2 * math.sinh(v)).imag if v else 0.0

    return complex(piece(f_re), piece(f_im))


def _log_antiderivative(u: np.ndarray) -> np.ndarray:
    # int log(u^2 - 4) du = (u-2) log(u-2) + (u+2) log(u+2) - 2u, continuous at u = 2
    a = u - 2.0
    la = np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)
    return la + (u + 2.0) * np.log(u + 2.0) - 2.0 * u


def main_term_closed(X, params: DensityParams | None = None) -> np.ndarray:
    """int_2^X m_0(u) du from the antiderivative of log(u^2-4); vectorized in X."""
    p = params if params is not None else density_params(0.0)
    X = np.asarray(X, dtype=float)
    if np.any(X < 2):
        raise ValueError("main_term_closed needs X >= 2")
    F2 = 4 * math.log(4.0) - 4.0
    return (_log_antiderivative(X) - F2 + p.log_constant * (X - 2.0)) / (2 * p.zeta32)


class PrefixErrorE0:
    """E_0(x) for real 2 <= x <= x_max from prefix sums of the central values."""

    def __init__(self, x_max: float, data_dir=None, use_cache: bool = True):
        self.top = max(int(math.floor(x_max)), 2)
        vals = half_values(3, self.top + 1, data_dir=data_dir, use_cache=use_cache) \
            if self.top >= 3 else np.empty(0)
        self.prefix = np.concatenate([np.zeros(3), np.cumsum(vals)])
        self.params = density_params(0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x >= self.top + 1) or np.any(x < 2):
            raise ValueError("x outside the tabulated range")
        idx = np.floor(x).astype(np.int64)
        return self.prefix[idx] - main_term_closed(x, self.params)


def _terms(n_lo: int, n_hi: int, t: float, data_dir=None, use_cache=True) -> np.ndarray:
    if t == 0:
        return half_values(n_lo, n_hi, data_dir=data_dir, use_cache=use_cache).astype(complex)
    return np.array([zagier_L(n, 0.5 + 1j * t).value for n in range(n_lo, n_hi)], dtype=complex)


def partial_sum(X: float, t: float, data_dir=None, use_cache: bool = True) -> complex:
    """sum_{3 <= n <= floor(X)} L_{n^2-4}(1/2+it), pairwise summed."""
    if abs(t) > MAX_TWIST:
        raise ValueError(f"|t| must be <= {MAX_TWIST}")
    top = math.floor(X)
    if top < 3:
        return 0j
    return complex(np.sum(_terms(3, top + 1, t, data_dir, use_cache)))


@dataclass(frozen=True)
class ScanRecord:
    X: float
    partial_sum: complex
    main_term: complex
    error: complex
    normalized: float


CSV_HEADER = ["X", "sum_re", "sum_im", "main_re", "main_im", "err_re", "err_im", "normalized"]


def record_row(r: ScanRecord) -> list[float]:
    return [r.X, r.partial_sum.real, r.partial_sum.imag, r.main_term.real, r.main_term.imag,
            r.error.real, r.error.imag, r.normalized]


def error_scan(X_grid, t: float, data_dir=None, use_cache: bool = True) -> list[ScanRecord]:
    """E_t at each grid point; the partial sum is extended incrementally."""
    grid = [float(x) for x in X_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("X grid must be ascending")
    if abs(t) > MAX_TWIST:
        raise ValueError(f"|t| must be <= {MAX_TWIST}")
    out = []
    segments: list[complex] = []
    done = 2  # traces <= done already summed
    for X in grid:
        top = math.floor(X)
        if top > done:
            segments.append(complex(np.sum(_terms(max(done + 1, 3), top + 1, t, data_dir, use_cache))))
            done = top
        s = complex(math.fsum(z.real for z in segments), math.fsum(z.imag for z in segments))
        main = main_term_integral(X, t) if X >= 2 else 0j
        err = s - main
        out.append(ScanRecord(X, s, main, err, abs(err) / math.sqrt(X)))
    return out


def exponent_fit(records: list[ScanRecord]) -> tuple[float, float, float]:
    """Least-squares (slope, intercept, r^2) of log|E| against log X."""
    pts = [(math.log(r.X), math.log(abs(r.error))) for r in records if abs(r.error) > 0]
    if len(pts) < 10:
        raise ValueError("exponent_fit needs at least 10 records with nonzero error")
    x, y = np.array(pts).T
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return float(slope), float(intercept), r2
