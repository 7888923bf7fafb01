"""Bump functions, smooth indicators and the dyadic window omega_X.

Base bumps (fixed choices, any smooth bump with the right support works):
    phi(t) = C exp(-1/(1-t^2))            on (-1, 1),  int phi = 1
    psi(v) = C' exp(-1/((2v-1)(2-v)))      on (1/2, 2), int psi dv/v = 1
with phi_d(t) = phi(t/d)/d and psi_d(v) = psi(v^{1/d})/d.

The window is
    omega_X(t) = int psi_d1(y/X) (phi_d2 * 1_{]y,2y]})(t) dy/y
               = int phi_d2(v) [G((t-v)/X) - G((t-v)/(2X))] dv,
where G(w) = int_0^w psi_d1(u) du/u = Psi(w^{1/d1}) and Psi is the
cumulative integral of psi(u)/u, tabulated once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special

from .averages import PrefixErrorE0, density_m, density_params
from .halfvalues import half_values

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _raw_phi(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1
    safe = np.where(inside, t, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


def _raw_psi(v):
    v = np.asarray(v, dtype=float)
    inside = (v > 0.5) & (v < 2.0)
    safe = np.where(inside, v, 1.0)
    return np.where(inside, np.exp(-1.0 / ((2 * safe - 1) * (2 - safe))), 0.0)


@lru_cache(maxsize=1)
def _phi_constant() -> float:
    val, _ = integrate.quad(lambda t: float(_raw_phi(t)), -1, 1, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / val


@lru_cache(maxsize=1)
def _psi_tables():
    """(C', spline of Psi on [1/2, 2]) with Psi(1/2) = 0 and Psi(2) = 1 exactly."""
    edges = np.linspace(0.5, 2.0, 4097)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES
    panel = (0.5 * (b - a) * _GL_WEIGHTS * _raw_psi(x) / x).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(panel)])
    total = cum[-1]
    cum /= total
    cum[-1] = 1.0
    deriv = _raw_psi(edges) / edges / total
    return 1.0 / total, interpolate.CubicHermiteSpline(edges, cum, deriv)


def phi_base(t):
    return _phi_constant() * _raw_phi(t)


def psi_base(v):
    return _psi_tables()[0] * _raw_psi(v)


def phi_delta(t, delta: float):
    """phi_delta(t) = phi(t/delta)/delta, supported on [-delta, delta]."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    out = phi_base(np.asarray(t, dtype=float) / delta) / delta
    return float(out) if np.ndim(out) == 0 else out


def psi_delta(v, delta: float):
    """psi_delta(v) = psi(v^{1/delta})/delta, supported on [2^-delta, 2^delta]."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    v = np.asarray(v, dtype=float)
    w = np.where(v > 0, v, 0.0) ** (1.0 / delta)
    out = psi_base(w) / delta
    return float(out) if np.ndim(out) == 0 else out


def psi_cumulative(w):
    """Psi(w) = int_0^w psi(u) du/u."""
    w = np.asarray(w, dtype=float)
    spline = _psi_tables()[1]
    inner = np.clip(w, 0.5, 2.0)
    out = np.where(w <= 0.5, 0.0, np.where(w >= 2.0, 1.0, spline(inner)))
    return float(out) if np.ndim(out) == 0 else out


# -- smooth indicator ---------------------------------------------------------

def smooth_indicator(t: float, y: float, delta2: float) -> float:
    """(phi_delta2 * 1_{]y,2y]})(t) by quadrature over the part of the bump
    support where t - v lies in ]y, 2y]."""
    if not y > delta2 > 0:
        raise ValueError("need y > delta2 > 0")
    lo = max(-delta2, t - 2 * y)
    hi = min(delta2, t - y)
    if hi <= lo:
        return 0.0
    val, _ = integrate.quad(lambda v: phi_delta(v, delta2), lo, hi, epsabs=1e-14, epsrel=1e-13)
    return min(max(val, 0.0), 1.0)


# -- dyadic window --------------------------------------------------------------

@dataclass(frozen=True)
class WindowParams:
    X: float
    delta1: float
    delta2: float

    def __post_init__(self):
        if not (0 < self.delta1 <= 1 and 0 < self.delta2 <= 1):
            raise ValueError("delta1 and delta2 must lie in (0, 1]")
        if not self.X > 2:
            raise ValueError("X must exceed 2")
        if not self.support[0] > 2:
            raise ValueError("window support must start above 2 (m_0 is defined for u > 2)")

    @property
    def support(self) -> tuple[float, float]:
        return (2 ** -self.delta1 * self.X - self.delta2,
                2 ** (1 + self.delta1) * self.X + self.delta2)

    @property
    def plateau(self) -> tuple[float, float]:
        return (2 ** self.delta1 * self.X + self.delta2,
                2 ** (1 - self.delta1) * self.X - self.delta2)

    @property
    def edges(self) -> list[tuple[float, float]]:
        """The two intervals carrying the rise and the fall of the window."""
        (s0, s1), (p0, p1) = self.support, self.plateau
        return [(s0, p0), (p1, s1)]


def _dyadic_difference(s, p: WindowParams):
    """G(s/X) - G(s/(2X)) with G(w) = Psi(w^{1/delta1})."""
    s = np.asarray(s, dtype=float)
    pos = np.where(s > 0, s, 0.0)
    e = 1.0 / p.delta1
    return psi_cumulative((pos / p.X) ** e) - psi_cumulative((pos / (2 * p.X)) ** e)


@lru_cache(maxsize=16)
def _phi_rule(delta2: float, panels: int = 64):
    edges = np.linspace(-delta2, delta2, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    v = (0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES).ravel()
    w = (0.5 * (b - a) * _GL_WEIGHTS).ravel() * np.asarray(phi_delta(v, delta2))
    return v, w / math.fsum(w)


def omega_window(t, params: WindowParams):
    """omega_X(t), vectorized in t; composite Gauss-Legendre over the bump."""
    t = np.asarray(t, dtype=float)
    v, w = _phi_rule(params.delta2)
    flat = t.ravel()
    out = np.empty(flat.shape)
    for i0 in range(0, flat.size, 4096):
        tt = flat[i0:i0 + 4096]
        out[i0:i0 + 4096] = _dyadic_difference(tt[:, None] - v[None, :], params) @ w
    out = out.reshape(t.shape)
    return float(out) if out.ndim == 0 else out


def omega_window_quad(t: float, params: WindowParams) -> tuple[float, float]:
    """omega_X(t) and its error estimate by adaptive quadrature (reference route)."""
    d = params.delta2
    val, err = integrate.quad(
        lambda v: phi_delta(v, d) * float(_dyadic_difference(t - v, params)),
        -d, d, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val, err


# -- smoothed error -----------------------------------------------------------

def smoothed_error_direct(params: WindowParams, data_dir=None, use_cache: bool = True,
                          v_panels: int = 48, y_order: int = 6) -> float:
    """int int psi_d1(y/X) phi_d2(v) (E_0(2y+v) - E_0(y+v)) dv dy/y.

    The outer v-integral is composite Gauss-Legendre over the bump.  For each
    v the y-range is cut at the jumps of both E_0 terms (y = (n-v)/2 and
    y = n-v), and each piece gets a y_order-point Gauss rule.
    """
    X, d1, d2 = params.X, params.delta1, params.delta2
    if X > 1e5:
        raise ValueError("smoothed_error_direct is limited to X <= 1e5")
    ylo, yhi = 2 ** -d1 * X, 2 ** d1 * X
    E0 = PrefixErrorE0(2 * yhi + d2 + 1, data_dir=data_dir, use_cache=use_cache)
    gx, gw = np.polynomial.legendre.leggauss(y_order)
    v_nodes, v_weights = _phi_rule(d2, v_panels)
    total = []
    for v, wv in zip(v_nodes, v_weights):
        if wv == 0.0:
            continue
        n1 = np.arange(math.ceil(2 * ylo + v), math.floor(2 * yhi + v) + 1)
        n2 = np.arange(math.ceil(ylo + v), math.floor(yhi + v) + 1)
        cuts = np.unique(np.concatenate([[ylo, yhi], (n1 - v) / 2, n2 - v]))
        cuts = cuts[(cuts >= ylo) & (cuts <= yhi)]
        a, b = cuts[:-1, None], cuts[1:, None]
        y = 0.5 * (a + b) + 0.5 * (b - a) * gx
        wy = 0.5 * (b - a) * gw
        f = np.asarray(psi_delta(y / X, d1)) / y * (E0(2 * y + v) - E0(y + v))
        total.append(wv * math.fsum((wy * f).ravel()))
    return math.fsum(total)


def smoothed_error_via_window(params: WindowParams, data_dir=None,
                              use_cache: bool = True) -> float:
    """sum_n L_{n^2-4}(1/2) omega_X(n) - int m_0(u) omega_X(u) du."""
    s0, s1 = params.support
    n_lo, n_hi = max(3, math.ceil(s0)), math.floor(s1)
    if n_hi >= n_lo:
        ns = np.arange(n_lo, n_hi + 1)
        vals = half_values(n_lo, n_hi + 1, data_dir=data_dir, use_cache=use_cache)
        discrete = math.fsum(vals * omega_window(ns.astype(float), params))
    else:
        discrete = 0.0
    mp = density_params(0.0)

    def m0(u):
        return density_m(u, 0.0, mp).real

    p0, p1 = params.plateau
    pieces = [(s0, p0, True), (p0, p1, False), (p1, s1, True)]
    integral = 0.0
    for a, b, weighted in pieces:
        if b <= a:
            continue
        if weighted:
            f = lambda u: m0(u) * omega_window(u, params)  # noqa: E731
        else:
            f = m0
        val, _ = integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=500)
        integral += val
    return discrete - integral


def unsmoothing_bound(params: WindowParams, data_dir=None, use_cache: bool = True,
                      step: float = 0.05) -> float:
    """Sampled max of |E_0(2y+v) - E_0(y+v)| over the support of the smoothing."""
    X, d1, d2 = params.X, params.delta1, params.delta2
    ylo, yhi = 2 ** -d1 * X, 2 ** d1 * X
    E0 = PrefixErrorE0(2 * yhi + d2 + 1, data_dir=data_dir, use_cache=use_cache)
    y = np.arange(ylo, yhi + step, step)
    best = 0.0
    for v in np.linspace(-d2, d2, 11):
        best = max(best, float(np.max(np.abs(E0(2 * y + v) - E0(y + v)))))
    return best


def window_checks(p, data_dir=None, use_cache=True, samples=2000, seed=0):
    """(name, value, bound, passed) for the window properties and the
    direct/window agreement of the smoothed error."""
    rng = np.random.default_rng(seed)
    lo, hi = p.support
    (e0a, e0b), (e1a, e1b) = p.edges
    X, d1 = p.X, p.delta1
    out = []
    t = rng.uniform(lo - 0.1 * X, hi + 0.1 * X, samples)
    w = omega_window(t, p)
    # the quadrature rule's weights sum to 1 up to rounding, hence the 4 ulp slack
    slack = 4 * np.finfo(float).eps
    out.append(("omega_in_unit_interval", float(max(-w.min(), w.max() - 1, 0)), slack,
                bool(w.min() >= -slack and w.max() <= 1 + slack)))
    outside = np.concatenate([np.linspace(lo - 0.5 * X, lo, 200), np.linspace(hi, hi + X, 200)])
    v = float(np.abs(omega_window(outside, p)).max())
    out.append(("support_zero", v, 1e-8, v <= 1e-8))
    inside = np.linspace(*p.plateau, 400)
    v = float(np.abs(omega_window(inside, p) - 1).max())
    out.append(("plateau_one", v, 1e-8, v <= 1e-8))
    h = 1e-3 * d1 * X
    te = np.concatenate([np.linspace(e0a, e0b, 200), np.linspace(e1a, e1b, 200)])
    d = (omega_window(te + h, p) - omega_window(te - h, p)) / (2 * h)
    v = float(np.abs(d).max()) * d1 * X
    out.append(("derivative_scaled", v, 3.0, v <= 3.0))
    dd = (omega_window(te + h, p) - 2 * omega_window(te, p) + omega_window(te - h, p)) / h**2
    v = float(np.abs(dd).max()) * (d1 * X) ** 2
    out.append(("second_derivative_scaled", v, 30.0, v <= 30.0))
    # omega' must vanish off the two edge intervals
    off = np.concatenate([np.linspace(lo - 0.5 * X, e0a - h, 200), np.linspace(e0b + h, e1a - h, 200),
                          np.linspace(e1b + h, hi + X, 200)])
    dg = (omega_window(off + h, p) - omega_window(off - h, p)) / (2 * h)
    v = float(np.abs(dg).max())
    out.append(("derivative_zero_off_edges", v, 1e-8, v <= 1e-8))
    direct = smoothed_error_direct(p, data_dir=data_dir, use_cache=use_cache)
    window = smoothed_error_via_window(p, data_dir=data_dir, use_cache=use_cache)
    rel = abs(direct - window) / max(abs(window), 1e-300)
    out.append(("smoothed_error_direct", direct, float("nan"), True))
    out.append(("smoothed_error_via_window", window, float("nan"), True))
    out.append(("smoothed_error_relative_gap", rel, 1e-6, rel <= 1e-6))
    return out


# -- Gaussian window ------------------------------------------------------------

def gaussian_window(x, X: float, T: float):
    """(1/(T sqrt(pi))) int_X^{2X} exp(-(x-K)^2/T^2) dK via erf differences."""
    if not (X > 0 and T > 0):
        raise ValueError("X and T must be positive")
    x = np.asarray(x, dtype=float)
    a = (x - X) / T
    b = (x - 2 * X) / T
    # erfc form keeps the plateau and the tails accurate
    out = np.where(b >= 0, 0.5 * (special.erfc(b) - special.erfc(a)),
                   np.where(a <= 0, 0.5 * (special.erfc(-a) - special.erfc(-b)),
                            1.0 - 0.5 * (special.erfc(a) + special.erfc(-b))))
    return float(out) if out.ndim == 0 else out
