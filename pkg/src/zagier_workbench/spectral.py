"""Exponential sums over Laplace eigenvalues 1/4 + t_j^2 of the modular
surface, the prime-geodesic explicit-formula residual, and the parameters
of the test function phi(x) = (sinh^2 beta / 2 pi) x^2 exp(i x cosh beta).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geodesics import psi_direct


class EigenvalueFileError(ValueError):
    pass


@dataclass(frozen=True)
class EigenvalueTable:
    t_values: np.ndarray
    source: str
    precision: float  # coarsest decimal step among the entries

    @property
    def count(self) -> int:
        return int(self.t_values.size)

    @property
    def t_max(self) -> float:
        return float(self.t_values[-1])


def load_eigenvalues(path) -> EigenvalueTable:
    """Read one spectral parameter per line; '#' starts a comment (header
    lines are kept as the provenance string)."""
    path = Path(path)
    header, values, decimals = [], [], []
    with path.open() as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if line.startswith("#"):
                header.append(line.lstrip("#").strip())
                continue
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            try:
                t = float(body)
            except ValueError:
                raise EigenvalueFileError(f"{path}:{lineno}: cannot parse {body!r}") from None
            if not (math.isfinite(t) and t > 0):
                raise EigenvalueFileError(f"{path}:{lineno}: spectral parameter must be positive")
            if values and t <= values[-1]:
                raise EigenvalueFileError(f"{path}:{lineno}: values must be strictly ascending")
            values.append(t)
            decimals.append(len(body.split(".", 1)[1]) if "." in body else 0)
    if not values:
        raise EigenvalueFileError(f"{path}: no eigenvalues found")
    source = " ".join(header) or str(path)
    table = EigenvalueTable(np.array(values), source, 10.0 ** -min(decimals))
    if "PSL" in source and not 9.0 < values[0] < 10.0:
        warnings.warn(f"first spectral parameter {values[0]} is not in (9, 10) "
                      "as expected for PSL(2,Z)", stacklevel=2)
    return table


def table_from_values(values, source: str = "in-memory", precision: float = 0.0) -> EigenvalueTable:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.any(arr <= 0) or np.any(np.diff(arr) <= 0):
        raise ValueError("spectral parameters must be positive and strictly ascending")
    return EigenvalueTable(arr, source, precision)


def weyl_count(T: float) -> float:
    """Smooth part of #{t_j <= T} for PSL(2,Z):
    T^2/12 - (2T/pi) log(T / (e sqrt(pi/2))) - 131/144."""
    if T <= 0:
        return 0.0
    return T * T / 12 - 2 * T / math.pi * math.log(T / (math.e * math.sqrt(math.pi / 2))) - 131 / 144


def count_up_to(table: EigenvalueTable, T: float) -> int:
    return int(np.searchsorted(table.t_values, T, side="right"))


def _truncation_check(table: EigenvalueTable, T: float) -> None:
    if T > table.t_max:
        warnings.warn(f"T = {T} exceeds the largest tabulated value {table.t_max}; "
                      "the spectrum is truncated", stacklevel=3)


def exp_sum(table: EigenvalueTable, X: float, T: float) -> complex:
    """sum_{t_j <= T} X^{i t_j}."""
    _truncation_check(table, T)
    t = table.t_values[: count_up_to(table, T)]
    return complex(np.sum(np.exp(1j * t * math.log(X)))) if t.size else 0j


def weighted_exp_sum(table: EigenvalueTable, X: float, T: float) -> complex:
    """sum_j t_j X^{i t_j} exp(-t_j/T) over the whole table."""
    if T <= 0:
        return 0j
    t = table.t_values
    return complex(np.sum(t * np.exp(1j * t * math.log(X) - t / T)))


def exp_sum_probe(table: EigenvalueTable, X_grid, T_values, eps: float = 0.1) -> float:
    """sup |exp_sum(X, T)| / (T (T X)^eps) over the grid."""
    best = 0.0
    for X in X_grid:
        for T in T_values:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                v = abs(exp_sum(table, X, T))
            best = max(best, v / (T * (T * X) ** eps))
    return best


@dataclass
class ExplicitFormulaResult:
    X: float
    T: float
    psi: float
    spectral_term: float
    residual: float
    bound: float
    terms: int
    notes: list[str] = field(default_factory=list)

    @property
    def ratio(self) -> float:
        return abs(self.residual) / self.bound


def explicit_formula_residual(table: EigenvalueTable, X: float, T: float, data_dir=None,
                              use_cache: bool = True) -> ExplicitFormulaResult:
    """Psi(X) - X - 2 sqrt(X) Re sum_{t_j <= T} X^{i t_j}/(1/2 + i t_j) and the
    size (X/T) log^2 X of the expected remainder.

    The remainder estimate is stated for 1 <= T <= sqrt(X)/log^2 X; larger T
    is evaluated anyway with a warning.
    """
    if T < 1:
        raise ValueError("explicit formula needs T >= 1")
    if X < 3:
        raise ValueError("explicit formula needs X >= 3")
    notes = []
    logX = math.log(X)
    t_lim = math.sqrt(X) / logX**2
    if T > t_lim:
        msg = f"T = {T} exceeds sqrt(X)/log^2 X = {t_lim:.3g}; remainder estimate not guaranteed"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    if T > table.t_max:
        msg = f"T = {T} exceeds the largest tabulated value {table.t_max}"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    if table.precision * logX > 1e-3:
        msg = f"table precision {table.precision:g} times log X exceeds 1e-3"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    t = table.t_values[: count_up_to(table, T)]
    spec = 2 * math.sqrt(X) * float(np.sum((np.exp(1j * t * logX) / (0.5 + 1j * t)).real))
    psi = psi_direct(X, data_dir=data_dir, use_cache=use_cache).value
    return ExplicitFormulaResult(X, T, psi, spec, psi - X - spec, X / T * logX**2, int(t.size), notes)


# -- test function ------------------------------------------------------------

@dataclass(frozen=True)
class TestFunctionParams:
    X: float
    T: float
    beta: complex
    c: complex
    a: float
    b: float
    gamma_arg: float

    __test__ = False  # keep pytest from collecting this class


def test_function_params(X: float, T: float) -> TestFunctionParams:
    """beta = log(X)/2 + i/(2T), c = -i cosh(beta) = a - i b and
    arg c = -pi/2 + gamma_arg."""
    if X < 2 or T < 2:
        raise ValueError("need X, T >= 2")
    u, v = 0.5 * math.log(X), 1 / (2 * T)
    beta = complex(u, v)
    c = -1j * cmath.cosh(beta)
    a = math.sinh(u) * math.sin(v)
    b = math.cosh(u) * math.cos(v)
    gamma_arg = math.atan2(a, b)  # arg(a - ib) + pi/2
    return TestFunctionParams(X, T, beta, c, a, b, gamma_arg)


test_function_params.__test__ = False


def phi_test(x, params: TestFunctionParams):
    """(sinh^2 beta / 2 pi) x^2 exp(i x cosh beta), vectorized in x."""
    x = np.asarray(x, dtype=float)
    pref = cmath.sinh(params.beta) ** 2 / (2 * math.pi)
    out = pref * x * x * np.exp(1j * x * cmath.cosh(params.beta))
    return complex(out) if out.ndim == 0 else out
