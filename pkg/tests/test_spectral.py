import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zagier_workbench.geodesics import psi_direct
from zagier_workbench.spectral import (
    EigenvalueFileError, count_up_to, exp_sum, exp_sum_probe, explicit_formula_residual,
    load_eigenvalues, phi_test, table_from_values, test_function_params as make_params,
    weighted_exp_sum, weyl_count,
)

# literature values of the first few spectral parameters for PSL(2,Z)
KNOWN = [9.5336952613, 12.1730083247, 13.7797513519, 14.3585095183]


def write(tmp_path, text):
    path = tmp_path / "eig.txt"
    path.write_text(text)
    return path


def test_load_three_values(tmp_path):
    tab = load_eigenvalues(write(tmp_path, "9.533695\n12.173008\n13.779751\n"))
    assert tab.count == 3
    assert tab.t_max == 13.779751
    assert tab.precision == pytest.approx(1e-6)


def test_load_header_and_comments(tmp_path):
    tab = load_eigenvalues(write(tmp_path, "# first line\n#second\n\n9.5  # odd\n12.25\n"))
    assert tab.source == "first line second"
    assert list(tab.t_values) == [9.5, 12.25]
    assert tab.precision == pytest.approx(0.1)  # the least precise entry counts


@pytest.mark.parametrize("text,where", [
    ("", "no eigenvalues"),
    ("# only a header\n", "no eigenvalues"),
    ("12.0\n9.5\n", ":2:"),
    ("9.5\n9.5\n", ":2:"),
    ("9.5\n-1\n", ":2:"),
    ("9.5\nabc\n", ":2:"),
    ("nan\n", ":1:"),
])
def test_load_rejects(tmp_path, text, where):
    with pytest.raises(EigenvalueFileError, match=where):
        load_eigenvalues(write(tmp_path, text))


def test_load_warns_on_suspicious_first_value(tmp_path):
    with pytest.warns(UserWarning, match="first spectral parameter"):
        load_eigenvalues(write(tmp_path, "# PSL(2,Z) table\n8.0\n"))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load_eigenvalues(write(tmp_path, "# PSL(2,Z) table\n9.53\n"))
        load_eigenvalues(write(tmp_path, "# something else\n8.0\n"))


def test_shipped_table(data_dir):
    tab = load_eigenvalues(data_dir / "maass_eigenvalues.txt")
    assert tab.count >= 100
    assert np.allclose(tab.t_values[:4], KNOWN, atol=1e-9)
    assert tab.precision <= 1e-10
    for T in range(25, int(tab.t_max) + 1):
        assert abs(count_up_to(tab, T) - weyl_count(T)) <= 0.25 * weyl_count(T)


def test_weyl_count():
    assert weyl_count(0) == 0
    assert weyl_count(100) == pytest.approx(100**2 / 12 - 200 / math.pi * math.log(100 / (math.e * math.sqrt(math.pi / 2))) - 131 / 144)


def test_table_from_values():
    with pytest.raises(ValueError):
        table_from_values([])
    with pytest.raises(ValueError):
        table_from_values([3, 2])
    assert table_from_values([1.0, 2.0]).count == 2


def test_exp_sum_examples():
    tab = table_from_values([9.5, 12.2, 13.8])
    assert exp_sum(tab, 1e3, 5) == 0
    assert exp_sum(tab, 1, 13) == 2
    one = table_from_values([10.0])
    with pytest.warns(UserWarning, match="truncated"):
        assert exp_sum(one, math.e, 11) == pytest.approx(cmath.exp(10j))


@settings(max_examples=50)
@given(st.floats(1, 1e8), st.floats(0, 60))
def test_exp_sum_trivial_bound(X, T):
    tab = table_from_values(np.linspace(9, 50, 80))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert abs(exp_sum(tab, X, T)) <= count_up_to(tab, T) + 1e-9


def test_weighted_exp_sum():
    tab = table_from_values([9.5, 12.2, 13.8])
    assert weighted_exp_sum(tab, 1, 10) == pytest.approx(sum(t * math.exp(-t / 10) for t in tab.t_values))
    assert weighted_exp_sum(tab, 1, 10).imag == 0
    assert weighted_exp_sum(tab, 5, 0) == 0
    assert abs(weighted_exp_sum(tab, 5, 1e-3)) < 1e-300
    one = table_from_values([10.0])
    assert weighted_exp_sum(one, math.e, 10) == pytest.approx(10 * cmath.exp(10j) * math.exp(-1))


def test_exp_sum_probe():
    tab = table_from_values([9.5, 12.2, 13.8])
    v = exp_sum_probe(tab, [10, 100], [10, 13])
    assert v == pytest.approx(max(abs(exp_sum(tab, X, T)) / (T * (T * X) ** 0.1)
                                  for X in (10, 100) for T in (10, 13)))


def test_explicit_formula_empty_spectrum():
    tab = table_from_values([9.5])
    with pytest.warns(UserWarning, match="remainder estimate"):
        r = explicit_formula_residual(tab, 100, 5)
    assert r.terms == 0 and r.spectral_term == 0
    assert r.residual == pytest.approx(psi_direct(100).value - 100)
    assert r.bound == pytest.approx(100 * math.log(100) ** 2 / 5)


def test_explicit_formula_warnings_and_errors():
    tab = table_from_values([9.5, 12.2], precision=1e-2)
    with pytest.warns(UserWarning) as rec:
        r = explicit_formula_residual(tab, 1e4, 30)
    assert len(r.notes) == 3 and len(rec) == 3
    with pytest.raises(ValueError):
        explicit_formula_residual(tab, 1e4, 0.5)
    with pytest.raises(ValueError):
        explicit_formula_residual(tab, 2, 5)


def test_explicit_formula_piecewise_continuous():
    # between norm jumps only the -X and spectral terms move, both continuously
    tab = table_from_values(KNOWN)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = explicit_formula_residual(tab, 1000.0, 12)
        b = explicit_formula_residual(tab, 1000.0 + 1e-7, 12)
    assert a.psi == b.psi
    assert abs(a.residual - b.residual) < 1e-5


def test_params_identities():
    for X in (1e3, 1e4, 1e5, 1e6):
        for T in (10, 30, math.sqrt(X)):
            p = make_params(X, T)
            assert p.beta == complex(math.log(X) / 2, 1 / (2 * T))
            c = -1j * (math.cosh(p.beta.real) * math.cos(p.beta.imag)
                       + 1j * math.sinh(p.beta.real) * math.sin(p.beta.imag))
            assert abs(p.c - c) <= 1e-12 * abs(c)
            assert abs(p.c - complex(p.a, -p.b)) <= 1e-12 * abs(c)
            assert cmath.phase(p.c) == pytest.approx(-math.pi / 2 + p.gamma_arg, abs=1e-12)
            assert p.gamma_arg > 0 and 0.25 <= p.gamma_arg * T <= 4


def test_params_range():
    with pytest.raises(ValueError):
        make_params(1.5, 10)
    with pytest.raises(ValueError):
        make_params(100, 1)


def test_phi_modulus():
    p = make_params(1e4, 10)
    x = np.linspace(0.01, 5, 50)
    want = abs(cmath.sinh(p.beta)) ** 2 / (2 * math.pi) * x * x * np.exp(-x * p.a)
    assert np.abs(phi_test(x, p)) == pytest.approx(want, rel=1e-12)
    assert isinstance(phi_test(1.0, p), complex)
