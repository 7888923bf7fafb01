import math

import pytest
from hypothesis import given, settings, strategies as st

from zagier_workbench.geodesics import (
    CLASS_CACHE_HEADER, ClassDataCache, FormClassData, form_class_data, form_cycle_contents,
    fundamental_solution, max_trace, psi_direct, psi_via_zagier, reduced_form_cycles,
    regulator, trace_identity_check,
)

GOLDEN = (1 + math.sqrt(5)) / 2


def is_disc(D):
    return D % 4 in (0, 1) and math.isqrt(D) ** 2 != D


def brute_cycles(D, primitive):
    """Reduced forms and the rho map written out plainly."""
    r = math.sqrt(D)
    forms = set()
    for b in range(1, math.isqrt(D) + 1):
        if (b * b - D) % 4:
            continue
        ac = (b * b - D) // 4
        for a in range(-D, D + 1):
            if a == 0 or ac % a:
                continue
            c = ac // a
            if r - b < 2 * abs(a) < r + b and b < r:
                if not primitive or math.gcd(math.gcd(a, b), c) == 1:
                    forms.add((a, b, c))

    def rho(f):
        a, b, c = f
        m = 2 * abs(c)
        # b' = -b mod 2|c| with sqrt(D) - 2|c| < b' < sqrt(D)
        bp = -b % m
        while bp < r - m:
            bp += m
        while bp > r:
            bp -= m
        return (c, bp, (bp * bp - D) // (4 * c))

    cycles, seen = 0, set()
    for f in forms:
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = rho(g)
    return cycles


def test_cycle_examples():
    assert reduced_form_cycles(5, primitive=True) == 1
    assert reduced_form_cycles(8, primitive=True) == 1
    assert reduced_form_cycles(12, primitive=True) == 2


def test_cycles_match_brute_force():
    for D in range(5, 400):
        if is_disc(D):
            assert reduced_form_cycles(D, primitive=True) == brute_cycles(D, True)
            assert reduced_form_cycles(D) == brute_cycles(D, False)


def test_cycle_contents_are_square_divisors():
    for D in (45, 96, 165, 252, 1020):
        for g in form_cycle_contents(D):
            assert D % (g * g) == 0 and is_disc(D // (g * g))


def brute_pell(D):
    u = 1
    while True:
        t2 = D * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
        u += 1


def test_pell_examples():
    assert fundamental_solution(5) == (3, 1)
    assert fundamental_solution(8) == (6, 2)
    assert fundamental_solution(12) == (4, 1)


def test_pell_brute_force():
    for D in range(5, 1500):
        if is_disc(D):
            t, u = fundamental_solution(D)
            if u <= 10**5:
                assert (t, u) == brute_pell(D)
            assert t * t - D * u * u == 4


@settings(max_examples=200)
@given(st.integers(5, 10**6).filter(is_disc))
def test_pell_identity(D):
    t, u = fundamental_solution(D)
    assert t > 0 and u > 0
    assert t * t - D * u * u == 4


def test_pell_huge_solution():
    # D = 4 * 661 has a fundamental unit with a 36-digit t
    t, u = fundamental_solution(4 * 661)
    assert t * t - 4 * 661 * u * u == 4
    assert regulator(4 * 661) == pytest.approx(math.log((t + u * math.sqrt(4 * 661)) / 2), rel=1e-12)


def test_class_number_formula():
    # narrow class number times the totally-positive regulator is sqrt(D) L(1, chi_D)
    import mpmath
    from zagier_workbench.arith import is_fundamental, kronecker
    for D in (5, 8, 12, 13, 17, 21, 24, 28, 40, 60, 85, 136, 145, 229, 401):
        assert is_fundamental(D)
        L = -mpmath.fsum(kronecker(D, a) * mpmath.digamma(mpmath.mpf(a) / D) for a in range(1, D)) / D
        rec = form_class_data(D)
        assert rec.class_count * rec.regulator == pytest.approx(math.sqrt(D) * float(L), rel=1e-12)


def test_form_class_data_validation():
    with pytest.raises(ValueError):
        FormClassData(5, 1, 3, 2, 1.0)
    with pytest.raises(ValueError):
        FormClassData(5, 0, 3, 1, 1.0)


@pytest.mark.parametrize("D", [4, 9, 6, 0, -5])
def test_rejects_bad_discriminants(D):
    with pytest.raises(ValueError):
        fundamental_solution(D)


def test_cache_round_trip(tmp_path):
    path = tmp_path / "classes.csv"
    cache = ClassDataCache(path)
    recs = [cache.get(D) for D in (5, 8, 12, 45, 221)]
    cache.flush()
    again = ClassDataCache(path)
    assert [again.rows[r.D] for r in recs] == recs
    assert path.read_text().splitlines()[0] == ",".join(CLASS_CACHE_HEADER)


def test_cache_rejects_corrupt(tmp_path):
    path = tmp_path / "classes.csv"
    path.write_text("D,h\n5,1\n")
    with pytest.raises(ValueError):
        ClassDataCache(path)
    path.write_text(",".join(CLASS_CACHE_HEADER) + "\n5,1,3,2,0.9\n")
    with pytest.raises(ValueError, match=":2:"):
        ClassDataCache(path)


def test_max_trace():
    assert max_trace(6) == 2
    assert max_trace(7) == 3
    for X in (10.0, 100.0, 5000.0, 1e6):
        n = max_trace(X)
        assert 2 * math.acosh(n / 2) <= math.log(X) < 2 * math.acosh((n + 1) / 2)


def test_psi_small_values(empty_data_dir):
    assert psi_direct(6, data_dir=empty_data_dir).value == 0
    assert psi_via_zagier(6).value == 0
    want = 4 * math.log(GOLDEN)
    assert psi_direct(7, data_dir=empty_data_dir).value == pytest.approx(want, rel=1e-14)
    assert psi_via_zagier(7).value == pytest.approx(want, rel=1e-12)


def test_psi_agree_at_100(empty_data_dir):
    a = psi_direct(100, data_dir=empty_data_dir).value
    b = psi_via_zagier(100).value
    assert abs(a - b) <= 1e-9 * a


def test_psi_trace_reading_differs():
    assert psi_via_zagier(100, reading="trace").value > 50 * psi_via_zagier(100).value


def test_psi_range():
    with pytest.raises(ValueError):
        psi_direct(4)
    with pytest.raises(ValueError):
        psi_via_zagier(2e8)


@settings(max_examples=25, deadline=None)
@given(st.floats(5, 5e4), st.floats(0, 5e3))
def test_psi_monotone(X, dX):
    assert psi_direct(X, use_cache=False).value <= psi_direct(X + dX, use_cache=False).value


def test_psi_cache_on_off_identical(tmp_path):
    a = psi_direct(3e4, data_dir=tmp_path).value
    b = psi_direct(3e4, data_dir=tmp_path).value  # second call reads the CSV
    c = psi_direct(3e4, use_cache=False).value
    assert a == b == c


def test_trace_identity_examples():
    lhs, rhs, gap = trace_identity_check(3)
    assert lhs == pytest.approx(4 * math.log(GOLDEN), rel=1e-13)
    assert gap <= 1e-8
    for n in (4, 7, 18, 123, 2000):
        assert trace_identity_check(n)[2] <= 1e-8


def test_trace_identity_range():
    with pytest.raises(ValueError):
        trace_identity_check(2)
