import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dioflow.core import (ApproximationQuery, BoxSpec, CorrespondenceParams, DomainError, DyadicReal,
                          TargetVector, box_log2_volume, box_volume, default_precision, fraction_str,
                          gamma_of_v, gamma_sharp, log2_fraction, parse_rational, parse_real, quadratic_surd,
                          quantize, v_of_gamma)

dyadics = st.builds(DyadicReal, st.integers(-10 ** 30, 10 ** 30), st.integers(0, 200))
rationals = st.fractions(min_value=0, max_value=1000, max_denominator=10 ** 6)


@given(dyadics, dyadics)
def test_dyadic_ring_ops_are_exact(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a - b).to_fraction() == fa - fb
    assert (a * b).to_fraction() == fa * fb
    assert (-a).to_fraction() == -fa
    assert (a < b) == (fa < fb)
    assert (a == b) == (fa == fb)


@given(dyadics, st.integers(-300, 300))
def test_ldexp_is_multiplication_by_power_of_two(a, k):
    assert a.ldexp(k).to_fraction() == a.to_fraction() * Fraction(2) ** k


@given(dyadics)
def test_dyadic_is_canonical(a):
    if a.mantissa != 0 and a.scale > 0:
        assert a.mantissa % 2 == 1
    assert DyadicReal.from_fraction(a.to_fraction()) == a
    assert hash(a) == hash(DyadicReal.from_fraction(a.to_fraction()))


def test_from_fraction_rejects_non_dyadic():
    with pytest.raises(ValueError):
        DyadicReal.from_fraction(Fraction(1, 3))


def test_parse_rational_grammar():
    assert parse_rational("2^-3") == Fraction(1, 8)
    assert parse_rational("3/12") == Fraction(1, 4)
    assert parse_rational("0.125") == Fraction(1, 8)
    assert parse_rational("-7") == -7
    for bad in ("1/0", "0^-1", "abc", "1.2.3", ""):
        with pytest.raises(ValueError):
            parse_rational(bad)
    assert fraction_str(Fraction(6, 4)) == "3/2"
    assert fraction_str(Fraction(4, 2)) == "2"


def test_quantize_examples():
    # 0.1 * 16 = 1.6 rounds to 2
    assert quantize("0.1", 4).to_fraction() == Fraction(1, 8)
    # ties go to even
    assert quantize("3/32", 4).to_fraction() == Fraction(1, 8)
    assert quantize("1/32", 4).to_fraction() == 0
    with pytest.raises(ValueError):
        quantize("1", -1)


@given(rationals, st.integers(1, 80))
def test_quantize_is_nearest(x, p):
    q = quantize(x, p).to_fraction()
    assert abs(q - x) <= Fraction(1, 2 ** (p + 1))
    assert (q * 2 ** p).denominator == 1


@given(st.integers(0, 10 ** 6), st.integers(-50, 50), st.integers(1, 40), st.integers(1, 200))
@settings(max_examples=200)
def test_quadratic_surd_rounds_to_nearest(a, b, c, p):
    r = quadratic_surd(a, b, c, p)
    m = r.to_fraction() * 2 ** p
    assert m.denominator == 1
    m = int(m)
    # (m - 1/2) <= (sqrt(a) + b) 2^p / c <= (m + 1/2), checked by squaring sqrt(a) 2^p bounds
    lo = Fraction(2 * m - 1, 2) * c - b * 2 ** p
    hi = Fraction(2 * m + 1, 2) * c - b * 2 ** p
    target = a * 4 ** p
    assert hi >= 0 and hi * hi >= target
    assert lo <= 0 or lo * lo <= target


def test_parse_real_surd_and_rational():
    g = parse_real("(sqrt(5)-1)/2", 64).to_fraction()
    assert abs(float(g) - (math.sqrt(5) - 1) / 2) < 1e-15
    assert parse_real("sqrt(4)", 8) == 2
    assert parse_real("0.5", 8) == Fraction(1, 2)
    y = TargetVector.from_literals(["(sqrt(2)-1)", "1/4"], 100)
    assert y.n == 2 and y.coords[1] == Fraction(1, 4)


def test_target_vector_linear_form_and_scale():
    y = TargetVector.exact([Fraction(3, 8), Fraction(5, 16)])
    assert y.precision_bits == 4
    assert y.linear_form(-1, (2, 1)) == Fraction(3, 4) + Fraction(5, 16) - 1
    nums, s = y.integer_numerators()
    assert (nums, s) == ([6, 5], 4)
    with pytest.raises(ValueError):
        TargetVector.exact([Fraction(1, 8)], 2)
    assert default_precision(2, 100) == 364


def test_gamma_formulas():
    for n in range(1, 5):
        assert gamma_of_v(n, n) == 0
        assert gamma_sharp(n, n) == 0
    assert gamma_of_v(2, 4) == Fraction(1, 5)
    assert gamma_sharp(1, 2) == Fraction(1, 3)
    with pytest.raises(DomainError):
        gamma_of_v(2, 1)
    with pytest.raises(DomainError):
        v_of_gamma(1, -1)
    assert v_of_gamma(2, Fraction(1, 2), "scaled") == math.inf
    assert v_of_gamma(1, 1, "sharp") == math.inf
    p = CorrespondenceParams(2, 4)
    assert p.gamma_scaled * 2 == p.gamma_sharp


@given(st.integers(1, 5), st.fractions(min_value=0, max_value=100, max_denominator=1000))
def test_gamma_round_trip(n, extra):
    v = n + extra
    assert v_of_gamma(n, gamma_of_v(n, v), "scaled") == v
    assert v_of_gamma(n, gamma_sharp(n, v), "sharp") == v


@given(st.integers(1, 4), st.integers(0, 12), st.integers(0, 6))
def test_box_volume_closed_form(n, s, k):
    v = n + k
    b = BoxSpec(v, s, n)
    assert box_volume(b) == Fraction(2) ** (2 * n + 1 - (v - n) * s)
    assert box_log2_volume(b) == 2 * n + 1 - (v - n) * s


def test_box_volume_irrational_side():
    with pytest.raises(DomainError):
        box_volume(BoxSpec(Fraction(3, 2), 1, 1))
    assert box_log2_volume(BoxSpec(Fraction(3, 2), 1, 1)) == Fraction(5, 2)


def test_box_contains_is_open_and_exact():
    b = BoxSpec(Fraction(3, 2), 2, 1)  # |x0| < 2^-3, |x1| < 8
    assert b.contains([Fraction(1, 9), Fraction(7)])
    assert not b.contains([Fraction(1, 8), Fraction(7)])
    assert not b.contains([Fraction(0), Fraction(8)])
    b = BoxSpec(Fraction(1, 2), 1, 1)  # |x0| < 2^-1/2
    assert b.contains([Fraction(7, 10), 0]) and not b.contains([Fraction(71, 100), 0])


def test_approximation_query_validation():
    with pytest.raises(DomainError):
        ApproximationQuery(1, 10, n=2)
    with pytest.raises(DomainError):
        ApproximationQuery(2, 0, n=2)
    assert ApproximationQuery("5/2", 3, n=2).v == Fraction(5, 2)


def test_log2_fraction_large():
    assert log2_fraction(Fraction(1, 2 ** 5000)) == -5000
    with pytest.raises(DomainError):
        log2_fraction(Fraction(0))
