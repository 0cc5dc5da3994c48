import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutstack.quadratic import Surd, cf_convergents, cf_terms_of, surd_from_cf

SQRT2 = Surd.sqrt(2)
SQRT5 = Surd.sqrt(5)


def close(s, x, tol=1e-12):
    return abs(float(s) - x) < tol


def test_basic_arithmetic_against_floats():
    a = Surd(Fraction(1, 3), Fraction(2, 5), 2)
    b = Surd(Fraction(-1, 2), Fraction(1, 7), 2)
    fa = 1 / 3 + 2 / 5 * math.sqrt(2)
    fb = -1 / 2 + 1 / 7 * math.sqrt(2)
    assert close(a + b, fa + fb)
    assert close(a - b, fa - fb)
    assert close(a * b, fa * fb)
    assert close(a / b, fa / fb)
    assert close(1 / a, 1 / fa)


def test_perfect_square_radicand_collapses_to_rational():
    s = Surd(0, 1, 9)  # sqrt(9) = 3
    assert s == Surd(3)
    assert Surd.sqrt(8) == Surd(0, 2, 2)  # sqrt(8) reduces to 2*sqrt(2)
    assert float(Surd.sqrt(8)) == pytest.approx(2 * math.sqrt(2))


def test_sign_floor_frac_exact():
    x = SQRT2 - 1  # about 0.4142
    assert x.sign() == 1
    assert (-x).sign() == -1
    assert (x - x).sign() == 0
    assert (Surd(3) * x).floor() == 1
    g = (SQRT5 - 1) / 2
    assert (g * 5).floor() == 3  # 5*0.618... = 3.09
    f = (g * 5).frac()
    assert Surd(0) <= f < Surd(1)
    assert (g * 5) - f == Surd(3)


def test_ordering_is_exact_near_ties():
    # 99/70 is a convergent of sqrt(2): the comparison margin is tiny
    assert Surd(Fraction(99, 70)) > SQRT2
    assert Surd(Fraction(140, 99)) < SQRT2
    assert not SQRT2 < SQRT2


def test_equality_and_hash():
    a = (SQRT2 + 1) * (SQRT2 - 1)  # = 1 exactly
    assert a == Surd(1)
    assert hash(a) == hash(Surd(1))


def test_approx_is_close_rational():
    x = (SQRT5 - 1) / 2
    golden = (math.sqrt(5) - 1) / 2
    assert abs(float(x.approx(bits=80)) - golden) < 1e-15


def test_cf_convergents_sqrt2():
    conv = cf_convergents([1, 2, 2, 2, 2, 2])
    assert conv[-1] == (99, 70)


def test_surd_from_cf_known_values():
    assert surd_from_cf((0,), (2,)) == SQRT2 - 1
    assert surd_from_cf((0,), (1,)) == (SQRT5 - 1) / 2
    assert surd_from_cf((1,), (2,)) == SQRT2


def test_cf_terms_of_inverts_surd_from_cf():
    x = surd_from_cf((0,), (2,))
    assert cf_terms_of(x, 6) == [0, 2, 2, 2, 2, 2]
    g = surd_from_cf((0,), (1,))
    assert cf_terms_of(g, 6) == [0, 1, 1, 1, 1, 1]


@settings(max_examples=100, deadline=None)
@given(
    st.fractions(min_value=-5, max_value=5),
    st.fractions(min_value=-5, max_value=5),
    st.fractions(min_value=-5, max_value=5),
)
def test_field_identities_random(a, b, c):
    xs = Surd(a, b, 3)
    ys = Surd(c, a, 3)
    assert (xs + ys) - ys == xs
    if ys != Surd(0):
        assert (xs / ys) * ys == xs
    assert xs * ys == ys * xs
    # order consistency with a high-precision rational approximation
    diff = (xs - ys).approx(bits=96)
    if xs > ys:
        assert diff > -Fraction(1, 2**90)
    if xs < ys:
        assert diff < Fraction(1, 2**90)


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=0, max_value=8))
def test_floor_matches_rational_floor(q):
    assert Surd(q).floor() == q.numerator // q.denominator
