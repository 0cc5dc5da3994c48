import pytest
from fractions import Fraction

import oracles
from cutstack.arithmetic import (
    OdometerPoint,
    OdometerSpec,
    RotationAngle,
    RotationPoint,
    cylinder_mass,
    first_return_rotation,
    golden_minus_1,
    in_interval,
    induce_odometer_prefix,
    induced_exchange,
    odometer_apply,
    odometer_predecessor,
    odometer_successor,
    odometer_zero,
    point_value,
    rotate,
    sqrt2_minus_1,
    truncated_value,
)
from cutstack.errors import BudgetExhausted
from cutstack.quadratic import Surd

ANGLES = [sqrt2_minus_1, golden_minus_1]


def test_angle_parse_and_known_values():
    a = RotationAngle.parse("cf:[0;(2)]")
    assert a.value == Surd.sqrt(2) - 1
    g = RotationAngle.parse("cf:[0;(1)]")
    assert g.value == (Surd.sqrt(5) - 1) / 2
    mixed = RotationAngle.parse("cf:[0;2,(1,2)]")
    assert Surd(0) < mixed.value < Surd(1)


def test_rotation_orbit_matches_float_oracle():
    angle = sqrt2_minus_1()
    alpha = float(angle.value)
    p = RotationPoint(0, 0)
    for i, want in enumerate(oracles.rotation_orbit_floats(alpha, 40)):
        q = rotate(angle, p, i)
        assert float(point_value(angle, q)) == pytest.approx(want, abs=1e-9)


def test_orbit_points_distinct_exactly():
    angle = golden_minus_1()
    vals = {point_value(angle, RotationPoint(0, b)) for b in range(60)}
    assert len(vals) == 60


def test_exchange_is_first_return_map():
    for make in ANGLES:
        angle = make()
        alpha = angle.value
        em = induced_exchange(angle)
        # sample points of the form frac(a + b*alpha) inside [0, alpha)
        pts = [
            RotationPoint(a, b)
            for a in range(-3, 4)
            for b in range(-12, 13)
            if in_interval(angle, RotationPoint(a, b), Surd(0), alpha)
        ]
        assert len(pts) > 20
        for p in pts:
            r, landing = first_return_rotation(angle, p)
            assert r in (em.n, em.n + 1)
            img = em.image(p)
            assert angle.compare_points(img, landing) == 0
            back = em.preimage(img)
            assert angle.compare_points(back, p) == 0


def test_exchange_cut_splits_by_return_time():
    angle = sqrt2_minus_1()
    em = induced_exchange(angle)
    alpha = angle.value
    for p in [RotationPoint(a, b) for a in range(-2, 3) for b in range(-9, 10)]:
        if not in_interval(angle, p, Surd(0), alpha):
            continue
        r, _ = first_return_rotation(angle, p)
        v = point_value(angle, p)
        assert (r == em.n + 1) == (v < em.cut)


def test_approximate_angle_comparisons_and_budget():
    # finite CF data: comparisons succeed when brackets separate
    a = RotationAngle((0,), terms=(2,) * 12)
    assert a.compare_points(RotationPoint(0, 1), RotationPoint(0, 2)) != 0
    with pytest.raises(BudgetExhausted):
        short = RotationAngle((0,), terms=(2, 2))
        # sharpening a comparison this close needs more terms
        short.compare_points(RotationPoint(-4, 10), RotationPoint(-5, 12))


# -- odometers --------------------------------------------------------------


def test_odometer_successor_matches_naive_carry():
    spec = OdometerSpec((2,), (3,))
    bases = [2, 3, 3, 3, 3, 3, 3, 3]
    p = odometer_zero(spec)
    want = oracles.odometer_orbit_positions(bases, 80)
    for i in range(80):
        assert truncated_value(spec, p, 8) == want[i]
        p = odometer_successor(spec, p)


def test_odometer_predecessor_inverts_successor():
    spec = OdometerSpec.parse("od:[2,3,2,*]")
    p = odometer_zero(spec)
    p = odometer_apply(spec, p, 57)
    q = odometer_apply(spec, p, -57)
    assert all(q.digit(k) == 0 for k in range(1, 12))
    assert odometer_predecessor(spec, odometer_successor(spec, p)).digit(1) \
        == p.digit(1)


def test_cylinder_mass_mixed_radix():
    spec = OdometerSpec((2,), (3,))
    assert cylinder_mass(spec, 1) == Fraction(1, 2)
    assert cylinder_mass(spec, 3) == Fraction(1, 18)


def test_base_one_digits_are_frozen():
    spec = OdometerSpec((1,), (2,))
    p = odometer_zero(spec)
    for _ in range(10):
        p = odometer_successor(spec, p)
        assert p.digit(1) == 0


# -- prefix inducing --------------------------------------------------------


def test_prefix_induction_conjugacy():
    ind = induce_odometer_prefix(3, 2)
    assert ind.odometer.base(1) == 2
    assert ind.odometer.base(2) == 3
    sys = ind.system
    base = ind.base_set()
    from cutstack import induction

    ad = induction.RankOneAdapter(sys)
    p = sys.base_point()
    o = ind.to_odometer(p)
    for _ in range(200):
        p = induction.induced_apply(ad, base, p)
        o = odometer_successor(ind.odometer, o)
        assert sys.same_point(ind.from_odometer(o), p)


def test_prefix_induction_roundtrip_addressing():
    ind = induce_odometer_prefix(3, 2)
    sys = ind.system
    from cutstack.digits import zeros

    for level in range(2):
        p = sys.point_at(1, level, zeros())
        o = ind.to_odometer(p)
        assert o.digit(1) == level
        assert sys.same_point(ind.from_odometer(o), p)


def test_prefix_induction_measure_bookkeeping():
    ind = induce_odometer_prefix(3, 2)
    sys = ind.system
    # base set has p levels of width 1/1 each at stage 1; cylinder masses of
    # the odometer match the conditional measure on the base
    base_mass = sys.measure(ind.base_set())
    assert cylinder_mass(ind.odometer, 1) == Fraction(1, 2)
    assert base_mass == 2 * sys.width(1)
