import random
from fractions import Fraction

import pytest

from cutstack import matching
from cutstack.digits import SeededDigits
from cutstack.errors import InadmissiblePair, MarginViolation
from cutstack.specs import builtin_spec
from cutstack.towers import BaseOrbitWalker, LevelSet, RankOneSystem


def dyadic():
    return matching.dyadic_even_pair()


def test_validate_pair_accepts_even_dyadic():
    matching.validate_pair(dyadic(), even=True)


def test_validate_pair_rejects_unequal_masses_as_even():
    pair = matching.chacon_triple_noneven_pair()
    with pytest.raises(InadmissiblePair):
        matching.validate_pair(pair, even=True)
    # but the same pair is fine when evenness is not demanded
    matching.validate_pair(pair, even=False)


def test_base_measures_and_evenness():
    pair = dyadic()
    mx, my = pair.base_measures()
    assert mx == my == Fraction(1, 2)
    assert pair.is_even()
    assert not matching.chacon_triple_noneven_pair().is_even()


def test_height_above_base_descends_to_base_point():
    pair = dyadic()
    sys = pair.sys_x
    base = pair.base_x()
    rng = random.Random(1)
    for t in range(60):
        x = sys.random_point(rng, 6, seed=f"hab:{t}")
        h, base_pt = matching.height_above_base(sys, base, x)
        assert h >= 0
        assert sys.in_level_set(base, base_pt)
        assert sys.same_point(sys.apply(base_pt, h), x)
        if h > 0:
            # no earlier base hit strictly below x
            for j in range(1, h):
                assert not sys.in_level_set(
                    base, sys.apply(base_pt, j)
                )


def test_return_window_matches_walker():
    pair = dyadic()
    stream = SeededDigits("rw", pair.sys_x.cuts)
    win = matching.return_window(pair.sys_x, stream, 8)
    w = BaseOrbitWalker(pair.sys_x, stream)
    assert win[0] == w.return_time()
    fwd = [w.step() for _ in range(8)]
    assert [win[i] for i in range(8)] == fwd


def test_frame_conservation_and_injectivity():
    pair = dyadic()
    for s in range(6):
        stream = SeededDigits(f"frame:{s}", pair.sys_x.cuts)
        W = 48
        f = matching.build_frame(pair, stream, W)
        # injectivity: one slot per item, one item per slot
        assert len(f.inverse) == len(f.assignment)
        items = sum(f.ra[i] - 1 for i in range(-W, W + 1))
        slots = sum(f.rb[j] - 1 for j in range(-W, W + 1))
        assert len(f.assignment) + len(f.unplaced) == items
        assert len(f.assignment) + len(f.unfilled) == slots
        # every slot depth is within its pit capacity, shifts are >= 0
        for (i, h), (j, d) in f.assignment.items():
            assert 1 <= h <= f.ra[i] - 1
            assert 1 <= d <= f.rb[j] - 1
            assert j >= i


def test_placed_assignments_survive_window_doubling():
    pair = dyadic()
    for s in range(6):
        stream = SeededDigits(f"stab:{s}", pair.sys_x.cuts)
        frac, f1, f2 = matching.frame_stability(pair, stream, 48)
        assert frac == 1
        assert matching.edge_violations(pair, stream, 48) == []


def test_machine_agrees_with_strict_formula():
    pair = dyadic()
    for s in range(40):
        stream = SeededDigits(f"agree:{s}", pair.sys_x.cuts)
        w = BaseOrbitWalker(pair.sys_x, stream)
        for h in range(w.return_time()):
            mach = matching.even_match_machine(pair, stream, h, window=64)
            form = matching.even_match_formula(pair, stream, h, strict=True)
            assert (mach.n, mach.d) == (form.n, form.d)


def test_nonstrict_disagreements_only_on_boundary():
    pair = dyadic()
    seen = 0
    for s in range(300):
        stream = SeededDigits(f"bdy:{s}", pair.sys_x.cuts)
        w = BaseOrbitWalker(pair.sys_x, stream)
        for h in range(w.return_time()):
            strict = matching.even_match_formula(pair, stream, h, strict=True)
            loose = matching.even_match_formula(pair, stream, h, strict=False)
            if (strict.n, strict.d) != (loose.n, loose.d):
                seen += 1
                assert loose.boundary
    assert seen > 0  # the two conventions genuinely differ somewhere


def test_phi_hat_roundtrip_and_inverse_identities():
    pair = dyadic()
    rng = random.Random(5)
    for t in range(60):
        x = pair.sys_x.random_point(rng, 6, seed=f"phr:{t}")
        rec = matching.phi_hat_stable(pair, x)
        inv = matching.phi_hat_inverse_stable(pair, rec.y)
        assert pair.sys_x.same_point(inv.x, x)
        # depth/height bookkeeping matches in both directions
        assert inv.D == rec.d
        assert inv.H == rec.h


def test_phi_hat_modes_agree():
    pair = dyadic()
    rng = random.Random(6)
    for t in range(40):
        x = pair.sys_x.random_point(rng, 6, seed=f"modes:{t}")
        a = matching.phi_hat_stable(pair, x)
        b = matching.phi_hat(pair, x, mode="formula", strict=True,
                             horizon=2**14)
        assert (a.h, a.n, a.d) == (b.h, b.n, b.d)
        assert pair.sys_y.same_point(a.y, b.y)


def test_phi_hat_base_points_use_phi_directly():
    # base points (h = 0) map with shift 0 and depth 0: phi alone
    pair = dyadic()
    stream = SeededDigits("base", pair.sys_x.cuts)
    rec = matching.even_match_formula(pair, stream, 0, strict=True)
    assert (rec.h, rec.n, rec.d) == (0, 0, 0)


def test_stopping_time_finite_and_consistent():
    pair = dyadic()
    for s in range(30):
        stream = SeededDigits(f"stop:{s}", pair.sys_x.cuts)
        n = matching.stopping_time(pair, stream)
        assert 0 <= n < 2**16


def test_cocycle_rows_are_window_sorted():
    pair = dyadic()
    stream = SeededDigits("coc", pair.sys_x.cuts)
    rows = matching.cocycle_rows(pair, stream, 16)
    ts = [row[0] for row in rows]
    assert ts == sorted(ts)


def test_trace_rows_format():
    pair = dyadic()
    rng = random.Random(7)
    recs = []
    for t in range(5):
        x = pair.sys_x.random_point(rng, 6, seed=f"tr:{t}")
        recs.append(matching.phi_hat_stable(pair, x))
    rows = matching.trace_rows(pair, recs)
    assert rows[0] == matching.TRACE_HEADER
    for line in rows[1:]:
        parts = line.split(",")
        assert len(parts) == 7
        int(parts[1]), int(parts[2]), int(parts[3])


# -- non-even ---------------------------------------------------------------


def noneven_plan(eps=Fraction(1, 4), N=12):
    pair = matching.chacon_triple_noneven_pair()
    return pair, matching.noneven_prepare(pair, eps, N, samples=32, seed=0)


def test_noneven_eps_guard():
    pair = matching.chacon_triple_noneven_pair()
    # rate gap is 1/nu - 1/mu = 1, so eps must lie in (0, 1/2)
    with pytest.raises(InadmissiblePair):
        matching.noneven_prepare(pair, Fraction(2, 3), 12)
    with pytest.raises(InadmissiblePair):
        matching.noneven_prepare(pair, Fraction(0), 12)


def test_noneven_plan_block_and_margins():
    pair, plan = noneven_plan()
    assert plan.block == 3**plan.m
    assert plan.block > 2 * plan.N
    assert min(plan.margins) >= 0


def test_noneven_match_roundtrip_and_conjugacy():
    pair, plan = noneven_plan()
    rng = random.Random(9)
    from cutstack import induction

    ad_x = induction.RankOneAdapter(pair.sys_x)
    ad_y = induction.RankOneAdapter(pair.sys_y)
    a_set = plan.a_set
    b_set = plan.b_set
    for t in range(40):
        x = pair.sys_x.random_point(rng, plan.m + 2, seed=f"ne:{t}")
        y, h, base = matching.noneven_match(plan, x)
        assert matching.noneven_in_image(plan, y)
        back = matching.noneven_inverse(plan, y)
        assert pair.sys_x.same_point(back, x)
        # the matched pair sits at equal offsets over corresponding bases
        if pair.sys_x.in_level_set(a_set, x):
            # base points of the chosen cylinder map by phi directly
            assert h == 0


def test_noneven_conjugacy_with_image_successor():
    pair, plan = noneven_plan()
    # the embedding intertwines T on X with the first-return map of S to
    # the embedded image: match(T x) = image-successor(match(x))
    stream = SeededDigits("order", pair.sys_x.cuts)
    x = pair.sys_x.point_at(plan.m + 1, 0, stream)
    assert pair.sys_x.in_level_set(plan.a_set, x)
    y, _, _ = matching.noneven_match(plan, x)
    for _ in range(30):
        x = pair.sys_x.apply(x, 1)
        y_next = matching.noneven_image_successor(plan, y)
        y_direct, _, _ = matching.noneven_match(plan, x)
        assert pair.sys_y.same_point(y_next, y_direct)
        y = y_next
