import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cutstack.digits import PeriodicDigits, SeededDigits, zeros
from cutstack.errors import NeedMoreDepth
from cutstack.specs import builtin_spec, random_spec
from cutstack.towers import (
    SPACER,
    BaseOrbitWalker,
    LevelSet,
    RankOneSystem,
    build_towers,
)

NAMES = ["chacon", "dyadic_pair_left", "dyadic_pair_right", "triple_heavy",
         "odometer(2)", "odometer(2,3)"]


def systems():
    return [RankOneSystem(builtin_spec(n)) for n in NAMES]


def test_heights_match_explicit_stacking_oracle():
    for sys in systems():
        want = oracles.heights(sys.spec, 10)
        got = [sys.height(i) for i in range(1, 11)]
        assert got == want


def test_chacon_heights_known_values():
    sys = RankOneSystem(builtin_spec("chacon"))
    assert [sys.height(i) for i in range(1, 6)] == [1, 4, 13, 40, 121]


def test_widths_are_exact_and_masses_bounded():
    for sys in systems():
        want = oracles.widths(sys.spec, 10)
        got = [sys.width(i) for i in range(1, 11)]
        assert got == want
        for i in range(1, 11):
            mass = sys.height(i) * sys.width(i)
            assert 0 < mass <= 1
            assert sys.residual_mass(i) == 1 - mass


def test_provenance_matches_explicit_lists():
    for sys in systems():
        stages = oracles.stack_levels(sys.spec, 6)
        for i in range(2, 7):
            prev = stages[i - 2]
            cur = stages[i - 1]
            offs = sys.offsets(i - 1)
            for pos, step in enumerate(sys.provenance(i)):
                if step[0] == "spacer":
                    assert cur[pos] == ("level", i, pos)
                else:
                    _, col, lvl = step
                    assert cur[pos] == prev[lvl]
                    assert pos == offs[col] + lvl


def test_apply_walks_the_stage_in_order():
    # T moves straight up each stage stack, so iterating T from the bottom
    # level enumerates the level indices 0,1,2,... in order.
    for sys in systems():
        p = sys.point_at(4, 0, zeros())
        for want in range(1, sys.height(4)):
            p = sys.apply(p, 1)
            assert sys.level_index(p, 4) == want


def test_apply_inverse_roundtrip():
    rng = random.Random(7)
    for sys in systems():
        for t in range(40):
            p = sys.random_point(rng, 5, seed=f"rt:{t}")
            n = rng.randrange(-30, 31)
            q = sys.apply(sys.apply(p, n), -n)
            assert sys.same_point(p, q)


def test_apply_composition():
    rng = random.Random(8)
    sys = RankOneSystem(builtin_spec("chacon"))
    for t in range(40):
        p = sys.random_point(rng, 5, seed=f"comp:{t}")
        a = rng.randrange(-20, 21)
        b = rng.randrange(-20, 21)
        lhs = sys.apply(p, a + b)
        rhs = sys.apply(sys.apply(p, a), b)
        assert sys.same_point(lhs, rhs)


def test_apply_needs_depth_on_all_zero_tail_backward():
    sys = RankOneSystem(builtin_spec("chacon"))
    p = sys.base_point()  # all digits zero: no predecessor is resolvable
    with pytest.raises(NeedMoreDepth):
        sys.apply(p, -1, budget=16)


def test_level_set_membership_and_measure():
    sys = RankOneSystem(builtin_spec("chacon"))
    lset = LevelSet(3, {0, 5, 7})
    assert sys.measure(lset) == 3 * sys.width(3)
    rng = random.Random(9)
    for t in range(60):
        p = sys.random_point(rng, 6, seed=f"ls:{t}")
        if p.birth_stage > 3:
            # born as a later spacer: outside every stage-3 level set
            assert not sys.in_level_set(lset, p)
        else:
            assert sys.in_level_set(lset, p) == (
                sys.level_index(p, 3) in {0, 5, 7}
            )


def test_read_names_partition_counts():
    for sys in systems():
        for m in (1, 2, 3):
            names = sys.read_names(m + 1, m)
            rule = sys.spec.rule(m)
            for lvl in range(sys.height(m)):
                assert names.count(lvl) == rule.cuts
            assert names.count(SPACER) == rule.total_spacers


def test_recover_spacers_roundtrips_rules():
    for sys in systems():
        for i in range(1, 6):
            below, above = sys.recover_spacers(i)
            rule = sys.spec.rule(i)
            assert below == rule.spacers_below
            assert above == rule.spacers_above


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_random_specs_recover_spacers(seed):
    sys = RankOneSystem(random_spec(seed))
    for i in range(1, 5):
        below, above = sys.recover_spacers(i)
        rule = sys.spec.rule(i)
        assert (below, above) == (rule.spacers_below, rule.spacers_above)


def test_build_towers_matches_system():
    spec = builtin_spec("triple_heavy")
    sys = RankOneSystem(spec)
    stages = build_towers(spec, 5)
    assert [s.height for s in stages] == [sys.height(i) for i in range(1, 6)]
    assert [s.width for s in stages] == [sys.width(i) for i in range(1, 6)]


# -- walker ----------------------------------------------------------------


def test_walker_return_times_match_apply():
    # each induced step must agree with iterating T until the base returns
    for sys in systems():
        digits = SeededDigits("wk", sys.cuts)
        w = BaseOrbitWalker(sys, digits)
        p = w.point()
        base = LevelSet(1, {0})
        for _ in range(25):
            r = w.step()
            q = p
            for steps in range(1, r + 1):
                q = sys.apply(q, 1)
                hit = sys.in_level_set(base, q)
                assert hit == (steps == r)
            p = w.point()
            assert sys.same_point(p, q)


def test_walker_step_back_inverts_step():
    sys = RankOneSystem(builtin_spec("chacon"))
    w = BaseOrbitWalker(sys, SeededDigits("bk", sys.cuts))
    rs = [w.step() for _ in range(30)]
    back = [w.step_back() for _ in range(30)]
    assert back == rs[::-1]
    w2 = BaseOrbitWalker(sys, SeededDigits("bk", sys.cuts))
    assert sys.same_point(w.point(), w2.point())


def test_walker_advance_equals_sum_of_steps():
    for sys in systems():
        w1 = BaseOrbitWalker(sys, SeededDigits("adv", sys.cuts))
        w2 = BaseOrbitWalker(sys, SeededDigits("adv", sys.cuts))
        total = sum(w1.step() for _ in range(500))
        assert w2.advance(500) == total
        assert w1.state() == w2.state()
        assert w2.advance(-500) == -total


def test_walker_odometer_matches_naive_carry():
    sys = RankOneSystem(builtin_spec("odometer(2,3)"))
    w = BaseOrbitWalker(sys, PeriodicDigits((), (0,)))
    bases = [2, 3, 2, 3, 2, 3, 2, 3]
    digits = [0] * len(bases)
    for _ in range(50):
        w.step()
        digits = oracles.naive_odometer_successor(digits, bases)
        got = list(w.state())
        assert got == digits[: len(got)]


def test_walker_return_time_peek_does_not_move():
    sys = RankOneSystem(builtin_spec("triple_heavy"))
    w = BaseOrbitWalker(sys, SeededDigits("peek", sys.cuts))
    r = w.return_time()
    assert w.step() == r
