"""Tower stages, symbolic points, and exact evaluation of the stack map.

Points are symbolic addresses (birth stage + column-digit stream), never
real coordinates.  All widths and measures are exact rationals, normalized
so the limiting total mass is 1 for periodic-tail specs.
"""

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .digits import (
    DigitStream,
    OverlayDigits,
    PeriodicDigits,
    SeededDigits,
    explicit_extent,
    streams_equal_beyond,
    zeros,
)
from .errors import ExhaustedDigits, NeedMoreDepth, SpecInvalid


@dataclass(frozen=True)
class RankOnePoint:
    """Symbolic address: born at (birth_stage, birth_level), then one column
    choice per stage from the digit stream (digits.digit(k) = column taken
    when the stage-k stack is cut)."""

    birth_stage: int
    birth_level: int
    digits: DigitStream


@dataclass(frozen=True)
class LevelSet:
    """A nearly clopen set realized exactly as a union of stage-k levels."""

    stage: int
    level_indices: frozenset

    def __post_init__(self):
        object.__setattr__(self, "level_indices", frozenset(self.level_indices))

    def __len__(self):
        return len(self.level_indices)


@dataclass
class TowerStage:
    index: int
    height: int
    width: Fraction
    level_provenance: list  # per level: ("spacer",) or ("copy", column, level)


SPACER = object()  # residual symbol for read_names


class RankOneSystem:
    """Exact evaluator for a cutting-and-stacking spec.

    Stage data (heights, column offsets, widths) is cached lazily; all
    queries are pure, so instances are safe to share across threads once
    warmed, and cheap to rebuild otherwise.
    """

    def __init__(self, spec):
        self.spec = spec
        self._heights = [None, spec.initial_height]  # 1-based
        self._offsets = [None]  # _offsets[i]: column start offsets, stage i -> i+1
        self._unit_width = None
        self._widths = [None]

    # -- stage data ---------------------------------------------------------

    def height(self, i):
        while len(self._heights) <= i:
            k = len(self._heights) - 1
            r = self.spec.rule(k)
            h = self._heights[k]
            self._heights.append(r.spacers_below + r.cuts * h + sum(r.spacers_above))
        return self._heights[i]

    def offsets(self, i):
        """Start offset of each column copy when stage i embeds in stage i+1."""
        while len(self._offsets) <= i:
            k = len(self._offsets)
            r = self.spec.rule(k)
            h = self.height(k)
            offs = []
            pos = r.spacers_below
            for a in range(r.cuts):
                offs.append(pos)
                pos += h + r.spacers_above[a]
            self._offsets.append(tuple(offs))
        return self._offsets[i]

    def cuts(self, i):
        return self.spec.rule(i).cuts

    def unit_width(self):
        """w1, normalized so the limiting total mass is 1."""
        if self._unit_width is None:
            if not self.spec.is_infinite:
                raise SpecInvalid("finite spec has no normalized width")
            self._unit_width = 1 / self.spec.total_mass()
        return self._unit_width

    def width(self, i):
        if len(self._widths) == 1:
            self._widths.append(self.unit_width())
        while len(self._widths) <= i:
            k = len(self._widths) - 1
            self._widths.append(self._widths[k] / self.cuts(k))
        return self._widths[i]

    def residual_mass(self, i):
        """Mass not yet inside the stage-i stack (the spacer reservoir)."""
        return 1 - self.height(i) * self.width(i)

    def stage(self, i):
        return TowerStage(i, self.height(i), self.width(i), self.provenance(i))

    def decompose(self, k, idx):
        """One provenance step for stage-k level idx (k >= 2).

        Returns ("copy", column, inner_level) or ("spacer",).
        """
        offs = self.offsets(k - 1)
        h = self.height(k - 1)
        a = bisect_right(offs, idx) - 1
        if a >= 0 and idx < offs[a] + h:
            return ("copy", a, idx - offs[a])
        return ("spacer",)

    def provenance(self, i):
        if i == 1:
            return [("spacer",)] * self.height(1)  # primordial levels
        return [self.decompose(i, idx) for idx in range(self.height(i))]

    # -- points -------------------------------------------------------------

    def base_point(self, digits=None, level=0):
        if digits is None:
            digits = zeros()
        return RankOnePoint(1, level, digits)

    def random_point(self, rng, stage, seed=None):
        """Uniform over the stage-`stage` stack (all levels equal width),
        with seeded deterministic digits beyond."""
        level = rng.randrange(self.height(stage))
        if seed is None:
            seed = rng.getrandbits(64)
        tail = SeededDigits(seed, self.cuts, start=stage)
        return self.point_at(stage, level, tail)

    def point_at(self, k, idx, stream):
        """The point whose stage-k level is idx, using `stream` for digits
        at stages >= k.  Descends provenance to the birth stage."""
        overrides = {}
        while k > 1:
            step = self.decompose(k, idx)
            if step[0] == "spacer":
                break
            overrides[k - 1] = step[1]
            idx = step[2]
            k -= 1
        return RankOnePoint(k, idx, stream.with_overrides(overrides))

    def level_index(self, point, k):
        """Index of the point in the stage-k stack, 0..h_k - 1."""
        if k < point.birth_stage:
            raise ValueError("point not yet born at this stage")
        idx = point.birth_level
        for j in range(point.birth_stage, k):
            a = point.digits.digit(j)
            if not 0 <= a < self.cuts(j):
                raise ExhaustedDigits(
                    f"digit {a} out of range at stage {j} (cuts={self.cuts(j)})"
                )
            idx = self.offsets(j)[a] + idx
        return idx

    def apply(self, point, steps, budget=64):
        """T^steps, resolved at the smallest stage where the move stays
        inside the stack.  Exact inverse: apply(apply(p, n), -n) == p."""
        if steps == 0:
            return point
        k = point.birth_stage
        idx = point.birth_level
        while k <= budget:
            t = idx + steps
            if 0 <= t < self.height(k):
                return self.point_at(k, t, point.digits)
            a = point.digits.digit(k)
            if not 0 <= a < self.cuts(k):
                raise ExhaustedDigits(
                    f"digit {a} out of range at stage {k} (cuts={self.cuts(k)})"
                )
            idx = self.offsets(k)[a] + idx
            k += 1
        raise NeedMoreDepth(
            f"T^{steps} unresolved within stage budget {budget}", budget=budget
        )

    def in_level_set(self, lset, point):
        """Exact membership; points born after lset.stage live in the
        residual and belong to no stage-level set."""
        if point.birth_stage > lset.stage:
            return False
        return self.level_index(point, lset.stage) in lset.level_indices

    def same_point(self, p, q, guard=64):
        """Point equality across representations.

        Compares stack position at the deepest explicitly-addressed stage
        and digit streams beyond; exact whenever the streams share a tail
        (always true for engine-produced images of a common point).
        """
        k = max(
            p.birth_stage,
            q.birth_stage,
            explicit_extent(p.digits) + 1,
            explicit_extent(q.digits) + 1,
        )
        if self.level_index(p, k) != self.level_index(q, k):
            return False
        return streams_equal_beyond(p.digits, q.digits, k, guard=guard)

    # -- names and spacer recovery -----------------------------------------

    def read_names(self, i, m):
        """Bottom-to-top partition names of the stage-i stack relative to the
        stage-m levels; levels born after stage m read as the residual."""
        if not 1 <= m <= i:
            raise ValueError("need 1 <= m <= i")
        names = []
        for idx in range(self.height(i)):
            k, cur = i, idx
            while k > m:
                step = self.decompose(k, cur)
                if step[0] == "spacer":
                    break
                cur = step[2]
                k -= 1
            names.append(cur if k == m else SPACER)
        return names

    def recover_spacers(self, i):
        """Read the stage-i spacer counts back off the stage-(i+1) names.

        Counts residual symbols before the first complete stage-i name and
        after each complete name; round-trips the spec rules exactly.
        """
        names = self.read_names(i + 1, i)
        h = self.height(i)
        below = 0
        above = []
        pos = 0
        n = len(names)
        while pos < n and names[pos] is SPACER:
            below += 1
            pos += 1
        while pos < n:
            for expect in range(h):
                if pos >= n or names[pos] != expect:
                    raise SpecInvalid(
                        f"malformed name sequence at level {pos} of stage {i + 1}"
                    )
                pos += 1
            count = 0
            while pos < n and names[pos] is SPACER:
                count += 1
                pos += 1
            above.append(count)
        return below, tuple(above)

    # -- measure ------------------------------------------------------------

    def measure(self, lset):
        return len(lset.level_indices) * self.width(lset.stage)

    def stage_report(self, depth):
        """Per-stage structured report (external interface)."""
        rows = []
        for i in range(1, depth + 1):
            h = self.height(i)
            w = self.width(i)
            spacers = sum(
                1 for p in self.provenance(i) if p[0] == "spacer"
            ) if i > 1 else 0
            rows.append(
                {
                    "i": i,
                    "h_i": h,
                    "w_i": f"{w.numerator}/{w.denominator}",
                    "level_count": h,
                    "spacer_count": spacers,
                    "residual_mass": str(self.residual_mass(i)),
                }
            )
        return rows


def build_towers(spec, depth):
    """Stages 1..depth with exact heights, widths, and provenance."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    sys = RankOneSystem(spec)
    return [sys.stage(i) for i in range(1, depth + 1)]


# ---------------------------------------------------------------------------
# Fast induced-orbit walker over the base level


class BaseOrbitWalker:
    """Walks the induced map on the stage-1 base level (level 0) as an
    odometer on the column digits, producing exact return times.

    The Birkhoff sum of the return time telescopes to a stack-position
    difference, so each step costs O(carry length), amortized O(1).
    """

    def __init__(self, system, digits_stream=None):
        self.sys = system
        if digits_stream is None:
            digits_stream = zeros()
        self.tail = digits_stream
        self.d = []  # materialized digits, d[j] = digit at stage j+1

    def _digit(self, j):
        while len(self.d) <= j:
            self.d.append(self.tail.digit(len(self.d) + 1))
        return self.d[j]

    def state(self):
        return tuple(self.d)

    def set_state(self, digits):
        self.d = list(digits)

    def point(self):
        prefix = tuple(self.d)
        return RankOnePoint(
            1, 0, OverlayDigits(self.tail, {j + 1: v for j, v in enumerate(prefix)})
            if prefix
            else self.tail,
        )

    def position(self, upto):
        """Stack position (level index) at stage upto+1, folding the first
        `upto` digits."""
        idx = 0
        for j in range(upto):
            idx = self.sys.offsets(j + 1)[self._digit(j)] + idx
        return idx

    def step(self, budget=256):
        """Advance one induced step; returns the return time r >= 1."""
        sys = self.sys
        j = 0
        while self._digit(j) == sys.cuts(j + 1) - 1:
            j += 1
            if j > budget:
                raise NeedMoreDepth("all digits maximal within budget", budget=budget)
        old = self.position(j + 1)
        for u in range(j):
            self.d[u] = 0
        self.d[j] += 1
        new = self.position(j + 1)
        return new - old

    def step_back(self, budget=256):
        """Retreat one induced step; returns the return time of the
        predecessor (the pile height climbed over)."""
        sys = self.sys
        j = 0
        while self._digit(j) == 0:
            j += 1
            if j > budget:
                raise NeedMoreDepth("all digits zero within budget", budget=budget)
        old = self.position(j + 1)
        for u in range(j):
            self.d[u] = sys.cuts(u + 1) - 1
        self.d[j] -= 1
        new = self.position(j + 1)
        return old - new

    def advance(self, n, budget=256):
        """Jump n induced steps (n may be negative); returns the signed total
        T-step count (sum of return times along the way), exact.

        Mixed-radix addition with a signed carry, then a stack-position
        difference at the first stage both endpoints share.
        """
        if n == 0:
            return 0
        before = []
        carry = n
        j = 0
        while carry:
            if j > budget:
                raise NeedMoreDepth("carry ran past stage budget", budget=budget)
            b = self.sys.cuts(j + 1)
            before.append(self._digit(j))
            tot = self.d[j] + carry
            self.d[j] = tot % b
            carry = (tot - self.d[j]) // b
            j += 1
        old_idx = 0
        new_idx = 0
        for u in range(j):
            old_idx = self.sys.offsets(u + 1)[before[u]] + old_idx
            new_idx = self.sys.offsets(u + 1)[self._digit(u)] + new_idx
        return new_idx - old_idx

    def return_time(self):
        """Return time at the current state, without moving."""
        saved = list(self.d)
        r = self.step()
        self.d = saved
        return r
