"""Lazy column-digit streams for symbolic point addresses.

A stream supplies one digit per stage k >= start.  Three concrete kinds:
an explicit prefix with a periodic tail, a seeded deterministic generator,
and an overlay that patches finitely many digits on top of another stream.
Overlays always keep a single non-overlay base, so chains of point moves do
not accumulate indirection.
"""

import random

from .errors import ExhaustedDigits


class DigitStream:
    """Abstract digit supplier: digit(k) for stages k >= start."""

    start = 1

    def digit(self, k):
        raise NotImplementedError

    def with_overrides(self, overrides):
        """New stream equal to this one except at the given stages."""
        if not overrides:
            return self
        return OverlayDigits(self, dict(overrides))


class PeriodicDigits(DigitStream):
    """Explicit prefix followed by a repeating tail (tail may be all zeros)."""

    def __init__(self, prefix=(), tail=(0,), start=1):
        if not tail:
            raise ValueError("periodic tail must be non-empty")
        self.prefix = tuple(prefix)
        self.tail = tuple(tail)
        self.start = start

    def digit(self, k):
        i = k - self.start
        if i < 0:
            raise ExhaustedDigits(f"no digit below start stage {self.start}")
        if i < len(self.prefix):
            return self.prefix[i]
        return self.tail[(i - len(self.prefix)) % len(self.tail)]

    def __eq__(self, other):
        return (
            isinstance(other, PeriodicDigits)
            and self.start == other.start
            and self.prefix == other.prefix
            and self.tail == other.tail
        )

    def __hash__(self):
        return hash((self.start, self.prefix, self.tail))

    def __repr__(self):
        return f"PeriodicDigits({self.prefix}, {self.tail}, start={self.start})"


class SeededDigits(DigitStream):
    """Deterministic pseudo-random digits: digit(k) < radix(k), seeded.

    The same (seed, radix_fn) pair always produces the same stream, across
    processes, so replays are bit-identical.
    """

    def __init__(self, seed, radix_fn, start=1):
        self.seed = seed
        self.radix_fn = radix_fn
        self.start = start
        self._cache = {}

    def digit(self, k):
        if k < self.start:
            raise ExhaustedDigits(f"no digit below start stage {self.start}")
        d = self._cache.get(k)
        if d is None:
            r = self.radix_fn(k)
            d = random.Random(f"{self.seed}:{k}").randrange(r)
            self._cache[k] = d
        return d

    def __eq__(self, other):
        return (
            isinstance(other, SeededDigits)
            and self.seed == other.seed
            and self.start == other.start
        )

    def __hash__(self):
        return hash(("seeded", self.seed, self.start))

    def __repr__(self):
        return f"SeededDigits({self.seed!r}, start={self.start})"


class OverlayDigits(DigitStream):
    """A base stream with finitely many stage digits replaced."""

    def __init__(self, base, overrides):
        if isinstance(base, OverlayDigits):
            merged = dict(base.overrides)
            merged.update(overrides)
            base, overrides = base.base, merged
        self.base = base
        self.overrides = dict(overrides)
        self.start = min([base.start] + list(overrides))

    def digit(self, k):
        if k in self.overrides:
            return self.overrides[k]
        return self.base.digit(k)

    def with_overrides(self, overrides):
        if not overrides:
            return self
        merged = dict(self.overrides)
        merged.update(overrides)
        return OverlayDigits(self.base, merged)

    def max_override(self):
        return max(self.overrides)

    def __eq__(self, other):
        if not isinstance(other, OverlayDigits):
            return NotImplemented
        if self.base != other.base:
            return False
        keys = set(self.overrides) | set(other.overrides)
        return all(self.digit(k) == other.digit(k) for k in keys)

    def __hash__(self):
        return hash((self.base, tuple(sorted(self.overrides.items()))))

    def __repr__(self):
        return f"OverlayDigits({self.base!r}, {self.overrides})"


def zeros(start=1):
    """The all-zero digit stream."""
    return PeriodicDigits((), (0,), start=start)


def explicit_extent(stream):
    """Largest stage carrying a non-tail digit, or start-1 when fully periodic.

    Used when deciding a comparison stage for point equality.
    """
    if isinstance(stream, OverlayDigits):
        inner = explicit_extent(stream.base)
        return max(inner, stream.max_override())
    if isinstance(stream, PeriodicDigits):
        return stream.start - 1 + len(stream.prefix)
    return stream.start - 1


def streams_equal_beyond(s1, s2, stage, guard=64):
    """Decide whether two streams agree at every stage >= `stage`.

    Exact when both reduce to comparable bases; otherwise falls back to a
    bounded digit-by-digit comparison over `guard` stages (sufficient for
    every workbench flow, where tails are shared objects).
    """
    b1 = s1.base if isinstance(s1, OverlayDigits) else s1
    b2 = s2.base if isinstance(s2, OverlayDigits) else s2
    hi = max(explicit_extent(s1), explicit_extent(s2), stage)
    if b1 is b2 or b1 == b2:
        return all(s1.digit(k) == s2.digit(k) for k in range(stage, hi + 1))
    return all(s1.digit(k) == s2.digit(k) for k in range(stage, hi + guard + 1))
