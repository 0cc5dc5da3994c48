"""Return-time matchings between two rank-one systems over isomorphic bases.

Given systems X and Y with distinguished base levels A and B and a digit
isomorphism phi of the induced maps, the even matcher assigns each point of
an X column (a pile over a base point) to a slot in a Y column (a pit), by
sliding piles over pits and dropping items into free slots.  The machine
simulation on a finite window is authoritative; a closed-form sum formula
is provided alongside for comparison, and the two disagree exactly on the
boundary cells where a pile height ties a pit capacity.

The non-even matcher handles bases of different mass by first inducing on a
deep common cylinder so that every pile fits strictly inside its pit.
"""

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .digits import DigitStream, OverlayDigits, SeededDigits, explicit_extent
from .errors import (
    HorizonExhausted,
    InadmissiblePair,
    MarginViolation,
    NeedMoreDepth,
    WindowEdge,
    WindowExhausted,
)
from .induction import lift
from .specs import builtin_spec
from .towers import BaseOrbitWalker, LevelSet, RankOnePoint, RankOneSystem


# ---------------------------------------------------------------------------
# Base isomorphisms (digit maps)


class IdentityPhi:
    """The identity on column digits; intertwines the induced maps whenever
    the two systems cut every stage into the same number of columns."""

    name = "identity"

    def forward(self, stream):
        return stream

    def backward(self, stream):
        return stream


class _PermutedDigits(DigitStream):
    def __init__(self, src, perm_fn, invert):
        self.src = src
        self.perm_fn = perm_fn
        self.invert = invert
        self.start = src.start

    def digit(self, k):
        perm = self.perm_fn(k)
        d = self.src.digit(k)
        return perm.index(d) if self.invert else perm[d]

    def __eq__(self, other):
        return (
            isinstance(other, _PermutedDigits)
            and self.invert == other.invert
            and self.perm_fn is other.perm_fn
            and self.src == other.src
        )

    def __hash__(self):
        return hash(("perm", self.invert, id(self.perm_fn), self.src))


class DigitPermutationPhi:
    """Per-stage relabeling of columns: digit k maps through perm_fn(k).

    Only order-preserving relabelings intertwine the induced odometers;
    validate_pair detects the rest.
    """

    name = "digit_permutation"

    def __init__(self, perm_fn):
        self.perm_fn = perm_fn

    def forward(self, stream):
        return _PermutedDigits(stream, self.perm_fn, invert=False)

    def backward(self, stream):
        return _PermutedDigits(stream, self.perm_fn, invert=True)


# ---------------------------------------------------------------------------
# System pairs


@dataclass
class PairSpec:
    """Two rank-one systems matched over their bottom base levels.

    The base sets are the stage-1 level 0 of each system; phi carries X
    column digits to Y column digits and must intertwine the induced maps
    (which act on digits as mixed-radix odometers).
    """

    name: str
    sys_x: RankOneSystem
    sys_y: RankOneSystem
    phi: object

    def base_x(self):
        return LevelSet(1, frozenset({0}))

    def base_y(self):
        return LevelSet(1, frozenset({0}))

    def base_measures(self):
        return self.sys_x.unit_width(), self.sys_y.unit_width()

    def is_even(self):
        mx, my = self.base_measures()
        return mx == my


def validate_pair(pair, depth=24, samples=16, seed=0, even=None):
    """Admissibility: matching digit radixes, phi intertwines the induced
    odometers, and (when `even` is set) equal base masses."""
    for k in range(1, depth + 1):
        if pair.sys_x.cuts(k) != pair.sys_y.cuts(k):
            raise InadmissiblePair(
                f"cut counts differ at stage {k}: "
                f"{pair.sys_x.cuts(k)} vs {pair.sys_y.cuts(k)}"
            )
    for s in range(samples):
        stream = SeededDigits(f"paircheck:{seed}:{s}", pair.sys_x.cuts)
        wx = BaseOrbitWalker(pair.sys_x, stream)
        wx.step()
        stepped_then_phi = pair.phi.forward(wx.point().digits)
        wy = BaseOrbitWalker(pair.sys_y, pair.phi.forward(stream))
        wy.step()
        phi_then_stepped = wy.point().digits
        if any(
            stepped_then_phi.digit(k) != phi_then_stepped.digit(k)
            for k in range(1, depth + 1)
        ):
            raise InadmissiblePair(
                "phi does not intertwine the induced maps "
                f"(sample {s} diverges within {depth} digits)"
            )
    if even is True and not pair.is_even():
        mx, my = pair.base_measures()
        raise InadmissiblePair(f"base masses differ: {mx} vs {my}")
    return True


def dyadic_even_pair():
    """Equal-mass pair: spacer above the left column vs above the right."""
    return PairSpec(
        "dyadic_even",
        RankOneSystem(builtin_spec("dyadic_pair_left")),
        RankOneSystem(builtin_spec("dyadic_pair_right")),
        IdentityPhi(),
    )


def identity_pair(spec_name):
    """A system matched with itself; every matching must be trivial."""
    sys = RankOneSystem(builtin_spec(spec_name))
    return PairSpec(f"identity_{spec_name}", sys, sys, IdentityPhi())


def chacon_triple_noneven_pair():
    """Unequal base masses (2/3 vs 2/5) over the common triadic odometer."""
    return PairSpec(
        "chacon_triple_noneven",
        RankOneSystem(builtin_spec("chacon")),
        RankOneSystem(builtin_spec("triple_heavy")),
        IdentityPhi(),
    )


# ---------------------------------------------------------------------------
# Heights above a base set


def _lift_cache(system, lset, stage):
    cache = getattr(system, "_matching_lift_cache", None)
    if cache is None:
        cache = {}
        system._matching_lift_cache = cache
    key = (lset.stage, lset.level_indices, stage)
    arr = cache.get(key)
    if arr is None:
        arr = sorted(lift(system, lset, stage).level_indices)
        cache[key] = arr
    return arr


def height_above_base(system, base, point, extra_depth=8):
    """(h, base_point) with point = T^h(base_point), base_point the nearest
    base element at or below the point in its column."""
    k0 = max(base.stage, point.birth_stage, explicit_extent(point.digits) + 1)
    for K in range(k0, k0 + extra_depth + 1):
        arr = _lift_cache(system, base, K)
        idx = system.level_index(point, K)
        pos = bisect_right(arr, idx) - 1
        if pos >= 0:
            base_pt = system.point_at(K, arr[pos], point.digits)
            return idx - arr[pos], base_pt
    raise NeedMoreDepth(
        f"no base element below the point within {extra_depth} extra stages",
        budget=extra_depth,
    )


# ---------------------------------------------------------------------------
# Pile/pit frames (the machine)


def return_window(system, digits, window, budget=256):
    """Return times r(i) of the induced base map at orbit indices
    -window..window around the given base digit state."""
    r = {}
    w = BaseOrbitWalker(system, digits)
    for i in range(window):
        r[i] = w.step(budget)
    r[window] = w.return_time()
    w = BaseOrbitWalker(system, digits)
    for i in range(1, window + 1):
        r[-i] = w.step_back(budget)
    return r


@dataclass
class PilePitFrame:
    """One machine run: pile i holds items (i, h), 1 <= h < ra[i]; pit j
    offers slots (j, d), 1 <= d < rb[j]; at shift n pile i drops its lowest
    remaining items into the lowest free slots of pit i + n."""

    window: int
    ra: dict
    rb: dict
    assignment: dict  # (i, h) -> (j, d)
    inverse: dict  # (j, d) -> (i, h)
    unplaced: list  # items blocked by the window edge
    unfilled: list  # slots the window's piles never reached
    shifts: int


def build_frame(pair, digits, window, max_shift=None, budget=256):
    ra = return_window(pair.sys_x, digits, window, budget)
    rb = return_window(pair.sys_y, pair.phi.forward(digits), window, budget)
    W = window
    nxt = {i: 1 for i in range(-W, W + 1)}
    top = {i: ra[i] - 1 for i in range(-W, W + 1)}
    fill = {j: 0 for j in range(-W, W + 1)}
    cap = {j: rb[j] - 1 for j in range(-W, W + 1)}
    assignment = {}
    limit = max_shift if max_shift is not None else 2 * W + 2
    shifts = 0
    for n in range(limit + 1):
        shifts = n
        for i in range(-W, W + 1):
            if nxt[i] > top[i]:
                continue
            j = i + n
            if j > W:
                continue
            while nxt[i] <= top[i] and fill[j] < cap[j]:
                fill[j] += 1
                assignment[(i, nxt[i])] = (j, fill[j])
                nxt[i] += 1
        if not any(
            nxt[i] <= top[i] and i + n + 1 <= W for i in range(-W, W + 1)
        ):
            break
    inverse = {v: k for k, v in assignment.items()}
    unplaced = [
        (i, h) for i in range(-W, W + 1) for h in range(nxt[i], top[i] + 1)
    ]
    unfilled = [
        (j, d) for j in range(-W, W + 1) for d in range(fill[j] + 1, cap[j] + 1)
    ]
    return PilePitFrame(W, ra, rb, assignment, inverse, unplaced, unfilled, shifts)


def frame_stability(pair, digits, window, interior=None, budget=256):
    """Fraction of placed interior assignments that survive window doubling.

    An item unplaced at the smaller window has no assignment yet (its pit
    lies past the edge), so it does not enter the fraction; pits at index
    <= W only receive deposits from piles <= W, which is why placed
    assignments are expected to be invariant under enlargement except very
    close to the left edge.  Returns (fraction, frame, doubled_frame);
    interior defaults to half the window.
    """
    f1 = build_frame(pair, digits, window, budget=budget)
    f2 = build_frame(pair, digits, 2 * window, budget=budget)
    lim = interior if interior is not None else window // 2
    placed = 0
    stable = 0
    for i in range(-lim, lim + 1):
        for h in range(1, f1.ra[i]):
            a1 = f1.assignment.get((i, h))
            if a1 is None:
                continue
            placed += 1
            if a1 == f2.assignment.get((i, h)):
                stable += 1
    frac = Fraction(stable, placed) if placed else Fraction(1)
    return frac, f1, f2


def edge_violations(pair, digits, window, interior=None, budget=256):
    """Interior items unplaced at `window` whose doubled-window pit is not
    past the edge region (window minus the largest visible return time).

    An empty list certifies that every instability is an edge effect: the
    item was merely waiting for a pit beyond the window.
    """
    f1 = build_frame(pair, digits, window, budget=budget)
    f2 = build_frame(pair, digits, 2 * window, budget=budget)
    lim = interior if interior is not None else window // 2
    max_r = max(max(f1.ra.values()), max(f1.rb.values()))
    bad = []
    for i in range(-lim, lim + 1):
        for h in range(1, f1.ra[i]):
            if f1.assignment.get((i, h)) is not None:
                continue
            a2 = f2.assignment.get((i, h))
            if a2 is not None and a2[0] <= window - max_r:
                bad.append(((i, h), a2))
    return bad


# ---------------------------------------------------------------------------
# Closed-form matching (formula mode) and the per-point machine


@dataclass
class MatchRecord:
    x: object  # the matched X point
    h: int  # height above its base point
    n: int  # pit shift
    d: int  # slot depth in the target pit
    y: object  # the matched Y point
    mode: str
    boundary: bool = False  # chosen shift tied pile top to pit capacity
    stable: object = None  # machine mode: survived window doubling


@dataclass
class InverseMatchRecord:
    y: object
    D: int  # slot depth above the Y base point
    m: int  # backward shift to the source pile
    H: int  # item height in that pile
    x: object
    mode: str
    boundary: bool = False
    stable: object = None


def even_match_formula(pair, digits, h, strict=False, horizon=4096, budget=256):
    """Shift and slot by partial sums of return times.

    n is the least shift with h + (a_1 + ... + a_n) <= b_0 + ... + b_n
    (strict mode subtracts one from the right side, matching the machine's
    slot capacities), and d = h + (a_1 + ... + a_n) - (b_0 + ... + b_{n-1});
    a and b are the X and Y return times along the matched base orbits.
    """
    wx = BaseOrbitWalker(pair.sys_x, digits)
    wy = BaseOrbitWalker(pair.sys_y, pair.phi.forward(digits))
    slack = 1 if strict else 0
    theta = 0
    psi_prev = 0
    n = 0
    primed = False
    while True:
        b_n = wy.return_time()
        psi = psi_prev + b_n
        if h + theta <= psi - slack:
            d = h + theta - psi_prev
            boundary = h + theta == psi
            break
        n += 1
        if n > horizon:
            raise WindowExhausted(
                f"no pit found within {horizon} shifts", window=horizon
            )
        if not primed:
            wx.step(budget)  # skip a_0; theta sums start at a_1
            primed = True
        theta += wx.step(budget)
        psi_prev = psi
        wy.step(budget)
    y_base = wy.point()
    y = pair.sys_y.apply(y_base, d) if d else y_base
    x_base = RankOnePoint(1, 0, digits)
    x = pair.sys_x.apply(x_base, h) if h else x_base
    return MatchRecord(x, h, n, d, y, "formula_strict" if strict else "formula",
                       boundary=boundary)


def even_match_machine(pair, digits, h, window=32, check_stability=True,
                       budget=256):
    """The same assignment read off a machine frame centered at the base
    point; raises WindowEdge if the item is unplaced or unstable."""
    x_base = RankOnePoint(1, 0, digits)
    if h == 0:
        y = RankOnePoint(1, 0, pair.phi.forward(digits))
        return MatchRecord(x_base, 0, 0, 0, y, "machine", stable=True)
    frame = build_frame(pair, digits, window, budget=budget)
    slot = frame.assignment.get((0, h))
    if slot is None:
        raise WindowEdge(
            f"item (0, {h}) not placed within window {window}", window=window
        )
    stable = None
    if check_stability:
        wide = build_frame(pair, digits, 2 * window, budget=budget)
        stable = wide.assignment.get((0, h)) == slot
        if not stable:
            raise WindowEdge(
                f"assignment of (0, {h}) changed under window doubling",
                window=window,
                detail=(slot, wide.assignment.get((0, h))),
            )
    j, d = slot
    wy = BaseOrbitWalker(pair.sys_y, pair.phi.forward(digits))
    wy.advance(j, budget)
    y = pair.sys_y.apply(wy.point(), d)
    x = pair.sys_x.apply(x_base, h)
    return MatchRecord(x, h, j, d, y, "machine", stable=stable)


def even_match_inverse_formula(pair, digits, D, strict=False, horizon=4096,
                               budget=256):
    """Invert by mirrored sums: m is the least backward shift with
    D + (b_{-1} + ... + b_{-m}) <= a_0 + ... + a_{-m} (minus one when
    strict), and H = D + (b_{-1} + ... + b_{-m}) - (a_0 + ... + a_{-(m-1)}).

    `digits` addresses the X base point paired with the pit's base point.
    """
    wx = BaseOrbitWalker(pair.sys_x, digits)
    wy = BaseOrbitWalker(pair.sys_y, pair.phi.forward(digits))
    slack = 1 if strict else 0
    gamma = 0
    psi_prev = 0
    m = 0
    a_cur = wx.return_time()
    while True:
        psi = psi_prev + a_cur
        if D + gamma <= psi - slack:
            H = D + gamma - psi_prev
            boundary = D + gamma == psi
            break
        m += 1
        if m > horizon:
            raise WindowExhausted(
                f"no source pile found within {horizon} shifts", window=horizon
            )
        psi_prev = psi
        a_cur = wx.step_back(budget)
        gamma += wy.step_back(budget)
    x_base = wx.point()
    x = pair.sys_x.apply(x_base, H) if H else x_base
    y_base = RankOnePoint(1, 0, pair.phi.forward(digits))
    y = pair.sys_y.apply(y_base, D) if D else y_base
    return InverseMatchRecord(
        y, D, m, H, x, "formula_strict" if strict else "formula",
        boundary=boundary,
    )


def even_match_inverse_machine(pair, digits, D, window=32,
                               check_stability=True, budget=256):
    """Inverse assignment read off the machine frame (table inversion)."""
    y_base = RankOnePoint(1, 0, pair.phi.forward(digits))
    if D == 0:
        x = RankOnePoint(1, 0, digits)
        return InverseMatchRecord(y_base, 0, 0, 0, x, "machine", stable=True)
    frame = build_frame(pair, digits, window, budget=budget)
    item = frame.inverse.get((0, D))
    if item is None:
        raise WindowEdge(
            f"slot (0, {D}) not filled within window {window}", window=window
        )
    stable = None
    if check_stability:
        wide = build_frame(pair, digits, 2 * window, budget=budget)
        stable = wide.inverse.get((0, D)) == item
        if not stable:
            raise WindowEdge(
                f"source of slot (0, {D}) changed under window doubling",
                window=window,
                detail=(item, wide.inverse.get((0, D))),
            )
    i, H = item
    wx = BaseOrbitWalker(pair.sys_x, digits)
    wx.advance(i, budget)
    x = pair.sys_x.apply(wx.point(), H)
    y = pair.sys_y.apply(y_base, D)
    return InverseMatchRecord(y, D, -i, H, x, "machine", stable=stable)


def phi_hat(pair, x, mode="machine", window=32, strict=True, budget=256,
            horizon=2**15):
    """The full point matching X -> Y: locate the pile item for x, then
    match it.  Base points (h = 0) map straight through phi."""
    h, base = height_above_base(pair.sys_x, pair.base_x(), x)
    digits = base.digits
    if mode == "machine":
        return even_match_machine(pair, digits, h, window, budget=budget)
    return even_match_formula(pair, digits, h, strict=strict, budget=budget,
                              horizon=horizon)


def phi_hat_stable(pair, x, windows=(16, 64, 256), budget=256,
                   formula_fallback=True, horizon=2**16):
    """Machine matching with window escalation: retry unstable or unplaced
    items at growing windows until one sticks.

    The matching shift has a heavy tail, so a small fraction of points
    outruns any affordable window; with `formula_fallback` those fall back
    to the strict closed form, which reproduces the machine's assignment
    wherever the machine resolves (mode "formula_strict", stable None).
    """
    last = None
    for W in windows:
        try:
            return phi_hat(pair, x, mode="machine", window=W, budget=budget)
        except WindowEdge as e:
            last = e
    if formula_fallback:
        return phi_hat(pair, x, mode="formula", strict=True, budget=budget,
                       horizon=horizon)
    raise WindowEdge(
        f"no stable assignment up to window {windows[-1]}",
        window=windows[-1],
        detail=str(last),
    )


def phi_hat_inverse_stable(pair, y, windows=(16, 64, 256), budget=256,
                           formula_fallback=True, horizon=2**16):
    last = None
    for W in windows:
        try:
            return phi_hat_inverse(pair, y, mode="machine", window=W,
                                   budget=budget)
        except WindowEdge as e:
            last = e
    if formula_fallback:
        return phi_hat_inverse(pair, y, mode="formula", strict=True,
                               budget=budget, horizon=horizon)
    raise WindowEdge(
        f"no stable source up to window {windows[-1]}",
        window=windows[-1],
        detail=str(last),
    )


def phi_hat_inverse(pair, y, mode="machine", window=32, strict=True,
                    budget=256, horizon=2**15):
    D, y_base = height_above_base(pair.sys_y, pair.base_y(), y)
    digits = pair.phi.backward(y_base.digits)
    if mode == "machine":
        return even_match_inverse_machine(pair, digits, D, window,
                                          budget=budget)
    return even_match_inverse_formula(pair, digits, D, strict=strict,
                                      budget=budget, horizon=horizon)


# ---------------------------------------------------------------------------
# Stopping times and orbit cocycles


def stopping_time(pair, digits, horizon=2**16, strict=True, budget=256):
    """Shift at which the whole pile over this base point is swallowed:
    the matching shift of the topmost item h = r_A - 1."""
    wx = BaseOrbitWalker(pair.sys_x, digits)
    h = wx.return_time() - 1
    if h == 0:
        return 0
    wy = BaseOrbitWalker(pair.sys_y, pair.phi.forward(digits))
    slack = 1 if strict else 0
    theta = 0
    psi = 0
    best = None
    wx.step(budget)  # sums start at a_1
    for n in range(horizon + 1):
        psi += wy.return_time()
        margin = psi - slack - (h + theta)
        if margin >= 0:
            return n
        best = margin if best is None or margin > best else best
        theta += wx.step(budget)
        wy.step(budget)
    raise HorizonExhausted(
        f"pile not swallowed within {horizon} shifts",
        horizon=horizon,
        running_min=best,
    )


def cocycle_rows(pair, digits, window, budget=256):
    """Orbit-position pairs (t_x, t_y) for every matched item around the
    base point: t_x indexes the X orbit of the base point, t_y the Y orbit
    of its phi image.  Sorted by t_x; base points appear with slot 0."""
    frame = build_frame(pair, digits, window, budget=budget)
    W = frame.window
    pos_x = {0: 0}
    pos_y = {0: 0}
    for i in range(W):
        pos_x[i + 1] = pos_x[i] + frame.ra[i]
        pos_y[i + 1] = pos_y[i] + frame.rb[i]
    for i in range(0, -W, -1):
        pos_x[i - 1] = pos_x[i] - frame.ra[i - 1]
        pos_y[i - 1] = pos_y[i] - frame.rb[i - 1]
    rows = []
    for i in range(-W, W + 1):
        rows.append((pos_x[i], pos_y[i], i, 0, i, 0))
        for h in range(1, frame.ra[i]):
            slot = frame.assignment.get((i, h))
            if slot is None:
                continue
            j, d = slot
            rows.append((pos_x[i] + h, pos_y[j] + d, i, h, j, d))
    rows.sort()
    return rows


# ---------------------------------------------------------------------------
# Identifiers and trace export


def point_id(system, point):
    """Deterministic short identifier: resolved stage and level index."""
    k = max(point.birth_stage, explicit_extent(point.digits) + 1)
    return f"s{k}l{system.level_index(point, k)}"


TRACE_HEADER = "x_id,h,n,d,y_id,mode,stable_window"


def trace_rows(pair, records):
    lines = [TRACE_HEADER]
    for r in records:
        stable = "" if r.stable is None else str(bool(r.stable)).lower()
        lines.append(
            f"{point_id(pair.sys_x, r.x)},{r.h},{r.n},{r.d},"
            f"{point_id(pair.sys_y, r.y)},{r.mode},{stable}"
        )
    return lines


# ---------------------------------------------------------------------------
# Non-even matching


@dataclass
class NonEvenPlan:
    """Parameters of a pile-in-pit embedding for bases of unequal mass.

    Both systems are induced on the all-zero cylinder of `m` digits (the
    bottom level of stage m + 1), whose induced return time is exactly
    `block` base steps; the plan is usable once every sampled pile height
    stays at or below its pit depth."""

    pair: object
    eps: Fraction
    N: int
    m: int
    block: int
    a_set: LevelSet
    b_set: LevelSet
    margins: list


def _block_size(pair, m):
    prod = 1
    for k in range(1, m + 1):
        prod *= pair.sys_x.cuts(k)
    return prod


def _deep_zero_digits(pair, m, seed):
    tail = SeededDigits(seed, pair.sys_x.cuts)
    return OverlayDigits(tail, {k: 0 for k in range(1, m + 1)})


def pile_height(plan, digits, budget=256):
    """Base steps in X across one induced block from this cylinder point."""
    w = BaseOrbitWalker(plan.pair.sys_x, digits)
    return w.advance(plan.block, budget)


def pit_depth(plan, digits, budget=256):
    """Base steps in Y across the same induced block, under phi."""
    w = BaseOrbitWalker(plan.pair.sys_y, plan.pair.phi.forward(digits))
    return w.advance(plan.block, budget)


def noneven_prepare(pair, eps, N, samples=64, seed=0, max_m_boost=4,
                    budget=256):
    """Choose the inducing depth m and certify pile <= pit on samples.

    eps must be an admissible rate gap: below half the difference of the
    expected return times 1/mass(B) - 1/mass(A)."""
    mx, my = pair.base_measures()
    gap = Fraction(1) / my - Fraction(1) / mx
    if gap <= 0:
        raise InadmissiblePair(
            "the Y base must be smaller than the X base (deeper pits)"
        )
    if not 0 < eps < gap / 2:
        raise InadmissiblePair(
            f"eps must lie in (0, {gap / 2}); got {eps}"
        )
    m0 = 1
    while _block_size(pair, m0) <= 2 * N:
        m0 += 1
    last_margins = None
    for m in range(m0, m0 + max_m_boost + 1):
        block = _block_size(pair, m)
        plan = NonEvenPlan(
            pair,
            Fraction(eps),
            N,
            m,
            block,
            LevelSet(m + 1, frozenset({0})),
            LevelSet(m + 1, frozenset({0})),
            [],
        )
        margins = []
        for s in range(samples):
            digits = _deep_zero_digits(pair, m, f"margin:{seed}:{m}:{s}")
            margins.append(pit_depth(plan, digits, budget)
                           - pile_height(plan, digits, budget))
        last_margins = margins
        if all(mg >= 0 for mg in margins):
            plan.margins = margins
            return plan
    raise MarginViolation(
        f"piles still exceed pits at inducing depth {m}; "
        f"worst margin {min(last_margins)}"
    )


def noneven_match(plan, x, check_margin=True, budget=256):
    """Embed x into the Y skyscraper: descend to the cylinder point below,
    hop to its phi image, climb the same number of steps."""
    pair = plan.pair
    h, base = height_above_base(pair.sys_x, plan.a_set, x)
    digits = base.digits
    if check_margin:
        pile = pile_height(plan, digits, budget)
        pit = pit_depth(plan, digits, budget)
        if pile > pit:
            raise MarginViolation(
                f"pile {pile} exceeds pit {pit} at this cylinder point"
            )
    y_base = RankOnePoint(1, 0, pair.phi.forward(digits))
    y = pair.sys_y.apply(y_base, h) if h else y_base
    return y, h, base


def noneven_in_image(plan, y, budget=256):
    """Membership in the embedded copy of X: the depth of y above its
    cylinder point must fall short of the corresponding pile height."""
    pair = plan.pair
    D, y_base = height_above_base(pair.sys_y, plan.b_set, y)
    digits = pair.phi.backward(y_base.digits)
    return D < pile_height(plan, digits, budget)


def noneven_inverse(plan, y, budget=256):
    pair = plan.pair
    D, y_base = height_above_base(pair.sys_y, plan.b_set, y)
    digits = pair.phi.backward(y_base.digits)
    if D >= pile_height(plan, digits, budget):
        raise ValueError("point lies outside the embedded image")
    x_base = RankOnePoint(1, 0, digits)
    return pair.sys_x.apply(x_base, D) if D else x_base


def noneven_image_successor(plan, y, step_budget=4096, budget=256):
    """First return of the Y map to the embedded image, starting after y."""
    pair = plan.pair
    cur = y
    for _ in range(step_budget):
        cur = pair.sys_y.apply(cur, 1, budget)
        if noneven_in_image(plan, cur, budget):
            return cur
    raise HorizonExhausted(
        f"no image point within {step_budget} steps", horizon=step_budget
    )
