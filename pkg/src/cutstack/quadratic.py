"""Exact arithmetic in quadratic fields Q(sqrt(d)).

Backs the rotation systems: every comparison, floor, and fractional part of
a number u + v*sqrt(d) is decided by integer arithmetic, never floats.
"""

from fractions import Fraction
from math import isqrt


def _reduce_root(n):
    """Write n = s^2 * d with d squarefree-ish (no small square factors).

    Returns (s, d).  Trial division is plenty for the discriminants that
    periodic continued fractions produce.
    """
    if n <= 0:
        raise ValueError("radicand must be positive")
    s = 1
    d = n
    f = 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            s *= f
        f += 1
    return s, d


class Surd:
    """u + v*sqrt(d) with rational u, v and a fixed non-square d > 1.

    Rationals are represented with v == 0 (d then irrelevant); mixing two
    different irrational radicands is an error.
    """

    __slots__ = ("u", "v", "d")

    def __init__(self, u, v=0, d=None):
        self.u = Fraction(u)
        self.v = Fraction(v)
        if self.v != 0:
            if d is None:
                raise ValueError("irrational part needs a radicand")
            s, d0 = _reduce_root(d)
            if isqrt(d0) ** 2 == d0:
                self.u += self.v * s * isqrt(d0)
                self.v = Fraction(0)
                self.d = None
            else:
                self.v *= s
                self.d = d0
        else:
            self.d = None

    @classmethod
    def sqrt(cls, n):
        return cls(0, 1, n)

    def _unify(self, other):
        if not isinstance(other, Surd):
            other = Surd(other)
        if self.d is not None and other.d is not None and self.d != other.d:
            raise ValueError(f"incompatible radicands {self.d} and {other.d}")
        return other, self.d if self.d is not None else other.d

    # -- ring/field ops -----------------------------------------------------

    def __add__(self, other):
        other, d = self._unify(other)
        return Surd(self.u + other.u, self.v + other.v, d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.u, -self.v, self.d)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Surd) else Surd(-Fraction(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other, d = self._unify(other)
        if d is None:
            return Surd(self.u * other.u)
        return Surd(
            self.u * other.u + self.v * other.v * d,
            self.u * other.v + self.v * other.u,
            d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other, d = self._unify(other)
        if other.u == 0 and other.v == 0:
            raise ZeroDivisionError
        if d is None:
            return Surd(self.u / other.u)
        norm = other.u * other.u - other.v * other.v * d
        conj = Surd(other.u, -other.v, d)
        prod = self * conj
        return Surd(prod.u / norm, prod.v / norm, d)

    def __rtruediv__(self, other):
        return Surd(other) / self

    # -- order --------------------------------------------------------------

    def sign(self):
        u, v, d = self.u, self.v, self.d
        if v == 0:
            return (u > 0) - (u < 0)
        if u == 0:
            return 1 if v > 0 else -1
        if u > 0 and v > 0:
            return 1
        if u < 0 and v < 0:
            return -1
        # opposite signs: compare |u| with |v|sqrt(d)
        t = u * u - v * v * d
        s = (t > 0) - (t < 0)
        return s if u > 0 else -s

    def __eq__(self, other):
        try:
            diff = self - other
        except ValueError:
            return NotImplemented
        return diff.u == 0 and diff.v == 0

    def __hash__(self):
        if self.v == 0:
            return hash(self.u)
        return hash((self.u, self.v, self.d))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # -- floor / frac / approx ---------------------------------------------

    def approx(self, bits=128):
        """Rational approximation within 2^-bits (for cross-checks only)."""
        if self.v == 0:
            return self.u
        scale = 1 << (bits + 8)
        root = Fraction(isqrt(self.d * scale * scale), scale)
        return self.u + self.v * root

    def __float__(self):
        return float(self.approx(64))

    def floor(self):
        if self.v == 0:
            return self.u.numerator // self.u.denominator
        n = int(self.approx(64))  # candidate, then exact adjustment
        while self < n:
            n -= 1
        while self >= n + 1:
            n += 1
        return n

    def frac(self):
        return self - self.floor()

    def __repr__(self):
        if self.v == 0:
            return f"Surd({self.u})"
        return f"Surd({self.u} + {self.v}*sqrt({self.d}))"


# ---------------------------------------------------------------------------
# Continued fractions


def cf_convergents(terms):
    """Successive convergents p/q of a finite term list."""
    p0, q0 = 1, 0
    p1, q1 = terms[0], 1
    out = [(p1, q1)]
    for a in terms[1:]:
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append((p1, q1))
    return out


def surd_from_cf(prefix, period):
    """Exact value of the eventually periodic continued fraction
    [prefix; period, period, ...] (a quadratic irrational).

    The periodic tail t solves t = (P t + P') / (Q t + Q') for the
    convergent matrix of one period, a quadratic with positive root.
    """
    if not period:
        raise ValueError("periodic tail must be non-empty (irrational)")
    if any(a < 1 for a in list(prefix[1:]) + list(period)):
        raise ValueError("continued fraction terms after the first must be >= 1")
    P, Pp = 1, 0
    Q, Qp = 0, 1
    for a in period:
        P, Pp = a * P + Pp, P
        Q, Qp = a * Q + Qp, Q
    # Q t^2 + (Qp - P) t - Pp = 0
    disc = (Qp - P) ** 2 + 4 * Q * Pp
    t = Surd(Fraction(P - Qp, 2 * Q)) + Surd(0, Fraction(1, 2 * Q), disc)
    # fold the prefix: x = (p_k t + p_{k-1}) / (q_k t + q_{k-1})
    pa, pb = 0, 1
    qa, qb = 1, 0
    for a in prefix:
        pa, pb = pb, a * pb + pa
        qa, qb = qb, a * qb + qa
    num = t * pb + pa
    den = t * qb + qa
    return num / den


def cf_terms_of(x, count):
    """First `count` continued fraction terms of a Surd (exact)."""
    terms = []
    cur = x
    for _ in range(count):
        a = cur.floor()
        terms.append(a)
        frac = cur - a
        if frac.sign() == 0:
            break
        cur = Surd(1) / frac
    return terms
