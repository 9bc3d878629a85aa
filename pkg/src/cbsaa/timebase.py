"""Exact time values and intervals with per-endpoint open/closed flags.

Times are ``fractions.Fraction`` or plain ``int`` (both exact); the single
non-finite value is :data:`INF` (``math.inf``), which compares above every
rational and absorbs addition.  Nothing in this module divides, so integer
tick times stay integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

INF = math.inf

Time = Union[int, Fraction, float]  # float only ever as INF


def as_time(value) -> Time:
    """Coerce ``value`` to an exact time.

    Accepts ints, Fractions, decimal or ``p/q`` strings, ``"inf"`` and
    finite floats (converted through their shortest repr, so ``2.3`` becomes
    ``23/10`` rather than the binary approximation).
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a time")
    if isinstance(value, int):
        t = value
    elif isinstance(value, Fraction):
        t = value
    elif isinstance(value, Rational):
        t = Fraction(value.numerator, value.denominator)
    elif isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        if math.isnan(value) or math.isinf(value):
            raise ValueError(f"invalid time {value!r}")
        t = Fraction(repr(value))
    elif isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return INF
        t = Fraction(s)
    else:
        raise TypeError(f"cannot interpret {value!r} as a time")
    if t < 0:
        raise ValueError(f"negative time {value!r}")
    return normalize(t)


def normalize(t: Time) -> Time:
    """Collapse integral Fractions to int; leaves INF alone."""
    if isinstance(t, Fraction) and t.denominator == 1:
        return t.numerator
    return t


def is_finite(t: Time) -> bool:
    return t != INF


def fmt_exact(t: Time) -> str:
    """Render as ``p/q`` (or ``p`` when integral, ``inf`` when infinite)."""
    if t == INF:
        return "inf"
    return str(Fraction(t))


def fmt_decimal(t: Time) -> str:
    """Display-only rendering with six fractional digits."""
    if t == INF:
        return "inf"
    f = Fraction(t)
    scaled = round(f * 10**6)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    return f"{sign}{scaled // 10**6}.{scaled % 10**6:06d}"


@dataclass(frozen=True, slots=True)
class Interval:
    """A non-empty interval of time.

    ``hi`` may be :data:`INF`, in which case the upper end is open.  A single
    instant is ``Interval(t, t, True, True)``.
    """

    lo: Time
    hi: Time
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        if self.lo == INF:
            raise ValueError("interval cannot start at infinity")
        if self.hi == INF and self.hi_closed:
            raise ValueError("interval cannot be closed at infinity")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo {self.lo} > hi {self.hi}")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError(f"empty interval at {self.lo}")

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, True)

    @classmethod
    def open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, False)

    @classmethod
    def closed_open(cls, lo, hi) -> "Interval":
        return cls(lo, hi, True, False)

    @classmethod
    def open_closed(cls, lo, hi) -> "Interval":
        return cls(lo, hi, False, True)

    @classmethod
    def point(cls, t) -> "Interval":
        return cls(t, t, True, True)

    @staticmethod
    def make(lo, hi, lo_closed=True, hi_closed=False) -> "Interval | None":
        """Like the constructor but returns None for an empty set."""
        if hi == INF:
            hi_closed = False
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return None
        return Interval(lo, hi, lo_closed, hi_closed)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, t: Time) -> bool:
        if t < self.lo or (t == self.lo and not self.lo_closed):
            return False
        if t > self.hi or (t == self.hi and not self.hi_closed):
            return False
        return True

    __contains__ = contains

    def covers(self, other: "Interval") -> bool:
        """True when ``other`` is a subset of this interval."""
        if other.lo < self.lo or (other.lo == self.lo and other.lo_closed and not self.lo_closed):
            return False
        if other.hi > self.hi or (other.hi == self.hi and other.hi_closed and not self.hi_closed):
            return False
        return True

    def intersect(self, other: "Interval") -> "Interval | None":
        if self.lo > other.lo:
            lo, lo_c = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_c = other.lo, other.lo_closed
        else:
            lo, lo_c = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_c = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_c = other.hi, other.hi_closed
        else:
            hi, hi_c = self.hi, self.hi_closed and other.hi_closed
        return Interval.make(lo, hi, lo_c, hi_c)

    def shift(self, delta: Time) -> "Interval":
        return Interval(self.lo + delta, self.hi + delta, self.lo_closed, self.hi_closed)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{fmt_exact(self.lo)}, {fmt_exact(self.hi)}{right}"


def overlap(a: Interval, b: Interval) -> bool:
    """True iff the two intervals share at least one instant."""
    if a.hi < b.lo or b.hi < a.lo:
        return False
    if a.hi == b.lo and not (a.hi_closed and b.lo_closed):
        return False
    if b.hi == a.lo and not (b.hi_closed and a.lo_closed):
        return False
    return True


def subtract(base: Interval, cut: Interval) -> list[Interval]:
    """``base`` minus ``cut`` as 0, 1 or 2 maximal intervals, in time order."""
    if not overlap(base, cut):
        return [base]
    out = []
    left = Interval.make(base.lo, cut.lo, base.lo_closed, not cut.lo_closed)
    if left is not None:
        left = left.intersect(base)
    if left is not None:
        out.append(left)
    if cut.hi != INF:
        right = Interval.make(cut.hi, base.hi, not cut.hi_closed, base.hi_closed)
        if right is not None:
            right = right.intersect(base)
        if right is not None:
            out.append(right)
    return out


def subtract_all(pieces: list[Interval], cut: Interval) -> list[Interval]:
    out: list[Interval] = []
    for p in pieces:
        out.extend(subtract(p, cut))
    return out


def infimum_of_intersection(a: Interval, b: Interval) -> Time:
    """Greatest lower bound of ``a`` intersected with ``b``."""
    if not overlap(a, b):
        raise ValueError(f"intervals {a} and {b} do not overlap")
    return max(a.lo, b.lo)


def intersection_key(a: Interval, b: Interval) -> tuple:
    """Sort key for the start of ``a & b``: closed starts sort before open ones."""
    both = a.intersect(b)
    if both is None:
        raise ValueError(f"intervals {a} and {b} do not overlap")
    return (both.lo, not both.lo_closed)


def merge(intervals: list[Interval]) -> list[Interval]:
    """Union of intervals as sorted, disjoint, maximal pieces.

    Pieces that merely touch are joined when at least one side includes the
    touching instant.
    """
    items = sorted(intervals, key=lambda iv: (iv.lo, not iv.lo_closed))
    out: list[Interval] = []
    for iv in items:
        if out:
            last = out[-1]
            touching = last.hi > iv.lo or (
                last.hi == iv.lo and (last.hi_closed or iv.lo_closed)
            )
            if touching:
                if iv.hi > last.hi or (iv.hi == last.hi and iv.hi_closed):
                    out[-1] = Interval(last.lo, iv.hi, last.lo_closed, iv.hi_closed)
                continue
        out.append(iv)
    return out
