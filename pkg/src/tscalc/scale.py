"""Time scales, their jump operators, graininess and duality.

Four families are supported, all finitely truncated:

* :class:`ContinuousInterval` -- a real interval ``[lo, hi]``;
* :class:`UniformLattice` -- ``origin + step * i`` for ``0 <= i < count``;
* :class:`QScale` -- ``{q**k : k_min <= k <= k_max}``, optionally with the
  accumulation point 0 (and optionally reflected to ``-q**k``);
* :class:`FiniteSet` -- an arbitrary strictly increasing list of reals.

Point values are exact rationals (``gmpy2.mpq``).  Points of a
q-scale also carry their integer exponent, and the jump operators on a q-scale
only shift that exponent, so ``sigma``/``rho`` never accumulate round-off.

When ``include_zero`` is set the q-scale is the closure
``{q**k : k >= k_min} U {0}``; ``k_max`` then only bounds enumeration depth,
and ``rho(q**k_max) = q**(k_max + 1)`` is still a scale point.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property, total_ordering
from typing import Iterable, Sequence

from .errors import PointNotInScale, ScaleSpecError, UnsupportedOnContinuousScale
from .numeric import Rational, exact

__all__ = [
    "ScalePoint",
    "TsInterval",
    "PointClass",
    "TimeScale",
    "ContinuousInterval",
    "UniformLattice",
    "QScale",
    "FiniteSet",
    "sigma",
    "rho",
    "mu",
    "nu",
    "classify",
    "points_in",
    "dual",
    "parse_scale",
]


@total_ordering
@dataclass(frozen=True, eq=False)
class ScalePoint:
    """A point of a time scale.

    ``exp`` is set for points of a q-scale (``value == +-q**exp``) and is
    ``None`` otherwise, including for the point 0.  Equality, hashing and
    ordering use ``value`` only.
    """

    value: Rational
    exp: int | None = None

    def __eq__(self, other):
        if isinstance(other, ScalePoint):
            return self.value == other.value
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, ScalePoint):
            return self.value < other.value
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def __neg__(self):
        return ScalePoint(-self.value, self.exp)

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def __repr__(self):
        if self.exp is not None:
            return f"{'-' if self.value < 0 else ''}QExp({self.exp})"
        return f"ScalePoint({self.value})"

    def __str__(self):
        return _fmt(self.value)


def _fmt(v: Rational) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    f = float(v)
    return repr(f) if Rational(repr(f)) == v else f"{v.numerator}/{v.denominator}"


def _as_value(x) -> Rational:
    return x.value if isinstance(x, ScalePoint) else exact(x)


@dataclass(frozen=True)
class TsInterval:
    """An interval of a time scale; bounds need not be scale points."""

    lower: ScalePoint
    upper: ScalePoint
    lower_open: bool = False
    upper_open: bool = False

    def __post_init__(self):
        if not isinstance(self.lower, ScalePoint):
            object.__setattr__(self, "lower", ScalePoint(exact(self.lower)))
        if not isinstance(self.upper, ScalePoint):
            object.__setattr__(self, "upper", ScalePoint(exact(self.upper)))
        if self.lower.value > self.upper.value:
            raise ValueError(f"empty interval: lower {self.lower} > upper {self.upper}")

    @classmethod
    def closed(cls, lo, hi) -> TsInterval:
        return cls(lo, hi, False, False)

    @classmethod
    def open(cls, lo, hi) -> TsInterval:
        return cls(lo, hi, True, True)

    def __contains__(self, x) -> bool:
        v = x.value if type(x) is ScalePoint else _as_value(x)
        lo, hi = self.lower.value, self.upper.value
        if v < lo or (self.lower_open and v == lo):
            return False
        if v > hi or (self.upper_open and v == hi):
            return False
        return True

    def __str__(self):
        left = "]" if self.lower_open else "["
        right = "[" if self.upper_open else "]"
        return f"{left}{self.lower}, {self.upper}{right}"


@dataclass(frozen=True)
class PointClass:
    """Density flags of a point; both flags of a side are False at the
    corresponding end of the scale."""

    right_dense: bool
    right_scattered: bool
    left_dense: bool
    left_scattered: bool


class TimeScale:
    """Common interface of the supported scale families."""

    is_discrete = True

    # --- per-family primitives -------------------------------------------
    def point(self, x) -> ScalePoint:
        """Normalise ``x`` to this scale's representation or raise."""
        raise NotImplementedError

    def _sigma(self, t: ScalePoint) -> ScalePoint:
        raise NotImplementedError

    def _rho(self, t: ScalePoint) -> ScalePoint:
        raise NotImplementedError

    def all_points(self) -> list[ScalePoint]:
        raise NotImplementedError

    @property
    def min_point(self) -> ScalePoint:
        raise NotImplementedError

    @property
    def max_point(self) -> ScalePoint:
        raise NotImplementedError

    def dual(self) -> TimeScale:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    # --- shared behaviour -------------------------------------------------
    def __contains__(self, x) -> bool:
        try:
            self.point(x)
        except PointNotInScale:
            return False
        return True

    def sigma(self, t) -> ScalePoint:
        return self._sigma(self.point(t))

    def rho(self, t) -> ScalePoint:
        return self._rho(self.point(t))

    def mu(self, t) -> Rational:
        t = self.point(t)
        return self._sigma(t).value - t.value

    def nu(self, t) -> Rational:
        t = self.point(t)
        return t.value - self._rho(t).value

    def classify(self, t) -> PointClass:
        t = self.point(t)
        s, r = self._sigma(t), self._rho(t)
        is_max = t == self.max_point
        is_min = t == self.min_point
        return PointClass(
            right_dense=(not is_max) and s == t,
            right_scattered=s != t,
            left_dense=(not is_min) and r == t,
            left_scattered=r != t,
        )

    @cached_property
    def _sorted_points(self) -> tuple[ScalePoint, ...]:
        return tuple(self.all_points())

    @cached_property
    def _sorted_values(self) -> list[Rational]:
        return [p.value for p in self._sorted_points]

    def points_in(self, iv: TsInterval) -> list[ScalePoint]:
        vals = self._sorted_values
        lo_v, hi_v = iv.lower.value, iv.upper.value
        lo = bisect.bisect_left(vals, lo_v)
        if iv.lower_open and lo < len(vals) and vals[lo] == lo_v:
            lo += 1
        hi = bisect.bisect_right(vals, hi_v)
        if iv.upper_open and hi > 0 and vals[hi - 1] == hi_v:
            hi -= 1
        return list(self._sorted_points[lo:hi])

    def full_interval(self) -> TsInterval:
        return TsInterval.closed(self.min_point, self.max_point)

    def __str__(self):
        return self.spec()


@dataclass(frozen=True)
class ContinuousInterval(TimeScale):
    lo: Rational
    hi: Rational
    is_discrete = False

    def __post_init__(self):
        object.__setattr__(self, "lo", exact(self.lo))
        object.__setattr__(self, "hi", exact(self.hi))
        if not self.lo < self.hi:
            raise ValueError("ContinuousInterval needs lo < hi")

    def point(self, x) -> ScalePoint:
        v = _as_value(x)
        if not self.lo <= v <= self.hi:
            raise PointNotInScale(f"{_fmt(v)} not in [{_fmt(self.lo)}, {_fmt(self.hi)}]")
        return ScalePoint(v)

    def _sigma(self, t):
        return t

    def _rho(self, t):
        return t

    def all_points(self):
        raise UnsupportedOnContinuousScale("a continuous interval cannot be enumerated")

    def points_in(self, iv):
        raise UnsupportedOnContinuousScale("a continuous interval cannot be enumerated")

    @property
    def min_point(self):
        return ScalePoint(self.lo)

    @property
    def max_point(self):
        return ScalePoint(self.hi)

    def dual(self):
        return ContinuousInterval(-self.hi, -self.lo)

    def spec(self):
        return f"continuous {_fmt(self.lo)} {_fmt(self.hi)}"


@dataclass(frozen=True)
class UniformLattice(TimeScale):
    origin: Rational
    step: Rational
    count: int

    def __post_init__(self):
        object.__setattr__(self, "origin", exact(self.origin))
        object.__setattr__(self, "step", exact(self.step))
        if self.step <= 0:
            raise ValueError("lattice step must be positive")
        if self.count < 1:
            raise ValueError("lattice count must be >= 1")

    def _at(self, i: int) -> ScalePoint:
        return ScalePoint(self.origin + i * self.step)

    def _index(self, v: Rational) -> int:
        i = (v - self.origin) / self.step
        if i.denominator != 1 or not 0 <= i < self.count:
            raise PointNotInScale(f"{_fmt(v)} is not a point of {self.spec()}")
        return int(i)

    def point(self, x):
        v = _as_value(x)
        self._index(v)
        return ScalePoint(v)

    def _sigma(self, t):
        i = self._index(t.value)
        return self._at(i + 1) if i + 1 < self.count else t

    def _rho(self, t):
        i = self._index(t.value)
        return self._at(i - 1) if i > 0 else t

    def all_points(self):
        return [self._at(i) for i in range(self.count)]

    @property
    def min_point(self):
        return self._at(0)

    @property
    def max_point(self):
        return self._at(self.count - 1)

    def dual(self):
        return UniformLattice(-(self.origin + (self.count - 1) * self.step), self.step, self.count)

    def spec(self):
        return f"lattice origin={_fmt(self.origin)} step={_fmt(self.step)} count={self.count}"


@dataclass(frozen=True)
class FiniteSet(TimeScale):
    points: tuple

    def __post_init__(self):
        pts = tuple(exact(p) for p in self.points)
        if not pts:
            raise ValueError("FiniteSet needs at least one point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("FiniteSet points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def _index(self, v: Rational) -> int:
        i = bisect.bisect_left(self.points, v)
        if i == len(self.points) or self.points[i] != v:
            raise PointNotInScale(f"{_fmt(v)} is not a point of {self.spec()}")
        return i

    def point(self, x):
        v = _as_value(x)
        self._index(v)
        return ScalePoint(v)

    def _sigma(self, t):
        i = self._index(t.value)
        return ScalePoint(self.points[i + 1]) if i + 1 < len(self.points) else t

    def _rho(self, t):
        i = self._index(t.value)
        return ScalePoint(self.points[i - 1]) if i > 0 else t

    def all_points(self):
        return [ScalePoint(p) for p in self.points]

    @property
    def min_point(self):
        return ScalePoint(self.points[0])

    @property
    def max_point(self):
        return ScalePoint(self.points[-1])

    def dual(self):
        return FiniteSet(tuple(-p for p in reversed(self.points)))

    def spec(self):
        return "finite " + ",".join(_fmt(p) for p in self.points)


@dataclass(frozen=True)
class QScale(TimeScale):
    """``{s * q**k : k_min <= k <= k_max}`` with ``s = -1`` when reflected.

    ``reflected`` exists so that :func:`dual` stays inside the family.
    """

    q: Rational
    k_min: int
    k_max: int
    include_zero: bool = False
    reflected: bool = False
    _sign: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", exact(self.q))
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        object.__setattr__(self, "_sign", -1 if self.reflected else 1)

    @cached_property
    def _cache(self) -> dict[int, ScalePoint]:
        return {}

    def at(self, k: int) -> ScalePoint:
        p = self._cache.get(k)
        if p is None:
            p = self._cache[k] = ScalePoint(self._sign * self.q**k, k)
        return p

    def _k_ok(self, k: int) -> bool:
        return k >= self.k_min and (self.include_zero or k <= self.k_max)

    def exponent_of(self, v: Rational) -> int | None:
        """Exponent ``k`` with ``v == sign * q**k`` (any integer k), or None."""
        a = v * self._sign
        if a <= 0:
            return None
        # log of the numerator/denominator ints stays finite for huge exponents
        guess = (math.log(int(a.numerator)) - math.log(int(a.denominator))) / (
            math.log(int(self.q.numerator)) - math.log(int(self.q.denominator))
        )
        base = round(guess)
        for k in (base, base - 1, base + 1):
            if self.q**k == a:
                return k
        return None

    def point(self, x):
        if isinstance(x, ScalePoint) and x.exp is not None and x.value == self._sign * self.q**x.exp:
            if self._k_ok(x.exp):
                return x
            raise PointNotInScale(f"q^{x.exp} is outside {self.spec()}")
        v = _as_value(x)
        if v == 0:
            if self.include_zero:
                return ScalePoint(Rational(0))
            raise PointNotInScale(f"0 is not a point of {self.spec()}")
        k = self.exponent_of(v)
        if k is None or not self._k_ok(k):
            raise PointNotInScale(f"{_fmt(v)} is not a point of {self.spec()}")
        return self.at(k)

    # Exponent moves: on the plain scale larger k means a smaller point.
    def _up(self, k):
        return k - 1 if not self.reflected else k + 1

    def _sigma(self, t):
        if t.is_zero:
            return t
        k = self._up(t.exp)
        return self.at(k) if self._k_ok(k) else t

    def _rho(self, t):
        if t.is_zero:
            return t
        k = t.exp + 1 if not self.reflected else t.exp - 1
        return self.at(k) if self._k_ok(k) else t

    def all_points(self):
        pts = [self.at(k) for k in range(self.k_min, self.k_max + 1)]
        if self.include_zero:
            pts.append(ScalePoint(Rational(0)))
        return sorted(pts)

    @property
    def min_point(self):
        if self.reflected:
            return self.at(self.k_min)
        return ScalePoint(Rational(0)) if self.include_zero else self.at(self.k_max)

    @property
    def max_point(self):
        if not self.reflected:
            return self.at(self.k_min)
        return ScalePoint(Rational(0)) if self.include_zero else self.at(self.k_max)

    def dual(self):
        return QScale(self.q, self.k_min, self.k_max, self.include_zero, not self.reflected)

    def spec(self):
        s = f"qscale q={_fmt(self.q)} kmin={self.k_min} kmax={self.k_max}"
        if self.include_zero:
            s += " zero"
        if self.reflected:
            s += " reflected"
        return s


# --- functional API ---------------------------------------------------------

def sigma(ts: TimeScale, t) -> ScalePoint:
    """Forward jump: the next scale point after ``t`` (``t`` itself when
    right-dense or maximal)."""
    return ts.sigma(t)


def rho(ts: TimeScale, t) -> ScalePoint:
    """Backward jump, the mirror of :func:`sigma`."""
    return ts.rho(t)


def mu(ts: TimeScale, t) -> Rational:
    return ts.mu(t)


def nu(ts: TimeScale, t) -> Rational:
    return ts.nu(t)


def classify(ts: TimeScale, t) -> PointClass:
    return ts.classify(t)


def points_in(ts: TimeScale, iv: TsInterval) -> list[ScalePoint]:
    """Ascending list of the scale points lying in ``iv``."""
    return ts.points_in(iv)


def dual(ts: TimeScale) -> TimeScale:
    """The reflected scale ``{-t : t in ts}``."""
    return ts.dual()


def _kv(tokens: Iterable[str]) -> tuple[dict[str, str], list[str]]:
    kv, flags = {}, []
    for tok in tokens:
        if "=" in tok:
            k, v = tok.split("=", 1)
            kv[k.strip().lower()] = v.strip()
        else:
            flags.append(tok.lower())
    return kv, flags


def parse_scale(text: str) -> TimeScale:
    """Parse a one-line scale description.

    >>> parse_scale("qscale q=0.5 kmin=0 kmax=6 zero").include_zero
    True
    >>> parse_scale("finite 0,1,2,4").points[-1]
    mpq(4,1)
    """
    tokens = text.replace(";", " ").split()
    if not tokens:
        raise ScaleSpecError("empty scale description")
    family, rest = tokens[0].lower(), tokens[1:]
    try:
        if family == "qscale":
            kv, flags = _kv(rest)
            return QScale(
                exact(kv["q"]),
                int(kv["kmin"]),
                int(kv["kmax"]),
                include_zero="zero" in flags,
                reflected="reflected" in flags,
            )
        if family == "lattice":
            kv, _ = _kv(rest)
            return UniformLattice(exact(kv["origin"]), exact(kv["step"]), int(kv["count"]))
        if family == "finite":
            raw: Sequence[str] = ",".join(rest).split(",")
            return FiniteSet(tuple(exact(p) for p in raw if p.strip()))
        if family == "continuous":
            if len(rest) != 2:
                raise ScaleSpecError("continuous needs exactly two bounds")
            return ContinuousInterval(exact(rest[0]), exact(rest[1]))
    except ScaleSpecError:
        raise
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        raise ScaleSpecError(f"bad {family} description {text!r}: {exc}") from exc
    raise ScaleSpecError(f"unknown scale family {family!r}")
