"""Functions on time scales: delta/nabla derivatives, cumulative
antiderivatives, monotonicity, reflection and Cauchy mean-value witnesses.

Derivatives at scattered points are exact difference quotients computed in
the arithmetic of the function values (``Rational`` stays exact, ``mpf`` stays
at the current mpmath precision).  Dense points need an analytic derivative;
there is no finite-difference fallback.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Mapping, NamedTuple

from .errors import (
    CsvFormatError,
    DegenerateInterval,
    DensePointWithoutAnalyticDerivative,
    DomainExhausted,
    EmptyDerivativeDomain,
    PointNotInScale,
    SignConditionViolated,
    UnsupportedOnContinuousScale,
)
from .numeric import DEFAULT_TOL, Rational, difference, exact, quotient, sign, unify
from .scale import FiniteSet, QScale, ScalePoint, TimeScale, TsInterval, _fmt

Evaluator = Callable[[Rational], Any]

__all__ = [
    "GridFunction",
    "Monotonicity",
    "MonotonicityVerdict",
    "MvtWitnesses",
    "Step",
    "delta_derivative",
    "nabla_derivative",
    "iterate_derivative",
    "delta_integrate",
    "classify_monotonicity",
    "dual_function",
    "cauchy_mvt_witnesses",
    "load_csv",
    "ratio",
    "evaluation_points",
]


class _Missing(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function on an interval of a time scale.

    Exactly one source is given: ``table`` (scale value -> function value,
    covering every scale point of ``domain``) or ``evaluator`` (called with
    the exact point value).  ``derivative`` is the optional classical
    derivative used at dense points.
    """

    scale: TimeScale
    domain: TsInterval
    table: Mapping[Rational, Any] | None = None
    evaluator: Evaluator | None = None
    derivative: Evaluator | None = None

    def __post_init__(self):
        if (self.table is None) == (self.evaluator is None):
            raise ValueError("give exactly one of table / evaluator")
        if self.table is not None:
            if not self.scale.is_discrete:
                raise UnsupportedOnContinuousScale("tables need a discrete scale")
            table = self.table
            missing = [p for p in self.points() if p.value not in table]
            if missing:
                raise ValueError(f"table has no value at {missing[0]}")
            if len(table) != len(self.points()):
                # keep exactly the domain's points so lookups double as membership tests
                object.__setattr__(self, "table", {p.value: table[p.value] for p in self.points()})

    # --- construction ---------------------------------------------------
    @classmethod
    def _trusted(cls, scale: TimeScale, domain: TsInterval, table: dict) -> GridFunction:
        """Table built internally from the domain's own points; skips validation."""
        self = object.__new__(cls)
        for k, v in (("scale", scale), ("domain", domain), ("table", table), ("evaluator", None), ("derivative", None)):
            object.__setattr__(self, k, v)
        return self

    @classmethod
    def from_function(
        cls,
        scale: TimeScale,
        fn: Evaluator,
        domain: TsInterval | None = None,
        derivative: Evaluator | None = None,
    ) -> GridFunction:
        return cls(scale, domain or scale.full_interval(), evaluator=fn, derivative=derivative)

    @classmethod
    def from_values(cls, scale: TimeScale, values, domain: TsInterval | None = None) -> GridFunction:
        """Table source from a sequence aligned with the domain's points, or
        from a mapping keyed by point values."""
        domain = domain or scale.full_interval()
        if isinstance(values, Mapping):
            table = {exact(k.value if isinstance(k, ScalePoint) else k): v for k, v in values.items()}
        else:
            pts = scale.points_in(domain)
            values = list(values)
            if len(values) != len(pts):
                raise ValueError(f"{len(values)} values for {len(pts)} points")
            table = {p.value: v for p, v in zip(pts, values)}
        return cls(scale, domain, table=table)

    # --- evaluation -----------------------------------------------------
    def points(self) -> list[ScalePoint]:
        return self._points

    @cached_property
    def _points(self) -> list[ScalePoint]:
        return self.scale.points_in(self.domain)

    def _raw(self, v: Rational):
        if self.table is not None:
            try:
                return self.table[v]
            except KeyError:
                raise _Missing(v) from None
        return self.evaluator(v)

    def __call__(self, t):
        if self.table is not None:
            v = t.value if type(t) is ScalePoint else exact(t)
            try:
                return self.table[v]
            except KeyError:
                raise PointNotInScale(f"{_fmt(v)} is not a point of the domain {self.domain}") from None
        p = t if isinstance(t, ScalePoint) else ScalePoint(exact(t))
        if p not in self.domain:
            raise PointNotInScale(f"{p} is outside the domain {self.domain}")
        try:
            return self._raw(p.value)
        except _Missing:
            raise PointNotInScale(f"no tabulated value at {p}") from None

    def items(self) -> list[tuple[ScalePoint, Any]]:
        return [(p, self._raw(p.value)) for p in self.points()]

    def values(self) -> list:
        return [self._raw(p.value) for p in self.points()]

    @property
    def is_table(self) -> bool:
        return self.table is not None

    def restrict(self, iv: TsInterval) -> GridFunction:
        if self.table is not None:
            table = {p.value: self.table[p.value] for p in self.scale.points_in(iv) if p in self.domain}
            return GridFunction(self.scale, iv, table=table)
        return GridFunction(self.scale, iv, evaluator=self.evaluator, derivative=self.derivative)

    def tabulate(self) -> GridFunction:
        """Materialise onto the domain's points."""
        if self.table is not None:
            return self
        return GridFunction._trusted(self.scale, self.domain, {p.value: v for p, v in self.items()})

    def map(self, fn: Callable[[Any], Any]) -> GridFunction:
        return GridFunction._trusted(self.scale, self.domain, {p.value: fn(v) for p, v in self.items()})


def _combine(f: GridFunction, g: GridFunction, op) -> GridFunction:
    gpts = {p.value for p in g.points()}
    table = {p.value: op(*unify(v, g._raw(p.value))) for p, v in f.items() if p.value in gpts}
    if not table:
        return GridFunction(f.scale, f.domain, table={})
    pts = sorted(table)
    return GridFunction._trusted(f.scale, TsInterval.closed(pts[0], pts[-1]), table)


def ratio(f: GridFunction, g: GridFunction) -> GridFunction:
    """Pointwise ``f / g`` on the common points."""
    if f.table is None and g.table is None:
        fe, ge = f.evaluator, g.evaluator
        return GridFunction(f.scale, f.domain, evaluator=lambda t: quotient(fe(t), ge(t)))
    return _combine(f, g, lambda a, b: a / b)


def _quotients(f: GridFunction, forward: bool) -> GridFunction:
    ts = f.scale
    pts = f.points()
    if not pts:
        raise EmptyDerivativeDomain(f"no scale points in {f.domain}")
    last = len(pts) - 1
    out: dict[Rational, Any] = {}
    for i, t in enumerate(pts):
        if i == (last if forward else 0):
            continue
        nb = ts._sigma(t) if forward else ts._rho(t)
        if nb == t:
            if f.derivative is None:
                side = "right" if forward else "left"
                raise DensePointWithoutAnalyticDerivative(f"{t} is {side}-dense")
            out[t.value] = f.derivative(t.value)
            continue
        # a neighbour inside the domain is the adjacent enumerated point;
        # anything else lies outside or beyond a q-scale's enumeration depth
        if nb != pts[i + 1 if forward else i - 1]:
            continue
        try:
            near = f._raw(nb.value)
        except _Missing:
            continue
        here = f._raw(t.value)
        if forward:
            out[t.value] = quotient(difference(near, here), nb.value - t.value)
        else:
            out[t.value] = quotient(difference(here, near), t.value - nb.value)
    if not out:
        raise EmptyDerivativeDomain(f"derivative domain of {f.domain} is empty")
    keys = sorted(out)
    return GridFunction._trusted(ts, TsInterval.closed(keys[0], keys[-1]), {k: out[k] for k in keys})


def _cached_quotients(f: GridFunction, forward: bool) -> GridFunction:
    # functions are immutable, so the difference quotients can be memoised
    cache = f.__dict__.setdefault("_derivs", {})
    if forward not in cache:
        cache[forward] = _quotients(f, forward)
    return cache[forward]


def delta_derivative(f: GridFunction) -> GridFunction:
    """``f^Delta`` on ``[a, rho(b)]``; at right-scattered ``t`` it is
    ``(f(sigma(t)) - f(t)) / mu(t)``.

    >>> from tscalc.scale import FiniteSet
    >>> ts = FiniteSet((0, 1, 2, 4))
    >>> delta_derivative(GridFunction.from_function(ts, lambda t: t * t)).values()
    [mpq(1,1), mpq(3,1), mpq(6,1)]
    """
    if not f.scale.is_discrete:
        if f.derivative is None:
            raise DensePointWithoutAnalyticDerivative("continuous scale needs an analytic derivative")
        return GridFunction(f.scale, f.domain, evaluator=f.derivative)
    return _cached_quotients(f, True)


def nabla_derivative(f: GridFunction) -> GridFunction:
    """``f^nabla`` on ``[sigma(a), b]``; at left-scattered ``t`` it is
    ``(f(t) - f(rho(t))) / nu(t)``.  On a q-scale this is the q-derivative."""
    if not f.scale.is_discrete:
        if f.derivative is None:
            raise DensePointWithoutAnalyticDerivative("continuous scale needs an analytic derivative")
        return GridFunction(f.scale, f.domain, evaluator=f.derivative)
    return _cached_quotients(f, False)


def iterate_derivative(f: GridFunction, k: int, kind: str = "delta") -> GridFunction:
    if k < 0:
        raise ValueError("k must be >= 0")
    step = {"delta": delta_derivative, "nabla": nabla_derivative}[kind]
    for i in range(k):
        try:
            f = step(f)
        except EmptyDerivativeDomain as exc:
            raise DomainExhausted(f"domain exhausted after {i} {kind} derivatives") from exc
    return f


def delta_integrate(rate: GridFunction, a, f0) -> GridFunction:
    """Solve ``f(sigma(t)) = f(t) + mu(t) * rate(t)`` forward from ``f(a) = f0``.

    The result lives on ``[a, sigma(last rate point)]`` and its delta
    derivative reproduces ``rate`` exactly on exact inputs.
    """
    ts = rate.scale
    if not ts.is_discrete:
        raise UnsupportedOnContinuousScale("delta_integrate needs a discrete scale")
    cur = ts.point(a)
    if cur not in rate.domain:
        raise PointNotInScale(f"anchor {cur} outside the rate domain {rate.domain}")
    table = {cur.value: f0}
    val = f0
    while cur in rate.domain:
        nxt = ts._sigma(cur)
        if nxt == cur:
            break
        try:
            r = rate._raw(cur.value)
        except _Missing:
            break
        m, r, val = unify(nxt.value - cur.value, r, val)
        val = val + m * r
        table[nxt.value] = val
        cur = nxt
    return GridFunction(ts, TsInterval.closed(min(table), max(table)), table=table)


# --- monotonicity -----------------------------------------------------------

class Monotonicity(str, Enum):
    STRICTLY_INCREASING = "StrictlyIncreasing"
    STRICTLY_DECREASING = "StrictlyDecreasing"
    NON_DECREASING = "NonDecreasing"
    NON_INCREASING = "NonIncreasing"
    NEITHER = "Neither"
    VACUOUS = "Vacuous"

    def flipped(self) -> Monotonicity:
        return _FLIP.get(self, self)


_FLIP = {
    Monotonicity.STRICTLY_INCREASING: Monotonicity.STRICTLY_DECREASING,
    Monotonicity.STRICTLY_DECREASING: Monotonicity.STRICTLY_INCREASING,
    Monotonicity.NON_DECREASING: Monotonicity.NON_INCREASING,
    Monotonicity.NON_INCREASING: Monotonicity.NON_DECREASING,
}


class Step(NamedTuple):
    t0: ScalePoint
    t1: ScalePoint
    v0: Any
    v1: Any


@dataclass(frozen=True)
class MonotonicityVerdict:
    """Outcome of :func:`classify_monotonicity`.

    A flat sequence (every step within ``tol``) is reported as
    ``NonDecreasing``; use :attr:`nondecreasing` / :attr:`nonincreasing` when
    both readings matter.  ``witness`` holds the first falling and the first
    rising step when ``kind`` is ``Neither``.
    """

    kind: Monotonicity
    tol: float
    n_points: int
    min_step: Any = None
    max_step: Any = None
    witness: tuple[Step, Step] | None = None

    @property
    def nondecreasing(self) -> bool:
        return self.n_points < 2 or self.min_step >= -self.tol

    @property
    def nonincreasing(self) -> bool:
        return self.n_points < 2 or self.max_step <= self.tol

    @property
    def strictly_increasing(self) -> bool:
        return self.kind is Monotonicity.STRICTLY_INCREASING

    @property
    def strictly_decreasing(self) -> bool:
        return self.kind is Monotonicity.STRICTLY_DECREASING

    @property
    def is_monotone(self) -> bool:
        return self.kind not in (Monotonicity.NEITHER, Monotonicity.VACUOUS)


def evaluation_points(f: GridFunction, iv: TsInterval, samples: int = 1001) -> list[ScalePoint]:
    """Scale points of ``iv`` inside ``f``'s domain; on a continuous scale,
    ``samples`` equally spaced points of ``iv`` instead."""
    if f.scale.is_discrete:
        return [p for p in f.scale.points_in(iv) if p in f.domain]
    lo, hi = iv.lower.value, iv.upper.value
    pts = [ScalePoint(lo + (hi - lo) * Rational(i, samples - 1)) for i in range(samples)]
    return [p for p in pts if p in iv and p in f.domain]


def classify_monotonicity(
    f: GridFunction,
    iv: TsInterval | None = None,
    tol: float = DEFAULT_TOL,
    samples: int = 1001,
) -> MonotonicityVerdict:
    """Classify ``f`` over the scale points of ``iv`` (default: its domain).

    A step counts as rising when it exceeds ``tol`` and as flat when it is
    within ``tol``.  On a continuous scale ``samples`` equally spaced points
    are used instead.
    """
    iv = iv or f.domain
    pts = evaluation_points(f, iv, samples)
    if len(pts) < 2:
        return MonotonicityVerdict(Monotonicity.VACUOUS, tol, len(pts))
    vals = [f(p) for p in pts]
    steps = [difference(b, a) for a, b in zip(vals, vals[1:])]
    lo, hi = min(steps), max(steps)
    if lo > tol:
        kind = Monotonicity.STRICTLY_INCREASING
    elif hi < -tol:
        kind = Monotonicity.STRICTLY_DECREASING
    elif lo >= -tol:
        kind = Monotonicity.NON_DECREASING
    elif hi <= tol:
        kind = Monotonicity.NON_INCREASING
    else:
        fall = next(i for i, d in enumerate(steps) if d < -tol)
        rise = next(i for i, d in enumerate(steps) if d > tol)
        witness = tuple(Step(pts[i], pts[i + 1], vals[i], vals[i + 1]) for i in (fall, rise))
        return MonotonicityVerdict(Monotonicity.NEITHER, tol, len(pts), lo, hi, witness)
    return MonotonicityVerdict(kind, tol, len(pts), lo, hi)


# --- duality ----------------------------------------------------------------

def dual_function(f: GridFunction) -> GridFunction:
    """``f*(s) = f(-s)`` on the reflected scale; ``(f*)^nabla(s) = -f^Delta(-s)``."""
    ts = f.scale.dual()
    d = f.domain
    domain = TsInterval(-d.upper, -d.lower, d.upper_open, d.lower_open)
    if f.table is not None:
        return GridFunction._trusted(ts, domain, {-k: v for k, v in f.table.items()})
    ev, der = f.evaluator, f.derivative
    return GridFunction(
        ts,
        domain,
        evaluator=lambda s: ev(-s),
        derivative=None if der is None else (lambda s: -der(-s)),
    )


# --- Cauchy mean value witnesses -------------------------------------------

@dataclass(frozen=True)
class MvtWitnesses:
    c1: ScalePoint
    c2: ScalePoint
    lower_ratio: Any
    middle_ratio: Any
    upper_ratio: Any

    @property
    def holds(self) -> bool:
        lo, mid, hi = unify(self.lower_ratio, self.middle_ratio, self.upper_ratio)
        return lo <= mid <= hi


def cauchy_mvt_witnesses(F: GridFunction, G: GridFunction, a, x) -> MvtWitnesses:
    """Points ``c1, c2`` in ``[a, x[`` bracketing the secant ratio
    ``(F(x) - F(a)) / (G(x) - G(a))`` between derivative ratios.

    Found by scanning every point of ``[a, x[``: ``c1`` is the first argmin
    and ``c2`` the first argmax of ``F^Delta / G^Delta``.
    """
    ts = F.scale
    if not ts.is_discrete:
        raise UnsupportedOnContinuousScale("witness scan needs a discrete scale")
    a, x = ts.point(a), ts.point(x)
    if x <= a:
        raise DegenerateInterval(f"need a < x, got a={a}, x={x}")
    dF, dG = delta_derivative(F), delta_derivative(G)
    cands = [p for p in ts.points_in(TsInterval(a, x, False, True))]
    ratios = []
    signs = set()
    for c in cands:
        gd = dG(c)
        signs.add(sign(gd))
        ratios.append(quotient(dF(c), gd))
    if signs not in ({1}, {-1}):
        raise SignConditionViolated(f"G^Delta changes sign or vanishes on [{a}, {x}[")
    middle = quotient(difference(F(x), F(a)), difference(G(x), G(a)))
    i1 = min(range(len(ratios)), key=ratios.__getitem__)
    i2 = max(range(len(ratios)), key=ratios.__getitem__)
    return MvtWitnesses(cands[i1], cands[i2], ratios[i1], middle, ratios[i2])


# --- CSV ingestion ----------------------------------------------------------

def _csv_point(ts: TimeScale, text: str) -> ScalePoint:
    text = text.strip()
    if isinstance(ts, QScale) and text.lower().startswith(("q^", "-q^")):
        k = int(text.split("^", 1)[1])
        if text.startswith("-") != ts.reflected:
            raise CsvFormatError(f"{text} has the wrong sign for {ts.spec()}")
        return ts.point(ts.at(k))
    return ts.point(exact(text))


def load_csv(source, ts: TimeScale | None = None) -> tuple[GridFunction, GridFunction | None]:
    """Read ``t,f[,g]`` rows into table functions on ``ts``.

    ``source`` is a path or a file-like object.  Every ``t`` must be a scale
    point (exact match; q-scales also accept ``q^k``) and the rows must cover
    a contiguous run of scale points.  Without ``ts`` the finite scale of the
    listed ``t`` values is used.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise CsvFormatError("empty CSV")
    header = [c.strip().lower() for c in rows[0]]
    if header not in (["t", "f"], ["t", "f", "g"]):
        raise CsvFormatError(f"header must be t,f[,g], got {','.join(header)}")
    if ts is None:
        try:
            ts = FiniteSet(tuple(sorted({exact(r[0]) for r in rows[1:]})))
        except (ValueError, ZeroDivisionError, IndexError) as exc:
            raise CsvFormatError(f"bad t column: {exc}") from exc
    fvals, gvals = {}, {}
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise CsvFormatError(f"line {n}: expected {len(header)} columns")
        try:
            p = _csv_point(ts, row[0])
            fv = exact(row[1])
            gv = exact(row[2]) if len(header) == 3 else None
        except (PointNotInScale, ValueError, ZeroDivisionError) as exc:
            raise CsvFormatError(f"line {n}: {exc}") from exc
        if p.value in fvals:
            raise CsvFormatError(f"line {n}: duplicate point {p}")
        fvals[p.value] = fv
        if gv is not None:
            gvals[p.value] = gv
    keys = sorted(fvals)
    domain = TsInterval.closed(keys[0], keys[-1])
    expected = [p.value for p in ts.points_in(domain)]
    if expected != keys:
        raise CsvFormatError("rows do not cover a contiguous run of scale points")
    f = GridFunction(ts, domain, table=fvals)
    g = GridFunction(ts, domain, table=gvals) if gvals else None
    return f, g
