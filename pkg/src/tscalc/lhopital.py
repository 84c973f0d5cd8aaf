"""Monotone l'Hôpital rules on time scales, checked numerically.

Given ``f, g`` on ``[a, b]`` the anchored ratio

    H(x) = (f(x) - f_end) / (g(x) - g_end)

inherits the monotonicity of ``f^Delta / g^Delta`` (resp. the nabla ratio)
whenever ``g^Delta`` keeps one sign.  This module builds ``H``, checks the
premises, classifies ``H`` on the conclusion interval and reports whether the
conclusion matched.  It also generates premise-satisfying random pairs and
runs the randomized property suite.

Scattered endpoints
-------------------
On ``]a, rho(b)[`` the premises say nothing about the derivative ratio at the
anchor-side boundary points (``a`` and ``rho(b)`` for delta, ``sigma(a)`` and
``b`` for nabla), yet ``H`` near the interval ends averages those values in.
:class:`PremiseReport` therefore also records ``closure_verdict``, the ratio
classified on the full derivative domain.  Generated pairs are monotone
there; user pairs that are monotone only on the open interval can fail the
conclusion, and the report makes that visible.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Union

import numpy as np

from .errors import EmptyDerivativeDomain, LimitUnavailable, ScaleTooSmall, SignConditionViolated, TimeScaleError, ZeroDenominator
from .gridfn import (
    GridFunction,
    Monotonicity,
    MonotonicityVerdict,
    cauchy_mvt_witnesses,
    classify_monotonicity,
    delta_derivative,
    delta_integrate,
    dual_function,
    evaluation_points,
    nabla_derivative,
    ratio,
)
from .numeric import Rational, difference, quotient, sign
from .scale import (
    ContinuousInterval,
    FiniteSet,
    QScale,
    ScalePoint,
    TimeScale,
    TsInterval,
    UniformLattice,
    parse_scale,
)

__all__ = [
    "Supplied",
    "LimitFromSamples",
    "GSign",
    "PremiseReport",
    "RuleReport",
    "Profile",
    "PROFILES",
    "SuiteConfig",
    "SuiteReport",
    "resolve_endpoint",
    "endpoint_ratio",
    "check_delta_premises",
    "check_nabla_premises",
    "verify_delta_rule",
    "verify_nabla_rule",
    "verify_nabla_via_duality",
    "verify_corollary",
    "generate_test_pair",
    "run_trial",
    "run_property_suite",
    "load_suite_config",
]

LEFT, RIGHT = "left", "right"


# --- endpoint values ---------------------------------------------------------

@dataclass(frozen=True)
class Supplied:
    value: Any


@dataclass(frozen=True)
class LimitFromSamples:
    """One-sided limit estimated along scale points approaching a dense end."""

    tail_tolerance: float = 1e-12
    max_iter: int = 10_000


EndpointValue = Union[Supplied, LimitFromSamples]


def _end_point(f: GridFunction, side: str) -> ScalePoint:
    if side not in (LEFT, RIGHT):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    return f.domain.lower if side == LEFT else f.domain.upper


def _approach(ts: TimeScale, end: ScalePoint, side: str):
    """Scale points converging to a dense ``end`` from inside."""
    if isinstance(ts, ContinuousInterval):
        span = (ts.hi - end.value) if side == LEFT else (end.value - ts.lo)
        direction = 1 if side == LEFT else -1
        j = 1
        while True:
            yield ScalePoint(end.value + direction * span / 2**j)
            j += 1
    elif isinstance(ts, QScale) and end.is_zero and ts.include_zero:
        if (side == LEFT) == (not ts.reflected):
            k = ts.k_max
            while True:
                yield ts.at(k)
                k += 1


def resolve_endpoint(f: GridFunction, side: str, ev: EndpointValue):
    """The numeric value ``f(a+)`` (``side='left'``) or ``f(b-)``."""
    if isinstance(ev, Supplied):
        return ev.value
    ts = f.scale
    end = _end_point(f, side)
    if end not in ts:
        raise LimitUnavailable(f"endpoint {end} is not a scale point")
    pc = ts.classify(end)
    if not (pc.right_dense if side == LEFT else pc.left_dense):
        raise LimitUnavailable(f"endpoint {end} is scattered on that side; supply the value")
    prev = None
    for i, p in enumerate(_approach(ts, end, side)):
        if i >= ev.max_iter:
            break
        try:
            v = f._raw(p.value)
        except LookupError:
            break
        if prev is not None and abs(difference(v, prev)) < ev.tail_tolerance:
            return v
        prev = v
    raise LimitUnavailable(f"samples toward {end} did not settle within {ev.tail_tolerance}")


def endpoint_ratio(
    f: GridFunction, g: GridFunction, side: str, f_end: EndpointValue, g_end: EndpointValue
) -> GridFunction:
    """``H(x) = (f(x) - f_end) / (g(x) - g_end)`` on ``]a, b[``."""
    fe = resolve_endpoint(f, side, f_end)
    ge = resolve_endpoint(g, side, g_end)
    d = f.domain
    iv = TsInterval(d.lower, d.upper, True, True)
    if not f.scale.is_discrete:
        fv, gv = f.evaluator, g.evaluator

        def h(x):
            den = difference(gv(x), ge)
            if den == 0:
                raise ZeroDenominator(ScalePoint(x))
            return quotient(difference(fv(x), fe), den)

        return GridFunction(f.scale, iv, evaluator=h)
    table = {}
    for p in f.scale.points_in(iv):
        den = difference(g(p), ge)
        if den == 0:
            raise ZeroDenominator(p)
        table[p.value] = quotient(difference(f(p), fe), den)
    return GridFunction(f.scale, iv, table=table)


# --- premises ----------------------------------------------------------------

class GSign(str, Enum):
    ALL_POSITIVE = "AllPositive"
    ALL_NEGATIVE = "AllNegative"
    MIXED = "Mixed"
    VACUOUS = "Vacuous"

    def flipped(self) -> GSign:
        return {GSign.ALL_POSITIVE: GSign.ALL_NEGATIVE, GSign.ALL_NEGATIVE: GSign.ALL_POSITIVE}.get(self, self)


@dataclass(frozen=True)
class PremiseReport:
    g_sign: GSign
    ratio_verdict: MonotonicityVerdict | None
    endpoint_ok: bool
    interval: TsInterval
    closure_verdict: MonotonicityVerdict | None = None
    kind: str = "delta"

    @property
    def direction(self) -> int:
        """+1 when the derivative ratio is non-decreasing, -1 when
        non-increasing, 0 otherwise.

        A ratio flat on the open interval reads both ways; the closed
        derivative domain then decides (+1 if that is flat too).
        """
        v = self.ratio_verdict
        if v is None or not v.is_monotone:
            return 0
        if v.nondecreasing and v.nonincreasing:
            c = self.closure_verdict
            if c is not None and c.is_monotone and not c.nondecreasing:
                return -1
            return 1
        return 1 if v.nondecreasing else -1

    def passes(self, strict: bool = True) -> bool:
        if self.g_sign not in (GSign.ALL_POSITIVE, GSign.ALL_NEGATIVE) or not self.endpoint_ok:
            return False
        v = self.ratio_verdict
        if v is None:
            return False
        if strict:
            return v.strictly_increasing or v.strictly_decreasing
        return v.is_monotone

    def closure_covered(self, strict: bool = True) -> bool:
        """Whether the ratio is also monotone (same way) on the closed
        derivative domain; True when that could not be evaluated."""
        c = self.closure_verdict
        if c is None:
            return True
        if self.direction > 0:
            return c.strictly_increasing if strict else c.nondecreasing
        if self.direction < 0:
            return c.strictly_decreasing if strict else c.nonincreasing
        return False


def _g_sign(values: list, tol: float) -> GSign:
    if not values:
        return GSign.VACUOUS
    if all(v > tol for v in values):
        return GSign.ALL_POSITIVE
    if all(v < -tol for v in values):
        return GSign.ALL_NEGATIVE
    return GSign.MIXED


def _premise_interval(ts: TimeScale, domain: TsInterval, kind: str) -> TsInterval:
    a, b = domain.lower, domain.upper
    if kind == "delta":
        return TsInterval(a, ts.rho(b) if b in ts else b, True, True)
    return TsInterval(ts.sigma(a) if a in ts else a, b, True, True)


def _derivs(f: GridFunction, g: GridFunction, kind: str):
    """Derivatives of f and g, skipping the boundary point that the
    open premise interval never needs (it may be dense)."""
    d = f.domain
    if kind == "delta":
        iv = TsInterval(d.lower, d.upper, True, d.upper_open)
        step = delta_derivative
    else:
        iv = TsInterval(d.lower, d.upper, d.lower_open, True)
        step = nabla_derivative
    return step(f.restrict(iv)), step(g.restrict(iv))


def _check_premises(f, g, tol, kind, side=None, f_end=None, g_end=None) -> PremiseReport:
    ts = f.scale
    interval = _premise_interval(ts, f.domain, kind)
    step = delta_derivative if kind == "delta" else nabla_derivative
    full = None
    if ts.is_discrete:
        try:
            full = step(f), step(g)
        except TimeScaleError:
            pass
    try:
        # derivatives on the whole domain agree with the restricted ones
        # inside the open premise interval
        df, dg = full if full is not None else _derivs(f, g, kind)
    except EmptyDerivativeDomain:
        g_sign, verdict = GSign.VACUOUS, MonotonicityVerdict(Monotonicity.VACUOUS, tol, 0)
    else:
        gvals = [dg(p) for p in evaluation_points(dg, interval)]
        g_sign = _g_sign(gvals, tol)
        # the ratio is undefined where g's derivative vanishes; that case
        # already fails the sign premise
        verdict = None
        if _no_zero(dg, interval):
            r = ratio(df.restrict(interval), dg.restrict(interval))
            verdict = classify_monotonicity(r, interval, tol)
    closure = None
    if ts.is_discrete:
        cdf, cdg = full if full is not None else (None, None)
        if cdg is not None and _no_zero(cdg, cdg.domain):
            cr = ratio(cdf, cdg)
            closure = classify_monotonicity(cr, cr.domain, tol)
    endpoint_ok = True
    if side is not None:
        try:
            resolve_endpoint(f, side, f_end)
            resolve_endpoint(g, side, g_end)
        except LimitUnavailable:
            endpoint_ok = False
    return PremiseReport(g_sign, verdict, endpoint_ok, interval, closure, kind)


def _no_zero(fn: GridFunction, iv: TsInterval) -> bool:
    if fn.table is None:
        return True
    return all(v != 0 for k, v in fn.table.items() if k in iv)


def check_delta_premises(f, g, tol: float = 1e-12, side=None, f_end=None, g_end=None) -> PremiseReport:
    """Sign of ``g^Delta`` and monotonicity of ``f^Delta / g^Delta`` on
    ``]a, rho(b)[``."""
    return _check_premises(f, g, tol, "delta", side, f_end, g_end)


def check_nabla_premises(f, g, tol: float = 1e-12, side=None, f_end=None, g_end=None) -> PremiseReport:
    """Mirror of :func:`check_delta_premises` on ``]sigma(a), b[``."""
    return _check_premises(f, g, tol, "nabla", side, f_end, g_end)


# --- rule verification ---------------------------------------------------------

class Status(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    PREMISES_FAILED = "premises_failed"
    VACUOUS = "vacuous"


@dataclass(frozen=True)
class RuleReport:
    premises: PremiseReport
    conclusion: MonotonicityVerdict | None
    theorem_satisfied: bool
    status: Status
    h_samples: list = field(default_factory=list)
    kind: str = "delta"
    side: str = LEFT
    strict: bool = True

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "side": self.side,
            "strict": self.strict,
            "status": self.status.value,
            "theorem_satisfied": self.theorem_satisfied,
            "g_sign": self.premises.g_sign.value,
            "ratio": None if self.premises.ratio_verdict is None else self.premises.ratio_verdict.kind.value,
            "conclusion": None if self.conclusion is None else self.conclusion.kind.value,
        }


def _judge(direction: int, strict: bool, c: MonotonicityVerdict) -> bool:
    if direction > 0:
        return c.strictly_increasing if strict else c.nondecreasing
    if direction < 0:
        return c.strictly_decreasing if strict else c.nonincreasing
    return False


def _verify(f, g, side, f_end, g_end, strict, tol, kind) -> RuleReport:
    premises = _check_premises(f, g, tol, kind, side, f_end, g_end)
    interval = premises.interval
    n_pts = len(evaluation_points(f, interval))
    if n_pts < 2:
        return RuleReport(premises, None, False, Status.VACUOUS, [], kind, side, strict)
    if not premises.passes(strict):
        return RuleReport(premises, None, False, Status.PREMISES_FAILED, [], kind, side, strict)
    H = endpoint_ratio(f, g, side, f_end, g_end)
    conclusion = classify_monotonicity(H, interval, tol)
    ok = _judge(premises.direction, strict, conclusion)
    samples = [(p, H(p)) for p in evaluation_points(H, interval)] if f.scale.is_discrete else []
    status = Status.SATISFIED if ok else Status.VIOLATED
    return RuleReport(premises, conclusion, ok, status, samples, kind, side, strict)


def verify_delta_rule(f, g, side=LEFT, f_end=None, g_end=None, strict=True, tol=1e-12) -> RuleReport:
    """Check the delta rule: premises on ``]a, rho(b)[``, then classify
    ``H`` there.  Endpoint values default to ``f(a), g(a)`` (or at ``b``)."""
    f_end, g_end = _default_ends(f, g, side, f_end, g_end)
    return _verify(f, g, side, f_end, g_end, strict, tol, "delta")


def verify_nabla_rule(f, g, side=LEFT, f_end=None, g_end=None, strict=True, tol=1e-12) -> RuleReport:
    """Nabla counterpart of :func:`verify_delta_rule` on ``]sigma(a), b[``."""
    f_end, g_end = _default_ends(f, g, side, f_end, g_end)
    return _verify(f, g, side, f_end, g_end, strict, tol, "nabla")


def _default_ends(f, g, side, f_end, g_end):
    end = _end_point(f, side)
    if f_end is None:
        f_end = Supplied(f(end))
    if g_end is None:
        g_end = Supplied(g(end))
    return f_end, g_end


def verify_nabla_via_duality(f, g, side=LEFT, f_end=None, g_end=None, strict=True, tol=1e-12) -> RuleReport:
    """Nabla rule checked through the delta rule on the reflected pair.

    Reflection reverses orientation, so the reflected report is mapped back:
    monotonicity kinds and the g-sign flip, sides swap, ``H`` samples are
    re-indexed by ``x = -s``.
    """
    f_end, g_end = _default_ends(f, g, side, f_end, g_end)
    fs, gs = dual_function(f), dual_function(g)
    dside = RIGHT if side == LEFT else LEFT
    rep = _verify(fs, gs, dside, f_end, g_end, strict, tol, "delta")
    p = rep.premises
    prem = PremiseReport(
        p.g_sign.flipped(),
        None if p.ratio_verdict is None else _flip_verdict(p.ratio_verdict),
        p.endpoint_ok,
        TsInterval(-p.interval.upper, -p.interval.lower, p.interval.upper_open, p.interval.lower_open),
        None if p.closure_verdict is None else _flip_verdict(p.closure_verdict),
        "nabla",
    )
    samples = sorted(((-x, v) for x, v in rep.h_samples), key=lambda s: s[0])
    conclusion = None if rep.conclusion is None else _flip_verdict(rep.conclusion)
    return RuleReport(prem, conclusion, rep.theorem_satisfied, rep.status, samples, "nabla", side, strict)


def _flip_verdict(v: MonotonicityVerdict) -> MonotonicityVerdict:
    lo = None if v.max_step is None else -v.max_step
    hi = None if v.min_step is None else -v.min_step
    if v.kind is Monotonicity.NON_DECREASING and v.n_points >= 2 and v.max_step <= v.tol:
        kind = Monotonicity.NON_DECREASING  # flat stays flat
    else:
        kind = v.kind.flipped()
    return MonotonicityVerdict(kind, v.tol, v.n_points, lo, hi, v.witness)


def verify_corollary(f, g, which: str, strict=True, tol=1e-12, kind="delta", side=LEFT) -> RuleReport:
    """Corollaries of the rule.

    ``C1``: anchor at ``a`` with the functions' own values; ``C2``: anchor at
    ``b``; ``C3``: endpoint values forced to 0 so ``H = f / g`` (``side``
    picks the end).
    """
    verify = verify_delta_rule if kind == "delta" else verify_nabla_rule
    which = which.upper()
    if which == "C1":
        return verify(f, g, LEFT, None, None, strict, tol)
    if which == "C2":
        return verify(f, g, RIGHT, None, None, strict, tol)
    if which == "C3":
        return verify(f, g, side, Supplied(0), Supplied(0), strict, tol)
    raise ValueError(f"unknown corollary {which!r}")


# --- pair generation ------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    direction: int  # +1 increasing ratio, -1 decreasing
    strict: bool
    g_sign: int  # sign of g^Delta (or g^nabla)

    @property
    def name(self) -> str:
        mono = ("strict" if self.strict else "nonStrict") + ("Inc" if self.direction > 0 else "Dec")
        return f"{mono}/{'gPos' if self.g_sign > 0 else 'gNeg'}"

    @classmethod
    def parse(cls, text: str) -> Profile:
        mono, _, gs = text.replace("×", "/").replace("x", "/").partition("/")
        table = {
            "strictinc": (1, True),
            "strictdec": (-1, True),
            "nonstrictinc": (1, False),
            "nonstrictdec": (-1, False),
        }
        try:
            direction, strict = table[mono.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown profile {text!r}") from None
        g = gs.strip().lower() or "gpos"
        if g not in ("gpos", "gneg"):
            raise ValueError(f"unknown g-sign in profile {text!r}")
        return cls(direction, strict, 1 if g == "gpos" else -1)


MONOTONE_PROFILES = ("strictInc", "strictDec", "nonStrictInc", "nonStrictDec")
PROFILES = tuple(Profile.parse(f"{m}/{g}") for m in MONOTONE_PROFILES for g in ("gPos", "gNeg"))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _rat(rng: np.random.Generator, lo: int, hi: int, den: int) -> Rational:
    """Random rational lo/den .. hi/den (inclusive) on a 1/den grid."""
    return Rational(int(rng.integers(lo, hi + 1)), den)


def _generate(ts: TimeScale, rng, profile: Profile, mixed: bool = False):
    pts = ts.all_points()
    if len(pts) < 4:
        raise ScaleTooSmall(f"need >= 4 points, scale has {len(pts)}")
    m = len(pts) - 1  # derivative points pts[0..m-1]
    weights = [_rat(rng, 32, 128, 64) for _ in range(m)]
    steps = [_rat(rng, 4, 64, 64) for _ in range(m - 1)]
    if not profile.strict:
        steps = [s if rng.random() >= 0.3 else Rational(0) for s in steps]
        if m >= 4:
            # plateau inside ]a, rho(b)[, i.e. between derivative points 1..m-2
            steps[int(rng.integers(1, m - 2))] = Rational(0)
    r = [_rat(rng, -64, 64, 64)]
    for s in steps:
        r.append(r[-1] + s)
    r = [profile.direction * v for v in r]
    gd = [profile.g_sign * w for w in weights]
    if mixed and m >= 3:
        i = int(rng.integers(1, m - 1))
        gd[i] = -gd[i]
    fd = [ri * gi for ri, gi in zip(r, gd)]
    dom = TsInterval.closed(pts[0], pts[m - 1])
    rate_g = GridFunction(ts, dom, table={p.value: v for p, v in zip(pts, gd)})
    rate_f = GridFunction(ts, dom, table={p.value: v for p, v in zip(pts, fd)})
    g = delta_integrate(rate_g, pts[0], _rat(rng, -64, 64, 16))
    f = delta_integrate(rate_f, pts[0], _rat(rng, -64, 64, 16))
    return f, g


def generate_test_pair(ts: TimeScale, seed, profile, kind: str = "delta", *, mixed: bool = False):
    """Random ``(f, g)`` on the whole discrete scale meeting ``profile``.

    ``|g^Delta|`` increments and a monotone ratio ``r`` (sorted positive
    steps, zero steps for plateaus in non-strict profiles) are drawn on
    ``[a, rho(b)]``; ``f^Delta = r g^Delta`` and both functions come from
    :func:`delta_integrate`.  Values are exact rationals.  ``kind='nabla'``
    builds a delta pair on the reflected scale and reflects it back.
    ``mixed=True`` flips the sign of one interior ``g`` increment (a
    deliberate premise failure).
    """
    if isinstance(profile, str):
        profile = Profile.parse(profile)
    if not ts.is_discrete:
        raise ValueError("pair generation needs a discrete scale")
    rng = _rng(seed)
    if kind == "delta":
        return _generate(ts, rng, profile, mixed)
    if kind == "nabla":
        mirrored = Profile(-profile.direction, profile.strict, -profile.g_sign)
        f, g = _generate(ts.dual(), rng, mirrored, mixed)
        return dual_function(f), dual_function(g)
    raise ValueError(f"kind must be 'delta' or 'nabla', not {kind!r}")


# --- property suite -------------------------------------------------------------

QSCALE_MAX_POINTS = {Rational(3, 10): 12, Rational(1, 2): 20, Rational(9, 10): 50}


@dataclass
class SuiteConfig:
    trials: int = 1000
    seed: int = 0
    tol: float = 1e-10
    kind: str = "delta"
    families: tuple = ("finite", "lattice", "qscale")
    q_values: tuple = ("0.3", "0.5", "0.9")
    min_points: int = 4
    max_points: int = 50
    profiles: tuple = MONOTONE_PROFILES
    g_signs: tuple = (1, -1)
    sides: tuple = (LEFT, RIGHT)
    force_non_strict: bool = False
    adversarial_rate: float = 0.0
    scale: str | None = None
    check_mvt: bool = True
    h_agreement_tol: float = 1e-12

    def combos(self) -> list[tuple[Profile, str]]:
        out = []
        for m in self.profiles:
            for gs in self.g_signs:
                base = Profile.parse(m)
                prof = Profile(base.direction, base.strict, int(gs))
                for side in self.sides:
                    out.append((prof, side))
        return out


def _random_scale(rng: np.random.Generator, cfg: SuiteConfig) -> TimeScale:
    family = cfg.families[int(rng.integers(len(cfg.families)))]
    n = int(rng.integers(cfg.min_points, cfg.max_points + 1))
    if family == "finite":
        start = _rat(rng, -64, 64, 16)
        gaps = [_rat(rng, 1, 10, 10) for _ in range(n - 1)]
        pts = [start]
        for gap in gaps:
            pts.append(pts[-1] + gap)
        return FiniteSet(tuple(pts))
    if family == "lattice":
        return UniformLattice(_rat(rng, -64, 64, 16), _rat(rng, 1, 20, 10), n)
    if family == "qscale":
        q = Rational(cfg.q_values[int(rng.integers(len(cfg.q_values)))])
        cap = QSCALE_MAX_POINTS.get(q, 20)
        n = max(cfg.min_points, min(n, cap)) if cap >= cfg.min_points else n
        k_min = int(rng.integers(-3, 4))
        return QScale(q, k_min, k_min + n - 1)
    raise ValueError(f"unknown scale family {family!r}")


def _h_identity_ok(f, g, side, fe, ge, H: GridFunction, interval: TsInterval) -> bool:
    """sign(H^Delta) == sign(g^Delta / (g(sigma x) - g_end)) * sign(f^Delta/g^Delta - H)."""
    ts = f.scale
    for p in ts.points_in(interval):
        s = ts._sigma(p)
        if s not in H.domain or s == p:
            continue
        mu = s.value - p.value
        hd = quotient(difference(H(s), H(p)), mu)
        fd = quotient(difference(f(s), f(p)), mu)
        gd = quotient(difference(g(s), g(p)), mu)
        second = difference(quotient(fd, gd), H(p))
        if second == 0:
            continue
        expect = sign(quotient(gd, difference(g(s), ge))) * sign(second)
        if sign(hd) != expect:
            return False
    return True


def _num(x):
    return None if x is None else float(x)


def run_trial(cfg: SuiteConfig, index: int) -> dict:
    """One reproducible trial; randomness comes from ``(seed, index)`` only."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(index,)))
    ts = parse_scale(cfg.scale) if cfg.scale else _random_scale(rng, cfg)
    combos = cfg.combos()
    profile, side = combos[index % len(combos)]
    strict = profile.strict and not cfg.force_non_strict
    rec: dict[str, Any] = {
        "index": index,
        "scale": ts.spec(),
        "profile": profile.name,
        "side": side,
        "strict": strict,
        "kind": cfg.kind,
    }
    if len(ts.all_points()) < 4:
        rec.update(status=Status.VACUOUS.value, violation=False)
        return rec
    adversarial = cfg.adversarial_rate > 0 and rng.random() < cfg.adversarial_rate
    rec["adversarial"] = adversarial
    f, g = generate_test_pair(ts, rng, profile, cfg.kind, mixed=adversarial)
    end = _end_point(f, side)
    fe, ge = Supplied(f(end)), Supplied(g(end))
    violation = False
    if cfg.kind == "delta":
        rep = verify_delta_rule(f, g, side, fe, ge, strict, cfg.tol)
        if rep.status is Status.SATISFIED or rep.status is Status.VIOLATED:
            H = endpoint_ratio(f, g, side, fe, ge)
            rec["h_identity_ok"] = _h_identity_ok(f, g, side, fe.value, ge.value, H, rep.premises.interval)
            violation |= not rec["h_identity_ok"]
        if cfg.check_mvt and rep.status is not Status.PREMISES_FAILED:
            pts = f.points()
            xs = {pts[-1], pts[int(rng.integers(1, len(pts)))]}
            ok = True
            for x in sorted(xs):
                try:
                    ok &= cauchy_mvt_witnesses(f, g, pts[0], x).holds
                except SignConditionViolated:
                    pass  # g^Delta changes sign on [pts[0], x): nothing to check
            rec["mvt_ok"] = ok
            violation |= not ok
    else:
        rep = verify_nabla_rule(f, g, side, fe, ge, strict, cfg.tol)
        via = verify_nabla_via_duality(f, g, side, fe, ge, strict, cfg.tol)
        agree = rep.status == via.status and rep.theorem_satisfied == via.theorem_satisfied
        gap = 0.0
        if agree and rep.h_samples:
            if [p for p, _ in rep.h_samples] != [p for p, _ in via.h_samples]:
                agree = False
            else:
                gap = max(abs(float(difference(a, b))) for (_, a), (_, b) in zip(rep.h_samples, via.h_samples))
                agree = gap <= cfg.h_agreement_tol
        rec["dual_agrees"] = agree
        rec["dual_via_status"] = via.status.value
        rec["h_max_gap"] = gap
        violation |= not agree
    rec.update(rep.summary())
    violation |= rep.status is Status.VIOLATED
    rec["violation"] = violation
    if violation and rep.conclusion is not None and rep.conclusion.witness:
        rec["witness"] = [
            {"t0": float(s.t0), "t1": float(s.t1), "v0": _num(s.v0), "v1": _num(s.v1)}
            for s in rep.conclusion.witness
        ]
    return rec


@dataclass
class SuiteReport:
    config: SuiteConfig
    records: list

    @property
    def counts(self) -> dict:
        c = {"trials": len(self.records), "satisfied": 0, "violations": 0, "premises_failed": 0, "vacuous": 0}
        for r in self.records:
            if r["violation"]:
                c["violations"] += 1
            elif r["status"] == Status.SATISFIED.value:
                c["satisfied"] += 1
            elif r["status"] == Status.PREMISES_FAILED.value:
                c["premises_failed"] += 1
            elif r["status"] == Status.VACUOUS.value:
                c["vacuous"] += 1
        c["dual_disagreements"] = sum(1 for r in self.records if r.get("dual_agrees") is False)
        c["mvt_failures"] = sum(1 for r in self.records if r.get("mvt_ok") is False)
        c["h_identity_failures"] = sum(1 for r in self.records if r.get("h_identity_ok") is False)
        return c

    @property
    def violations(self) -> int:
        return self.counts["violations"]

    def to_dict(self, verbose: bool = False) -> dict:
        cfg = asdict(self.config)
        out = {"config": cfg, "summary": self.counts}
        out["failures"] = [r for r in self.records if r["violation"]]
        if verbose:
            out["trials"] = self.records
        return out

    def to_json(self, verbose: bool = False) -> str:
        return json.dumps(self.to_dict(verbose), indent=2, sort_keys=True, default=str)


def run_property_suite(cfg: SuiteConfig | None = None, **overrides) -> SuiteReport:
    """Generate-then-verify over ``cfg.trials`` independent trials.

    Trial ``i`` depends only on ``(cfg.seed, i)``, so the report is the same
    however trials are scheduled and any trial can be replayed alone with
    :func:`run_trial`.
    """
    cfg = cfg or SuiteConfig()
    if overrides:
        cfg = SuiteConfig(**{**asdict(cfg), **overrides})
    records = [run_trial(cfg, i) for i in range(cfg.trials)]
    return SuiteReport(cfg, records)


_LIST_KEYS = {"families", "q_values", "profiles", "g_signs", "sides"}
_BOOL_KEYS = {"force_non_strict", "check_mvt"}


def _coerce(key: str, raw):
    default = getattr(SuiteConfig(), key)
    if key in _LIST_KEYS:
        items = raw if isinstance(raw, (list, tuple)) else [s.strip() for s in str(raw).split(",") if s.strip()]
        if key == "g_signs":
            items = [int(x) for x in items]
        else:
            items = [str(x) for x in items]
        return tuple(items)
    if key in _BOOL_KEYS:
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if raw is None:
        return None
    if default is None:
        return str(raw)
    return type(default)(raw)


def load_suite_config(path) -> SuiteConfig:
    """Read a suite config from JSON or ``key=value`` lines (``#`` comments)."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped.startswith("{"):
        raw = json.loads(stripped)
    else:
        raw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {line!r}")
            raw[key.strip()] = val.strip()
    known = set(SuiteConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown suite config keys: {', '.join(sorted(unknown))}")
    return SuiteConfig(**{k: _coerce(k, v) for k, v in raw.items()})
