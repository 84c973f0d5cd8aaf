"""Lower and upper bounds for the q-exponential on ``[q^-1 a, b]``.

With ``a = q**a_exp`` and ``b = q**b_exp`` (``a < b``) and the Taylor gap

    f(x) = e_q^x - sum_{k<n} e_q^a / [k]! * (x - a)^k_q,

the bounds are

    L_n(x) = T(x) + (x - a)^n_q * f(q^-1 a) / (q^-1 a - a)^n_q
    U_n(x) = T(x) + (x - a)^n_q * f(b) / (b - a)^n_q

where ``T`` is the Taylor sum.  Both touch ``e_q`` at one end.  The
certificate behind them is the chain of nabla derivatives of ``f`` and of
``g = (x - a)^n_q`` on the q-scale, checked by :func:`verify_derivative_chain`.

Series accuracy: ``f`` near ``a`` is a difference of nearly equal numbers and
gets divided by ``(q^-1 a - a)^n_q``, so series error is amplified by up to
``(q^-1 a - a)**-n``.  All series here are therefore summed to the working
precision (the context's ``tail_tol`` is still honoured as an upper bound).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from mpmath import mp, mpf

from .errors import InvalidBoundProblem, PointNotInScale
from .gridfn import GridFunction, Monotonicity, classify_monotonicity, nabla_derivative, ratio
from .lhopital import Status, verify_nabla_rule
from .numeric import Rational, exact, to_mpf
from .qcalc import RADIUS_GUARD, QContext, q_exponential, q_factorial, q_poly
from .scale import QScale, ScalePoint, TsInterval, _fmt

__all__ = [
    "BoundProblem",
    "BoundRow",
    "BoundReport",
    "ChainReport",
    "taylor_poly",
    "taylor_gap",
    "lower_bound",
    "upper_bound",
    "sandwich_report",
    "verify_derivative_chain",
]


@dataclass(frozen=True)
class BoundProblem:
    ctx: QContext
    a_exp: int
    b_exp: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidBoundProblem(f"n must be >= 1, got {self.n}")
        if self.a_exp - 1 < self.b_exp:
            raise InvalidBoundProblem(
                f"need q^-1 a <= b, i.e. a_exp - 1 >= b_exp; got a_exp={self.a_exp}, b_exp={self.b_exp}"
            )
        limit = (1 - exact(RADIUS_GUARD)) * self.ctx.radius
        if self.b >= limit:
            raise InvalidBoundProblem(
                f"b = q^{self.b_exp} = {float(self.b):.6g} is not inside the radius 1/(1-q) = {float(self.ctx.radius):.6g}"
            )

    @property
    def q(self) -> Rational:
        return self.ctx.q

    @property
    def a(self) -> Rational:
        return self.q**self.a_exp

    @property
    def b(self) -> Rational:
        return self.q**self.b_exp

    @property
    def left(self) -> Rational:
        """``q^-1 a``, the left end of the bound interval."""
        return self.q ** (self.a_exp - 1)

    @cached_property
    def series_ctx(self) -> QContext:
        tail = min(self.ctx.tail_tol, 10.0 ** -self.ctx.working_dps)
        return QContext(self.ctx.q, self.ctx.precision, tail)

    def exp(self, x):
        return q_exponential(self.series_ctx, x)

    @cached_property
    def exp_a(self):
        return self.exp(self.a).value

    @cached_property
    def factorials(self) -> list:
        return [q_factorial(self.ctx, k) for k in range(self.n + 1)]

    @cached_property
    def gap_left(self):
        return taylor_gap(self, self.left)

    @cached_property
    def gap_right(self):
        return taylor_gap(self, self.b)

    def lattice(self) -> list[ScalePoint]:
        """Lattice points of ``[q^-1 a, b]`` in increasing order."""
        return [ScalePoint(self.q**k, k) for k in range(self.a_exp - 1, self.b_exp - 1, -1)]


def taylor_poly(problem: BoundProblem, x):
    """``sum_{k<n} e_q^a / [k]! (x - a)^k_q``."""
    ctx = problem.ctx
    with ctx.workdps():
        total = mpf(0)
        for k in range(problem.n):
            total += problem.exp_a * to_mpf(q_poly(ctx, _exact_or_mpf(x), problem.a, k)) / to_mpf(problem.factorials[k])
        return total


def taylor_gap(problem: BoundProblem, x):
    """``e_q^x`` minus the Taylor sum at ``a``; vanishes at ``x = a``."""
    with problem.ctx.workdps():
        return problem.exp(x).value - taylor_poly(problem, x)


def _exact_or_mpf(x):
    if isinstance(x, ScalePoint):
        return x.value
    if isinstance(x, float):
        return exact(x)
    return x


def _bound(problem: BoundProblem, x, gap, anchor):
    ctx = problem.ctx
    x = _exact_or_mpf(x)
    with ctx.workdps():
        scale = to_mpf(q_poly(ctx, x, problem.a, problem.n)) / to_mpf(q_poly(ctx, anchor, problem.a, problem.n))
        return taylor_poly(problem, x) + scale * gap


def lower_bound(problem: BoundProblem, x):
    """``L_n(x)``; equals ``e_q^x`` at ``x = q^-1 a``."""
    return _bound(problem, x, problem.gap_left, problem.left)


def upper_bound(problem: BoundProblem, x):
    """``U_n(x)``; equals ``e_q^x`` at ``x = b``."""
    return _bound(problem, x, problem.gap_right, problem.b)


# --- sandwich report ----------------------------------------------------------

@dataclass(frozen=True)
class BoundRow:
    x: Any
    lower: Any
    exact: Any
    upper: Any
    lower_margin: Any
    upper_margin: Any
    on_lattice: bool = True
    terms_used: int = 0

    def passed(self, tol: float) -> bool:
        return self.lower_margin >= -tol and self.upper_margin >= -tol


@dataclass(frozen=True)
class BoundReport:
    problem: BoundProblem
    tol: float
    rows: list
    endpoint_lower: Any
    endpoint_upper: Any
    extra_rows: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        """Every lattice row within ``tol``; off-lattice rows do not count."""
        return all(r.passed(self.tol) for r in self.rows)

    @property
    def endpoints_ok(self) -> bool:
        return self.endpoint_lower <= self.tol and self.endpoint_upper <= self.tol

    @property
    def terms_used_max(self) -> int:
        return max(r.terms_used for r in self.rows + self.extra_rows)

    def _fmt_num(self, v) -> str:
        return mp.nstr(v, self.problem.ctx.precision, strip_zeros=False)

    def _row_fields(self, r: BoundRow) -> dict:
        x = r.x.value if isinstance(r.x, ScalePoint) else r.x
        return {
            "x": _fmt(exact(x)) if not isinstance(x, mpf) else self._fmt_num(x),
            "lower": self._fmt_num(r.lower),
            "exact": self._fmt_num(r.exact),
            "upper": self._fmt_num(r.upper),
            "lower_margin": self._fmt_num(r.lower_margin),
            "upper_margin": self._fmt_num(r.upper_margin),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["x", "lower", "exact", "upper", "lower_margin", "upper_margin"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(self._row_fields(r))
        return buf.getvalue()

    def to_dict(self) -> dict:
        p = self.problem
        rows = []
        for r in self.rows + self.extra_rows:
            d = self._row_fields(r)
            d["on_lattice"] = r.on_lattice
            if not r.on_lattice:
                d["note"] = "outside the scale"
            rows.append(d)
        return {
            "q": _fmt(p.q),
            "a_exp": p.a_exp,
            "b_exp": p.b_exp,
            "n": p.n,
            "tol": self.tol,
            "precision": p.ctx.precision,
            "terms_used_max": self.terms_used_max,
            "all_passed": self.all_passed,
            "endpoint_lower_residual": self._fmt_num(self.endpoint_lower),
            "endpoint_upper_residual": self._fmt_num(self.endpoint_upper),
            "rows": rows,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _row(problem: BoundProblem, x, on_lattice: bool) -> BoundRow:
    with problem.ctx.workdps():
        e = problem.exp(_exact_or_mpf(x))
        lo, hi = lower_bound(problem, x), upper_bound(problem, x)
        return BoundRow(x, lo, e.value, hi, e.value - lo, hi - e.value, on_lattice, e.terms_used)


def sandwich_report(problem: BoundProblem, tol: float = 1e-10, extra_points=()) -> BoundReport:
    """``L <= e_q <= U`` at every lattice point of ``[q^-1 a, b]``.

    ``extra_points`` are evaluated too (they must lie in the interval); those
    off the lattice are flagged and left out of ``all_passed``.
    """
    rows = [_row(problem, p, True) for p in problem.lattice()]
    lattice_values = {p.value for p in problem.lattice()}
    extra = []
    for x in extra_points:
        v = exact(x)
        if not problem.left <= v <= problem.b:
            raise PointNotInScale(f"{_fmt(v)} is outside [q^-1 a, b]")
        if v in lattice_values:
            continue
        extra.append(_row(problem, v, False))
    extra.sort(key=lambda r: r.x)
    with problem.ctx.workdps():
        end_lo = abs(rows[0].lower - rows[0].exact)
        end_hi = abs(rows[-1].upper - rows[-1].exact)
    return BoundReport(problem, tol, rows, end_lo, end_hi, extra)


# --- derivative chain -----------------------------------------------------------

@dataclass(frozen=True)
class ChainReport:
    problem: BoundProblem
    tol: float
    f_at_a: list            # |f^{nabla k}(a)|, k < n
    g_at_a: list            # g^{nabla k}(a), k < n (exact)
    g_top_exact: bool       # g^{nabla n} == [n]! at every point of [a, b]
    ratio_kinds: list       # monotonicity of f^{nabla k} / g^{nabla k} on [sigma(a), b], k = 0..n
    rule_statuses: list     # nabla rule on (f^{nabla k}, g^{nabla k}) anchored at a, k < n
    sandwich_ok: bool
    top_residual: Any       # max |f^{nabla n} / g^{nabla n} - e_q / [n]!|

    @property
    def vanishing_ok(self) -> bool:
        return all(v <= self.tol for v in self.f_at_a) and all(v == 0 for v in self.g_at_a)

    @property
    def ratios_ok(self) -> bool:
        ok = (Monotonicity.STRICTLY_INCREASING.value, Monotonicity.VACUOUS.value)
        return all(k in ok for k in self.ratio_kinds)

    @property
    def rules_ok(self) -> bool:
        return all(s in (Status.SATISFIED.value, Status.VACUOUS.value) for s in self.rule_statuses)

    @property
    def passed(self) -> bool:
        return (
            self.vanishing_ok
            and self.g_top_exact
            and self.ratios_ok
            and self.rules_ok
            and self.sandwich_ok
            and self.top_residual <= self.tol
        )

    def to_dict(self) -> dict:
        p = self.problem
        num = lambda v: mp.nstr(v, p.ctx.precision, strip_zeros=False)  # noqa: E731
        return {
            "q": _fmt(p.q),
            "a_exp": p.a_exp,
            "b_exp": p.b_exp,
            "n": p.n,
            "tol": self.tol,
            "f_at_a": [num(v) for v in self.f_at_a],
            "g_at_a": [_fmt(v) for v in self.g_at_a],
            "g_top_exact": self.g_top_exact,
            "ratio_kinds": self.ratio_kinds,
            "rule_statuses": self.rule_statuses,
            "sandwich_ok": self.sandwich_ok,
            "top_residual": num(self.top_residual),
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def chain_functions(problem: BoundProblem):
    """``f`` (Taylor gap) and ``g = (x - a)^n_q`` tabulated on the q-scale
    from ``q^n a`` up to ``b``; the ``n`` extra points below ``a`` make the
    nabla derivatives at ``a`` available."""
    ts = QScale(problem.q, problem.b_exp, problem.a_exp + problem.n)
    f = GridFunction.from_function(ts, lambda t: taylor_gap(problem, t)).tabulate()
    g = GridFunction.from_function(ts, lambda t: q_poly(problem.ctx, t, problem.a, problem.n)).tabulate()
    return ts, f, g


def verify_derivative_chain(problem: BoundProblem, tol: float = 1e-10) -> ChainReport:
    n = problem.n
    with problem.ctx.workdps():
        ts, f, g = chain_functions(problem)
        a = ts.point(problem.a)
        whole = TsInterval.closed(a, ts.max_point)
        right = TsInterval.closed(ts.sigma(a), ts.max_point)
        fs, gs = [f], [g]
        for _ in range(n):
            fs.append(nabla_derivative(fs[-1]))
            gs.append(nabla_derivative(gs[-1]))
        f_at_a = [abs(fs[k](a)) for k in range(n)]
        g_at_a = [gs[k](a) for k in range(n)]
        top = problem.factorials[n]
        g_top_exact = all(v == top for v in gs[n].restrict(whole).values())

        kinds, statuses, ratios = [], [], []
        for k in range(n + 1):
            r = ratio(fs[k].restrict(right), gs[k].restrict(right))
            ratios.append(r)
            kinds.append(classify_monotonicity(r, right, tol).kind.value)
        for k in range(n):
            rep = verify_nabla_rule(fs[k].restrict(whole), gs[k].restrict(whole), "left", strict=True, tol=tol)
            statuses.append(rep.status.value)

        r0 = ratios[0]
        lo, hi = r0(right.lower), r0(right.upper)
        sandwich_ok = all(lo - tol <= v <= hi + tol for v in r0.values())

        top_residual = max(abs(fs[n](p) - problem.exp(p.value).value) / to_mpf(top) for p in ts.points_in(whole))
    return ChainReport(problem, tol, f_at_a, g_at_a, g_top_exact, kinds, statuses, sandwich_ok, top_residual)
