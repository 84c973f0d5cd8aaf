"""q-numbers, q-factorials, q-shifted powers, the q-derivative and the
q-exponential series with a certified geometric tail.

With an exact ``q`` (always a Rational here) and exact arguments the
polynomial objects ([n], [n]!, (x - a)^n_q) are computed exactly.  Everything
involving the exponential series is evaluated in mpmath at
``ctx.working_dps`` digits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from mpmath import mp, mpf

from .errors import MissingDerivativeAtZero, NegativeN, OutsideRadiusOfConvergence, TailNotCertified
from .numeric import Rational, exact, is_exact, to_mpf, unify

__all__ = [
    "QContext",
    "QSeriesResult",
    "q_number",
    "q_factorial",
    "q_poly",
    "q_derivative",
    "q_derivative_iter",
    "q_exponential",
    "RADIUS_GUARD",
    "MAX_TERMS",
]

RADIUS_GUARD = 1e-9
MAX_TERMS = 10**6


@dataclass(frozen=True)
class QContext:
    """Base ``q`` in (0, 1) with the precision / tail policy.

    ``precision`` is the number of significant decimal digits requested;
    series work runs with ten guard digits on top.
    """

    q: Rational
    precision: int = 30
    tail_tol: float = 1e-14

    def __post_init__(self):
        object.__setattr__(self, "q", exact(self.q))
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")
        if self.precision < 1:
            raise ValueError("precision must be positive")

    @property
    def radius(self) -> Rational:
        return 1 / (1 - self.q)

    @property
    def working_dps(self) -> int:
        return self.precision + 10

    @property
    def qf(self) -> mpf:
        return to_mpf(self.q)

    def workdps(self):
        return mp.workdps(self.working_dps)


@dataclass(frozen=True)
class QSeriesResult:
    value: Any
    terms_used: int
    tail_bound: Any


def q_number(ctx: QContext, alpha):
    """``[alpha] = (q**alpha - 1) / (q - 1)``; exact for integer ``alpha``."""
    if isinstance(alpha, int) and not isinstance(alpha, bool):
        return (ctx.q**alpha - 1) / (ctx.q - 1)
    with ctx.workdps():
        q = ctx.qf
        return (mp.power(q, to_mpf(alpha)) - 1) / (q - 1)


def q_factorial(ctx: QContext, n: int):
    if n < 0:
        raise NegativeN(f"[n]! needs n >= 0, got {n}")
    out = Rational(1)
    for j in range(1, n + 1):
        out *= q_number(ctx, j)
    return out


def q_poly(ctx: QContext, x, a, n: int):
    """``(x - a)^n_q = (x - a)(x - q a) ... (x - q**(n-1) a)``."""
    if n < 0:
        raise NegativeN(f"(x-a)^n_q needs n >= 0, got {n}")
    if is_exact(x) and is_exact(a):
        out = Rational(1)
        for j in range(n):
            out *= x - ctx.q**j * a
        return out
    with ctx.workdps():
        x, a = to_mpf(x), to_mpf(a)
        out = mpf(1)
        for j in range(n):
            out *= x - to_mpf(ctx.q**j) * a
        return out


def _scale_arg(ctx: QContext, x):
    """``q * x`` in the arithmetic of ``x``."""
    if is_exact(x):
        return ctx.q * x
    return to_mpf(ctx.q) * to_mpf(x)


def q_derivative(ctx: QContext, f: Callable, x, f0prime=None):
    """``D_q f(x) = (f(qx) - f(x)) / ((q - 1) x)``, or ``f0prime`` at 0."""
    if x == 0:
        if f0prime is None:
            raise MissingDerivativeAtZero("D_q f(0) needs f'(0)")
        return f0prime
    with ctx.workdps():
        hi, lo = unify(f(_scale_arg(ctx, x)), f(x))
        num = hi - lo
        den = (ctx.q - 1) * x if is_exact(x) else (ctx.qf - 1) * to_mpf(x)
        num, den = unify(num, den)
        return num / den


def q_derivative_iter(ctx: QContext, f: Callable, x, k: int, derivs_at_zero=None):
    """``D_q^k f(x)`` by expanding the nested quotients over ``q**j x``.

    ``derivs_at_zero`` (sequence) supplies ``(D_q^{j} f)'(0)`` when ``x == 0``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return f(x)
    inner = lambda y: q_derivative_iter(ctx, f, y, k - 1, derivs_at_zero)  # noqa: E731
    f0 = None
    if x == 0:
        if derivs_at_zero is None or len(derivs_at_zero) < k:
            raise MissingDerivativeAtZero(f"D_q^{k} f(0) needs supplied derivatives")
        f0 = derivs_at_zero[k - 1]
    return q_derivative(ctx, inner, x, f0)


def q_exponential(ctx: QContext, x) -> QSeriesResult:
    """Sum ``e_q^x = sum_k x**k / [k]!`` with a certified tail.

    The term ratio ``|x| / [k+1]`` decreases in ``k`` (``[k+1]`` increases to
    ``1 / (1 - q)``), so once it is below one the remainder after term ``k`` is
    at most ``|t_k| r / (1 - r)``.  Summation stops when that bound is within
    ``ctx.tail_tol``.

    Raises :class:`OutsideRadiusOfConvergence` when ``|x|`` is not inside
    ``(1 - RADIUS_GUARD) / (1 - q)``.
    """
    with ctx.workdps():
        xm = to_mpf(x)
        q = ctx.qf
        radius = 1 / (1 - q)
        if abs(xm) > (1 - mpf(RADIUS_GUARD)) * radius:
            raise OutsideRadiusOfConvergence(
                f"|x|={mp.nstr(abs(xm), 10)} is not inside the radius 1/(1-q)={mp.nstr(radius, 10)}"
            )
        total = mpf(0)
        term = mpf(1)
        qk = mpf(1)  # q**(k+1) after the update below
        for k in range(MAX_TERMS):
            total += term
            qk *= q
            r = abs(xm) * (1 - q) / (1 - qk)  # |x| / [k+1]
            if r < 1:
                tail = abs(term) * r / (1 - r)
                if tail <= ctx.tail_tol:
                    return QSeriesResult(+total, k + 1, tail)
            term = term * xm * (1 - q) / (1 - qk)
        raise TailNotCertified(f"tail not certified within {MAX_TERMS} terms")
