import io
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from tscalc.errors import (
    CsvFormatError,
    DegenerateInterval,
    DensePointWithoutAnalyticDerivative,
    DomainExhausted,
    PointNotInScale,
    SignConditionViolated,
)
from tscalc.gridfn import (
    GridFunction,
    Monotonicity,
    cauchy_mvt_witnesses,
    classify_monotonicity,
    delta_derivative,
    delta_integrate,
    dual_function,
    iterate_derivative,
    load_csv,
    nabla_derivative,
)
from tscalc.qcalc import QContext, q_derivative, q_factorial, q_poly
from tscalc.scale import ContinuousInterval, FiniteSet, QScale, TsInterval, UniformLattice, dual, sigma

FS = FiniteSet((0, 1, 2, 4))


def fn(ts, f, **kw):
    return GridFunction.from_function(ts, f, **kw)


def table(f):
    return {p.value: v for p, v in f.items()}


# --- delta / nabla derivatives --------------------------------------------------

def test_delta_of_square_on_finite_set():
    d = delta_derivative(fn(FS, lambda t: t * t))
    assert table(d) == {0: 1, 1: 3, 2: 6}


def test_delta_of_constant_vanishes():
    assert set(delta_derivative(fn(FS, lambda t: 7)).values()) == {0}


@pytest.mark.parametrize("ts", [FS, UniformLattice("-1/2", "1/3", 9), QScale("0.3", -2, 6)])
def test_delta_of_identity_is_one(ts):
    assert set(delta_derivative(fn(ts, lambda t: t)).values()) == {1}


def test_nabla_on_q_scale_is_q_derivative():
    ts = QScale("0.5", 0, 8)
    ctx = QContext("0.5")
    f = lambda t: t**3 - 2 * t  # noqa: E731
    d = nabla_derivative(fn(ts, f))
    for p, v in d.items():
        k = p.exp
        expect = (f(ts.q**k) - f(ts.q ** (k + 1))) / (ts.q**k - ts.q ** (k + 1))
        assert v == expect == q_derivative(ctx, f, p.value)


def test_nabla_of_identity_is_one():
    assert set(nabla_derivative(fn(FS, lambda t: t)).values()) == {1}


def test_nabla_of_square_on_integers():
    d = nabla_derivative(fn(UniformLattice(0, 1, 8), lambda t: t * t))
    assert all(v == 2 * p.value - 1 for p, v in d.items())
    assert [p.value for p in d.points()] == list(range(1, 8))


def test_dense_point_needs_analytic_derivative():
    ts = QScale("0.5", 0, 10, include_zero=True)
    with pytest.raises(DensePointWithoutAnalyticDerivative):
        delta_derivative(fn(ts, lambda t: t * t))
    d = delta_derivative(fn(ts, lambda t: t * t, derivative=lambda t: 2 * t))
    assert d(0) == 0


def test_continuum_uses_analytic_derivative():
    ts = ContinuousInterval(0, 1)
    d = delta_derivative(fn(ts, lambda t: t**3, derivative=lambda t: 3 * t**2))
    assert d("0.5") == Fraction(3, 4)
    with pytest.raises(DensePointWithoutAnalyticDerivative):
        nabla_derivative(fn(ts, lambda t: t))


# --- iterated derivatives ------------------------------------------------------------

def test_iterate_zero_is_identity():
    f = fn(FS, lambda t: t * t)
    assert iterate_derivative(f, 0) is f


def test_iterate_q_poly_gives_q_factorial():
    ctx = QContext("0.5")
    n, a = 4, Fraction(1, 8)
    ts = QScale("0.5", 0, 3 + n)
    g = fn(ts, lambda t: q_poly(ctx, t, a, n))
    top = iterate_derivative(g, n, "nabla")
    assert set(top.values()) == {q_factorial(ctx, n)}


def test_iterate_cubes_on_integers():
    f = fn(UniformLattice(0, 1, 10), lambda t: t**3)
    assert set(iterate_derivative(f, 3, "delta").values()) == {6}


def test_iterate_exhausts_domain():
    with pytest.raises(DomainExhausted):
        iterate_derivative(fn(FS, lambda t: t), 4)


# --- integration -------------------------------------------------------------------

def test_integrate_unit_rate():
    ts = UniformLattice(0, 1, 6)
    rate = GridFunction.from_values(ts, [1] * 5, TsInterval.closed(0, 4))
    assert table(delta_integrate(rate, 0, 0)) == {t: t for t in range(6)}


def test_integrate_zero_rate():
    ts = UniformLattice(0, 1, 6)
    rate = GridFunction.from_values(ts, [0] * 5, TsInterval.closed(0, 4))
    assert set(delta_integrate(rate, 0, Fraction(5, 2)).values()) == {Fraction(5, 2)}


def test_integrate_unrolls_recurrence():
    ts = FiniteSet((0, 1, 3))
    rate = fn(ts, lambda t: t, domain=TsInterval.closed(0, 1))
    assert table(delta_integrate(rate, 0, 0)) == {0: 0, 1: 0, 3: 2}


# --- monotonicity ---------------------------------------------------------------------

def verdict(values, tol=0):
    ts = UniformLattice(0, 1, len(values))
    return classify_monotonicity(GridFunction.from_values(ts, values), tol=tol)


def test_classify_strictly_increasing():
    assert verdict([1, 2, 3]).kind is Monotonicity.STRICTLY_INCREASING


def test_classify_plateau_is_non_decreasing():
    v = verdict([1, 1, 2])
    assert v.kind is Monotonicity.NON_DECREASING
    assert v.nondecreasing and not v.strictly_increasing


def test_classify_neither_reports_first_falling_pair():
    v = verdict([3, 1, 2])
    assert v.kind is Monotonicity.NEITHER
    fall, rise = v.witness
    assert (fall.t0.value, fall.t1.value, fall.v0, fall.v1) == (0, 1, 3, 1)
    assert (rise.v0, rise.v1) == (1, 2)


def test_classify_tolerance_band():
    assert verdict([1, 1 + 1e-13, 2], tol=1e-12).kind is Monotonicity.NON_DECREASING
    assert verdict([1, 1 + 1e-13, 2], tol=0).kind is Monotonicity.STRICTLY_INCREASING


def test_classify_short_interval_is_vacuous():
    f = fn(FS, lambda t: t)
    assert classify_monotonicity(f, TsInterval.open(0, 2)).kind is Monotonicity.VACUOUS


# --- duality ---------------------------------------------------------------------------

def test_dual_function_twice_is_identity():
    f = fn(FS, lambda t: t * t).tabulate()
    ff = dual_function(dual_function(f))
    assert ff.scale == f.scale and table(ff) == table(f)


def test_dual_of_identity():
    ts = FiniteSet((0, 1, 2))
    fs = dual_function(fn(ts, lambda t: t))
    assert fs(-2) == 2 and fs(0) == 0
    assert set(nabla_derivative(fs).values()) == {-1}


def test_dual_of_constant():
    fs = dual_function(fn(FS, lambda t: 3))
    assert set(fs.tabulate().values()) == {3}
    assert set(delta_derivative(fs).values()) == set(nabla_derivative(fs).values()) == {0}


# --- mean value witnesses ------------------------------------------------------------------

def test_mvt_square_over_identity():
    w = cauchy_mvt_witnesses(fn(FS, lambda t: t * t), fn(FS, lambda t: t), 0, 4)
    assert w.middle_ratio == 4
    assert (w.c1.value, w.lower_ratio) == (0, 1)
    assert (w.c2.value, w.upper_ratio) == (2, 6)
    assert w.holds


def test_mvt_equal_functions():
    f = fn(FS, lambda t: t * t + t)
    w = cauchy_mvt_witnesses(f, f, 0, 4)
    assert w.lower_ratio == w.middle_ratio == w.upper_ratio == 1


def test_mvt_constant_numerator():
    w = cauchy_mvt_witnesses(fn(FS, lambda t: 5), fn(FS, lambda t: t), 0, 4)
    assert w.middle_ratio == 0 and w.lower_ratio == 0 and w.holds


def test_mvt_rejects_sign_change_and_degenerate():
    with pytest.raises(SignConditionViolated):
        cauchy_mvt_witnesses(fn(FS, lambda t: t), fn(FS, lambda t: abs(t - 1)), 0, 4)
    with pytest.raises(DegenerateInterval):
        cauchy_mvt_witnesses(fn(FS, lambda t: t), fn(FS, lambda t: t), 2, 2)


# --- evaluation and csv ----------------------------------------------------------------------

def test_call_outside_domain():
    f = fn(FS, lambda t: t, domain=TsInterval.closed(0, 2))
    with pytest.raises(PointNotInScale):
        f(4)


def test_table_must_cover_domain():
    with pytest.raises(ValueError):
        GridFunction(FS, FS.full_interval(), table={0: 1, 1: 2})


def test_load_csv_q_notation():
    ts = QScale("0.5", 0, 4)
    f, g = load_csv(io.StringIO("t,f,g\nq^2,1,2\nq^1,3/2,5\n1,2,7\n"), ts)
    assert f(ts.at(2)) == 1 and g(1) == 7


def test_load_csv_infers_finite_scale():
    f, g = load_csv(io.StringIO("t,f\n0,0\n1,1\n3,9\n"))
    assert f.scale.spec() == "finite 0,1,3" and g is None


@pytest.mark.parametrize(
    "text",
    ["x,f\n0,1\n", "t,f\n0,1\n0,2\n", "t,f,g\n0,1\n", "t,f\n0,one\n"],
)
def test_load_csv_format_errors(text):
    with pytest.raises(CsvFormatError):
        load_csv(io.StringIO(text), FS)


def test_load_csv_gap_rejected():
    with pytest.raises(CsvFormatError):
        load_csv(io.StringIO("t,f\n0,0\n2,1\n"), FS)


def test_mpf_values_flow_through():
    with mp.workdps(40):
        f = fn(FS, lambda t: mp.exp(mpf(int(t.numerator)) / int(t.denominator)))
        d = delta_derivative(f)
        assert abs(d(0) - (mp.e - 1)) < mpf(10) ** -35


# --- properties ----------------------------------------------------------------------------------

points = st.lists(
    st.fractions(min_value=-10, max_value=10, max_denominator=12), min_size=3, max_size=20, unique=True
).map(lambda xs: FiniteSet(tuple(sorted(xs))))
scales = st.one_of(
    points,
    st.builds(lambda q, lo, n: QScale(q, lo, lo + n), st.sampled_from(["0.3", "0.5", "0.9"]), st.integers(-4, 4), st.integers(2, 20)),
    st.builds(UniformLattice, st.integers(-5, 5), st.fractions(min_value=Fraction(1, 8), max_value=2, max_denominator=8), st.integers(3, 25)),
)
coeffs = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=1, max_size=4)


def poly(cs):
    return lambda t: sum(c * t**i for i, c in enumerate(cs))


@settings(max_examples=50, deadline=None)
@given(scales, coeffs)
def test_fundamental_identity(ts, cs):
    f = fn(ts, poly(cs))
    for p, d in delta_derivative(f).items():
        s = sigma(ts, p)
        assert f(s) == f(p) + (s.value - p.value) * d


@settings(max_examples=50, deadline=None)
@given(scales)
def test_square_rule_exact(ts):
    for p, d in delta_derivative(fn(ts, lambda t: t * t)).items():
        assert d == p.value + sigma(ts, p).value


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["0.3", "0.5", "0.9"]), st.integers(-3, 3), coeffs)
def test_nabla_equals_q_derivative_in_floats(q, lo, cs):
    ts = QScale(q, lo, lo + 12)
    ctx = QContext(q)
    f = poly([float(c) for c in cs])
    fl = lambda t: f(float(t))  # noqa: E731
    for p, d in nabla_derivative(fn(ts, fl)).items():
        ref = q_derivative(ctx, fl, p.value)
        assert abs(d - ref) <= 1e-14 * max(1.0, abs(ref))


@settings(max_examples=50, deadline=None)
@given(scales, coeffs)
def test_duality_of_derivatives(ts, cs):
    f = fn(ts, poly(cs))
    nab = nabla_derivative(dual_function(f))
    for p, d in delta_derivative(f).items():
        assert nab(-p.value) == -d


@settings(max_examples=50, deadline=None)
@given(scales, coeffs)
def test_integrate_inverts_derivative(ts, cs):
    f = fn(ts, poly(cs)).tabulate()
    a = f.points()[0]
    back = delta_integrate(delta_derivative(f), a, f(a))
    assert table(back) == table(f)


@settings(max_examples=50, deadline=None)
@given(scales, st.lists(st.fractions(min_value=Fraction(1, 50), max_value=3, max_denominator=50), min_size=40, max_size=40))
def test_positive_derivative_means_increasing(ts, rates):
    pts = ts.all_points()
    rate = GridFunction.from_values(ts, rates[: len(pts) - 1], TsInterval.closed(pts[0], pts[-2]))
    f = delta_integrate(rate, pts[0], 0)
    # exact values: no tolerance band needed (steps can be ~1e-13 on deep q-scales)
    assert classify_monotonicity(f, tol=0).kind is Monotonicity.STRICTLY_INCREASING


@settings(max_examples=50, deadline=None)
@given(scales, coeffs, st.lists(st.fractions(min_value=Fraction(1, 10), max_value=4, max_denominator=10), min_size=40, max_size=40), st.data())
def test_mvt_sandwich_random(ts, cs, grates, data):
    pts = ts.all_points()
    rate = GridFunction.from_values(ts, grates[: len(pts) - 1], TsInterval.closed(pts[0], pts[-2]))
    G = delta_integrate(rate, pts[0], 0)
    F = fn(ts, poly(cs))
    i = data.draw(st.integers(0, len(pts) - 2))
    j = data.draw(st.integers(i + 1, len(pts) - 1))
    w = cauchy_mvt_witnesses(F, G, pts[i], pts[j])
    assert w.lower_ratio <= w.middle_ratio <= w.upper_ratio
    assert pts[i] <= w.c1 < pts[j] and pts[i] <= w.c2 < pts[j]
