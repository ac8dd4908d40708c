from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from cubicmm.errors import DivergenceError, NonConvergenceError
from cubicmm.numkernel import PrecisionContext, integrate_ray, pfq, solve_cubic


def test_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext(digits=14)
    with pytest.raises(ValueError):
        PrecisionContext(guard_digits=4)
    with pytest.raises(ValueError):
        PrecisionContext(panel_nodes=50)
    assert PrecisionContext.for_model(10).digits == 40
    assert PrecisionContext.for_model(30).digits == 90


def test_cubic_u_zero(ctx40):
    roots = solve_cubic(18, -9, 1, 0, ctx40)
    with ctx40.workdps():
        expect = [mpf(1) / 3, mpf(1) / 6, 0]
        for r, e in zip(roots, expect):
            assert abs(r - e) < mpf(10) ** -40


def test_cubic_triple_zero(ctx40):
    assert all(r == 0 for r in solve_cubic(1, 0, 0, 0, ctx40))


def test_cubic_critical_double_root(ctx40):
    with ctx40.workdps():
        uc = mp.root(3, 4) / 18
        roots = solve_cubic(18, -9, 1, -6 * uc ** 2, ctx40)
        s3 = mp.sqrt(3)
        assert abs(roots[0] - (mpf(1) / 6 + s3 / 9)) < mpf(10) ** -40
        # a double root is only determined to half the working precision
        for r in roots[1:]:
            assert abs(r - (mpf(1) / 6 - s3 / 18)) < mpf(10) ** -20


def test_cubic_rejects_degenerate(ctx40):
    with pytest.raises(ValueError):
        solve_cubic(0, 1, 2, 3, ctx40)


coef = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=1000, deadline=None)
@given(coef.filter(lambda x: abs(x) > 1e-6), coef, coef, coef)
def test_cubic_residual_bound(c3, c2, c1, c0):
    ctx = PrecisionContext(digits=30)
    roots = solve_cubic(c3, c2, c1, c0, ctx)
    with ctx.workdps():
        scale = max(abs(mpf(c)) for c in (c3, c2, c1, c0))
        for r in roots:
            val = ((c3 * r + c2) * r + c1) * r + c0
            # residual bound relative to the coefficient scale, measured in |r|^3 units
            assert abs(val) <= mpf(10) ** (-ctx.digits + ctx.guard_digits) * scale * max(1, abs(r)) ** 3
        # descending real part (rounded at 10^-digits), then descending imaginary part
        ulp = mpf(10) ** -ctx.digits
        for p, q in zip(roots, roots[1:]):
            assert p.real >= q.real - ulp
            if abs(p.real - q.real) < ulp / 10:
                assert p.imag >= q.imag


def test_gaussian_half_line(ctx40):
    with ctx40.workdps():
        ref = mp.sqrt(mp.pi / 2)
        v = integrate_ray(lambda z: mp.exp(-z * z / 2), 0, 20, ctx40)
        assert abs(v - ref) < mpf(10) ** -38
        v2 = integrate_ray(lambda z: z * z * mp.exp(-z * z / 2), 0, 20, ctx40)
        assert abs(v2 - ref) < mpf(10) ** -38


def test_ray_rotation_by_cauchy(ctx40):
    with ctx40.workdps():
        f = lambda z: mp.exp(-z * z / 2)
        a = integrate_ray(f, mp.pi / 5, 40, ctx40)
        # close the sector at infinity: int over arg pi/5 equals int over arg 0
        b = integrate_ray(f, 0, 20, ctx40)
        assert abs(a - b) < mpf(10) ** -38


def test_ray_nonconvergence():
    ctx = PrecisionContext(digits=20, max_panels=2)
    with pytest.raises(NonConvergenceError):
        integrate_ray(lambda z: mp.cos(50 * z), 0, 40, ctx)


@pytest.mark.parametrize("k", [0, 7, 40, 80])
def test_panel_doubling(k):
    from cubicmm.orthopoly import ray_moments

    a = PrecisionContext(digits=40, panel_nodes=48)
    b = PrecisionContext(digits=40, panel_nodes=96)
    with a.workdps():
        u = mp.root(3, 4) / 18
        m1 = ray_moments(40, u, mp.pi / 5, k, a)[k]
        m2 = ray_moments(40, u, mp.pi / 5, k, b)[k]
        assert abs(m1 - m2) <= mpf(10) ** (-a.digits + a.guard_digits) * abs(m1)


def test_pfq_trivial(ctx40):
    assert pfq([1, 2, 3], [4, 5], 0, ctx40) == 1
    with ctx40.workdps():
        assert abs(pfq([1, 1], [2], mpf(1) / 2, ctx40) - 2 * mp.log(2)) < mpf(10) ** -40
    assert pfq([0, "1/2", 3], ["5/2", 4], "3/7", ctx40, exact=True) == 1


def test_pfq_terminating_exact():
    a = pfq([-4, "1/3", 2], ["7/2", 5], "-9", PrecisionContext(digits=30), exact=True)
    b = pfq([-4, "1/3", 2], ["7/2", 5], "-9", PrecisionContext(digits=120), exact=True)
    assert isinstance(a, Fraction) and a == b
    # direct sum
    s, t = Fraction(0), Fraction(1)
    for k in range(5):
        s += t
        t *= Fraction(-4 + k) * (Fraction(1, 3) + k) * (2 + k) * -9 / ((Fraction(7, 2) + k) * (5 + k) * (k + 1))
    assert a == s


def test_pfq_divergent(ctx40):
    with pytest.raises(DivergenceError):
        pfq([1, 1], [2], 2, ctx40)


def test_pfq_unit_argument(ctx40):
    # Gauss: 2F1(a,b;c;1) = G(c)G(c-a-b)/(G(c-a)G(c-b))
    with ctx40.workdps():
        a, b, c = mpf(1) / 3, mpf(1) / 4, mpf(2)
        ref = mp.gamma(c) * mp.gamma(c - a - b) / (mp.gamma(c - a) * mp.gamma(c - b))
        assert abs(pfq([a, b], [c], 1, ctx40) - ref) < mpf(10) ** -38


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=-0.9, max_value=0.9))
def test_pfq_matches_mpmath(z):
    ctx = PrecisionContext(digits=30)
    with ctx.workdps():
        v = pfq(["1/2", "2/3", 1], ["3/2", "5/4"], z, ctx)
        ref = mp.hyper([mpf(1) / 2, mpf(2) / 3, 1], [mpf(3) / 2, mpf(5) / 4], z)
        assert abs(v - ref) <= mpf(10) ** -29 * abs(ref)
