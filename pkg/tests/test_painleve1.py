from fractions import Fraction

import pytest
from mpmath import mp, mpf

from cubicmm.errors import PoleFitError, SeedAccuracyError
from cubicmm.numkernel import PrecisionContext
from cubicmm.painleve1 import (
    SeedState,
    asymptotic_coefficients,
    asymptotic_seed,
    big_Y,
    boutroux_sector,
    detect_pole,
    exact_coefficients,
    integrate,
    laurent_coefficients,
    laurent_eval,
    median_seed,
)

CTX = PrecisionContext(digits=60)


def test_first_coefficients():
    b = exact_coefficients(4)
    assert b[0] == 1
    # a_k = b_k 6^{-k/2}
    assert b[1] == Fraction(-1, 8)
    assert b[2] / 6 == Fraction(-49, 768)
    with CTX.workdps():
        a = asymptotic_coefficients(2, CTX)
        assert abs(a[1] + 1 / (8 * mp.sqrt(6))) < mpf(10) ** -60


def test_leading_term_only():
    s = asymptotic_seed(-30, 0, CTX)
    with CTX.workdps():
        assert abs(s.y - mp.sqrt(5)) < mpf(10) ** -60


def test_seed_derivative_consistency():
    with CTX.workdps():
        lam, h = mpf(-20), mpf("1e-4")
        K = 12
        yp = (asymptotic_seed(lam + h, K, CTX).y - asymptotic_seed(lam - h, K, CTX).y) / (2 * h)
        assert abs(yp - asymptotic_seed(lam, K, CTX).yprime) < 10 * h * h


def test_seed_accuracy_signal():
    with pytest.raises(SeedAccuracyError):
        asymptotic_seed(-1, None, CTX, tol=1e-12)
    with pytest.raises(ValueError):
        asymptotic_seed(1, 3, CTX)


@pytest.mark.parametrize("K", [2, 6, 10, 20])
def test_seed_order_robustness(K):
    with CTX.workdps():
        a = asymptotic_seed(-30, K, CTX)
        mid = asymptotic_seed(-30, K + 1, CTX)
        b = asymptotic_seed(-30, K + 2, CTX)
        # the a_k share one sign, so the gap is exactly the next two terms added
        gap = abs(a.y - b.y)
        assert abs(gap / (a.error_estimate + mid.error_estimate) - 1) < mpf(10) ** -20
        assert gap < 2 * a.error_estimate


def test_median_seed_agrees_with_truncation():
    ctx = PrecisionContext(digits=90)
    m = median_seed(-30, ctx)
    t = asymptotic_seed(-30, None, ctx, tol=1e-40)
    with ctx.workdps():
        assert abs(m.y - t.y) < t.error_estimate
        # the y' series carries an extra factor of order K/|lambda| per term
        assert abs(m.yprime - t.yprime) < 10 * t.error_estimate


def test_laurent_fixed_coefficients():
    with CTX.workdps():
        b = laurent_coefficients(mpf(3), mpf("0.2"), 12)
        assert b[:4] == [1, 0, 0, 0]
        assert b[4] == mpf(-3) / 10 and b[5] == mpf(-1) / 6 and b[6] == mpf("0.2")
        # the series solves y'' = 6 y^2 + lambda
        lam = mpf("3.05")
        y, _ = laurent_eval(3, mpf("0.2"), lam)
        d2 = mp.diff(lambda t: laurent_eval(3, mpf("0.2"), t)[0], lam, 2)
        assert abs(d2 - 6 * y * y - lam) < mpf(10) ** -30


def _synthetic_nodes(lam_j, C, four_terms=False):
    out = []
    for i in range(60):
        l = lam_j - mpf("0.1") * mpf("0.85") ** i
        e = l - lam_j
        if four_terms:
            y = 1 / e ** 2 - lam_j / 10 * e ** 2 - e ** 3 / 6 + C * e ** 4
        else:
            y = laurent_eval(lam_j, C, l)[0]
        out.append((l, y))
    return out


@pytest.mark.parametrize("four_terms", [False, True])
def test_pole_round_trip(four_terms):
    with CTX.workdps():
        rec, state = detect_pole(_synthetic_nodes(mpf(3), mpf(0), four_terms), mpf("0.1"), CTX)
        assert abs(rec.location - 3) < 1e-8
        assert abs(state.lam - (rec.location + mpf("0.1"))) < mpf(10) ** -50
        assert rec.fit_nodes > 3


def test_pole_fit_rejected():
    with CTX.workdps():
        nodes = [(l, 2 * y) for l, y in _synthetic_nodes(mpf(3), mpf(0))]
        with pytest.raises(PoleFitError):
            detect_pole(nodes, mpf("0.1"), CTX)


def test_residual_and_poles(reference):
    sol, ctx = reference
    with ctx.workdps():
        assert sol.max_residual() < mpf("1e-10")
        assert len(sol.poles) == 2
        assert abs(sol.poles[0].location - mpf("2.718283703550")) < 1e-9
        assert all(p.fit_residual < 1e-8 for p in sol.poles)
        # leading coefficient exactly 1 is built into the Laurent model
        assert laurent_coefficients(sol.poles[0].location, sol.poles[0].laurent_C, 6)[0] == 1


def test_residual_scales_with_tolerance():
    ctx = PrecisionContext(digits=90)
    seed = median_seed(-30, ctx)
    res = {}
    for tol in ("1e-8", "1e-10", "1e-12"):
        sol = integrate(seed, -30, 2, mpf(tol), ctx)
        res[tol] = sol.max_residual()
        assert res[tol] < mpf(tol)
    with ctx.workdps():
        for a, b in (("1e-8", "1e-10"), ("1e-10", "1e-12")):
            ratio = res[a] / res[b]
            assert 10 <= ratio <= 1000


def test_hamiltonian_identity(reference):
    sol, ctx = reference
    with ctx.workdps():
        for lam, y, yp, H in zip(sol.grid, sol.y, sol.yprime, sol.hamiltonian):
            assert abs(H - (yp * yp / 2 - 2 * y ** 3 - lam * y)) < mpf(10) ** -50 * (1 + abs(H))
        mp.dps = 30
        a, b = mpf(-30), mpf(2)
        H = lambda l: (lambda y, yp: yp * yp / 2 - 2 * y ** 3 - l * y)(*sol.evaluate(l))
        integral = mp.quad(lambda l: sol.evaluate(l)[0], mp.linspace(a, b, 9))
        assert abs(H(b) - H(a) + integral) < 1e-9


def test_reseed_consistency():
    ctx = PrecisionContext(digits=90)
    tol = mpf("1e-10")
    sol = integrate(median_seed(-30, ctx), -30, -10, tol, ctx)
    reseed = asymptotic_seed(-10, None, ctx)
    with ctx.workdps():
        assert abs(sol.y[-1] - reseed.y) < 10 * tol
        assert abs(sol.yprime[-1] - reseed.yprime) < 10 * tol


def test_backward_pole_crossing(reference):
    sol, ctx = reference
    tol = mpf("1e-10")
    with ctx.workdps():
        p = sol.poles[0]
        lam_r = p.location + mpf("0.1")
        y, yp = sol.evaluate(lam_r)
    back = integrate(SeedState(lam_r, y, yp, "restart", 0, 0), lam_r, 2, tol, ctx)
    with ctx.workdps():
        assert len(back.poles) == 1
        assert abs(back.poles[0].location - p.location) < 1e-8
        y0, _ = sol.evaluate(2)
        assert abs(back.evaluate(2)[0] - y0) < 100 * tol


def test_big_Y(reference):
    sol, ctx = reference
    with ctx.workdps():
        lam0 = sol.grid[0]
        x = -lam0
        Y0, _ = sol.evaluate_Y(lam0)
        two = 2 * mp.sqrt(6) / 45 * x ** mpf(2.5) + mp.log(x) / 48
        # the full series differs from two terms by O(x^{-5/2})
        assert abs(Y0 - two) < 10 * x ** mpf(-2.5)
        explicit = big_Y(sol, ctx, terms=2)
        assert abs(explicit.evaluate_Y(lam0)[0] - two) < mpf(10) ** -50
        # Y'' = y
        l, h = mpf("-3.3"), mpf("1e-6")
        d2 = (sol.evaluate_Y(l + h)[0] - 2 * sol.evaluate_Y(l)[0] + sol.evaluate_Y(l - h)[0]) / h ** 2
        assert abs(d2 - sol.evaluate(l)[0]) < 1e-6
        # exp(-Y) has a simple zero at the pole
        lj = sol.poles[0].location
        for e in (mpf("0.01"), mpf("-0.01")):
            tau = sol.tau(lj + e)
            ref = sol.tau(lj + 2 * e) / 2
            assert abs(tau / ref - 1) < 0.05
        assert sol.tau(lj - mpf("0.05")) * sol.tau(lj + mpf("0.05")) < 0


def test_boutroux():
    c = boutroux_sector(-1)
    assert c.sector is None and c.ray == 3 and 2 in c.adjacent
    assert boutroux_sector(mp.expjpi(mpf(1) / 5)).ray == 1
    assert boutroux_sector(mp.expjpi(mpf(1) / 2)).sector == 1
    assert boutroux_sector(mp.expjpi(mpf("0.9"))).sector == 2
    with pytest.raises(ValueError):
        boutroux_sector(0)
