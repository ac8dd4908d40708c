import pytest
from mpmath import mp, mpc, mpf

from cubicmm.errors import WeightDecayError
from cubicmm.numkernel import PrecisionContext, integrate_ray
from cubicmm.orthopoly import (
    RAY_ANGLES,
    ModelPoint,
    compute_table,
    eval_polynomial,
    moments,
    polynomial_coefficients,
    recurrence_table,
    string_residuals,
    truncation_radius,
    u_critical,
)

CTX = PrecisionContext(digits=40)


def _uc(ctx=CTX):
    with ctx.workdps():
        return u_critical()


def contour_integral(model, f):
    """Direct ray quadrature of f(z) e^{-N V(z)} over the alpha-weighted contour."""
    ctx = model.ctx
    total = mpc(0)
    with ctx.workdps():
        u, N, a = model.u, model.N, model.alpha
        for frac, c0, c1 in RAY_ANGLES:
            coef = c0 * a + c1 * (1 - a)
            if coef == 0:
                continue
            theta = mp.pi * frac
            R = truncation_radius(N, u, theta, 12, ctx)
            g = lambda z: f(z) * mp.exp(-N * (z * z / 2 - u * z ** 3))
            total += coef * integrate_ray(g, theta, R, ctx)
    return total


@pytest.mark.parametrize("alpha", [mpf(1) / 2, mpc(0.3, 0.8)])
def test_gaussian_moments(alpha):
    N = 7
    m = moments(ModelPoint(0, N, n_max=2, alpha=alpha, ctx=CTX))
    with CTX.workdps():
        m0 = mp.sqrt(2 * mp.pi / N)
        assert abs(m[0] - m0) < mpf(10) ** -38
        assert abs(m[1]) < mpf(10) ** -38
        assert abs(m[2] - m0 / N) < mpf(10) ** -38


def test_real_moments_for_symmetric_contour():
    m = moments(ModelPoint(_uc() / 2, 6, ctx=CTX))
    assert all(abs(x.imag) < mpf(10) ** -38 * (1 + abs(x)) for x in m)


def test_moments_panel_doubling():
    a = PrecisionContext(digits=40, panel_nodes=48)
    b = PrecisionContext(digits=40, panel_nodes=96)
    ma = moments(ModelPoint(_uc() / 2, 4, n_max=4, ctx=a))
    mb = moments(ModelPoint(_uc() / 2, 4, n_max=4, ctx=b))
    with a.workdps():
        for x, y in zip(ma, mb):
            assert abs(x - y) <= mpf(10) ** (-a.digits + a.guard_digits) * max(abs(x), mpf(1))


def test_gaussian_recurrence():
    N = 20
    t = compute_table(ModelPoint(0, N, n_max=N, ctx=CTX))
    with CTX.workdps():
        for n in range(1, N + 1):
            assert abs(t.gamma2_n(n) - mpf(n) / N) < mpf(10) ** -30
        assert max(abs(b) for b in t.beta) < mpf(10) ** -30


def test_gamma2_is_norm_ratio():
    t = compute_table(ModelPoint(_uc() / 2, 8, ctx=CTX))
    with CTX.workdps():
        for n in range(1, len(t.gamma2) + 1):
            assert abs(t.gamma2_n(n) - t.h[n] / t.h[n - 1]) < mpf(10) ** -35 * abs(t.gamma2_n(n))


@pytest.mark.parametrize("alpha", ["0.3", "0.3+0.4j"])
def test_conjugate_symmetry(alpha):
    # conj(Gamma0) = Gamma1, so the table at 1 - conj(alpha) is the conjugate
    with CTX.workdps():
        u = _uc() * mpf("0.8")
        alpha = mp.mpmathify(alpha)
        t1 = compute_table(ModelPoint(u, 6, alpha=alpha, ctx=CTX))
        t2 = compute_table(ModelPoint(u, 6, alpha=1 - mp.conj(alpha), ctx=CTX))
        for a, b in zip(t1.gamma2 + t1.beta, t2.gamma2 + t2.beta):
            assert abs(a - mp.conj(b)) < mpf(10) ** -40 * (1 + abs(a))


def test_symmetric_contour_is_real():
    t = compute_table(ModelPoint(_uc(), 10, ctx=CTX))
    with CTX.workdps():
        for x in t.h + t.gamma2 + t.beta:
            assert abs(mp.im(x)) < mpf(10) ** -20 * (1 + abs(x))


def test_p1_and_orthogonality():
    model = ModelPoint(_uc() / 2, 6, ctx=CTX)
    t = compute_table(model)
    with CTX.workdps():
        m = t.moments
        assert abs(t.beta[0] - m[1] / m[0]) < mpf(10) ** -35
        z = mpc(0.3, 1.1)
        assert abs(eval_polynomial(t, z, 1) - (z - t.beta[0])) < mpf(10) ** -35
        scale = abs(m[0])
        assert abs(contour_integral(model, lambda z: eval_polynomial(t, z, 2) * z)) < mpf(10) ** -30 * scale
        for n in range(6):
            hn = contour_integral(model, lambda z: eval_polynomial(t, z, n) ** 2)
            assert abs(hn - t.h[n]) < mpf(10) ** -28 * abs(t.h[n])


def test_polynomial_coefficients_match_recurrence():
    t = compute_table(ModelPoint(_uc() / 3, 5, ctx=CTX))
    with CTX.workdps():
        c = polynomial_coefficients(t, 4)
        z = mpf("0.77")
        assert abs(mp.polyval(c[::-1], z) - eval_polynomial(t, z, 4)) < mpf(10) ** -35


def test_degree_shift_consistency():
    model = ModelPoint(_uc() / 2, 8, n_max=8, ctx=CTX)
    a = compute_table(model)
    b = compute_table(model.replace(n_max=10))
    with CTX.workdps():
        tol = mpf(10) ** (-CTX.digits + CTX.guard_digits)
        pairs = list(zip(a.gamma2, b.gamma2)) + list(zip(a.beta, b.beta)) + list(zip(a.h, b.h))
        for x, y in pairs:
            assert abs(x - y) < tol * (1 + abs(x))


def test_string_residuals_gaussian():
    r = string_residuals(compute_table(ModelPoint(0, 10, ctx=CTX)))
    assert r.max_abs < mpf(10) ** -30


@pytest.mark.parametrize("N", [20, 40])
def test_string_residuals_critical(N):
    ctx = PrecisionContext.for_model(N)
    r = string_residuals(compute_table(ModelPoint(_uc(ctx), N, ctx=ctx)))
    assert r.max_abs < mpf(10) ** (-ctx.digits / 2)


def test_string_residuals_precision_scaling():
    lo, hi = PrecisionContext(digits=40), PrecisionContext(digits=50)
    r = [string_residuals(compute_table(ModelPoint(_uc(c), 12, ctx=c))).max_abs for c in (lo, hi)]
    assert r[0] / r[1] >= 10


def test_recurrence_from_explicit_moments():
    model = ModelPoint(_uc() / 2, 5, ctx=CTX)
    m = moments(model)
    assert recurrence_table(m, model).gamma2 == compute_table(model).gamma2


def test_weight_decay_check():
    with pytest.raises(WeightDecayError):
        ModelPoint(-0.5, 5, ctx=CTX)
    with pytest.raises(ValueError):
        ModelPoint(0.01, 0, ctx=CTX)


def test_to_dict_round_numbers():
    t = compute_table(ModelPoint(_uc() / 2, 3, ctx=CTX))
    d = t.to_dict()
    assert d["N"] == 3 and len(d["gamma2"]) == len(t.gamma2)
    assert d["gamma2"][0]["re"].startswith(mp.nstr(mp.re(t.gamma2[0]), 10)[:8])
