import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpc, mpf

from cubicmm.equilibrium import (
    conformal_maps,
    density,
    density_zeta,
    modified_measure,
    phi_cr,
    phi_u,
    resolvent_cr,
    solve_equilibrium,
)
from cubicmm.errors import BranchCutError, RadiusError
from cubicmm.numkernel import PrecisionContext

CTX = PrecisionContext(digits=30)


def uc():
    return mp.root(3, 4) / 18


def test_gaussian_endpoints():
    eq = solve_equilibrium(0, CTX)
    assert eq.a == -2 and eq.b == 2 and eq.x_mid == 0 and eq.zeta0 == mp.inf
    with CTX.workdps():
        assert abs(mp.quad(lambda z: density(eq, z), [-2, 2]) - 1) < mpf(10) ** -25


def test_critical_endpoint_coalesces():
    with CTX.workdps():
        eq = solve_equilibrium(uc(), CTX)
        assert abs(eq.zeta0 - 1) < mpf(10) ** -25
        # rho_cr(x) = (2/pi)(1-x)sqrt(1-x^2) in zeta coordinates
        for x in (mpf("-0.7"), mpf("0.1"), mpf("0.9")):
            ref = 2 / mp.pi * (1 - x) * mp.sqrt(1 - x * x)
            assert abs(density_zeta(eq, x) - ref) < mpf(10) ** -25


def test_zeta0_expansion_near_critical():
    with CTX.workdps():
        ds = mpf("1e-6")
        # s = 108 sqrt3 u^2, so s = 1 - ds at u = u_c sqrt(1 - ds)
        eq = solve_equilibrium(uc() * mp.sqrt(1 - ds), CTX)
        series = 1 + mp.sqrt(6) / 2 * mp.sqrt(ds) + mpf(7) / 12 * ds
        assert abs(eq.zeta0 - series) < 10 * ds ** mpf(1.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.999))
def test_invariants(frac):
    with CTX.workdps():
        u = uc() * frac
        eq = solve_equilibrium(u, CTX)
        t = eq.tau
        assert abs(18 * t ** 3 - 9 * t ** 2 + t - 6 * u * u) < mpf(10) ** -28
        assert abs(eq.tau - u * eq.x_mid) < mpf(10) ** -28
        assert abs(eq.y_half - 2 / mp.sqrt(1 - 6 * eq.tau)) < mpf(10) ** -28
        assert eq.a < eq.b and eq.zeta0 > 1
        assert density(eq, eq.a) == 0 and density(eq, eq.b) == 0


@pytest.mark.parametrize("frac", ["0.3", "0.5", "0.9", "0.99"])
def test_density_normalized_and_nonnegative(frac):
    with CTX.workdps():
        eq = solve_equilibrium(uc() * mpf(frac), CTX)
        assert abs(mp.quad(lambda z: density(eq, z), [eq.a, eq.b]) - 1) < mpf(10) ** -15
        assert all(density(eq, eq.a + (eq.b - eq.a) * k / 50) >= 0 for k in range(51))


def test_zeta0_monotone():
    with CTX.workdps():
        z = [solve_equilibrium(uc() * (mpf(1) / 2 + mpf(k) / 40), CTX).zeta0 for k in range(20)]
        assert all(a > b for a, b in zip(z, z[1:]))


def test_rejects_out_of_range():
    with pytest.raises(ValueError):
        solve_equilibrium(-0.01, CTX)
    with pytest.raises(ValueError):
        solve_equilibrium(0.1, CTX)
    with pytest.raises(ValueError):
        density(solve_equilibrium(0, CTX), 3)


def test_phi_cr_values():
    with CTX.workdps():
        assert phi_cr(1) == 0
        z = mpf(1000)
        assert abs(phi_cr(z) / z ** 3 - mpf(4) / 3) < mpf(3) / z
        d = mpf("1e-3")
        ratio = phi_cr(1 + d) / (8 * mp.sqrt(2) / 5 * d ** mpf(2.5))
        assert abs(ratio - 1) < 10 * d
        with pytest.raises(BranchCutError):
            phi_cr(mpc(0.5, 0))


def test_phi_cr_derivative():
    with CTX.workdps():
        pts = [mpc(2 + k / 5, (-1) ** k * (1 + k / 7)) for k in range(20)]
        for z in pts:
            num = mp.diff(phi_cr, z)
            ref = 4 * mp.sqrt(z + 1) * (z - 1) * mp.sqrt(z - 1)
            assert abs(num - ref) < mpf(10) ** -20 * abs(ref)


def test_resolvent():
    with CTX.workdps():
        z = mpf(10) ** 6
        assert abs(resolvent_cr(z) * z - 1) < mpf(10) ** -5
        for x in (mpf("-0.5"), mpf("0.2"), mpf("0.8")):
            eps = mpf(10) ** -12
            plus = resolvent_cr(mpc(x, eps))
            minus = resolvent_cr(mpc(x, -eps))
            assert abs(plus + minus - (-4 * x * x + 4 * x + 2)) < mpf(10) ** -10
            rho = 2 / mp.pi * (1 - x) * mp.sqrt(1 - x * x)
            # Cauchy transform int rho/(zeta - x): the upper boundary value has Im = -pi rho
            assert abs(plus.imag + mp.pi * rho) < mpf(10) ** -10
            assert abs(minus.imag - mp.pi * rho) < mpf(10) ** -10
        with pytest.raises(BranchCutError):
            resolvent_cr(0.3)


def test_modified_measure_at_critical():
    with CTX.workdps():
        mm = modified_measure(uc(), CTX)
        assert abs(mm.sigma_u + 1) < mpf(10) ** -25
        assert abs(mm.a2 + 4) < mpf(10) ** -25 and abs(mm.a1) < mpf(10) ** -25 and abs(mm.a0) < mpf(10) ** -25


@pytest.mark.parametrize("du", ["1e-3", "-1e-3", "3e-4"])
def test_modified_measure_series_and_a2(du):
    with CTX.workdps():
        du = mpf(du)
        mm = modified_measure(uc() + du, CTX)
        lead = -1 + mp.power(3, mpf(7) / 4) * (2 - mp.sqrt(3)) * du
        assert abs(mm.sigma_u - lead) < 50 * du * du
        assert abs(mm.a2 - (-4 - 8 * mp.power(3, mpf(7) / 4) * du)) < mpf(10) ** -28


def test_modified_measure_mass():
    with CTX.workdps():
        mm = modified_measure(uc() - mpf("1e-3"), CTX)
        assert abs(mm.mass() - 1) < mpf(10) ** -15


def test_modified_measure_radius():
    with pytest.raises(RadiusError):
        modified_measure(uc() - mpf("0.05"), CTX)


@pytest.mark.parametrize("delta", ["1e-3", "1e-4", "1e-5"])
def test_sign_change_points(delta):
    with CTX.workdps():
        delta = mpf(delta)
        mm = modified_measure(uc() - delta, CTX)
        r = sorted(mm.m_roots()[:2])
        half = (r[1] - r[0]) / 2
        lead = mp.power(3, mpf(7) / 8) * mp.sqrt(delta)
        assert abs(half - lead) < 30 * delta
        assert abs((r[0] + r[1]) / 2 - 1) < 30 * delta


def test_phi_u_reduces_to_phi_cr():
    with CTX.workdps():
        mm = modified_measure(uc(), CTX)
        for z in (mpc(1.3, 0.2), mpc(1.1, -0.3), mpf(1.4)):
            assert abs(phi_u(mm, z) - phi_cr(z)) < mpf(10) ** -20


def test_conformal_maps():
    with CTX.workdps():
        d = mpf("1e-4")
        cm = conformal_maps(uc(), 1 + d, 10, CTX)
        assert abs(cm.f / d - mp.power(2, mpf(1) / 5)) < 10 * d
        # d/du h_u(1) at u_c equals 2^{12/5} 3^{7/4} = 1/c1
        e = mpf("1e-8")
        hp = conformal_maps(uc() + e, 1, 1, CTX).lambda_at_1
        hm = conformal_maps(uc() - e, 1, 1, CTX).lambda_at_1
        c1 = mp.power(2, mpf(-12) / 5) * mp.power(3, mpf(-7) / 4)
        assert abs((hp - hm) / (2 * e) * c1 - 1) < mpf(10) ** -6
        # N^{4/5} h_u(1) = lambda under N^{4/5}(u - u_c) = c1 lambda
        N, lam = 1000, mpf("0.7")
        u = uc() + c1 * lam / mpf(N) ** (mpf(4) / 5)
        assert abs(conformal_maps(u, 1, N, CTX).lambda_at_1 - lam) < mpf(10) ** -2
        with pytest.raises(RadiusError):
            conformal_maps(uc(), 2, 10, CTX)
