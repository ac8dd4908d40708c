"""Equilibrium-measure data for V(z; u) = z^2/2 - u z^3.

Two coordinate systems appear. For 0 <= u <= u_c the support is [a, b] in
z. Near criticality the fixed affine variable zeta, with
z = 3^{1/4}(2 zeta + sqrt3 - 1), maps the critical support onto [-1, 1];
the modified (signed) measure lives on [sigma_u, 1] in that variable.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .errors import BranchAmbiguityError, BranchCutError, RadiusError
from .numkernel import PrecisionContext, solve_cubic

__all__ = [
    "MODIFIED_MEASURE_RADIUS",
    "CONFORMAL_RADIUS",
    "EquilibriumData",
    "ModifiedMeasure",
    "ConformalMaps",
    "solve_equilibrium",
    "density",
    "density_zeta",
    "phi_cr",
    "resolvent_cr",
    "modified_measure",
    "phi_u",
    "conformal_maps",
]

# |u - u_c| allowed for the modified measure
MODIFIED_MEASURE_RADIUS = mpf("1e-2")
# |zeta - 1| allowed for the local conformal maps
CONFORMAL_RADIUS = mpf("0.5")


def _uc():
    return mp.root(3, 4) / 18


@dataclass(frozen=True)
class EquilibriumData:
    u: mpf
    s: mpf
    tau: mpf
    a: mpf
    b: mpf
    x_mid: mpf
    y_half: mpf
    zeta0: mpf

    def to_dict(self, digits: int = 30) -> dict:
        return {k: mp.nstr(getattr(self, k), digits)
                for k in ("u", "s", "tau", "a", "b", "x_mid", "y_half", "zeta0")}


def solve_equilibrium(u, ctx: PrecisionContext) -> EquilibriumData:
    """Endpoints of the support from the tau_3 branch of 18t^3 - 9t^2 + t = 6u^2."""
    with ctx.workdps():
        u = mpf(u)
        uc = _uc()
        if u < 0:
            raise ValueError("u must be non-negative")
        if u > uc * (1 + mpf(10) ** (-ctx.digits)):
            raise ValueError("u > u_c: endpoints are complex (not supported)")
        u = min(u, uc)
        s = 108 * mp.sqrt(3) * u * u
        if u < mpf(10) ** (-ctx.digits / 4):
            # tau_3 = 6u^2 + 324u^4 + ..., so x = tau/u has no 0/0
            tau = 6 * u * u + 324 * u ** 4
            x = 6 * u + 324 * u ** 3
        else:
            if u == uc:
                tau = mpf(1) / 6 - mp.sqrt(3) / 18
            else:
                roots = solve_cubic(18, -9, 1, -6 * u * u, ctx)
                tau = min(r.real for r in roots)  # the branch starting at 0
            x = tau / u
        y = 2 / mp.sqrt(1 - 6 * tau)
        zeta0 = mp.inf if u == 0 else (1 - 6 * tau) / (3 * u * y)
        return EquilibriumData(u, s, tau, x - y, x + y, x, y, zeta0)


def density(eq: EquilibriumData, z) -> mpf:
    """(1/2pi) sqrt((z-a)(b-z)) (1 - 3uz - 3ux) on [a, b]."""
    z = mpf(z)
    slack = mpf(10) ** (-(mp.dps - 5)) * (1 + abs(eq.b) + abs(eq.a))
    if z < eq.a - slack or z > eq.b + slack:
        raise ValueError(f"z = {mp.nstr(z, 10)} outside the support")
    w = max((z - eq.a) * (eq.b - z), mpf(0))
    return mp.sqrt(w) * (1 - 3 * eq.u * z - 3 * eq.u * eq.x_mid) / (2 * mp.pi)


def density_zeta(eq: EquilibriumData, zeta) -> mpf:
    """Density in zeta = (z - x)/y, supported on [-1, 1]."""
    return eq.y_half * density(eq, eq.x_mid + eq.y_half * mpf(zeta))


def _cut_guard(zeta, left, digits):
    """Raise if zeta is within 10^-(digits/2) of the cut (-inf, left]."""
    tol = mpf(10) ** (-mpf(digits) / 2)
    if zeta.real <= left:
        if abs(zeta.imag) < tol:
            raise BranchCutError(f"zeta = {mp.nstr(zeta, 10)} is on the cut")
    elif abs(zeta - left) < tol:
        raise BranchCutError(f"zeta = {mp.nstr(zeta, 10)} touches the branch point")


def _sqrt_z2m1(zeta):
    # (zeta+1)^{1/2}(zeta-1)^{1/2}: principal factors, cut on (-inf, 1]
    return mp.sqrt(zeta + 1) * mp.sqrt(zeta - 1)


def phi_cr(zeta):
    """2 sqrt(z^2-1)(z-2)(2z+1)/3 + 2 log(z + sqrt(z^2-1)), cut on (-inf, 1]."""
    zeta = mpc(zeta)
    if zeta == 1:
        return mpc(0)
    _cut_guard(zeta, 1, mp.dps)
    r = _sqrt_z2m1(zeta)
    return 2 * r * (zeta - 2) * (2 * zeta + 1) / 3 + 2 * mp.log(zeta + r)


def resolvent_cr(zeta):
    """-2z^2 + 2z + 1 + 2(z+1)^{1/2}(z-1)^{3/2}, cut on [-1, 1]."""
    zeta = mpc(zeta)
    tol = mpf(10) ** (-mpf(mp.dps) / 2)
    if -1 <= zeta.real <= 1 and abs(zeta.imag) < tol:
        raise BranchCutError(f"zeta = {mp.nstr(zeta, 10)} is on [-1, 1]")
    return (-2 * zeta ** 2 + 2 * zeta + 1
            + 2 * mp.sqrt(zeta + 1) * (zeta - 1) * mp.sqrt(zeta - 1))


# ------------------------------------------------------ modified measure

def _polymul(p, q):
    out = [mpf(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


@dataclass(frozen=True)
class ModifiedMeasure:
    """Signed measure on [sigma_u, 1] in the fixed zeta variable.

    m_u(zeta) = a2 (zeta-1)^2 + a1 (zeta-1) + a0.
    """

    u: mpf
    sigma_u: mpf
    a0: mpf
    a1: mpf
    a2: mpf

    def m(self, zeta):
        d = zeta - 1
        return (self.a2 * d + self.a1) * d + self.a0

    def psi(self, x):
        """Density -m(x) sqrt(x - sigma)/(2 pi sqrt(1 - x)) on (sigma, 1)."""
        x = mpf(x)
        return -self.m(x) * mp.sqrt(x - self.sigma_u) / (2 * mp.pi * mp.sqrt(1 - x))

    def mass(self):
        return mp.quad(self.psi, [self.sigma_u, 1])

    def m_roots(self):
        """Roots of m_u in zeta, nearest-to-1 first."""
        disc = self.a1 ** 2 - 4 * self.a2 * self.a0
        sq = mp.sqrt(disc)
        roots = [1 + (-self.a1 + sq) / (2 * self.a2), 1 + (-self.a1 - sq) / (2 * self.a2)]
        return sorted(roots, key=lambda r: abs(r - 1))


def modified_measure(u, ctx: PrecisionContext,
                     radius=MODIFIED_MEASURE_RADIUS) -> ModifiedMeasure:
    with ctx.workdps():
        u = mpf(u)
        du = u - _uc()
        if abs(du) > radius:
            raise RadiusError(f"|u - u_c| = {mp.nstr(abs(du), 5)} exceeds {radius}")
        s3 = mp.sqrt(3)
        k = mp.power(3, mpf(7) / 4)
        # -(1/8)(s+1)(5s^2-14s+13) - (3^{7/4}/4)(s-1)(5s^2+(6sqrt3-4)s+7-2sqrt3) du
        p1 = _polymul([mpf(1), mpf(1)], [mpf(13), mpf(-14), mpf(5)])
        p2 = _polymul([mpf(-1), mpf(1)], [7 - 2 * s3, 6 * s3 - 4, mpf(5)])
        coeffs = [-c1 / 8 - k / 4 * c2 * du for c1, c2 in zip(p1, p2)]
        roots = solve_cubic(coeffs[3], coeffs[2], coeffs[1], coeffs[0], ctx)
        guess = -1 + k * (2 - s3) * du
        dist = sorted((abs(r - guess), i) for i, r in enumerate(roots))
        if dist[1][0] - dist[0][0] <= mpf(10) ** (-ctx.digits / 2) * (1 + dist[1][0]):
            raise BranchAmbiguityError("two endpoint roots equidistant from the series")
        sigma = roots[dist[0][1]]
        if abs(sigma.imag) > mpf(10) ** (-ctx.digits / 2):
            raise BranchAmbiguityError("selected endpoint root is not real")
        sigma = sigma.real
        k34 = mp.power(3, mpf(3) / 4)
        a2 = -4 - 8 * k * du
        a1 = -2 * (sigma + 1) - 12 * k34 * (sigma + 2 * s3 + 1) * du
        a0 = (-(sigma + 1) * (3 * sigma - 5) / 2
              - k * (3 * sigma ** 2 + (4 * s3 - 2) * sigma + 7) * du)
        return ModifiedMeasure(u, sigma, a0, a1, a2)


def phi_u(mm: ModifiedMeasure, zeta):
    """phi_u(zeta) = -int_1^zeta m_u(s) sqrt(s - sigma)/sqrt(s - 1) ds.

    The substitution s = 1 + t^2 (zeta - 1) removes the endpoint
    singularity; the t-integral is smooth.
    """
    zeta = mpc(zeta)
    if zeta == 1:
        return mpc(0)
    _cut_guard(zeta, 1, mp.dps)
    d = zeta - 1

    def f(t):
        s = 1 + t * t * d
        return mm.m(s) * mp.sqrt(s - mm.sigma_u)

    return -2 * mp.sqrt(d) * mp.quad(f, [0, 1])


def _phi_cr_ratio(zeta):
    """phi_cr(zeta)/(zeta - 1)^{5/2}, analytic near 1 (value 8sqrt2/5 there)."""
    d = zeta - 1
    return 8 * mp.quad(lambda t: t ** 4 * mp.sqrt(2 + t * t * d), [0, 1])


def _phi_diff_ratio(mm: ModifiedMeasure, zeta):
    """(phi_u - phi_cr)/(zeta - 1)^{1/2}, analytic near 1."""
    d = zeta - 1

    def f(t):
        s = 1 + t * t * d
        return mm.m(s) * mp.sqrt(s - mm.sigma_u) + 4 * (s - 1) ** 2 * mp.sqrt(s + 1)

    return -2 * mp.quad(f, [0, 1])


@dataclass(frozen=True)
class ConformalMaps:
    f: mpc
    h_u: mpc
    lambda_at_1: mpf


def conformal_maps(u, zeta, N: int, ctx: PrecisionContext | None = None) -> ConformalMaps:
    """f(zeta) = [(5/8) phi_cr]^{2/5}, h_u(zeta), and N^{4/5} h_u(1).

    Both maps are evaluated through the ratio forms above so that the
    fractional powers act on quantities near a positive constant; this
    picks the branch analytic at zeta = 1.
    """
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        zeta = mpc(zeta)
        if abs(zeta - 1) > CONFORMAL_RADIUS:
            raise RadiusError(f"|zeta - 1| exceeds {CONFORMAL_RADIUS}")
        mm = modified_measure(u, ctx)
        c = mpf(1) / 20
        ratio = _phi_cr_ratio(zeta)
        f = (zeta - 1) * (mpf(5) / 8 * ratio) ** (mpf(2) / 5)
        h = c ** (mpf(1) / 5) * _phi_diff_ratio(mm, zeta) / ratio ** (mpf(1) / 5)
        h1 = (c ** (mpf(1) / 5) * (-2 * mm.a0 * mp.sqrt(1 - mm.sigma_u))
              / (8 * mp.sqrt(2) / 5) ** (mpf(1) / 5))
        return ConformalMaps(f, h, mpf(N) ** (mpf(4) / 5) * h1)
