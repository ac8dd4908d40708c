"""Regular free-energy series, double-scaling maps and their predictions.

The u-plane and the Painleve variable are tied by
N^{4/5}(u - u_c) = c1 lambda. Predictions for the recurrence coefficients
and for log Z_N take Painleve I data (a value, a callable, or a
``Painleve1Solution``) as input; nothing here integrates the ODE.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from mpmath import mp, mpc, mpf

from .errors import (DivergenceError, ExtrapolationError, NonConvergenceError,
                     NumericError, RadiusError)
from .numkernel import PrecisionContext, pfq
from .orthopoly import ModelPoint, compute_table
from .parallel import pmap
from .partition import log_partition, selberg_gue

__all__ = [
    "CriticalConstants",
    "critical_constants",
    "f0",
    "f0_series",
    "f0_hyper",
    "f0_derivative",
    "f2",
    "f2_coefficients",
    "RegularConstants",
    "regular_constants",
    "d_limit",
    "richardson",
    "phi",
    "phi_inverse",
    "u_of_lambda",
    "lambda_of_u",
    "ScalingPrediction",
    "scaling_maps",
    "predict_recurrence",
    "p2_hat",
    "PartitionSplit",
    "partition_split",
    "ZeroSearch",
    "find_partition_zeros",
]

# phi^{-1} is only used for |t| below this
PHI_RADIUS = mpf("0.5")


@dataclass(frozen=True)
class CriticalConstants:
    u_c: mpf
    c1: mpf
    c2: mpf
    gamma2_c: mpf
    beta_c: mpf
    t_c: mpf


def critical_constants(ctx: PrecisionContext | None = None) -> CriticalConstants:
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        return CriticalConstants(
            u_c=mp.root(3, 4) / 18,
            c1=mpf(2) ** (-mpf(12) / 5) * mpf(3) ** (-mpf(7) / 4),
            c2=mpf(2) ** (-mpf(7) / 5),
            gamma2_c=mp.sqrt(3),
            beta_c=mp.root(3, 4) * (mp.sqrt(3) - 1),
            t_c=3 * mpf(2) ** (-mpf(2) / 3),
        )


# ------------------------------------------------------------------ F^(0)

_F_UP = (Fraction(1), Fraction(1), Fraction(4, 3), Fraction(5, 3))
_F_LO = (Fraction(2), Fraction(5, 2), Fraction(3))
_G_UP = (Fraction(1), Fraction(3, 2), Fraction(11, 6), Fraction(13, 6))
_G_LO = (Fraction(3), Fraction(5, 2), Fraction(7, 2))
_Z_SCALE = 34992  # z = 34992 u^4, equal to 1 at u_c


def _uc():
    return mp.root(3, 4) / 18


def _check_u(u, strict):
    uc = _uc()
    if abs(u) > uc * (1 + mpf(10) ** (-(mp.dps - 5))) or (strict and abs(u) >= uc):
        raise DivergenceError(f"|u| = {mp.nstr(abs(u), 10)} outside the disc of convergence")


def f0_series(u, ctx: PrecisionContext):
    """(1/2) sum_j 72^j Gamma(3j/2) u^{2j} / (Gamma(j+3) Gamma(j/2+1))."""
    with ctx.workdps():
        u = mp.mpmathify(u)
        _check_u(u, strict=False)
        if u == 0:
            return mpf(0)
        r = abs(u / _uc()) ** 2
        if r >= mpf("0.95"):
            raise NonConvergenceError("series too slow near u_c; use the 4F3 form")
        tol = ctx.eps()
        total = mpf(0)
        j = 1
        while True:
            t = (mpf(72) ** j * mp.gamma(mpf(3 * j) / 2) * u ** (2 * j)
                 / (2 * mp.gamma(j + 3) * mp.gamma(mpf(j) / 2 + 1)))
            total += t
            if j > 2 and abs(t) * r / (1 - r) <= tol * abs(total):
                return +total
            j += 1


@lru_cache(maxsize=64)
def _pfq_cached(up, lo, z, work_dps):
    return pfq(up, lo, z, PrecisionContext(digits=work_dps - 10, guard_digits=10))


def _hyp(up, lo, shift, z, ctx):
    """d^shift/dz^shift of pFq(up; lo; z) via parameter shifts."""
    fac = Fraction(1)
    for i in range(shift):
        for a in up:
            fac *= a + i
        for b in lo:
            fac /= b + i
    up_s = tuple(a + shift for a in up)
    lo_s = tuple(b + shift for b in lo)
    if z == 1:
        val = _pfq_cached(up_s, lo_s, 1, ctx.work_dps)
    else:
        val = pfq(up_s, lo_s, z, ctx)
    return mpf(fac.numerator) / fac.denominator * val


def f0_hyper(u, ctx: PrecisionContext):
    """6u^2 + 216u^4 4F3(..; 34992u^4) + 13608u^6 4F3(..; 34992u^4)."""
    return f0_derivative(u, 0, ctx)


def f0_derivative(u, order: int, ctx: PrecisionContext):
    """d^order F^(0)/du^order (order 0, 1, 2) from the 4F3 form, valid up to u_c."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    with ctx.workdps():
        u = mpf(u)
        _check_u(u, strict=False)
        z = _Z_SCALE * u ** 4
        if abs(z - 1) <= mpf(10) ** (-(ctx.work_dps - 5)):
            z = 1
        dz = [z, 4 * _Z_SCALE * u ** 3, 12 * _Z_SCALE * u ** 2]
        F = [_hyp(_F_UP, _F_LO, i, z, ctx) for i in range(order + 1)]
        G = [_hyp(_G_UP, _G_LO, i, z, ctx) for i in range(order + 1)]

        def comp(H, i):
            # i-th u-derivative of H(z(u))
            if i == 0:
                return H[0]
            if i == 1:
                return H[1] * dz[1]
            return H[2] * dz[1] ** 2 + H[1] * dz[2]

        def mono(c, p, i):
            # i-th derivative of c u^p
            out = mpf(c)
            for m in range(i):
                out *= p - m
            return out * u ** (p - i) if p >= i else mpf(0)

        total = mono(6, 2, order)
        for c, p, H in ((216, 4, F), (13608, 6, G)):
            for i in range(order + 1):
                total += mp.binomial(order, i) * mono(c, p, order - i) * comp(H, i)
        return +total


def f0(u, ctx: PrecisionContext, method: str = "auto"):
    """F^(0)(u) by the power series, the 4F3 form, or whichever suits u."""
    if method == "series":
        return f0_series(u, ctx)
    if method == "hyper":
        return f0_hyper(u, ctx)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    with ctx.workdps():
        near = abs(mpf(u) / _uc()) ** 2 > mpf("0.8")
    return f0_hyper(u, ctx) if near else f0_series(u, ctx)


# ------------------------------------------------------------------ F^(2)

_F2_CACHE: dict = {}


def _f2_inner(j: int, bits: int) -> int:
    """3F2(1-j, 2, 6; 5, 1-3j/2; 3/2) scaled by 2^bits.

    Every term is positive, so fixed-point integer arithmetic loses only
    the final truncation of each product.
    """
    t = 1 << bits
    s = t
    for k in range(j - 1):
        t = t * (j - 1 - k) * (k + 2) * (k + 6) * 3 // ((k + 5) * (3 * j - 2 - 2 * k) * (k + 1))
        s += t
    return s


def f2_coefficients(J: int, ctx: PrecisionContext) -> list:
    """c_1..c_J of F^(2)(u) = sum_j c_j u^{2j}, cached per precision."""
    key = ctx.work_dps
    cache = _F2_CACHE.setdefault(key, [])
    if len(cache) < J:
        bits = int(ctx.work_dps * 3.33) + 64
        with ctx.workdps():
            scale = mpf(2) ** bits
            for j in range(len(cache) + 1, J + 1):
                pre = (mpf(5) / 48 * mp.exp(j * mp.log(72) + mp.loggamma(mpf(3 * j) / 2)
                                            - mp.loggamma(j + 1) - mp.loggamma(mpf(j) / 2 + 1))
                       / (3 * j + 2))
                cache.append(pre * mpf(_f2_inner(j, bits)) / scale)
    return cache[:J]


def f2(u, ctx: PrecisionContext):
    """F^(2)(u) from its power series; DivergenceError for |u| >= u_c."""
    with ctx.workdps():
        u = mp.mpmathify(u)
        _check_u(u, strict=True)
        if u == 0:
            return mpf(0)
        r = abs(u / _uc()) ** 2
        tol = ctx.eps()
        total = mpf(0)
        u2 = u * u
        J = 64
        j = 0
        while True:
            cs = f2_coefficients(J, ctx)
            while j < J:
                t = cs[j] * u2 ** (j + 1)
                total += t
                j += 1
                if j > 3 and abs(t) * r / (1 - r) <= tol * abs(total):
                    return +total
            J *= 2


# ------------------------------------------------------------ constants

def richardson(values: Sequence, hs: Sequence, exponents: Sequence):
    """Eliminate c_i h^{e_i} from values(h) = L + sum c_i h^{e_i}.

    The steps hs must form a geometric sequence. Returns the triangular tableau; row k holds the estimates that use the
    first k exponents. The last entry of the last row is the best estimate.
    """
    table = [list(values)]
    for k, e in enumerate(exponents):
        prev = table[-1]
        if len(prev) < 2:
            break
        row = []
        for i in range(len(prev) - 1):
            r = (mpf(hs[i]) / hs[i + 1]) ** e
            row.append((r * prev[i + 1] - prev[i]) / (r - 1))
        table.append(row)
    return table


def d_limit(ctx: PrecisionContext, levels: int = 5, h0="1e-2"):
    """lim_{u -> u_c} F^(2)(u) + (1/48) log(u_c - u) by Richardson in sqrt(h).

    h = h0 2^{-k}; the expansion runs in powers h^{1/2}, h, h^{3/2}, ...
    Raises ExtrapolationError unless the last two diagonal estimates agree
    to 3 digits.
    """
    with ctx.workdps():
        uc = _uc()
        hs = [mpf(h0) / 2 ** k for k in range(levels)]
        vals = [f2(uc - h, ctx) + mp.log(h) / 48 for h in hs]
        exps = [mpf(i) / 2 for i in range(1, levels)]
        tab = richardson(vals, hs, exps)
        diag = [row[-1] for row in tab]
        best, prev = diag[-1], diag[-2]
        if abs(best - prev) > mpf("1e-3") * abs(best):
            raise ExtrapolationError(
                f"D estimates {mp.nstr(prev, 8)} and {mp.nstr(best, 8)} disagree")
        return best, tab


@dataclass(frozen=True)
class RegularConstants:
    A: mpf
    B: mpf
    C: mpf
    D: mpf
    D_error: mpf


@lru_cache(maxsize=8)
def _regular_constants(work_dps):
    ctx = PrecisionContext(digits=work_dps - 10, guard_digits=10)
    with ctx.workdps():
        uc = _uc()
        A = f0_derivative(uc, 0, ctx)
        B = f0_derivative(uc, 1, ctx)
        C = f0_derivative(uc, 2, ctx) / 2
    # D needs only a handful of digits; a 30-digit series keeps it cheap
    dctx = PrecisionContext(digits=min(ctx.digits, 30))
    D, tab = d_limit(dctx)
    with ctx.workdps():
        return RegularConstants(A, B, C, +D, abs(tab[-1][-1] - tab[-2][-1]))


def regular_constants(ctx: PrecisionContext) -> RegularConstants:
    """A, B, C at full precision and D from ``d_limit``; cached per precision."""
    return _regular_constants(ctx.work_dps)


# -------------------------------------------------------- scaling maps

def phi(t, ctx: PrecisionContext | None = None):
    """(sqrt(1+t) - 1)(1+t)^{4/5}/c2."""
    c2 = mpf(2) ** (-mpf(7) / 5)
    t = mp.mpmathify(t)
    return (mp.sqrt(1 + t) - 1) * (1 + t) ** (mpf(4) / 5) / c2


def _dphi(t):
    c2 = mpf(2) ** (-mpf(7) / 5)
    s = 1 + t
    return (s ** (mpf(3) / 10) / 2 + mpf(4) / 5 * (mp.sqrt(s) - 1) * s ** (-mpf(1) / 5)) / c2


def phi_inverse(x):
    """Newton inversion of phi near 0; RadiusError outside |t| < 1/2."""
    x = mp.mpmathify(x)
    c2 = mpf(2) ** (-mpf(7) / 5)
    t = 2 * c2 * x
    for _ in range(100):
        if abs(t) >= PHI_RADIUS:
            raise RadiusError(f"phi^-1({mp.nstr(x, 8)}) leaves |t| < {PHI_RADIUS}")
        dt = (phi(t) - x) / _dphi(t)
        t -= dt
        if abs(dt) <= mpf(10) ** (-mp.dps) * (1 + abs(t)):
            return t
    raise NonConvergenceError("phi inversion did not converge")


def u_of_lambda(N: int, lam, ctx: PrecisionContext | None = None):
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        c = critical_constants(ctx)
        return c.u_c + c.c1 * mp.mpmathify(lam) * mpf(N) ** (-mpf(4) / 5)


def lambda_of_u(N: int, u, ctx: PrecisionContext | None = None):
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        c = critical_constants(ctx)
        return mpf(N) ** (mpf(4) / 5) * (mp.mpmathify(u) - c.u_c) / c.c1


@dataclass(frozen=True)
class ScalingPrediction:
    N: int
    lam: mpf
    u: mpf
    v: mpf
    lambda_tilde: mpf
    v_tilde: mpf
    p2: mpf | None = None
    q2: mpf | None = None
    gamma2_pred: mpf | None = None
    beta_pred: mpf | None = None
    beta_shifted: bool = False

    def to_dict(self, digits: int = 30) -> dict:
        out = {}
        for k in ("lam", "u", "v", "lambda_tilde", "v_tilde", "p2", "q2", "gamma2_pred", "beta_pred"):
            val = getattr(self, k)
            out[k] = None if val is None else mp.nstr(val, digits)
        out["N"] = self.N
        out["beta_shifted"] = self.beta_shifted
        return out


def scaling_maps(N: int, lam=None, *, v=None, ctx: PrecisionContext | None = None) -> ScalingPrediction:
    """lambda <-> v, the shifted lambda-tilde and v-tilde; give exactly one of lam, v."""
    if (lam is None) == (v is None):
        raise ValueError("give exactly one of lam and v")
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        n45 = mpf(N) ** (mpf(4) / 5)
        if lam is not None:
            lam = mp.mpmathify(lam)
            t = phi_inverse(lam / n45)
            v = n45 * t
        else:
            v = mp.mpmathify(v)
            t = v / n45
            if abs(t) >= PHI_RADIUS:
                raise RadiusError("v N^{-4/5} outside the radius of phi")
            lam = n45 * phi(t)
        lam_t = n45 * phi(t + 1 / (2 * mpf(N)))
        v_t = v + mpf(N) ** (-mpf(1) / 5) / 2
        return ScalingPrediction(N, lam, u_of_lambda(N, lam, ctx), v, lam_t, v_t)


def _y_at(y, lam):
    if callable(y):
        return mp.mpmathify(y(lam))
    if hasattr(y, "evaluate"):
        return y.evaluate(lam)[0]
    return None


def predict_recurrence(N: int, lam, y, ctx: PrecisionContext | None = None) -> ScalingPrediction:
    """gamma^2 ~ sqrt3 + N^{-2/5} p2(lambda), beta ~ beta_c + N^{-2/5} q2(lambda-tilde).

    ``y`` is a Painleve I value at lambda, a callable, or a solution with
    ``evaluate``. With a bare value q2 is evaluated at lambda instead of
    lambda-tilde (``beta_shifted`` is then False), an O(N^{-3/5}) change.
    """
    ctx = ctx or PrecisionContext()
    sp = scaling_maps(N, lam, ctx=ctx)
    with ctx.workdps():
        c = critical_constants(ctx)
        k = -mpf(2) ** (mpf(4) / 5) * mp.sqrt(3)
        y_lam = _y_at(y, sp.lam)
        shifted = y_lam is not None
        if y_lam is None:
            y_lam = mp.mpmathify(y)
        y_tilde = _y_at(y, sp.lambda_tilde) if shifted else y_lam
        p2 = k * y_lam
        q2 = mpf(3) ** (-mpf(1) / 4) * k * y_tilde
        n25 = mpf(N) ** (-mpf(2) / 5)
        return ScalingPrediction(sp.N, sp.lam, sp.u, sp.v, sp.lambda_tilde, sp.v_tilde,
                                 p2, q2, c.gamma2_c + n25 * p2, c.beta_c + n25 * q2, shifted)


def p2_hat(v, y, ctx: PrecisionContext | None = None):
    """p-hat_2(v) = p2(v/(2 c2)), the same function in the v variable."""
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        lam = mp.mpmathify(v) / (2 * critical_constants(ctx).c2)
        val = _y_at(y, lam)
        if val is None:
            val = mp.mpmathify(y)
        return -mpf(2) ** (mpf(4) / 5) * mp.sqrt(3) * val


# ------------------------------------------------------ partition split

@dataclass(frozen=True)
class PartitionSplit:
    u: object
    N: int
    lam: object
    logZ_reg: object
    logZ_sing: object
    logZ0: mpf
    logZ_pred: object


def partition_split(u, N: int, Y_value, ctx: PrecisionContext) -> PartitionSplit:
    """log Z_N ~ N^2[A + B du + C du^2] + D - Y(lambda(u)) + log Z_N^0.

    ``Y_value`` is Y at lambda(u), a callable of lambda, or a solution
    carrying ``evaluate_Y``.
    """
    rc = regular_constants(ctx)
    with ctx.workdps():
        u = mp.mpmathify(u)
        du = u - _uc()
        lam = lambda_of_u(N, u, ctx)
        if hasattr(Y_value, "evaluate_Y"):
            Y = Y_value.evaluate_Y(lam)[0]
        elif callable(Y_value):
            Y = mp.mpmathify(Y_value(lam))
        else:
            Y = mp.mpmathify(Y_value)
        reg = mpf(N) ** 2 * (rc.A + rc.B * du + rc.C * du * du) + rc.D
        logZ0 = selberg_gue(N, ctx)
        return PartitionSplit(u, N, lam, reg, -Y, logZ0, reg - Y + logZ0)


# ------------------------------------------------------------ zeros

@dataclass(frozen=True)
class ZeroSearch:
    N: int
    radius: mpf
    zeros: tuple  # (u, lambda, |Z_reduced|)
    winding: int
    cell_windings: dict = field(repr=False)
    nodes: dict = field(repr=False)  # lambda -> reduced Z
    failed: tuple = ()
    median_abs: mpf = mpf(0)


def _reduced_logZ(N, lam, ctx, rc):
    """log Z_N(u(lambda)) minus the regular part and log Z_N^0."""
    u = u_of_lambda(N, lam, ctx)
    model = ModelPoint(u, N, n_max=N, ctx=ctx)
    table = compute_table(model)
    with ctx.workdps():
        du = u - _uc()
        reg = mpf(N) ** 2 * (rc.A + rc.B * du + rc.C * du * du) + rc.D
        return log_partition(table, N) - reg - selberg_gue(N, ctx)


def _reduced_Z(args):
    N, lam, ctx, rc = args
    try:
        with ctx.workdps():
            return lam, mp.exp(_reduced_logZ(N, lam, ctx, rc)), None
    except NumericError as exc:
        return lam, None, f"{type(exc).__name__}: {exc}"


def _phase_step(a, b):
    d = mp.arg(b) - mp.arg(a)
    while d > mp.pi:
        d -= 2 * mp.pi
    while d <= -mp.pi:
        d += 2 * mp.pi
    return d


def find_partition_zeros(N: int, disc_radius_lambda, grid=(6, 20), ctx: PrecisionContext | None = None,
                         workers: int = 1, max_iter: int = 40) -> ZeroSearch:
    """Zeros of Z_N(u) with lambda(u) in the disc |lambda| < R.

    Z_N is divided by its regular part, an entire zero-free factor, so the
    argument principle and the refinement see a function of moderate size.
    The polar grid has n_r rings and n_theta angles offset by half a step
    from the real axis; cells with nonzero winding seed a secant iteration.
    """
    ctx = ctx or PrecisionContext.for_model(N)
    n_r, n_t = grid
    R = mpf(disc_radius_lambda)
    rc = regular_constants(ctx)
    with ctx.workdps():
        pts = {(0, 0): mpc(0)}
        for i in range(1, n_r + 1):
            for j in range(n_t):
                pts[(i, j)] = R * i / n_r * mp.expjpi(2 * (j + mpf(1) / 2) / n_t)
    keys = sorted(pts)
    results = pmap(_reduced_Z, [(N, pts[k], ctx, rc) for k in keys], workers)
    vals, failed = {}, []
    for k, (lam, val, err) in zip(keys, results):
        if val is None:
            failed.append((lam, err))
        else:
            vals[k] = val
    with ctx.workdps():
        def node(i, j):
            return (0, 0) if i == 0 else (i, j % n_t)

        cells = {}
        for i in range(n_r):
            for j in range(n_t):
                loop = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]
                if i == 0:
                    loop = [(0, 0), node(1, j), node(1, j + 1)]
                if any(p not in vals for p in loop):
                    continue
                w = mp.fsum(_phase_step(vals[a], vals[b]) for a, b in zip(loop, loop[1:] + loop[:1]))
                cells[(i, j)] = int(mp.nint(w / (2 * mp.pi)))
        outer = [(n_r, j) for j in range(n_t)]
        winding = None
        if all(p in vals for p in outer):
            w = mp.fsum(_phase_step(vals[a], vals[b]) for a, b in zip(outer, outer[1:] + outer[:1]))
            winding = int(mp.nint(w / (2 * mp.pi)))
        med = statistics.median([abs(v) for v in vals.values()]) if vals else mpf(0)
        target = mpf(10) ** (-mpf(ctx.digits) / 4) * med

    zeros = []
    for (i, j), w in sorted(cells.items()):
        if w <= 0:
            continue
        with ctx.workdps():
            corners = [pts[(0, 0) if i == 0 else (i, j)], pts[(i + 1, j)], pts[(i + 1, (j + 1) % n_t)]]
            x0 = mp.fsum(corners) / 3
            x1 = x0 + R / (10 * n_r)
        z = _secant(N, x0, x1, ctx, rc, target, max_iter)
        if z is not None:
            with ctx.workdps():
                lam, aZ = z
                if not any(abs(lam - q[1]) < R * mpf(10) ** -6 for q in zeros):
                    zeros.append((u_of_lambda(N, lam, ctx), lam, aZ))
    return ZeroSearch(N, R, tuple(zeros), winding, cells, {pts[k]: v for k, v in vals.items()},
                      tuple(failed), med)


def _secant(N, x0, x1, ctx, rc, target, max_iter):
    with ctx.workdps():
        f0_ = mp.exp(_reduced_logZ(N, x0, ctx, rc))
        f1_ = mp.exp(_reduced_logZ(N, x1, ctx, rc))
        for _ in range(max_iter):
            if abs(f1_) < target:
                return x1, abs(f1_)
            if f1_ == f0_:
                return None
            x2 = x1 - f1_ * (x1 - x0) / (f1_ - f0_)
            x0, f0_ = x1, f1_
            x1 = x2
            try:
                f1_ = mp.exp(_reduced_logZ(N, x1, ctx, rc))
            except NumericError:
                return None
        return (x1, abs(f1_)) if abs(f1_) < target else None
