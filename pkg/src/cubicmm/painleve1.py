"""Real-axis Painleve I transcendent y'' = 6y^2 + lambda.

Seeding uses the asymptotic series on the negative axis, either plainly
truncated (``asymptotic_seed``) or Borel-Pade resummed along the median
direction (``median_seed``). ``integrate`` runs a degree-40 Taylor method,
hops over double poles through a fitted Laurent series, and keeps the step
polynomials for dense output and for the antiderivative ``big_Y``.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath import mp, mpf

from .errors import PoleFitError, SeedAccuracyError, StepUnderflowError
from .numkernel import PrecisionContext

__all__ = [
    "STOKES_EXPONENT",
    "SeedState",
    "PoleRecord",
    "Painleve1Solution",
    "BoutrouxClass",
    "exact_coefficients",
    "asymptotic_coefficients",
    "asymptotic_seed",
    "median_seed",
    "laurent_coefficients",
    "laurent_eval",
    "integrate",
    "detect_pole",
    "big_Y",
    "boutroux_sector",
    "reference_trajectory",
]

BLOWUP = 1e6
FIT_WINDOW = (1e2, 1e6)
DEGREE = 40
H_MAX = mpf(1)  # largest Taylor step


def _stokes_c():
    # exponent of the linearised modes, exp(+-c (-lambda)^{5/4})
    return mp.power(2, mpf(11) / 4) * mp.root(3, 4) / 5


STOKES_EXPONENT = float(2 ** 2.75 * 3 ** 0.25 / 5)


# ------------------------------------------------------------- coefficients

@lru_cache(maxsize=None)
def exact_coefficients(K: int) -> tuple[Fraction, ...]:
    """Rationals b_k with a_k = b_k 6^{-k/2}, k = 0..K.

    b_{k+1} = (25k^2 - 1)/8 b_k - (1/2) sum_{m=1}^k b_m b_{k+1-m}.
    """
    b = [Fraction(1)]
    for k in range(K):
        conv = sum((b[m] * b[k + 1 - m] for m in range(1, k + 1)), Fraction(0))
        b.append(Fraction(25 * k * k - 1, 8) * b[k] - conv / 2)
    return tuple(b)


def asymptotic_coefficients(K: int, ctx: PrecisionContext | None = None) -> list:
    """a_0..a_K of y ~ sqrt(-lambda/6) sum a_k (-lambda)^{-5k/2}."""
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        r6 = 1 / mp.sqrt(6)
        return [mpf(b.numerator) / b.denominator * r6 ** k
                for k, b in enumerate(exact_coefficients(K))]


@dataclass(frozen=True)
class SeedState:
    lam: mpf
    y: mpf
    yprime: mpf
    method: str
    terms: int
    error_estimate: mpf


def asymptotic_seed(lam, K: int | None, ctx: PrecisionContext,
                    tol=1e-12) -> SeedState:
    """Truncated asymptotic series and its termwise derivative.

    K=None truncates just before the smallest term. SeedAccuracyError is
    raised when even the smallest term exceeds ``tol`` at this lambda.
    """
    with ctx.workdps():
        lam = mpf(lam)
        if lam >= 0:
            raise ValueError("asymptotic seeding needs lambda < 0")
        x = (-lam) ** (mpf(-5) / 2)
        # enough terms to locate the smallest one, whatever K is
        kmax = max(10 + int(1.5 * math.sqrt(1 / float(x))), (K or 0) + 2)
        a = asymptotic_coefficients(kmax, ctx)
        pref = mp.sqrt(-lam / 6)
        mags = [abs(a[k] * x ** k) * pref for k in range(kmax + 1)]
        best = min(range(1, kmax + 1), key=lambda k: mags[k])
        if mags[best] > tol:
            raise SeedAccuracyError(
                f"optimal truncation error {mp.nstr(mags[best], 5)} exceeds {tol} at lambda={lam}")
        if K is None:
            K = best - 1
        y = pref * mp.fsum(a[k] * x ** k for k in range(K + 1))
        yp = mp.fsum(a[k] / mp.sqrt(6) * (5 * mpf(k) / 2 - mpf(1) / 2)
                     * (-lam) ** (-mpf(1) / 2 - 5 * mpf(k) / 2) for k in range(K + 1))
        return SeedState(lam, y, yp, "asymptotic", K, mags[K + 1])


def median_seed(lam, ctx: PrecisionContext, K: int = 80) -> SeedState:
    """Borel-Pade sum of the asymptotic series along the median direction.

    With w = (-lambda)^{-5/4} the series is sqrt(-lambda/6) sum a_k w^{2k}.
    Its Borel transform B(T) = sum a_k T^k/(2k)! (T = t^2) is replaced by a
    [K/2, K - K/2] Pade approximant and Laplace-integrated along
    arg t = pi/6, which avoids the singularities on the positive t-axis.
    The real part is the median (real) resummation; the imaginary part is
    half the lateral jump and is returned as ``error_estimate``.
    """
    lam = mpf(lam) if not isinstance(lam, mpf) else lam
    if lam >= 0:
        raise ValueError("median seeding needs lambda < 0")
    dps = max(ctx.work_dps, 90) + 30
    with mp.workdps(dps):
        lam = mpf(lam)
        a = asymptotic_coefficients(K, PrecisionContext(digits=dps - 10, guard_digits=10))
        coeffs = [a[k] / mp.factorial(2 * k) for k in range(K + 1)]
        p, q = mp.pade(coeffs, K // 2, K - K // 2)
        dp = [k * c for k, c in enumerate(p)][1:]
        dq = [k * c for k, c in enumerate(q)][1:]
        P = lambda T: mp.polyval(p[::-1], T)
        Q = lambda T: mp.polyval(q[::-1], T)

        def Bprime(T):
            qv = Q(T)
            return (mp.polyval(dp[::-1], T) * qv - P(T) * mp.polyval(dq[::-1], T)) / qv ** 2

        w = (-lam) ** (mpf(-5) / 4)
        e = mp.expjpi(mpf(1) / 6)
        smax = (dps * math.log(10) + 40) / math.cos(math.pi / 6)
        pts = [0]
        while pts[-1] < smax:
            pts.append(max(2, 4 * pts[-1]))
        # t = w s e, so S(w) = int_0^inf exp(-s e) B(w^2 s^2 e^2) e ds
        S = mp.quad(lambda s: mp.exp(-s * e) * P((w * s * e) ** 2) / Q((w * s * e) ** 2) * e, pts)
        dS = mp.quad(lambda s: mp.exp(-s * e) * Bprime((w * s * e) ** 2)
                     * 2 * w * (s * e) ** 2 * e, pts).real
        pref = mp.sqrt(-lam / 6)
        dw = mpf(5) / 4 * (-lam) ** (mpf(-9) / 4)
        y = pref * S.real
        yp = -S.real / (2 * mp.sqrt(6) * mp.sqrt(-lam)) + pref * dS * dw
        jump = abs(pref * S.imag)
    with ctx.workdps():
        return SeedState(+lam, +y, +yp, "borel-pade", K, +jump)


# ------------------------------------------------------------------ Laurent

def laurent_coefficients(lam_j, C, n: int) -> list:
    """b_0..b_n of y = sum b_k eps^{k-2}, eps = lambda - lambda_j."""
    b = [mpf(0)] * (n + 1)
    b[0] = mpf(1)
    if n >= 4:
        b[4] = -mpf(lam_j) / 10
    if n >= 5:
        b[5] = mpf(-1) / 6
    if n >= 6:
        b[6] = mpf(C)
    for k in range(7, n + 1):
        conv = mp.fsum(b[i] * b[k - i] for i in range(1, k))
        b[k] = 6 * conv / ((k - 6) * (k + 1))
    return b


def laurent_eval(lam_j, C, lam, n: int = 60):
    """(y, y') from the Laurent series about the pole lambda_j."""
    b = laurent_coefficients(lam_j, C, n)
    eps = mpf(lam) - lam_j
    y = mp.fsum(b[k] * eps ** (k - 2) for k in range(n + 1))
    yp = mp.fsum((k - 2) * b[k] * eps ** (k - 3) for k in range(n + 1))
    return y, yp


def _laurent_Y(b, eps, A, B):
    """Y = -log|eps| + A + B eps + sum_{k>=4} b_k eps^k/(k(k-1)), and Y'."""
    tail = mp.fsum(b[k] * eps ** k / (k * (k - 1)) for k in range(4, len(b)))
    dtail = mp.fsum(b[k] * eps ** (k - 1) / (k - 1) for k in range(4, len(b)))
    return -mp.log(abs(eps)) + A + B * eps + tail, -1 / eps + B + dtail


@dataclass(frozen=True)
class PoleRecord:
    location: mpf
    laurent_C: mpf
    fit_residual: mpf
    fit_nodes: int = 0

    def to_dict(self, digits: int = 30) -> dict:
        return {"location": mp.nstr(self.location, digits),
                "laurent_C": mp.nstr(self.laurent_C, digits),
                "fit_residual": mp.nstr(self.fit_residual, 5),
                "fit_nodes": self.fit_nodes}


def detect_pole(nodes: Sequence[tuple], window, ctx: PrecisionContext, direction: int = 1,
                fit_tol=1e-8, n_terms: int = 60) -> tuple[PoleRecord, SeedState]:
    """Fit lambda_j and C to nodes (lambda, y) and re-seed past the pole.

    Only nodes with |y| in [1e2, 1e6] enter the relative least-squares fit.
    The re-seeded state sits at lambda_j + direction * window.
    """
    with ctx.workdps():
        lo, hi = FIT_WINDOW
        pts = [(mpf(l), mpf(v)) for l, v in nodes if lo <= abs(v) <= hi]
        if len(pts) < 3:
            raise PoleFitError(f"only {len(pts)} nodes inside the fit window")
        if any(v < 0 for _, v in pts):
            raise PoleFitError("y is large and negative: not a double pole of leading coefficient 1")
        l_last, y_last = max(pts, key=lambda p: p[1])
        lam_j = l_last + direction / mp.sqrt(y_last)
        C = mpf(0)

        def resid(lj, c):
            b = laurent_coefficients(lj, c, n_terms)
            return [(v - mp.fsum(b[k] * (l - lj) ** (k - 2) for k in range(n_terms + 1))) / v
                    for l, v in pts]

        delta = mpf(10) ** (-(ctx.work_dps // 3))
        r = resid(lam_j, C)
        for _ in range(40):
            r1 = resid(lam_j + delta, C)
            r2 = resid(lam_j, C + delta)
            J = mp.matrix([[(x1 - x0) / delta, (x2 - x0) / delta]
                           for x0, x1, x2 in zip(r, r1, r2)])
            step, _ = mp.qr_solve(J, mp.matrix([-x for x in r]))
            lam_j += step[0]
            C += step[1]
            r = resid(lam_j, C)
            if abs(step[0]) < delta ** 2 * (1 + abs(lam_j)) and abs(step[1]) < delta * (1 + abs(C)):
                break
        fit = max(abs(x) for x in r)
        if not fit <= fit_tol:
            raise PoleFitError(
                f"Laurent fit residual {mp.nstr(fit, 5)} above {fit_tol} near lambda={mp.nstr(lam_j, 10)}")
        rec = PoleRecord(lam_j, C, fit, len(pts))
        lam_r = lam_j + direction * mpf(window)
        y, yp = laurent_eval(lam_j, C, lam_r, n_terms)
        return rec, SeedState(lam_r, y, yp, "laurent", n_terms, fit)


# --------------------------------------------------------------- integrator

def _taylor(l0, y0, yp0, deg):
    c = [y0, yp0]
    for n in range(deg - 1):
        s = 2 * mp.fsum(c[i] * c[n - i] for i in range((n + 1) // 2))
        if n % 2 == 0:
            s += c[n // 2] ** 2
        rhs = 6 * s + (l0 if n == 0 else 1 if n == 1 else 0)
        c.append(rhs / ((n + 2) * (n + 1)))
    return c


def _poly(c, s):
    return mp.polyval(c[::-1], s)


def _dpoly(c, s, order=1):
    if order == 1:
        return mp.polyval([k * c[k] for k in range(len(c) - 1, 0, -1)], s)
    return mp.polyval([k * (k - 1) * c[k] for k in range(len(c) - 1, 1, -1)], s)


def _residual(c, l0, s):
    p = _poly(c, s)
    return _dpoly(c, s, 2) - 6 * p * p - (l0 + s)


def _g(lam):
    return _stokes_c() * (-lam) ** (mpf(5) / 4) if lam < 0 else mpf(0)


@dataclass(frozen=True)
class _Step:
    lam0: mpf
    h: mpf  # signed
    coeffs: tuple

    @property
    def lo(self):
        return min(self.lam0, self.lam0 + self.h)

    @property
    def hi(self):
        return max(self.lam0, self.lam0 + self.h)


@dataclass(frozen=True)
class Painleve1Solution:
    """Trajectory on an increasing grid; immutable once built."""

    grid: tuple
    y: tuple
    yprime: tuple
    hamiltonian: tuple
    poles: tuple
    residual: tuple
    ode_tol: mpf
    seed: SeedState
    direction: int
    steps: tuple = field(repr=False, default=())
    Y: tuple | None = None
    Y_steps: tuple | None = field(repr=False, default=None)
    pole_states: tuple = field(repr=False, default=())

    def _find_step(self, lam):
        los = [s.lo for s in self.steps]
        i = bisect.bisect_right(los, lam) - 1
        if i >= 0 and lam <= self.steps[i].hi:
            return i
        return None

    def _pole_near(self, lam):
        for p in self.poles:
            if abs(lam - p.location) <= mpf("0.5"):
                return p
        return None

    def evaluate(self, lam):
        """Dense (y, y') at lambda from step polynomials or a pole's Laurent series."""
        lam = mpf(lam)
        i = self._find_step(lam)
        if i is None:
            p = self._pole_near(lam)
            if p is None or not (self.grid[0] <= lam <= self.grid[-1]):
                raise ValueError(f"lambda={mp.nstr(lam, 10)} is outside the trajectory")
            return laurent_eval(p.location, p.laurent_C, lam)
        st = self.steps[i]
        s = lam - st.lam0
        return _poly(st.coeffs, s), _dpoly(st.coeffs, s)

    def evaluate_Y(self, lam):
        """Dense (Y, Y') at lambda; requires big_Y to have been applied."""
        if self.Y_steps is None:
            raise ValueError("Y not computed; call big_Y first")
        lam = mpf(lam)
        i = self._find_step(lam)
        if i is None:
            p = self._pole_near(lam)
            if p is None:
                raise ValueError(f"lambda={mp.nstr(lam, 10)} is outside the trajectory")
            A, B = dict((q.location, ab) for q, ab in zip(self.poles, self.pole_states))[p.location]
            b = laurent_coefficients(p.location, p.laurent_C, 60)
            return _laurent_Y(b, lam - p.location, A, B)
        st = self.steps[i]
        Y0, Yp0 = self.Y_steps[i]
        s = lam - st.lam0
        c = st.coeffs
        Y = Y0 + Yp0 * s + mp.fsum(c[k] * s ** (k + 2) / ((k + 1) * (k + 2)) for k in range(len(c)))
        Yp = Yp0 + mp.fsum(c[k] * s ** (k + 1) / (k + 1) for k in range(len(c)))
        return Y, Yp

    def poles_crossed(self, lam) -> int:
        return sum(1 for p in self.poles if p.location < lam)

    def tau(self, lam):
        """exp(-Y) continued through each pole as a simple zero."""
        Y, _ = self.evaluate_Y(lam)
        return (-1) ** self.poles_crossed(lam) * mp.exp(-Y)

    def max_residual(self):
        return max(self.residual)

    def to_csv(self, digits: int = 20) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "y", "yprime", "H", "Y"])
        Ys = self.Y if self.Y is not None else [None] * len(self.grid)
        for row in zip(self.grid, self.y, self.yprime, self.hamiltonian, Ys):
            w.writerow(["" if v is None else mp.nstr(v, digits) for v in row])
        return buf.getvalue()

    def poles_json(self, digits: int = 30) -> str:
        return json.dumps([p.to_dict(digits) for p in self.poles], indent=2, sort_keys=True)


def integrate(seed: SeedState, lambda_start, lambda_end, ode_tol, ctx: PrecisionContext, *,
              window=mpf("0.1"), max_poles: int | None = None, degree: int = DEGREE,
              fit_tol=1e-8, exponential_control: bool = True) -> Painleve1Solution:
    """Taylor integration of y'' = 6y^2 + lambda from the seed state.

    Each accepted step satisfies |p'' - 6p^2 - lambda| <= local tolerance
    at its end, p being the step polynomial. With ``exponential_control``
    the local tolerance shrinks by exp(-|g(lambda) - g(lambda_end)|) to
    offset the exponential growth of perturbations on the negative axis.
    When |y| exceeds 1e6 the pole is fitted and integration restarts at
    lambda_j + window, unless ``max_poles`` poles have been crossed.
    """
    with ctx.workdps():
        lam = mpf(lambda_start)
        lam_end = mpf(lambda_end)
        if abs(mpf(seed.lam) - lam) > mpf(10) ** (-ctx.digits) * (1 + abs(lam)):
            raise ValueError("seed state is not at lambda_start")
        direction = 1 if lam_end >= lam else -1
        tol = mpf(ode_tol)
        eps = mpf(10) ** (-(ctx.work_dps - 8))
        g_end = _g(lam_end)
        if exponential_control:
            worst = tol * mp.exp(-abs(_g(min(lam, lam_end)) - g_end))
            if worst < eps * 100:
                warnings.warn(
                    f"working precision ({ctx.work_dps} digits) is below the dynamic range "
                    f"needed for ode_tol={ode_tol} on this interval", RuntimeWarning, stacklevel=2)
        y, yp = mpf(seed.y), mpf(seed.yprime)
        grid, ys, yps, res = [lam], [y], [yp], [mpf(0)]
        steps, poles, tails = [], [], []
        seg_start = 0
        fac = mpf("0.5")
        h_min = mpf(10) ** (-(ctx.work_dps // 3))
        while direction * (lam_end - lam) > 0:
            loc = tol * (mp.exp(-abs(_g(lam) - g_end)) if exponential_control else 1)
            loc = max(loc, eps * (1 + 6 * y * y))
            c = _taylor(lam, y, yp, degree)
            h = min((loc / abs(c[degree]) if c[degree] else mp.inf) ** (mpf(1) / degree),
                    (loc / abs(c[degree - 1]) if c[degree - 1] else mp.inf) ** (mpf(1) / (degree - 1)))
            h = min(fac * h, H_MAX, direction * (lam_end - lam))
            h_cap = min(H_MAX, direction * (lam_end - lam))
            grown = 0
            while True:
                if h < h_min:
                    raise StepUnderflowError(f"step size {mp.nstr(h, 5)} at lambda={mp.nstr(lam, 12)}")
                r = abs(_residual(c, lam, direction * h))
                if r <= loc:
                    # the residual grows like h^(degree-2); aim for loc/4 so it tracks ode_tol
                    if r < loc / 100 and h < h_cap and grown < 4:
                        ratio = (loc / 4 / r) ** (mpf(1) / (degree - 2)) if r else mpf(2)
                        h = min(h * min(ratio, mpf(2)), h_cap)
                        grown += 1
                        continue
                    break
                h *= mpf("0.6") if grown == 0 else mpf("0.9")
                fac = max(fac * mpf("0.8"), mpf("0.05"))
            if r < loc / 100:
                fac = min(fac * mpf("1.1"), mpf(1))
            s = direction * h
            steps.append(_Step(lam, s, tuple(c)))
            lam = lam_end if h == direction * (lam_end - lam) else lam + s
            y, yp = _poly(c, s), _dpoly(c, s)
            grid.append(lam)
            ys.append(y)
            yps.append(yp)
            res.append(r)
            tails.append((lam, y))
            if abs(y) > BLOWUP:
                fit_nodes = list(tails)
                # midpoints of this segment's steps sharpen the fit
                for st in steps[seg_start:]:
                    m = st.h / 2
                    fit_nodes.append((st.lam0 + m, _poly(st.coeffs, m)))
                rec, state = detect_pole(fit_nodes, window, ctx, direction, fit_tol)
                poles.append(rec)
                if max_poles is not None and len(poles) >= max_poles:
                    break
                if direction * (lam_end - state.lam) <= 0:
                    break
                lam, y, yp = state.lam, state.y, state.yprime
                grid.append(lam)
                ys.append(y)
                yps.append(yp)
                res.append(mpf(0))
                tails = []
                seg_start = len(steps)
        if direction < 0:
            grid, ys, yps, res = grid[::-1], ys[::-1], yps[::-1], res[::-1]
            steps = steps[::-1]
            poles = poles[::-1]
        H = [yp_ * yp_ / 2 - 2 * y_ ** 3 - l_ * y_ for l_, y_, yp_ in zip(grid, ys, yps)]
        return Painleve1Solution(tuple(grid), tuple(ys), tuple(yps), tuple(H), tuple(poles),
                                 tuple(res), tol, seed, direction, tuple(steps))


# -------------------------------------------------------------------- big Y

def _boundary_Y(lam, terms, ctx):
    """Y and Y' from the twice-integrated asymptotic series at lambda < 0."""
    x = -lam
    n = terms if terms is not None else 11 + int(1.5 * float(x) ** 1.25)
    a = asymptotic_coefficients(n, ctx)
    r6 = mp.sqrt(6)
    Ys, dYs = [], []
    for k in range(n):
        p = mpf(1) / 2 - 5 * mpf(k) / 2
        if k == 1:
            # double antiderivative of (-lambda)^{-2} is -log(-lambda)
            Ys.append(-a[k] / r6 * mp.log(x))
            dYs.append(a[k] / r6 / x)
        else:
            Ys.append(a[k] / r6 * x ** (p + 2) / ((p + 1) * (p + 2)))
            dYs.append(-a[k] / r6 * x ** (p + 1) / (p + 1))
    if terms is None:
        mags = [abs(t) for t in Ys]
        cut = min(range(2, n), key=lambda k: mags[k])
        Ys, dYs = Ys[:cut], dYs[:cut]
    return mp.fsum(Ys), mp.fsum(dYs)


def big_Y(sol: Painleve1Solution, ctx: PrecisionContext, terms: int | None = None) -> Painleve1Solution:
    """Solve Y'' = y along the trajectory; returns a copy with Y filled.

    Initial data at the first grid point come from the asymptotic
    expansion (``terms=2`` gives the two-term form). Across a pole,
    Y = -log|lambda - lambda_j| + A + B(lambda - lambda_j) + ... with A, B
    matched on the incoming side.
    """
    if sol.direction != 1 or sol.grid[0] >= 0:
        raise ValueError("big_Y needs a forward trajectory starting at negative lambda")
    with ctx.workdps():
        Y, Yp = _boundary_Y(mpf(sol.grid[0]), terms, ctx)
        Y_steps, pole_states = [], []
        Yvals = {sol.grid[0]: Y}
        pole_iter = iter(sol.poles)
        prev_end = sol.grid[0]
        for st in sol.steps:
            if st.lam0 != prev_end:
                # a pole gap: match (Y, Y') at prev_end and continue at st.lam0
                p = next(pole_iter)
                b = laurent_coefficients(p.location, p.laurent_C, 60)
                e0 = prev_end - p.location
                Y0, Yp0 = _laurent_Y(b, e0, 0, 0)
                B = Yp - Yp0
                A = Y - Y0 - B * e0
                pole_states.append((A, B))
                Y, Yp = _laurent_Y(b, st.lam0 - p.location, A, B)
                Yvals[st.lam0] = Y
            c = st.coeffs
            s = st.h
            Y_steps.append((Y, Yp))
            Y, Yp = (Y + Yp * s + mp.fsum(c[k] * s ** (k + 2) / ((k + 1) * (k + 2)) for k in range(len(c))),
                     Yp + mp.fsum(c[k] * s ** (k + 1) / (k + 1) for k in range(len(c))))
            prev_end = st.lam0 + st.h
            Yvals[prev_end] = Y
        for p in pole_iter:
            # trailing pole without continuation: record A, B for Laurent evaluation
            b = laurent_coefficients(p.location, p.laurent_C, 60)
            e0 = prev_end - p.location
            Y0, Yp0 = _laurent_Y(b, e0, 0, 0)
            B = Yp - Yp0
            pole_states.append((Y - Y0 - B * e0, B))
        grid_Y = []
        for lam in sol.grid:
            if lam in Yvals:
                grid_Y.append(Yvals[lam])
            else:
                grid_Y.append(replace(sol, Y_steps=tuple(Y_steps)).evaluate_Y(lam)[0])
        return replace(sol, Y=tuple(grid_Y), Y_steps=tuple(Y_steps), pole_states=tuple(pole_states))


# ----------------------------------------------------------------- sectors

@dataclass(frozen=True)
class BoutrouxClass:
    """Either ``sector`` (1..5) is set, or ``ray`` (1..5) with its two neighbours."""

    sector: int | None
    ray: int | None
    adjacent: tuple


def boutroux_sector(lam) -> BoutrouxClass:
    """Classify arg lambda against the rays arg = pi/5 + 2(k-1)pi/5."""
    lam = mp.mpc(lam)
    if lam == 0:
        raise ValueError("lambda = 0 has no sector")
    arg = mp.arg(lam) % (2 * mp.pi)
    tol = mpf(10) ** (-(mp.dps - 5)) * 2 * mp.pi
    # position in units of 2pi/5 measured from the first ray
    x = (arg - mp.pi / 5) / (2 * mp.pi / 5) % 5
    k = int(mp.nint(x))
    if abs(x - k) * 2 * mp.pi / 5 <= tol:
        ray = k % 5 + 1
        return BoutrouxClass(None, ray, ((ray - 2) % 5 + 1, ray))
    return BoutrouxClass(int(mp.floor(x)) % 5 + 1, None, ())


# ---------------------------------------------------------------- helpers

def reference_trajectory(lambda_end, ode_tol, ctx: PrecisionContext, lambda_start=-30,
                         **kw) -> Painleve1Solution:
    """Median-seeded trajectory from lambda_start with Y attached."""
    seed = median_seed(lambda_start, ctx)
    sol = integrate(seed, lambda_start, lambda_end, ode_tol, ctx, **kw)
    return big_Y(sol, ctx)
