"""Precision-parameterized numeric substrate.

Everything here runs on mpmath. ``PrecisionContext`` fixes the working
precision (``digits + guard_digits`` decimal digits) and the quadrature
policy; every public routine enters ``mp.workdps`` itself, so callers never
touch the global mpmath state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from mpmath import mp, mpc, mpf
from mpmath.calculus.quadrature import GaussLegendre

from .errors import DivergenceError, NonConvergenceError

__all__ = [
    "PrecisionContext",
    "solve_cubic",
    "integrate_ray",
    "adaptive_panels",
    "gauss_legendre_nodes",
    "pfq",
]


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plus quadrature policy.

    Parameters
    ----------
    digits : int
        Target decimal digits; tolerances are expressed against this.
    guard_digits : int
        Extra digits carried internally.
    panel_nodes : int
        Gauss-Legendre nodes per quadrature panel, one of 3*2^k. The
        default 0 picks the smallest such size >= 0.8 * working digits,
        since high-order panels are far cheaper at high precision.
    max_panels : int
        Budget of panel evaluations per ray before giving up.
    """

    digits: int = 40
    guard_digits: int = 10
    panel_nodes: int = 0
    max_panels: int = 4000

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < 15:
            raise ValueError(f"digits must be an integer >= 15, got {self.digits}")
        if int(self.guard_digits) != self.guard_digits or self.guard_digits < 5:
            raise ValueError(f"guard_digits must be an integer >= 5, got {self.guard_digits}")
        if self.max_panels < 1:
            raise ValueError("max_panels must be positive")
        if self.panel_nodes == 0:
            n = 24
            while n < 0.8 * self.work_dps:
                n *= 2
            object.__setattr__(self, "panel_nodes", n)
        _gl_degree(self.panel_nodes)

    @classmethod
    def for_model(cls, N: int, **kw) -> "PrecisionContext":
        """Default context for a matrix-model point of size N."""
        kw.setdefault("digits", max(40, 3 * int(N)))
        return cls(**kw)

    @property
    def work_dps(self) -> int:
        return self.digits + self.guard_digits

    def workdps(self):
        return mp.workdps(self.work_dps)

    def with_digits(self, digits: int) -> "PrecisionContext":
        return replace(self, digits=digits)

    def eps(self) -> mpf:
        """10^-digits at the working precision (call inside ``workdps``)."""
        return mpf(10) ** (-self.digits)


def _gl_degree(n: int) -> int:
    q, r = divmod(int(n), 3)
    if r or q < 1 or q & (q - 1):
        raise ValueError(f"panel_nodes must be 3*2^k, got {n}")
    return q.bit_length()


@lru_cache(maxsize=64)
def _gl_nodes_cached(degree: int, prec: int):
    with mp.workprec(prec):
        return tuple(GaussLegendre(mp).calc_nodes(degree, prec))


def gauss_legendre_nodes(n: int, prec: int | None = None):
    """(x, w) pairs on [-1, 1] for an n-node rule, n = 3*2^k."""
    return _gl_nodes_cached(_gl_degree(n), prec or mp.prec)


# ---------------------------------------------------------------- cubics

def _cbrt_real(x):
    if x == 0:
        return mpf(0)
    return mp.sign(x) * mp.cbrt(abs(x))


def _root_key(digits):
    scale = mpf(10) ** digits

    def key(r):
        return (-mp.nint(r.real * scale), -r.imag)

    return key


def solve_cubic(c3, c2, c1, c0, ctx: PrecisionContext):
    """Roots of c3 x^3 + c2 x^2 + c1 x + c0 for real coefficients.

    Closed form (trigonometric for three real roots, Cardano otherwise)
    followed by one Newton polish per simple root. Returned as three
    ``mpc`` values with multiplicity, sorted by descending real part and
    then descending imaginary part.
    """
    with ctx.workdps():
        c3, c2, c1, c0 = (mpf(c) for c in (c3, c2, c1, c0))
        if c3 == 0:
            raise ValueError("leading coefficient is zero; not a cubic")
        a, b, c = c2 / c3, c1 / c3, c0 / c3
        shift = a / 3
        p = b - a * a / 3
        q = 2 * a ** 3 / 27 - a * b / 3 + c
        if p == 0 and q == 0:
            roots = [mpc(-shift)] * 3
        else:
            disc = -(4 * p ** 3 + 27 * q ** 2)
            slack = mpf(10) ** (5 - mp.dps) * (4 * abs(p) ** 3 + 27 * q * q)
            if disc >= -slack and p < 0:
                m = 2 * mp.sqrt(-p / 3)
                arg = max(mpf(-1), min(mpf(1), 3 * q / (p * m)))
                phi = mp.acos(arg) / 3
                roots = [mpc(m * mp.cos(phi - 2 * mp.pi * k / 3) - shift) for k in range(3)]
            else:
                s = mp.sqrt(max(q * q / 4 + p ** 3 / 27, mpf(0)))
                r1 = _cbrt_real(-q / 2 + s) + _cbrt_real(-q / 2 - s) - shift
                bq = a + r1
                cq = b + r1 * bq
                d = bq * bq - 4 * cq
                if d >= 0:  # numerically degenerate; keep roots real
                    sq = mp.sqrt(d)
                    roots = [mpc(r1), mpc((-bq + sq) / 2), mpc((-bq - sq) / 2)]
                else:
                    im = mp.sqrt(-d) / 2
                    roots = [mpc(r1), mpc(-bq / 2, im), mpc(-bq / 2, -im)]
        scale = max(abs(c3), abs(c2), abs(c1), abs(c0))
        small = mp.sqrt(mpf(10) ** (-mp.dps)) * scale
        polished = []
        for r in roots:
            fp = (3 * c3 * r + 2 * c2) * r + c1
            if abs(fp) > small:
                f = ((c3 * r + c2) * r + c1) * r + c0
                r = r - f / fp
                if r.imag != 0 and abs(r.imag) <= mpf(10) ** (-mp.dps) * (1 + abs(r)):
                    r = mpc(r.real)
            polished.append(r)
        return tuple(sorted(polished, key=_root_key(ctx.digits)))


# ------------------------------------------------------------ quadrature

def _panel(g, a, b, nodes, m):
    c = (a + b) / 2
    h = (b - a) / 2
    sums = [mpc(0)] * m
    absums = [mpf(0)] * m
    for x, w in nodes:
        vals = g(c + h * x)
        for i in range(m):
            v = vals[i]
            sums[i] += w * v
            absums[i] += w * abs(v)
    return [h * s for s in sums], [h * s for s in absums]


def adaptive_panels(g: Callable, R, ctx: PrecisionContext, *, components: int = 1,
                    width=None):
    """Composite Gauss-Legendre quadrature of a vector integrand on [0, R].

    ``g(r)`` returns a sequence of ``components`` values. Panels are marched
    outward from 0; each is accepted when the one-panel and two-half-panel
    estimates agree to ``10^-(digits + guard/2)`` relative to the largest of
    the panel's absolute mass, the running total and a coarse-sample scale
    of the whole integrand; otherwise the panel is halved. Marching
    stops at R or once a panel's absolute contribution drops below
    ``10^-digits`` of the running total while decreasing.

    Returns ``(totals, intervals)``: the integrals and the accepted
    half-panel intervals, which callers may reuse with the same node set.
    Must be called inside the context's working precision.
    """
    nodes = gauss_legendre_nodes(ctx.panel_nodes, mp.prec)
    tol = mpf(10) ** (-(ctx.digits + ctx.guard_digits // 2))
    tail_tol = mpf(10) ** (-ctx.digits)
    R = mpf(R)
    w = mpf(width) if width is not None else R / 8
    min_width = R * mpf(10) ** (-(mp.dps // 2))
    # coarse sample of |g| fixes a global scale for each component, so
    # panels where a component is negligible are not refined for its sake
    scale = [mpf(0)] * components
    for j in range(1, 65):
        vals = g(R * j / 64)
        for i in range(components):
            scale[i] = max(scale[i], abs(vals[i]) * R / 64)
    totals = [mpc(0)] * components
    intervals = []
    prev = None
    a = mpf(0)
    evaluations = 0
    while a < R:
        b = min(a + w, R)
        mid = (a + b) / 2
        whole, _ = _panel(g, a, b, nodes, components)
        left, labs = _panel(g, a, mid, nodes, components)
        right, rabs = _panel(g, mid, b, nodes, components)
        evaluations += 1
        if evaluations > ctx.max_panels:
            raise NonConvergenceError(
                f"quadrature exhausted max_panels={ctx.max_panels} at r={mp.nstr(a, 8)}")
        worst = mpf(0)
        for i in range(components):
            ref = max(labs[i] + rabs[i], abs(totals[i]), scale[i])
            err = abs(whole[i] - left[i] - right[i])
            if err > 0:
                worst = max(worst, err / ref if ref else mp.inf)
        if worst > tol:
            w = (b - a) / 2
            if w < min_width:
                raise NonConvergenceError(f"panel width underflow at r={mp.nstr(a, 8)}")
            continue
        contrib = []
        for i in range(components):
            totals[i] += left[i] + right[i]
            contrib.append(labs[i] + rabs[i])
        intervals.append((a, mid))
        intervals.append((mid, b))
        if prev is not None and all(
            c <= p and c <= tail_tol * abs(t) for c, p, t in zip(contrib, prev, totals)
        ):
            break
        prev = contrib
        if worst < tol * mpf(10) ** (-6):
            w = 2 * (b - a)
        a = b
    return totals, intervals


def integrate_ray(f: Callable, theta, R, ctx: PrecisionContext, *, width=None) -> mpc:
    """Integral of f(r e^{i theta}) e^{i theta} dr over r in [0, R]."""
    with ctx.workdps():
        e = mp.expj(mpf(theta))

        def g(r):
            return (f(r * e) * e,)

        totals, _ = adaptive_panels(g, R, ctx, width=width)
        return +totals[0]


# ------------------------------------------------------- hypergeometric

def _exact(x):
    if isinstance(x, bool):
        raise TypeError("bool is not a hypergeometric parameter")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return None
    return None


def _to_mp(x):
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, complex):
        return mpc(x)
    if isinstance(x, str) and _exact(x) is not None:
        return _to_mp(_exact(x))
    return mp.mpmathify(x)


def _nonpos_int(x) -> int | None:
    """Return m if x == -m for an integer m >= 0, else None."""
    if isinstance(x, Fraction):
        if x.denominator == 1 and x <= 0:
            return int(-x)
        return None
    x = _to_mp(x)
    if x <= 0 and x == int(x):
        return int(-x)
    return None


def _partial_sums_at_one(up, lo, n):
    out, acc, t = [], mpf(0), mpf(1)
    for k in range(n):
        acc += t
        out.append(acc)
        num, den = mpf(1), mpf(k + 1)
        for a in up:
            num *= a + k
        for b in lo:
            den *= b + k
        t *= num / den
    return out


def _extrapolate_at_one(S, s, K0, m):
    # S_K = S + K^-s (c_0 + c_1/K + ...): solve for S on K = K0..K0+m
    rows = [[mpf(1)] + [(mpf(K0) / K) ** (s + i) for i in range(m)]
            for K in range(K0, K0 + m + 1)]
    rhs = [S[K] for K in range(K0, K0 + m + 1)]
    return mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))[0]


def _sum_at_one(up, lo, ctx: PrecisionContext):
    """p+1Fp at z = 1 from partial sums with known tail exponent.

    With s = sum(lower) - sum(upper) > 0 the partial sums behave like
    S + K^-s (c_0 + c_1/K + ...), so a linear fit in those powers over
    consecutive K recovers S. The fit is ill-conditioned and runs at
    roughly four times the working precision; two orders are compared.
    """
    digits = ctx.work_dps
    with mp.workdps(4 * digits + 40):
        up = [mpf(a) for a in up]
        lo = [mpf(b) for b in lo]
        s = mp.fsum(lo) - mp.fsum(up)
        m = int(0.9 * digits) + 10
        K0 = 2 * m + int(max((abs(x) for x in up + lo), default=0))
        S = _partial_sums_at_one(up, lo, K0 + m + 14)
        v1 = _extrapolate_at_one(S, s, K0, m)
        v2 = _extrapolate_at_one(S, s, K0 + 2, m + 10)
    err = abs(v1 - v2)
    if err > mpf(10) ** (-ctx.digits) * max(1, abs(v2)):
        raise NonConvergenceError(f"unit-argument extrapolation unstable (difference {mp.nstr(err, 5)})")
    return +v2


def pfq(upper: Sequence, lower: Sequence, z, ctx: PrecisionContext, *, exact: bool = False):
    """Generalized hypergeometric series pFq(upper; lower; z).

    Terminating series with rational data (ints, Fractions or rational
    strings) are summed in exact rational arithmetic; ``exact=True`` returns
    the ``Fraction`` itself. Otherwise terms are summed until a ratio bound
    puts the tail below ``10^-digits`` relative. Convergent series at
    z = 1 (p = q + 1) use an extrapolation of partial sums in the known
    tail exponent; other points on |z| = 1 go to ``mpmath.hyper``.
    """
    ex_up = [_exact(a) for a in upper]
    ex_lo = [_exact(b) for b in lower]
    ex_z = _exact(z)
    with ctx.workdps():
        up = [a if a is not None else _to_mp(u) for a, u in zip(ex_up, upper)]
        lo = [b if b is not None else _to_mp(l) for b, l in zip(ex_lo, lower)]
        stops = [m for m in (_nonpos_int(a) for a in up) if m is not None]
        length = min(stops) if stops else None
        for b in lo:
            m = _nonpos_int(b)
            if m is not None and (length is None or m < length):
                raise ValueError(f"lower parameter {b} is a pole before termination")

        if length is not None:
            rational = None not in ex_up and None not in ex_lo and ex_z is not None
            if rational:
                total, term = Fraction(0), Fraction(1)
                for k in range(length + 1):
                    total += term
                    num, den = Fraction(1), Fraction(k + 1)
                    for a in ex_up:
                        num *= a + k
                    for b in ex_lo:
                        den *= b + k
                    term = term * num * ex_z / den
                if exact:
                    return total
                return mpf(total.numerator) / total.denominator
            if exact:
                raise TypeError("exact=True needs rational parameters and argument")
            zz = _to_mp(z)
            total, term = mpf(0), mpf(1)
            for k in range(length + 1):
                total += term
                for a in up:
                    term *= a + k
                for b in lo:
                    term /= b + k
                term *= zz / (k + 1)
            return +total
        if exact:
            raise TypeError("exact=True needs a terminating series")

        zz = _to_mp(z)
        if zz == 0:
            return mpf(1)
        p, q = len(up), len(lo)
        if p > q + 1:
            raise DivergenceError(f"{p}F{q} diverges for z != 0 without termination")
        fup = [_to_mp(a) for a in up]
        flo = [_to_mp(b) for b in lo]
        if p == q + 1:
            if abs(zz) > 1:
                raise DivergenceError(f"|z| = {mp.nstr(abs(zz), 8)} > 1 for {p}F{q}")
            if abs(zz) == 1:
                if sum(flo) - sum(fup) <= 0:
                    raise DivergenceError(f"{p}F{q} at |z| = 1 with non-positive parameter excess")
                if zz == 1:
                    return _sum_at_one(fup, flo, ctx)
                return mp.hyper(fup, flo, zz)
        tol = ctx.eps()
        # past this index every parameter factor is monotone in k
        kmin = int(max((abs(x) for x in fup + flo), default=0)) + 1
        total, term = mpf(0), mpf(1)
        k = 0
        while True:
            total += term
            ratio = zz / (k + 1)
            for a in fup:
                ratio *= a + k
            for b in flo:
                ratio /= b + k
            nxt = term * ratio
            k += 1
            rho = abs(ratio)
            if p == q + 1:
                rho = max(rho, abs(zz))
            if k > kmin and rho < 1 and abs(nxt) * (1 / (1 - rho)) <= tol * abs(total):
                total += nxt
                return +total
            term = nxt
            if k > 10 ** 7:
                raise NonConvergenceError("pFq summation did not converge")
