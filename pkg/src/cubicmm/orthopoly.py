"""Complex orthogonal polynomials for the weight exp(-N(z^2/2 - u z^3)).

The contour is a combination of three rays out of the origin,
``Gamma = alpha*Gamma0 + (1-alpha)*Gamma1`` with
``Gamma0 = R_pi u R_{pi/5}`` and ``Gamma1 = R_pi u R_{-pi/5}``; the negative
ray is traversed inward. Orthogonality is bilinear (no conjugation), so the
Hankel moment matrix is factored as L D L^T over the complex numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from mpmath import mp, mpc, mpf

from .errors import PivotCollapseError, WeightDecayError
from .numkernel import PrecisionContext, adaptive_panels, gauss_legendre_nodes

__all__ = [
    "RAY_ANGLES",
    "ModelPoint",
    "RecurrenceTable",
    "truncation_radius",
    "ray_moments",
    "moments",
    "recurrence_table",
    "compute_table",
    "eval_polynomial",
    "polynomial_coefficients",
    "string_residuals",
    "u_critical",
]

# (angle as a multiple of pi, contribution to Gamma0, contribution to Gamma1)
RAY_ANGLES = ((1, -1, -1), (mpf(1) / 5, 1, 0), (-mpf(1) / 5, 0, 1))


def u_critical():
    """u_c = 3^{1/4}/18 at the current working precision."""
    return mp.root(3, 4) / 18


def _mpnum(x):
    if isinstance(x, str):
        return mp.mpmathify(x.replace(" ", ""))
    return mp.mpmathify(x)


def _ray_coefficients(u, theta):
    """Return (quadratic, cubic) coefficients of Re V(r e^{i theta}) in r."""
    e2 = mp.expj(2 * theta)
    e3 = mp.expj(3 * theta)
    return mp.re(e2) / 2, -mp.re(u * e3)


@dataclass(frozen=True)
class ModelPoint:
    """One matrix-model computation: (u, N, n_max, alpha) under a context."""

    u: object
    N: int
    n_max: int | None = None
    alpha: object = mpf(1) / 2
    ctx: PrecisionContext | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.ctx is None:
            object.__setattr__(self, "ctx", PrecisionContext.for_model(self.N))
        if self.n_max is None:
            object.__setattr__(self, "n_max", int(self.N) + 1)
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        with self.ctx.workdps():
            u = _mpnum(self.u)
            if isinstance(u, mpc) and u.imag == 0:
                u = u.real
            alpha = _mpnum(self.alpha)
            if isinstance(alpha, mpc) and alpha.imag == 0:
                alpha = alpha.real
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "alpha", alpha)
            for frac, _, _ in RAY_ANGLES:
                quad, cub = _ray_coefficients(u, mp.pi * frac)
                tiny = mpf(10) ** (-self.ctx.digits)
                if not (cub > tiny or (abs(cub) <= tiny and quad > 0)):
                    raise WeightDecayError(
                        f"weight does not decay on the ray arg z = {mp.nstr(frac, 5)}*pi "
                        f"for u = {mp.nstr(u, 10)}")

    @property
    def is_real(self) -> bool:
        return not isinstance(self.u, mpc) and not isinstance(self.alpha, mpc)

    def replace(self, **kw) -> "ModelPoint":
        data = dict(u=self.u, N=self.N, n_max=self.n_max, alpha=self.alpha, ctx=self.ctx)
        data.update(kw)
        return ModelPoint(**data)


def truncation_radius(N: int, u, theta, k: int, ctx: PrecisionContext) -> float:
    """Radius beyond which |z^k e^{-NV}| stays below 10^-(digits+guard) of its peak.

    Works in double precision: only the location of R matters, and it is
    padded by 5 percent.
    """
    u = complex(u)
    th = float(theta)
    q2 = math.cos(2 * th) / 2
    q3 = -(u * complex(math.cos(3 * th), math.sin(3 * th))).real

    def phi(r):
        return N * (q2 * r * r + q3 * r ** 3) - (k * math.log(r) if k else 0.0)

    target = ctx.work_dps * math.log(10.0)
    # peak of the integrand = minimum of phi
    grid = [0.01 * 1.05 ** i for i in range(400)]
    vals = [phi(r) for r in grid]
    i_min = min(range(len(grid)), key=vals.__getitem__)
    base = min(vals[i_min], 0.0) if k == 0 else vals[i_min]
    lo = grid[i_min]
    hi = max(lo, 1e-3) * 2
    while phi(hi) - base < target:
        hi *= 2
        if hi > 1e6:
            raise WeightDecayError("no finite truncation radius; weight does not decay")
    for _ in range(80):
        mid = (lo + hi) / 2
        if phi(mid) - base < target:
            lo = mid
        else:
            hi = mid
    return 1.05 * hi


def ray_moments(N: int, u, theta, k_max: int, ctx: PrecisionContext):
    """[integral of (r e)^k e^{-N V(r e)} e dr, k = 0..k_max] along arg z = theta.

    Must be called inside the context's working precision.
    """
    R = max(truncation_radius(N, u, theta, 0, ctx),
            truncation_radius(N, u, theta, k_max, ctx))
    e = mp.expj(theta)
    half = k_max // 2

    def weight(r):
        z = r * e
        return mp.exp(-N * (z * z / 2 - u * z * z * z))

    def probe(r):
        w = weight(r)
        return (w, w * r ** half, w * r ** k_max)

    _, intervals = adaptive_panels(probe, mpf(R), ctx, components=3,
                                   width=mpf(R) / 16)
    nodes = gauss_legendre_nodes(ctx.panel_nodes, mp.prec)
    acc = [mpc(0)] * (k_max + 1)
    for a, b in intervals:
        c = (a + b) / 2
        h = (b - a) / 2
        for x, w in nodes:
            r = c + h * x
            t = (w * h) * weight(r)
            for k in range(k_max + 1):
                acc[k] += t
                t *= r
    rot = e
    out = []
    for k in range(k_max + 1):
        out.append(acc[k] * rot)
        rot *= e
    return out


def moments(model: ModelPoint, k_max: int | None = None):
    """Moments m_0..m_{k_max} (default 2*n_max) on the alpha-weighted contour."""
    if k_max is None:
        k_max = 2 * model.n_max
    ctx = model.ctx
    with ctx.workdps():
        u, alpha = model.u, model.alpha
        weights = {0: alpha, 1: 1 - alpha}
        total = [mpc(0)] * (k_max + 1)
        for frac, c0, c1 in RAY_ANGLES:
            coef = c0 * weights[0] + c1 * weights[1]
            if coef == 0:
                continue
            vals = ray_moments(model.N, u, mp.pi * frac, k_max, ctx)
            for k in range(k_max + 1):
                total[k] += coef * vals[k]
        return total


@dataclass(frozen=True)
class RecurrenceTable:
    """Moments, norms and recurrence coefficients for one model point.

    ``h[n]`` is h_n (n = 0..n_max), ``gamma2[n-1]`` is gamma^2_n
    (n = 1..n_max) and ``beta[n]`` is beta_n (n = 0..n_max-1). Use
    ``gamma2_n``/``beta_n`` to index by degree.
    """

    model: ModelPoint
    moments: tuple
    h: tuple
    gamma2: tuple
    beta: tuple
    condition_estimate: object
    subdiag: tuple = field(repr=False, default=())

    def gamma2_n(self, n: int):
        if not 1 <= n <= len(self.gamma2):
            raise IndexError(f"gamma2_{n} not in table")
        return self.gamma2[n - 1]

    def beta_n(self, n: int):
        if not 0 <= n < len(self.beta):
            raise IndexError(f"beta_{n} not in table")
        return self.beta[n]

    def to_dict(self) -> dict:
        digits = self.model.ctx.work_dps

        def enc(x):
            x = mpc(x)
            return {"re": mp.nstr(x.real, digits), "im": mp.nstr(x.imag, digits)}

        with self.model.ctx.workdps():
            return {
                "u": enc(self.model.u),
                "N": self.model.N,
                "n_max": self.model.n_max,
                "alpha": enc(self.model.alpha),
                "digits": self.model.ctx.digits,
                "moments": [enc(m) for m in self.moments],
                "h": [enc(x) for x in self.h],
                "gamma2": [enc(x) for x in self.gamma2],
                "beta": [enc(x) for x in self.beta],
                "condition_estimate": mp.nstr(self.condition_estimate, 10),
            }


def recurrence_table(moment_seq: Sequence, model: ModelPoint) -> RecurrenceTable:
    """Bilinear L D L^T factorization of the Hankel matrix [m_{i+j}].

    Pivots are the norms h_n; gamma^2_n = h_n/h_{n-1} and
    beta_n = L[n+1][n] - L[n][n-1]. A pivot that cancels to below
    10^-(digits-guard) of the largest term in its elimination sum is
    reported as a collapse at that degree.
    """
    n = model.n_max + 1
    if len(moment_seq) < 2 * n - 1:
        raise ValueError(f"need moments through m_{2 * n - 2}, got {len(moment_seq)}")
    ctx = model.ctx
    with ctx.workdps():
        m = [mpc(x) for x in moment_seq]
        thresh = mpf(10) ** (-(ctx.digits - ctx.guard_digits))
        L = [[mpc(0)] * n for _ in range(n)]
        LD = [[mpc(0)] * n for _ in range(n)]  # L[i][k] * d[k]
        d = []
        for j in range(n):
            terms = [LD[j][k] * L[j][k] for k in range(j)]
            s = m[2 * j] - mp.fsum(terms)
            ref = max([abs(m[2 * j])] + [abs(t) for t in terms])
            if ref == 0 or abs(s) < thresh * ref:
                raise PivotCollapseError(j, mp.nstr(abs(s) / ref if ref else 0, 5))
            d.append(s)
            L[j][j] = mpc(1)
            LD[j][j] = s
            for i in range(j + 1, n):
                acc = m[i + j] - mp.fsum(LD[i][k] * L[j][k] for k in range(j))
                L[i][j] = acc / s
                LD[i][j] = acc
        sub = [L[i + 1][i] for i in range(n - 1)]
        gamma2 = [d[i] / d[i - 1] for i in range(1, n)]
        beta = [sub[0]] + [sub[i] - sub[i - 1] for i in range(1, n - 1)]
        mags = [abs(x) for x in d]
        cond = min(mags) / max(mags)
        return RecurrenceTable(model=model, moments=tuple(m), h=tuple(d),
                               gamma2=tuple(gamma2), beta=tuple(beta),
                               condition_estimate=cond, subdiag=tuple(sub))


def compute_table(model: ModelPoint) -> RecurrenceTable:
    """Moments followed by the recurrence factorization."""
    return recurrence_table(moments(model), model)


def eval_polynomial(table: RecurrenceTable, z, n: int):
    """P_n(z) by the forward three-term recurrence."""
    if not 0 <= n <= len(table.beta):
        raise IndexError(f"degree {n} exceeds table (n_max = {len(table.beta)})")
    with table.model.ctx.workdps():
        z = mp.mpmathify(z)
        prev, cur = mpc(0), mpc(1)
        for k in range(n):
            g2 = table.gamma2[k - 1] if k else 0
            prev, cur = cur, (z - table.beta[k]) * cur - g2 * prev
        return cur


def polynomial_coefficients(table: RecurrenceTable, n: int):
    """Monomial coefficients [c_0, ..., c_n] of P_n (c_n = 1)."""
    with table.model.ctx.workdps():
        prev, cur = [], [mpc(1)]
        for k in range(n):
            nxt = [mpc(0)] + cur  # z * P_k
            for i, c in enumerate(cur):
                nxt[i] -= table.beta[k] * c
            if k:
                for i, c in enumerate(prev):
                    nxt[i] -= table.gamma2[k - 1] * c
            prev, cur = cur, nxt
        return cur


@dataclass(frozen=True)
class StringResiduals:
    n: tuple
    r1: tuple
    r2: tuple

    @property
    def max_abs(self):
        return max(max(abs(x) for x in self.r1), max(abs(x) for x in self.r2))


def string_residuals(table: RecurrenceTable, model: ModelPoint | None = None) -> StringResiduals:
    """Residuals of the two exact string equations for n = 1..n_max-1.

    r1_n = 3u(g_n + b_n^2 + g_{n+1}) - b_n,
    r2_n = g_n (1 - 3u(b_n + b_{n-1})) - n/N,
    with g = gamma^2 and b = beta.
    """
    model = model or table.model
    with model.ctx.workdps():
        u, N = model.u, model.N
        ns, r1, r2 = [], [], []
        for n in range(1, len(table.beta)):
            g, g1 = table.gamma2_n(n), table.gamma2_n(n + 1)
            b, b0 = table.beta_n(n), table.beta_n(n - 1)
            ns.append(n)
            r1.append(3 * u * (g + b * b + g1) - b)
            r2.append(g * (1 - 3 * u * (b + b0)) - mpf(n) / N)
        return StringResiduals(tuple(ns), tuple(r1), tuple(r2))
