"""Partition function, GUE reference, free energy and the Toda identity."""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .numkernel import PrecisionContext
from .orthopoly import ModelPoint, RecurrenceTable, compute_table
from .parallel import compute_tables

__all__ = [
    "log_partition",
    "selberg_gue",
    "t_of_u",
    "u_of_t",
    "t_critical",
    "f_tilde",
    "PartitionReport",
    "partition_report",
    "TodaResult",
    "toda_residual",
]


def log_partition(table: RecurrenceTable, N: int | None = None):
    """log Z_N = log N! + sum_{k<N} log h_k (principal logs, complex)."""
    N = table.model.N if N is None else N
    if len(table.h) < N:
        raise ValueError(f"table holds {len(table.h)} norms, need {N}")
    with table.model.ctx.workdps():
        total = mp.loggamma(N + 1) + mp.fsum(mp.log(h) for h in table.h[:N])
        return mpc(total)


def selberg_gue(N: int, ctx: PrecisionContext) -> mpf:
    """log Z_N^0 = (N/2) log 2pi - (N^2/2) log N + sum_{n<=N} log n!."""
    if N < 1:
        raise ValueError("N must be >= 1")
    with ctx.workdps():
        return (mpf(N) / 2 * mp.log(2 * mp.pi) - mpf(N) ** 2 / 2 * mp.log(N)
                + mp.fsum(mp.loggamma(n + 1) for n in range(1, N + 1)))


def t_of_u(u):
    return 1 / (4 * (3 * u) ** (mpf(4) / 3))


def u_of_t(t):
    return (4 * t) ** (-mpf(3) / 4) / 3


def t_critical():
    """t_c = 3 * 2^{-2/3}, the image of u_c."""
    return 3 * mpf(2) ** (-mpf(2) / 3)


def f_tilde(F_N, u):
    """Free energy in the t-parameterization: F_N + ln(3u)/3 + 1/(108 u^2)."""
    return F_N + mp.log(3 * u) / 3 + 1 / (108 * u * u)


@dataclass(frozen=True)
class PartitionReport:
    model: ModelPoint
    logZ: object
    logZ0: object
    F_N: object
    t: object
    F_tilde: object

    def csv_row(self, table: RecurrenceTable | None = None, digits: int = 25) -> dict:
        s = lambda x: mp.nstr(mp.re(x), digits)
        row = {"N": self.model.N, "u": s(self.model.u), "t": s(self.t),
               "F_N": s(self.F_N), "F_tilde": s(self.F_tilde)}
        if table is not None:
            n = self.model.N
            row["gamma2"] = s(table.gamma2_n(n))
            row["beta"] = s(table.beta_n(n)) if n < len(table.beta) else ""
        return row


def partition_report(model: ModelPoint, table: RecurrenceTable | None = None) -> PartitionReport:
    table = table or compute_table(model)
    N = model.N
    with model.ctx.workdps():
        logZ = log_partition(table, N)
        logZ0 = selberg_gue(N, model.ctx)
        F = (logZ - logZ0) / N ** 2
        u = model.u
        if mp.re(u) > 0:
            t = t_of_u(u)
            Ft = f_tilde(F, u)
        else:
            t = Ft = mp.nan
        return PartitionReport(model, logZ, logZ0, F, t, Ft)


@dataclass(frozen=True)
class TodaResult:
    t: object
    h: object
    lhs: object
    rhs: object
    residual: object


def toda_residual(u, N: int, h_step, ctx: PrecisionContext | None = None,
                  workers: int = 1) -> TodaResult:
    """Second t-difference of F-tilde_N against gamma-tilde^2_{N,N}(t).

    Three full tables are computed at the u-images of t - h, t, t + h.
    """
    ctx = ctx or PrecisionContext.for_model(N)
    with ctx.workdps():
        u = mpf(u)
        h = mpf(h_step)
        t = t_of_u(u)
        if t - h <= t_critical():
            raise ValueError("t - h must stay above t_c (u below u_c)")
        ts = [t - h, t, t + h]
        models = [ModelPoint(u_of_t(tt), N, n_max=N, ctx=ctx) for tt in ts]
    tables = compute_tables(models, workers)
    with ctx.workdps():
        F = [mp.re(partition_report(m, tb).F_tilde) for m, tb in zip(models, tables)]
        lhs = (F[0] - 2 * F[1] + F[2]) / (h * h)
        rhs = mp.re(tables[1].gamma2_n(N)) / (2 * mp.sqrt(t))
        return TodaResult(t, h, lhs, rhs, lhs - rhs)
