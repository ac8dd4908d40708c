"""Named experiments, their configuration, and deterministic result files.

A run writes ``result.json`` (sorted keys, numbers as fixed-width decimal
strings), ``summary.txt`` and one CSV per table into the output
directory. The exit status is 0 when every error-severity assertion
passes, 1 on an assertion failure, 2 for a bad configuration and 3 when
the numerics fail outright.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from mpmath import mp, mpf

from .errors import ConfigError, NumericError
from .numkernel import PrecisionContext
from .orthopoly import ModelPoint, compute_table, string_residuals
from .parallel import pmap
from .partition import log_partition, partition_report, selberg_gue, toda_residual

EXPERIMENTS = (
    "gaussian-oracle",
    "string-residuals",
    "toda",
    "regular-free-energy",
    "critical-convergence",
    "double-scaling-sweep",
    "painleve-trace",
    "zeros",
)

# every key an experiment understands, with its default
DEFAULTS = {
    "gaussian-oracle": {"N": "20", "bound": "1e-25", "selberg_N": "1, 2, 3, 4, 5, 6, 7, 8, 9, 10",
                        "selberg_bound": "1e-20"},
    "string-residuals": {"N": "30", "u": "uc", "alpha": "1/2", "bound": "1e-20", "digit_step": "10"},
    "toda": {"N": "10", "u": "uc/2", "h": "1e-2, 3e-3, 1e-3"},
    "regular-free-energy": {"N": "12, 24", "u": "uc/2"},
    "critical-convergence": {"N": "20, 40, 80", "ode_tol": "1e-10"},
    "double-scaling-sweep": {"N": "40, 80", "lambda": "-2, -1, 0, 1", "ode_tol": "1e-10"},
    "painleve-trace": {"lambda_start": "-30", "lambda_end": "5", "ode_tol": "1e-10"},
    "zeros": {"N": "20, 40", "radius": "4", "grid": "5, 16", "lambda_max": "8", "ode_tol": "1e-10"},
}
DEFAULT_DIGITS = {"gaussian-oracle": 40, "string-residuals": 90, "painleve-trace": 90}
SELBERG_DIGITS = 50
PAINLEVE_DIGITS = 90
NUMBER_DIGITS = 20

_U_RE = re.compile(r"^(?:(?P<num>[-+0-9.eE]+)\s*\*\s*)?uc(?:\s*/\s*(?P<den>[-+0-9.eE]+))?$")


def parse_u(text: str):
    """'uc', 'uc/2', '0.5*uc' or a plain decimal (complex allowed)."""
    s = text.strip()
    m = _U_RE.match(s)
    try:
        if m:
            val = mp.root(3, 4) / 18
            if m.group("num"):
                val *= mpf(m.group("num"))
            if m.group("den"):
                val /= mpf(m.group("den"))
            return val
        return mp.mpmathify(s.replace(" ", ""))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse u value {text!r}") from exc


def _split(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment name, its parameters as canonical strings, and run options.

    File form (INI)::

        [experiment]
        name = toda
        digits = 60
        guard_digits = 10
        workers = 2
        out = results/toda

        [parameters]
        N = 10
        u = uc/2
        h = 1e-2, 3e-3, 1e-3

    Lists are comma-separated. ``u`` accepts ``uc``, ``uc/2``, ``0.5*uc``
    or a decimal. Unknown parameter keys are rejected; missing ones take
    the defaults in ``DEFAULTS``. ``digits`` omitted means the
    experiment's own default (usually max(40, 3N)).
    """

    experiment: str
    params: tuple = ()
    digits: int | None = None
    guard_digits: int = 10
    workers: int = 1
    out: str = "results"

    @classmethod
    def create(cls, experiment: str, params: dict | None = None, **kw) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}")
        merged = dict(DEFAULTS[experiment])
        for k, v in (params or {}).items():
            if k not in merged:
                raise ConfigError(f"experiment {experiment} has no parameter {k!r}")
            merged[k] = ", ".join(_split(str(v))) if isinstance(v, str) else str(v)
        cfg = cls(experiment, tuple(sorted(merged.items())), **kw)
        cfg.validate()
        return cfg

    @property
    def p(self) -> dict:
        return dict(self.params)

    def ints(self, key) -> list[int]:
        try:
            return [int(x) for x in _split(self.p[key])]
        except ValueError as exc:
            raise ConfigError(f"{key} must be integers: {self.p[key]!r}") from exc

    def reals(self, key) -> list:
        try:
            return [mpf(x) for x in _split(self.p[key])]
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{key} must be decimals: {self.p[key]!r}") from exc

    def real(self, key):
        vals = self.reals(key)
        if len(vals) != 1:
            raise ConfigError(f"{key} takes one value")
        return vals[0]

    def alpha(self):
        text = self.p.get("alpha", "1/2")
        try:
            if "/" in text:
                f = Fraction(text)
                return mpf(f.numerator) / f.denominator
            return mp.mpmathify(text.replace(" ", ""))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse alpha {text!r}") from exc

    def us(self) -> list:
        return [parse_u(x) for x in _split(self.p["u"])]

    def validate(self):
        if self.digits is not None and (int(self.digits) != self.digits or self.digits < 15):
            raise ConfigError("digits must be an integer >= 15")
        if self.guard_digits < 5:
            raise ConfigError("guard_digits must be >= 5")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        p = self.p
        for key in ("N", "selberg_N"):
            if key in p and any(n < 1 for n in self.ints(key)):
                raise ConfigError(f"{key} must be positive")
        if "u" in p:
            self.us()
        if "alpha" in p:
            self.alpha()
        for key in ("h", "lambda", "bound", "ode_tol", "radius", "lambda_start", "lambda_end",
                    "lambda_max", "digit_step", "selberg_bound"):
            if key in p:
                self.reals(key)
        if "grid" in p:
            g = self.ints("grid")
            if len(g) != 2 or min(g) < 1:
                raise ConfigError("grid is 'n_r, n_theta' with positive entries")

    def context(self, N: int | None = None, default: int | None = None) -> PrecisionContext:
        digits = self.digits or default or DEFAULT_DIGITS.get(self.experiment)
        if digits is None:
            digits = max(40, 3 * N) if N else 40
        return PrecisionContext(digits=digits, guard_digits=self.guard_digits)

    # file representation

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        sec = {"name": self.experiment, "guard_digits": str(self.guard_digits),
               "workers": str(self.workers), "out": self.out}
        if self.digits is not None:
            sec["digits"] = str(self.digits)
        cp["experiment"] = sec
        cp["parameters"] = dict(self.params)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, **overrides) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text)
            run = cp["experiment"]
            exp = overrides.pop("experiment", None) or run["name"]
        except (configparser.Error, KeyError) as exc:
            raise ConfigError(f"bad config file: {exc}") from exc
        params = dict(cp["parameters"]) if cp.has_section("parameters") else {}
        params.update(overrides.pop("params", {}) or {})
        try:
            kw = {"guard_digits": int(run.get("guard_digits", 10)),
                  "workers": int(run.get("workers", 1)),
                  "out": run.get("out", "results")}
            if "digits" in run:
                kw["digits"] = int(run["digits"])
        except ValueError as exc:
            raise ConfigError(f"bad run option: {exc}") from exc
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls.create(exp, params, **kw)


# ---------------------------------------------------------------- results

def fmt(x, digits: int = NUMBER_DIGITS):
    """Fixed-precision decimal string; complex as 're+imj'."""
    if x is None:
        return None
    if isinstance(x, (bool, int, str)):
        return x
    x = mp.mpmathify(x)
    if isinstance(x, mp.mpc):
        if x.imag == 0:
            x = x.real
        else:
            return f"{mp.nstr(x.real, digits)}{'+' if x.imag >= 0 else '-'}{mp.nstr(abs(x.imag), digits)}j"
    return mp.nstr(x, digits, min_fixed=-4, max_fixed=6)


@dataclass
class Assertion:
    name: str
    value: object
    bound: str
    passed: bool
    severity: str = "error"

    def to_dict(self):
        return {"name": self.name, "value": fmt(self.value), "bound": self.bound,
                "pass": bool(self.passed), "severity": self.severity}

    def line(self):
        tag = "PASS" if self.passed else ("WARN" if self.severity == "warning" else "FAIL")
        return f"[{tag}] {self.name}: value={fmt(self.value, 8)} bound={self.bound}"


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> list of row dicts
    files: dict = field(default_factory=dict)  # extra file name -> text
    failures: list = field(default_factory=list)

    def check(self, name, value, ok, bound, severity="error"):
        self.assertions.append(Assertion(name, value, bound, bool(ok), severity))

    def fail_point(self, point: str, exc: BaseException):
        self.failures.append({"point": point, "code": type(exc).__name__, "detail": str(exc)})

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions if a.severity == "error")


def _csv_text(rows: list) -> str:
    if not rows:
        return ""
    header = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: fmt(v) for k, v in r.items()})
    return buf.getvalue()


def write_outputs(cfg: ExperimentConfig, outcome: Outcome, status: str) -> dict:
    """Write result.json, summary.txt and CSVs; returns the JSON document."""
    os.makedirs(cfg.out, exist_ok=True)
    doc = {
        "experiment": cfg.experiment,
        "config": {"parameters": cfg.p, "digits": cfg.digits, "guard_digits": cfg.guard_digits},
        "results": {k: _jsonable(v) for k, v in outcome.results.items()},
        "assertions": [a.to_dict() for a in outcome.assertions],
        "failures": outcome.failures,
        "status": status,
    }
    with open(os.path.join(cfg.out, "result.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(cfg.out, "summary.txt"), "w") as fh:
        fh.write(f"experiment: {cfg.experiment}\nstatus: {status}\n")
        for a in outcome.assertions:
            fh.write(a.line() + "\n")
        for f in outcome.failures:
            fh.write(f"[POINT-FAILURE] {f['point']}: {f['code']} {f['detail']}\n")
    for name, rows in sorted(outcome.tables.items()):
        with open(os.path.join(cfg.out, f"{name}.csv"), "w") as fh:
            fh.write(_csv_text(rows))
    for name, text in sorted(outcome.files.items()):
        with open(os.path.join(cfg.out, name), "w") as fh:
            fh.write(text)
    return doc


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return fmt(v)


# ------------------------------------------------------------ experiments

def _safe_table(model):
    try:
        return compute_table(model), None
    except NumericError as exc:
        return None, exc


def _tables(models, workers, out: "Outcome", labels):
    """Tables for each model; failed points are recorded and come back as None."""
    res = pmap(_safe_table, models, workers)
    tables = []
    for (t, exc), label in zip(res, labels):
        if exc is not None:
            out.fail_point(label, exc)
        tables.append(t)
    return tables


def _gaussian_oracle(cfg: ExperimentConfig) -> Outcome:
    out = Outcome()
    bound = cfg.real("bound")
    for N in cfg.ints("N"):
        ctx = cfg.context(N)
        table = compute_table(ModelPoint(0, N, n_max=N, ctx=ctx))
        with ctx.workdps():
            dg = max(abs(table.gamma2_n(n) - mpf(n) / N) for n in range(1, N + 1))
            db = max(abs(b) for b in table.beta)
            out.tables[f"recurrence_N{N}"] = [
                {"n": n, "gamma2": table.gamma2_n(n),
                 "beta": table.beta_n(n) if n < len(table.beta) else ""}
                for n in range(1, N + 1)]
        out.results[f"N={N}"] = {"max_gamma2_dev": dg, "max_beta": db}
        out.check(f"N={N} max|gamma2_n - n/N|", dg, dg < bound, f"< {fmt(bound, 3)}")
        out.check(f"N={N} max|beta_n|", db, db < bound, f"< {fmt(bound, 3)}")
    sb = cfg.real("selberg_bound")
    ctx = PrecisionContext(digits=cfg.digits or SELBERG_DIGITS, guard_digits=cfg.guard_digits)
    rows = []
    for N in cfg.ints("selberg_N"):
        table = compute_table(ModelPoint(0, N, n_max=N, ctx=ctx))
        with ctx.workdps():
            lz, l0 = log_partition(table, N), selberg_gue(N, ctx)
            err = abs(lz - l0)
        rows.append({"N": N, "logZ": lz, "logZ0": l0, "error": err})
    if rows:
        worst = max(r["error"] for r in rows)
        out.tables["selberg"] = rows
        out.results["selberg_max_error"] = worst
        out.check("max_N |logZ_N(0) - logZ0_N|", worst, worst < sb, f"< {fmt(sb, 3)}")
    return out


def _string_residuals(cfg: ExperimentConfig) -> Outcome:
    out = Outcome()
    bound = cfg.real("bound")
    step = int(cfg.real("digit_step"))
    alpha = cfg.alpha()
    rows = []
    for N in cfg.ints("N"):
        for u in cfg.us():
            ctx = cfg.context(N)
            ctx2 = PrecisionContext(digits=ctx.digits + step, guard_digits=ctx.guard_digits)
            models = [ModelPoint(u, N, alpha=alpha, ctx=c) for c in (ctx, ctx2)]
            key = f"N={N} u={fmt(u, 10)}"
            tables = _tables(models, cfg.workers, out, [key, f"{key} digits+{step}"])
            if None in tables:
                continue
            r = [string_residuals(t).max_abs for t in tables]
            rows.append({"N": N, "u": u, "digits": ctx.digits, "residual": r[0],
                         "residual_more_digits": r[1]})
            out.results[key] = {"residual": r[0], "residual_more_digits": r[1]}
            out.check(f"{key} max string residual", r[0], r[0] < bound, f"< {fmt(bound, 3)}")
            shrink = r[0] / r[1] if r[1] else mp.inf
            out.check(f"{key} residual shrink at digits+{step}", shrink, shrink >= 10, ">= 10")
    out.tables["string_residuals"] = rows
    return out


def _slope(xs, ys):
    lx = [math.log(float(x)) for x in xs]
    ly = [math.log(float(y)) for y in ys]
    mx, my = sum(lx) / len(lx), sum(ly) / len(ly)
    return (sum((a - mx) * (b - my) for a, b in zip(lx, ly))
            / sum((a - mx) ** 2 for a in lx))


def _toda(cfg: ExperimentConfig) -> Outcome:
    out = Outcome()
    N = cfg.ints("N")[0]
    u = cfg.us()[0]
    ctx = cfg.context(N)
    rows = []
    for h in cfg.reals("h"):
        r = toda_residual(u, N, h, ctx, workers=cfg.workers)
        rows.append({"h": h, "t": r.t, "lhs": r.lhs, "rhs": r.rhs, "residual": r.residual})
    out.tables["toda"] = rows
    res = [abs(r["residual"]) for r in rows]
    if len(rows) >= 2:
        s = _slope([r["h"] for r in rows], res)
        out.results["slope"] = s
        out.check("Toda residual log-log slope", s, abs(s - 2) <= 0.1, "2.0 +- 0.1")
    out.results["residuals"] = {fmt(r["h"], 6): r["residual"] for r in rows}
    return out


def _regular_free_energy(cfg: ExperimentConfig) -> Outcome:
    from .scaling import f0, f2

    out = Outcome()
    u = cfg.us()[0]
    Ns = cfg.ints("N")
    rows = []
    models = [ModelPoint(u, N, n_max=N, ctx=cfg.context(N)) for N in Ns]
    tables = _tables(models, cfg.workers, out, [f"N={N}" for N in Ns])
    R = {}
    for N, m, t in zip(Ns, models, tables):
        if t is None:
            continue
        rep = partition_report(m, t)
        with m.ctx.workdps():
            F0 = f0(mp.re(m.u), m.ctx)
            F2 = f2(mp.re(m.u), m.ctx)
            R[N] = abs(rep.F_N - F0 - F2 / N ** 2)
        rows.append({"N": N, "u": m.u, "F_N": rep.F_N, "F0": F0, "F2": F2, "R_N": R[N]})
    out.tables["regular_free_energy"] = rows
    out.results["R"] = {str(N): R[N] for N in Ns}
    for a, b in zip(Ns, Ns[1:]):
        if a not in R or b not in R:
            out.check(f"R_{a}/R_{b}", None, False, "both points computed")
            continue
        ratio = R[a] / R[b]
        ideal = (mpf(b) / a) ** 4
        out.results[f"ratio_{a}_{b}"] = ratio
        if (a, b) == (12, 24):
            ok, bound = 10 <= ratio <= 26, "[10, 26]"
        else:
            ok, bound = ideal / 1.6 <= ratio <= ideal * 1.6, f"{fmt(ideal, 4)} within x1.6"
        out.check(f"R_{a}/R_{b}", ratio, ok, bound)
    return out


def _trajectory(cfg: ExperimentConfig, lambda_end, lambda_start=-30):
    from .painleve1 import reference_trajectory

    ctx = PrecisionContext(digits=PAINLEVE_DIGITS, guard_digits=cfg.guard_digits)
    tol = cfg.real("ode_tol")
    return reference_trajectory(lambda_end, tol, ctx, lambda_start=lambda_start), ctx


def _critical_convergence(cfg: ExperimentConfig) -> Outcome:
    from .scaling import critical_constants

    out = Outcome()
    Ns = sorted(cfg.ints("N"))
    models = [ModelPoint(parse_u("uc"), N, n_max=N, ctx=cfg.context(N)) for N in Ns]
    tables = _tables(models, cfg.workers, out, [f"N={N}" for N in Ns])
    sol, pctx = _trajectory(cfg, 1)
    with pctx.workdps():
        y0 = sol.evaluate(0)[0]
        pred = -mpf(2) ** (mpf(4) / 5) * mp.sqrt(3) * y0
    d = {}
    rows = []
    for N, m, t in zip(Ns, models, tables):
        if t is None:
            continue
        with m.ctx.workdps():
            g = mp.re(t.gamma2_n(N))
            d[N] = mpf(N) ** (mpf(2) / 5) * (g - critical_constants(m.ctx).gamma2_c)
        rows.append({"N": N, "gamma2_NN": g, "d_N": d[N]})
    out.tables["critical_convergence"] = rows
    out.results["d_N"] = {str(N): d[N] for N in Ns}
    out.results["y_seed_0"] = y0
    out.results["p2_0_predicted"] = pred
    if len(Ns) >= 3:
        n1, n2, n3 = Ns[-3:]
        if not all(n in d for n in (n1, n2, n3)):
            out.check("d_N available for the three largest N", None, False, "all computed")
            return out
        d1, d2, d3 = d[n1], d[n2], d[n3]
        out.check(f"|d_{n3}-d_{n2}| < |d_{n2}-d_{n1}|", abs(d3 - d2), abs(d3 - d2) < abs(d2 - d1),
                  f"< {fmt(abs(d2 - d1), 6)}")
        # d_N = L + c N^{-2/5}: successive decrements shrink by (n2/n1)^{2/5}
        expect = (mpf(n2) / n1) ** (mpf(2) / 5)
        ratio = (d2 - d1) / (d3 - d2)
        out.results["decrement_ratio"] = ratio
        out.check("decrement ratio vs N^{-2/5} law", ratio, abs(ratio / expect - 1) < 0.3,
                  f"{fmt(expect, 6)} within 30%")
        L = d3 + (d3 - d2) / ((mpf(n3) / n2) ** (mpf(2) / 5) - 1)
        out.results["limit_L"] = L
        out.check("sign(L) = sign(-2^{4/5} sqrt3 y(0))", L, mp.sign(L) == mp.sign(pred),
                  f"sign {int(mp.sign(pred))}")
        rel = abs(L - pred) / abs(L)
        out.check("|L - p2(0)|/|L|", rel, rel < 0.25, "< 0.25")
    return out


def _double_scaling_sweep(cfg: ExperimentConfig) -> Outcome:
    from .scaling import predict_recurrence, u_of_lambda

    out = Outcome()
    Ns = sorted(cfg.ints("N"))
    lams = cfg.reals("lambda")
    sol, pctx = _trajectory(cfg, max(lams) + 1)
    points = [(lam, N) for lam in lams for N in Ns]
    models = []
    for lam, N in points:
        ctx = cfg.context(N)
        models.append(ModelPoint(u_of_lambda(N, lam, ctx), N, n_max=N, ctx=ctx))
    tables = _tables(models, cfg.workers, out, [f"lambda={fmt(l, 6)} N={N}" for l, N in points])
    err = {}
    rows = []
    for (lam, N), m, t in zip(points, models, tables):
        if t is None:
            continue
        with m.ctx.workdps():
            pr = predict_recurrence(N, lam, sol, m.ctx)
            g = mp.re(t.gamma2_n(N))
            b = mp.re(t.beta_n(N - 1))
            e = abs(g - pr.gamma2_pred) * mpf(N) ** (mpf(2) / 5)
        err[(lam, N)] = e
        rows.append({"lambda": lam, "N": N, "u": m.u, "gamma2_NN": g, "gamma2_pred": pr.gamma2_pred,
                     "scaled_error": e, "beta_N-1": b, "beta_pred": pr.beta_pred})
    out.tables["double_scaling_sweep"] = rows
    out.results["scaled_error"] = {f"lambda={fmt(l, 6)} N={N}": e for (l, N), e in err.items()}
    for lam in lams:
        for a, b in zip(Ns, Ns[1:]):
            if (lam, a) not in err or (lam, b) not in err:
                out.check(f"lambda={fmt(lam, 6)} scaled error N={a}->{b} decreases", None, False,
                          "both points computed")
                continue
            ea, eb = err[(lam, a)], err[(lam, b)]
            out.check(f"lambda={fmt(lam, 6)} scaled error N={a}->{b} decreases", eb, eb < ea,
                      f"< {fmt(ea, 6)}")
    return out


def _painleve_trace(cfg: ExperimentConfig) -> Outcome:
    from .painleve1 import detect_pole, exact_coefficients, laurent_eval

    out = Outcome()
    lam0, lam1 = cfg.real("lambda_start"), cfg.real("lambda_end")
    tol = cfg.real("ode_tol")
    sol, ctx = _trajectory(cfg, lam1, lam0)
    with ctx.workdps():
        first = sol.poles[0].location if sol.poles else lam1
        pre = [r for l, r in zip(sol.grid, sol.residual) if l < first]
        maxres = max(pre)
        out.results["max_residual_before_first_pole"] = maxres
        out.results["poles"] = [p.to_dict(20) for p in sol.poles]
        out.results["y_at_0"] = sol.evaluate(0)[0] if lam0 < 0 < lam1 else None
        out.check("ODE residual on [lambda_start, first pole)", maxres, maxres < tol, f"< {fmt(tol, 3)}")
        b = exact_coefficients(2)
        # a_k = b_k 6^{-k/2} with b_k rational
        a1 = mpf(b[1].numerator) / b[1].denominator / mp.sqrt(6)
        a2 = b[2] / 6
        out.check("a1 = -1/(8 sqrt6)", a1, b[1] == Fraction(-1, 8), "exact")
        out.check("a2 = -49/768", mpf(a2.numerator) / a2.denominator, a2 == Fraction(-49, 768), "exact")
        C = mpf("-0.05")
        nodes = [(3 - mpf("0.1") * mpf("0.8") ** i,
                  laurent_eval(3, C, 3 - mpf("0.1") * mpf("0.8") ** i)[0]) for i in range(40)]
        rec, _ = detect_pole(nodes, mpf("0.1"), ctx)
        err = abs(rec.location - 3)
        out.check("synthetic pole round trip |lambda_j - 3|", err, err < 1e-8, "< 1e-8")
    out.tables["trajectory"] = [
        {"lambda": l, "y": y, "yprime": yp, "H": H, "Y": Y}
        for l, y, yp, H, Y in zip(sol.grid, sol.y, sol.yprime, sol.hamiltonian, sol.Y)]
    out.files["poles.json"] = sol.poles_json(NUMBER_DIGITS) + "\n"
    return out


def _zeros(cfg: ExperimentConfig) -> Outcome:
    from .scaling import find_partition_zeros

    out = Outcome()
    Ns = sorted(cfg.ints("N"))
    R = cfg.real("radius")
    grid = tuple(cfg.ints("grid"))
    sol, pctx = _trajectory(cfg, cfg.real("lambda_max"))
    poles = [p.location for p in sol.poles if 0 < p.location < cfg.real("lambda_max")]
    out.results["ode_poles"] = poles
    dist = {}
    rows = []
    for N in Ns:
        ctx = cfg.context(N)
        zs = find_partition_zeros(N, R, grid, ctx, workers=cfg.workers)
        for lam, err in zs.failed:
            code, _, detail = err.partition(": ")
            out.failures.append({"point": f"N={N} lambda={fmt(lam, 8)}", "code": code, "detail": detail})
        out.results[f"N={N}"] = {"winding": zs.winding, "zeros": [z[1] for z in zs.zeros],
                                 "median_abs_Z": zs.median_abs}
        for u, lam, aZ in zs.zeros:
            rows.append({"N": N, "u": u, "lambda": lam, "abs_Z_reduced": aZ})
        if poles and zs.zeros:
            with ctx.workdps():
                dist[N] = min(abs(z[1] - poles[0]) for z in zs.zeros)
    out.tables["zeros"] = rows
    if not poles:
        out.results["note"] = "no ODE pole in (0, lambda_max)"
        return out
    out.results["distance_to_first_pole"] = {str(N): d for N, d in dist.items()}
    if len(Ns) >= 2:
        a, b = Ns[0], Ns[1]
        ok = a in dist and b in dist and dist[b] < dist[a]
        out.check(f"zero-to-pole distance shrinks N={a}->{b}", dist.get(b), ok,
                  f"< {fmt(dist.get(a), 6)}", severity="warning")
    return out


RUNNERS: dict[str, Callable[[ExperimentConfig], Outcome]] = {
    "gaussian-oracle": _gaussian_oracle,
    "string-residuals": _string_residuals,
    "toda": _toda,
    "regular-free-energy": _regular_free_energy,
    "critical-convergence": _critical_convergence,
    "double-scaling-sweep": _double_scaling_sweep,
    "painleve-trace": _painleve_trace,
    "zeros": _zeros,
}


def run(cfg: ExperimentConfig) -> tuple[int, Outcome]:
    """Execute one experiment, write its files, return (exit status, outcome)."""
    try:
        outcome = RUNNERS[cfg.experiment](cfg)
    except NumericError as exc:
        outcome = Outcome()
        outcome.fail_point("global", exc)
        write_outputs(cfg, outcome, "numeric-failure")
        return 3, outcome
    except ValueError as exc:  # ConfigError and bad model parameters
        outcome = Outcome()
        outcome.fail_point("config", exc)
        write_outputs(cfg, outcome, "config-error")
        return 2, outcome
    status = "pass" if outcome.passed else "fail"
    write_outputs(cfg, outcome, status)
    return (0 if outcome.passed else 1), outcome


# -------------------------------------------------------------------- CLI

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubicmm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="INI file with [experiment] and [parameters] sections")
        sp.add_argument("--digits", type=int, help="target decimal digits")
        sp.add_argument("--guard-digits", type=int)
        sp.add_argument("--workers", type=int, help="worker processes")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter; repeatable")
        sp.add_argument("--dump-config", action="store_true",
                        help="print the resolved config file and exit")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    params = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        params[key.strip()] = value.strip()
    kw = {"digits": args.digits, "guard_digits": args.guard_digits,
          "workers": args.workers, "out": args.out}
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
        return ExperimentConfig.from_ini(text, experiment=args.experiment, params=params, **kw)
    return ExperimentConfig.create(args.experiment, params,
                                   **{k: v for k, v in kw.items() if v is not None})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.dump_config:
        sys.stdout.write(cfg.to_ini())
        return 0
    status, outcome = run(cfg)
    for a in outcome.assertions:
        print(a.line())
    for f in outcome.failures:
        print(f"[POINT-FAILURE] {f['point']}: {f['code']} {f['detail']}")
    print(f"results in {cfg.out}")
    return status
