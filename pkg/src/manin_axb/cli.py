"""Command-line front end.

    manin-axb check   --model ex1 | --model-file table.txt
    manin-axb cone    --model ex1 [--points 10 --seed 0]
    manin-axb count   --model ex1 --B 1e4,1e5,1e6 [--grid default] [--smooth]
    manin-axb peyre   --model ex1 --pmax 10000
    manin-axb local   --model ex1 --p 5 --alpha 1/5 --s auto
    manin-axb expsum  weyl|gauss|poisson|clausen|double ...

Every subcommand accepts --config FILE (flat key=value lines; flags given
on the command line win), --format csv|json, --output PATH and
--no-timestamp.  Exit status is 0 on success, 2 when a check in the run
failed and 1 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

SCHEMA_VERSION = 1
DEFAULT_B_GRID = (10_000, 30_000, 100_000, 300_000, 1_000_000)


class UsageError(Exception):
    pass


# -- value parsing -----------------------------------------------------------


def parse_int(text: str) -> int:
    t = str(text).strip()
    try:
        return int(t)
    except ValueError:
        pass
    try:
        x = float(t)
    except ValueError:
        raise UsageError(f"not an integer: {text!r}") from None
    if not math.isfinite(x) or x != int(x):
        raise UsageError(f"not an integer: {text!r}")
    return int(x)


def parse_int_list(text: str) -> list[int]:
    return [parse_int(x) for x in str(text).split(",") if x.strip()]


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(x) for x in str(text).split(",") if x.strip()]


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict[str, str]:
    """Flat key=value file; blank lines and lines starting with # are ignored."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    out = {}
    for k, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key=value")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


# -- report model and rendering ----------------------------------------------


@dataclass
class Report:
    command: str
    fields: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, tuple[list[str], list[list[Any]]]] = field(default_factory=dict)
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(c[1] for c in self.checks)


def fmt(x: Any) -> Any:
    """JSON-ready scalar: rationals as "p/q", floats with 15 significant digits."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(format(x, ".15g"))
    if isinstance(x, complex):
        return {"re": fmt(x.real), "im": fmt(x.imag)}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return str(x)


def cell(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".15g")
    if isinstance(x, complex):
        return f"{format(x.real, '.15g')}{'+' if x.imag >= 0 else '-'}{format(abs(x.imag), '.15g')}j"
    if isinstance(x, (list, tuple)):
        return " ".join(cell(v) for v in x)
    if x is None:
        return ""
    return str(x)


def render(report: Report, fmt_name: str, timestamp: bool) -> str:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    if fmt_name == "json":
        obj: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "command": report.command}
        if stamp:
            obj["generated_at"] = stamp
        obj.update({k: fmt(v) for k, v in report.fields.items()})
        obj["tables"] = {
            name: [dict(zip(head, (fmt(v) for v in row))) for row in rows]
            for name, (head, rows) in report.tables.items()
        }
        obj["checks"] = [{"name": n, "passed": ok, "detail": d} for n, ok, d in report.checks]
        obj["all_passed"] = report.ok
        return json.dumps(obj, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerow(["schema_version", SCHEMA_VERSION])
    w.writerow(["command", report.command])
    if stamp:
        w.writerow(["generated_at", stamp])
    for k, v in report.fields.items():
        w.writerow([k, cell(v)])
    for name, (head, rows) in report.tables.items():
        buf.write("\n")
        w.writerow(["table:" + name])
        w.writerow(head)
        for row in rows:
            w.writerow([cell(v) for v in row])
    if report.checks:
        buf.write("\n")
        w.writerow(["table:checks"])
        w.writerow(["name", "passed", "detail"])
        for n, ok, d in report.checks:
            w.writerow([n, cell(ok), d])
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------


def _model(name):
    from .surface_models import load_model

    if name is None:
        raise UsageError("missing --model")
    try:
        return load_model(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _need_height(model, allowed=("ex1",)):
    if model.height_model not in allowed:
        raise UsageError(f"{model.name} has no height model for this subcommand")


def run_check(cfg) -> Report:
    from .heights import INF, RationalPoint, character_consistency, relevant_primes
    from .surface_models import ModelError, classify, from_table, verify_geometry

    if cfg.model_file:
        try:
            with open(cfg.model_file, encoding="utf-8") as fh:
                model = from_table(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.model_file}: {exc}") from None
        except (ModelError, ValueError) as exc:
            raise UsageError(f"{cfg.model_file}: {exc}") from None
    else:
        model = _model(cfg.model)
    rep = Report("check")
    rep.fields["model"] = model.name
    rep.fields["rank_pic"] = model.rank_pic
    rep.fields["bad_primes"] = " ".join(str(p) for p in sorted(model.bad_primes)) or "-"
    cl = classify(model)
    rep.fields["J1"] = list(cl.J1)
    rep.fields["J2"] = list(cl.J2)
    rep.fields["J3"] = list(cl.J3)
    rep.fields["J2_star"] = list(cl.J2star)
    rep.tables["divisors"] = (
        ["id", "label", "u", "v", "c_star", "d"],
        [[D.id, D.label, D.u, D.v, "ALL" if not isinstance(D.c_star, Fraction) else D.c_star, D.d]
         for D in model.divisors],
    )
    for c in verify_geometry(model):
        rep.check(c.name, c.passed, c.detail)
    if model.height_model:
        pts = [RationalPoint(1, 0), RationalPoint(1, 1), RationalPoint(Fraction(1, 2), Fraction(3, 2)),
               RationalPoint(Fraction(-3, 7), Fraction(5, 12)), RationalPoint(6, Fraction(-10, 9))]
        rows = []
        worst = 0.0
        for pt in pts:
            for place in [INF] + relevant_primes(model, pt):
                lhs, rhs = character_consistency(model, pt, place)
                resid = abs(float(lhs) - float(rhs)) / float(rhs)
                worst = max(worst, resid)
                rows.append([pt.a, pt.b, place, resid])
        rep.tables["character_consistency"] = (["a", "b", "place", "relative_residual"], rows)
        rep.check("character_consistency", worst <= 1e-12, f"max relative residual {worst:.3e}")
    return rep


def run_cone(cfg) -> Report:
    import random

    from .cone_calculus import alpha_peyre, dual_cone, shifted_vs_x

    model = _model(cfg.model)
    rep = Report("cone")
    cone = dual_cone(range(len(model)), model.u)
    alpha = alpha_peyre(model)
    rep.fields["model"] = model.name
    rep.fields["alpha_peyre"] = alpha
    rep.fields["cone_dimension"] = cone.dim
    rep.fields["simplices"] = len(cone.simplices)
    rep.tables["rays"] = (["ray"], [[list(r)] for r in cone.rays])
    rng = random.Random(cfg.seed)
    rows = []
    tol = cfg.tolerance
    for _ in range(cfg.points):
        z = [round(rng.uniform(0.2, 2.0), 6) for _ in range(len(model))]
        s, x = shifted_vs_x(model, z, tol=min(tol, 1e-6))
        diff = abs(s.value - x)
        rows.append([z, s.value.real, x, diff, s.error])
        rep.check(f"shifted_matches_x[{','.join(cell(v) for v in z)}]", diff <= tol, f"|S - X| = {diff:.3e}")
    rep.tables["shifted_vs_x"] = (["z", "shifted", "x_function", "abs_diff", "error_estimate"], rows)
    return rep


def run_count(cfg) -> Report:
    from .point_count import AsymptoticFit, asymptotic_fit, count_sharp, count_smoothed
    from .tamagawa import peyre_constant

    model = _model(cfg.model)
    _need_height(model)
    grid = list(cfg.B) if cfg.B else list(DEFAULT_B_GRID)
    if cfg.grid and cfg.grid != "default":
        raise UsageError("--grid accepts only 'default'")
    if cfg.grid == "default":
        grid = list(DEFAULT_B_GRID)
    if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
        raise UsageError("B grid must be strictly increasing")
    if any(b < 2 for b in grid):
        raise UsageError("B values must be at least 2")
    rep = Report("count")
    rep.fields["model"] = model.name
    rows = []
    samples = []
    for B in grid:
        N = count_sharp(B, model, workers=cfg.threads)
        samples.append((B, N))
        row = [B, N, N / (B * math.log(B))]
        if cfg.smooth:
            row.append(count_smoothed(B, None, model))
        rows.append(row)
    head = ["B", "N", "N/(B log B)"] + (["smoothed_bump_1_2"] if cfg.smooth else [])
    rep.tables["counts"] = (head, rows)
    if len(samples) >= 3:
        fit: AsymptoticFit = asymptotic_fit(samples)
        A = peyre_constant(model, 10_000)
        rep.fields["fit_c1"] = fit.c1
        rep.fields["fit_c2"] = fit.c2
        rep.fields["peyre_constant"] = A.value
        rel = abs(fit.c1 - A.value) / A.value
        rep.fields["c1_relative_deviation"] = rel
        rep.check("c1_within_10_percent", rel <= 0.10, f"relative deviation {rel:.4f}")
    return rep


def run_peyre(cfg) -> Report:
    from .tamagawa import peyre_constant, tau_arch

    model = _model(cfg.model)
    _need_height(model)
    if cfg.pmax < 100:
        raise UsageError("--pmax must be at least 100")
    pc = peyre_constant(model, cfg.pmax)
    ta = tau_arch(model, cfg.tolerance)
    rep = Report("peyre")
    rep.fields.update({
        "model": model.name,
        "alpha_peyre": pc.alpha,
        "tau_inf": ta.value,
        "tau_inf_error": ta.error,
        "P_max": cfg.pmax,
        "euler_product": pc.tau.euler_product,
        "tau_truncated": pc.tau.value,
        "tau_tail_bound": pc.tau.tail_bound,
        "rank_pic": pc.rank,
        "peyre_constant": pc.value,
        "peyre_tail_bound": pc.tail_bound,
    })
    rep.check("alpha_positive", pc.alpha > 0)
    return rep


def run_local(cfg) -> Report:
    from .local_oscillation import (
        OscillationQuery, critical_point, denominator_residual, generic_residual,
        h_vee_p, h_vee_p_oracle, local_constancy_probe, numerator_residual,
    )
    from .heights import vp

    model = _model(cfg.model)
    _need_height(model)
    if cfg.p is None or cfg.alpha is None:
        raise UsageError("local needs --p and --alpha")
    s = critical_point(model) if cfg.s in (None, "auto") else tuple(parse_complex_list(cfg.s))
    if len(s) != len(model):
        raise UsageError(f"--s needs {len(model)} entries")
    q = OscillationQuery(s, cfg.alpha, cfg.p, cfg.depth)
    try:
        v = vp(q.alpha, q.p)
        if v < 0:
            r = denominator_residual(model, q)
            kind = "denominator"
        elif v > 0:
            r = numerator_residual(model, q)
            kind = "numerator"
        else:
            r = generic_residual(model, q)
            kind = "generic"
        hv = h_vee_p(model, q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    oracle = h_vee_p_oracle(model, q)
    probe = local_constancy_probe(model, q.p, q.alpha, s, depth=cfg.depth)
    rep = Report("local")
    rep.fields.update({
        "model": model.name, "p": q.p, "alpha": q.alpha, "s": list(s), "depth": q.depth,
        "regime": kind, "k": r.k, "value": r.value, "tail_bound": hv.tail_bound,
        "main_term": r.main_term, "residual": r.residual, "bound_rhs": r.bound_rhs,
        "bound_ratio": r.ratio, "delta": r.delta, "oracle_value": oracle,
        "constancy_exponent": probe.exponent, "constancy_allowed": probe.allowed,
    })
    rep.check("oracle_agreement", abs(oracle - r.value) <= 1e-10 * max(1.0, abs(oracle)),
              f"|value - oracle| = {abs(oracle - r.value):.3e}")
    rep.check("ratio_finite", math.isfinite(r.ratio))
    rep.check("local_constancy", probe.consistent, f"exponent {probe.exponent} <= {probe.allowed}")
    return rep


def run_expsum(cfg) -> Report:
    from . import expsum as X

    kind = cfg.kind
    rep = Report(f"expsum-{kind}")
    try:
        if kind == "weyl":
            if cfg.table:
                rows = []
                for spec in weyl_grid(cfg.table):
                    wr = X.weyl_bound_report(spec)
                    rows.append([list(spec.exponents), list(spec.M), spec.y, spec.q,
                                 wr.lhs_abs, wr.rhs_core, wr.ratio, list(wr.selected), wr.prop_ratio])
                rep.tables["weyl_ratios"] = (
                    ["exponents", "M", "y", "q", "lhs_abs", "rhs_core", "ratio", "I", "subset_ratio"], rows)
                mx = max(r[6] for r in rows)
                rep.fields["max_ratio"] = mx
                rep.check("ratios_finite", all(math.isfinite(r[6]) for r in rows))
            else:
                if not cfg.exponents or not cfg.M or cfg.q is None:
                    raise UsageError("weyl needs --exponents, --M and --q (or --table N)")
                prog = None
                if cfg.progressions:
                    prog = tuple(tuple(parse_int_list(p.replace(":", ","))) for p in cfg.progressions.split(";"))
                spec = X.WeylSumSpec(tuple(cfg.exponents), tuple(cfg.M), cfg.y, cfg.q, prog, cfg.Q)
                I = tuple(i - 1 for i in cfg.I) if cfg.I else None
                wr = X.weyl_bound_report(spec, I, cfg.eta)
                rep.fields.update({"sum": X.weyl_sum(spec), "lhs_abs": wr.lhs_abs, "rhs_core": wr.rhs_core,
                                   "ratio": wr.ratio, "eta": wr.eta, "I": [i + 1 for i in wr.selected],
                                   "subset_rhs": wr.prop_rhs, "subset_ratio": wr.prop_ratio})
                rep.check("ratio_finite", math.isfinite(wr.ratio))
                if spec.q == 1:
                    rep.check("trivial_ratio_le_1", wr.ratio <= 1)
        elif kind == "gauss":
            if cfg.N_max:
                bad = X.gauss_check_prime_powers(cfg.u_max or 4, cfg.N_max)
                rep.fields["violations"] = len(bad)
                rep.tables["violations"] = (["u", "N", "abs_sum", "bound"], [list(b) for b in bad])
                rep.check("prime_power_inequality", not bad, f"{len(bad)} violations")
            else:
                if cfg.u is None or cfg.N is None:
                    raise UsageError("gauss needs --u and --N (or --N-max for a sweep)")
                g = X.gauss_average(cfg.u, cfg.N, cfg.C if cfg.C is not None else 1)
                rep.fields.update({"u": cfg.u, "N": cfg.N, "C": cfg.C if cfg.C is not None else Fraction(1),
                                   "value": g.value, "abs_value": abs(g.value), "certified_bound": g.certified_bound,
                                   "roots_of_unity": g.roots_of_unity, "phi": g.phi})
                rep.check("certified_bound", abs(g.value) <= g.certified_bound * (1 + 1e-12))
        elif kind == "poisson":
            rows = []
            Ms = cfg.M or [1000]
            qs = cfg.qs or [cfg.q if cfg.q is not None else 7]
            Qs = cfg.Qs or [30]
            w = X.BumpSpec(cfg.A or 1, cfg.Y if cfg.Y is not None else 1.0)
            for M in Ms:
                for q in qs:
                    for Q in Qs:
                        ys = [cfg.y] if cfg.y else [y for y in range(1, q + 1) if math.gcd(y, q) == 1][:3]
                        for y in ys:
                            pr = X.poisson_residual(w, M, q, Q, y % q if q > 1 else 0)
                            rows.append([M, q, Q, y, w.A, w.Y, pr.lhs, pr.reference, pr.ratio])
                            if q == 1:
                                rep.check(f"exact_zero[M={M},Q={Q}]", pr.lhs == 0.0)
            rep.tables["poisson"] = (["M", "q", "Q", "y", "A", "Y", "lhs", "reference", "ratio"], rows)
            rep.fields["max_ratio"] = max(r[8] for r in rows)
        elif kind == "clausen":
            theta = cfg.theta if cfg.theta is not None else Fraction(0)
            s = cfg.s1 if cfg.s1 is not None else complex(2)
            Ms = cfg.M or [1000]
            rows = []
            for M in Ms:
                c = X.clausen_partial(theta, s, M)
                rows.append([M, c.value, c.last_term, c.tail_bound])
            rep.fields.update({"theta": theta, "s": s})
            rep.tables["clausen"] = (["M", "partial", "last_term", "tail_bound"], rows)
        elif kind == "double":
            i = cfg.i or 1
            j = cfg.j or 1
            s1 = cfg.s1 if cfg.s1 is not None else complex(2)
            s2 = cfg.s2 if cfg.s2 is not None else complex(2)
            Ms = cfg.M or [1000]
            rows = []
            for M in Ms:
                N = cfg.N or M
                a = X.double_series_partial(i, j, s1, s2, M, N, raw=cfg.raw)
                b = X.double_series_partial(i, j, s1, s2, 2 * M, 2 * N, raw=cfg.raw)
                diff = abs(a.value - b.value)
                rows.append([M, N, a.value, diff, a.tail_bound])
                if a.convergent:
                    rep.check(f"cauchy_below_tail[M={M}]", diff <= a.tail_bound, f"{diff:.3e} <= {a.tail_bound:.3e}")
            rep.fields.update({"i": i, "j": j, "s1": s1, "s2": s2})
            rep.tables["double_series"] = (["M", "N", "partial", "cauchy_difference_to_2M", "tail_bound"], rows)
        else:
            raise UsageError(f"unknown expsum kind {kind!r}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return rep


def weyl_grid(count: int = 50, seed: int = 0):
    """A reproducible grid of Weyl specs: K <= 3, M_i <= 64, q the prime nearest prod M^u / 2."""
    import random

    from .expsum import WeylSumSpec, prime_near

    rng = random.Random(seed)
    out = []
    while len(out) < count:
        K = rng.randint(1, 3)
        us = tuple(rng.randint(1, 3) for _ in range(K))
        Ms = tuple(rng.choice((4, 8, 16, 24, 32, 48, 64)) for _ in range(K))
        if math.prod(Ms) > 64 ** 2 * 16:
            continue
        q = prime_near(math.prod(m ** u for m, u in zip(Ms, us)) / 2)
        y = rng.randint(1, q - 1) if q > 2 else 1
        if math.gcd(y, q) != 1:
            continue
        out.append(WeylSumSpec(us, Ms, y, q))
    return out


# -- argument handling -------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="flat key=value file; flags override")
    p.add_argument("--model", default=None)
    p.add_argument("--format", dest="format", choices=("csv", "json"), default=None)
    p.add_argument("--output", default=None, help="report path (default: stdout)")
    p.add_argument("--no-timestamp", dest="no_timestamp", action="store_const", const=True, default=None)
    p.add_argument("--threads", type=parse_int, default=None)
    p.add_argument("--tolerance", type=parse_float, default=None)


_DEFAULTS = {
    "format": "json",
    "no_timestamp": False,
    "tolerance": 1e-4,
    "points": 10,
    "seed": 0,
    "pmax": 10_000,
    "depth": 40,
    "y": 1,
    "smooth": False,
    "raw": False,
    "table": 0,
}

# per-subcommand defaults that differ from the shared ones
_COMMAND_DEFAULTS = {
    "check": {"format": "json"},
    "cone": {"format": "csv"},
    "count": {"format": "csv"},
    "peyre": {"format": "json", "tolerance": 1e-8},
    "local": {"format": "json"},
    "expsum": {"format": "csv"},
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="manin-axb", description="Point counts, Peyre constants and exponential sums.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="divisor invariants and height consistency")
    _common(p)
    p.add_argument("--model-file", dest="model_file", default=None, help="divisor table to check instead of --model")

    p = sub.add_parser("cone", help="dual cone rays, alpha and shifted-integral comparison")
    _common(p)
    p.add_argument("--points", type=parse_int, default=None)
    p.add_argument("--seed", type=parse_int, default=None)

    p = sub.add_parser("count", help="exact point counts on ex1")
    _common(p)
    p.add_argument("--B", type=parse_int_list, default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--smooth", action="store_const", const=True, default=None)

    p = sub.add_parser("peyre", help="Tamagawa number and Peyre constant")
    _common(p)
    p.add_argument("--pmax", type=parse_int, default=None)

    p = sub.add_parser("local", help="p-adic oscillatory integral and its residual")
    _common(p)
    p.add_argument("--p", type=parse_int, default=None)
    p.add_argument("--alpha", type=parse_rational, default=None)
    p.add_argument("--s", default=None, help="'auto' (s = d + 2u) or comma-separated complex values")
    p.add_argument("--depth", type=parse_int, default=None)

    p = sub.add_parser("expsum", help="exponential sums")
    _common(p)
    p.add_argument("kind", choices=("weyl", "gauss", "poisson", "clausen", "double"))
    p.add_argument("--exponents", type=parse_int_list, default=None)
    p.add_argument("--M", type=parse_int_list, default=None)
    p.add_argument("--N", type=parse_int, default=None)
    p.add_argument("--y", type=parse_int, default=None)
    p.add_argument("--q", type=parse_int, default=None)
    p.add_argument("--qs", type=parse_int_list, default=None)
    p.add_argument("--Q", type=parse_int, default=None)
    p.add_argument("--Qs", type=parse_int_list, default=None)
    p.add_argument("--progressions", default=None, help="mod:res;mod:res;...")
    p.add_argument("--I", type=parse_int_list, default=None, help="1-based subset for the subset bound")
    p.add_argument("--eta", type=parse_float, default=None)
    p.add_argument("--table", type=parse_int, default=None, help="weyl: evaluate a grid of this many specs")
    p.add_argument("--u", type=parse_int, default=None)
    p.add_argument("--C", type=parse_rational, default=None)
    p.add_argument("--u-max", dest="u_max", type=parse_int, default=None)
    p.add_argument("--N-max", dest="N_max", type=parse_int, default=None)
    p.add_argument("--A", type=parse_int, default=None)
    p.add_argument("--Y", type=parse_float, default=None)
    p.add_argument("--theta", type=parse_rational, default=None)
    p.add_argument("--s1", type=parse_complex, default=None)
    p.add_argument("--s2", type=parse_complex, default=None)
    p.add_argument("--i", type=parse_int, default=None)
    p.add_argument("--j", type=parse_int, default=None)
    p.add_argument("--raw", action="store_const", const=True, default=None)
    return ap


def _converter(parser: argparse.ArgumentParser, command: str, key: str):
    for action in parser._subparsers._group_actions[0].choices[command]._actions:  # noqa: SLF001
        if action.dest == key:
            if action.const is True:
                return parse_bool
            return action.type or (lambda x: x)
    return None


def parse_config(argv: list[str] | None = None):
    """Parse flags, fill unset values from --config, then apply defaults and validate."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid command line") from None
    if args.config:
        for key, val in read_config(args.config).items():
            conv = _converter(parser, args.command, key)
            if conv is None or key in ("config", "command", "kind"):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            if getattr(args, key, None) is None:
                setattr(args, key, conv(val))
    defaults = dict(_DEFAULTS)
    defaults.update(_COMMAND_DEFAULTS.get(args.command, {}))
    for key, val in defaults.items():
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, val)
    env = os.environ.get("MANIN_THREADS")
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise UsageError(f"MANIN_THREADS must be an integer, got {env!r}") from None
    threads = args.threads if args.threads is not None else (cap or 1)
    if cap is not None:
        threads = min(threads, cap)
    if threads < 1:
        raise UsageError("--threads must be positive")
    args.threads = threads
    if args.tolerance is not None and not args.tolerance > 0:
        raise UsageError("tolerance must be positive")
    if getattr(args, "B", None) and any(b2 <= b1 for b1, b2 in zip(args.B, args.B[1:])):
        raise UsageError("B grid must be strictly increasing")
    return args


_RUNNERS = {
    "check": run_check,
    "cone": run_cone,
    "count": run_count,
    "peyre": run_peyre,
    "local": run_local,
    "expsum": run_expsum,
}


def run_and_emit(cfg) -> int:
    report = _RUNNERS[cfg.command](cfg)
    text = render(report, cfg.format, not cfg.no_timestamp)
    if cfg.output:
        try:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.output}: {exc}") from None
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 2


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return run_and_emit(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
