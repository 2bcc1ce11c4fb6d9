"""Command-line front end: ``awbridge <subcommand> [flags]``.

Every subcommand emits a table, as CSV (header row, ``#`` comment lines
for metadata and warnings) or as JSON (``{"meta": ..., "data": [...]}``).
Output depends only on the argument vector, so identical invocations are
byte-identical.

Exit codes: 0 success, 2 usage error, 1 numeric failure (or failed checks
for ``verify``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, checks, kl, normsq
from .bessel import ZeroFinderError, _jv, bessel_j_derivative, cached_zeros, mcmahon_guess
from .bridge import (BridgeDomainError, BridgeParams, TimeGrid, simulate_euler,
                     simulate_spacetime)

SUBCOMMANDS = ("bessel", "eigen", "simulate", "laplace", "survival", "tails", "rayleigh",
               "verify")
METHOD_FLAGS = ("euler", "spacetime", "kl", "weighted-kl")
GRAMMAR = ("<subcommand> --alpha <f> --T <f> [--S <f>] [--count <n>] [--x <f>|--c <f>] "
           "[--N <n>] [--paths <n>] [--grid <n>] [--method euler|spacetime|kl|weighted-kl] "
           "[--seed <u64>] [--format csv|json] [--out <path>]")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    alpha: float = 1.0
    T: float = 1.0
    S: float | None = None
    count: int | None = None
    x: float | None = None
    c: float | None = None
    N: int | None = None
    paths: int = 1
    grid: int = 64
    method: str = "spacetime"
    seed: int = 0
    suite: str = "all"
    format: str = "csv"
    out: str | None = None

    def validate(self) -> "RunConfig":
        for flag in ("alpha", "T", "S", "x", "c"):
            v = getattr(self, flag)
            if v is not None and not math.isfinite(v):
                raise UsageError(f"--{flag}: must be a finite number")
        if not self.alpha > 0:
            raise UsageError("--alpha: must be > 0")
        if not self.T > 0:
            raise UsageError("--T: must be > 0")
        if self.S is not None and not 0 < self.S < self.T:
            raise UsageError("--S: must lie in (0, T)")
        for flag in ("count", "N", "paths", "grid"):
            v = getattr(self, flag)
            if v is not None and v < 1:
                raise UsageError(f"--{flag}: must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed: must be an unsigned 64-bit integer")
        if self.x is not None and self.c is not None:
            raise UsageError("--x and --c are mutually exclusive")
        return self

    @property
    def params(self) -> BridgeParams:
        return BridgeParams(self.alpha, self.T)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\ngrammar: {GRAMMAR}\n")
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=1.0)
    common.add_argument("--T", type=float, default=1.0)
    common.add_argument("--S", type=float)
    common.add_argument("--count", type=int)
    common.add_argument("--x", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--N", type=int)
    common.add_argument("--paths", type=int, default=1)
    common.add_argument("--grid", type=int, default=64)
    common.add_argument("--method", choices=METHOD_FLAGS, default="spacetime")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out")

    parser = _Parser(prog="awbridge", description="alpha-Wiener bridge numerics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    helps = {
        "bessel": "zeros of J_nu (nu = alpha - 1/2), or J_nu at --x",
        "eigen": "KL eigenvalues (weighted on [0,S] when --S is given)",
        "simulate": "sample paths",
        "laplace": "Laplace transform of the squared L2 norm",
        "survival": "P(int X^2 > x) from the alternating series",
        "tails": "large- and small-deviation asymptotes at --x",
        "rayleigh": "Rayleigh sum of inverse squared zeros",
        "verify": "run invariant suites",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "verify":
            p.add_argument("--suite", choices=checks.SUITES, default="all")
    return parser


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    ns = {k: v for k, v in ns.items() if v is not None or k in ("S", "count", "x", "c", "N", "out")}
    return RunConfig(**ns).validate()


# ---------------------------------------------------------------------------
# subcommands: each returns (columns, rows, extra meta)
# ---------------------------------------------------------------------------

def _bessel(cfg: RunConfig):
    nu = cfg.alpha - 0.5
    if cfg.x is not None:
        if not cfg.x > 0:
            raise UsageError("--x: must be > 0")
        j = float(_jv(nu, np.array([cfg.x]))[0])
        return ["nu", "x", "J", "dJ"], [[nu, cfg.x, j, bessel_j_derivative(nu, cfg.x)]], {}
    count = cfg.count or 10
    z = cached_zeros(nu, count).zeros[:count]
    nxt = _jv(nu + 1.0, z)
    mc = mcmahon_guess(nu, np.arange(1, count + 1))
    rows = [[k + 1, z[k], nxt[k], mc[k]] for k in range(count)]
    return ["k", "zero", "J_nu_plus_1_at_zero", "mcmahon"], rows, {"nu": nu, "count": count}


def _eigen(cfg: RunConfig):
    count = cfg.count or 10
    if cfg.S is not None:
        system = kl.eigen_weighted(cfg.params, cfg.S, count)
        col = "kappa"
    else:
        system = kl.eigen_unweighted(cfg.params, count, zeros=cached_zeros(cfg.alpha - 0.5, count))
        col = "lambda"
    rows = [[k + 1, system.eigenvalues[k]] for k in range(count)]
    return ["k", col], rows, {"truncation": count, "kind": system.kind}


def _simulate(cfg: RunConfig):
    p = cfg.params
    extra = {}
    if cfg.method == "weighted-kl":
        if cfg.S is None:
            raise UsageError("--S: required for --method weighted-kl")
        grid = TimeGrid.uniform(cfg.S, cfg.grid)
        n = cfg.N or 500
        sample = kl.kl_sample(kl.eigen_weighted(p, cfg.S, n), grid, cfg.seed, cfg.paths)
        extra["truncation"] = n
    else:
        grid = TimeGrid.euler_default(p.T, cfg.grid)
        if cfg.method == "euler":
            sample = simulate_euler(p, grid, cfg.seed, cfg.paths)
        elif cfg.method == "spacetime":
            sample = simulate_spacetime(p, grid, cfg.seed, cfg.paths)
        else:
            n = cfg.N or kl.truncation_for_tail(p)
            system = kl.eigen_unweighted(p, n, zeros=cached_zeros(p.nu, n))
            sample = kl.kl_sample(system, grid, cfg.seed, cfg.paths)
            extra["truncation"] = n
    extra["sampler"] = sample.method
    t = sample.grid.points
    rows = [[i, t[j], sample.values[i, j]] for i in range(sample.n_paths) for j in range(t.size)]
    return ["path", "t", "x"], rows, extra


def _laplace(cfg: RunConfig):
    c = 1.0 if cfg.c is None else cfg.c
    if c < 0:
        raise UsageError("--c: must be >= 0")
    if cfg.S is not None:
        if not cfg.params.is_half:
            raise UsageError("--S: the weighted Laplace transform needs --alpha 0.5")
        n = cfg.N or 10_000
        prod = normsq.laplace_weighted_half_product(cfg.params, cfg.S, c, n)
        closed = normsq.laplace_weighted_half(cfg.params, cfg.S, c)
        return (["c", "closed_form", "product", "error_bound"],
                [[c, closed, prod.value, prod.error_bound]], {"truncation": n})
    n = cfg.N or normsq.DEFAULT_ZEROS
    res = normsq.laplace_transform(normsq.NormSqDistribution.from_params(cfg.params, n), c, n)
    return ["c", "value", "error_bound"], [[c, res.value, res.error_bound]], {"truncation": n}


def _need_x(cfg: RunConfig) -> float:
    if cfg.x is None:
        raise UsageError("--x: required")
    if not cfg.x > 0:
        raise UsageError("--x: must be > 0")
    return cfg.x


def _survival(cfg: RunConfig):
    x = _need_x(cfg)
    sc = normsq.SurvivalSeriesConfig(num_terms=cfg.count or 50)
    res = normsq.survival(normsq.NormSqDistribution.from_params(cfg.params), x, sc)
    rows = [[x, res.value, res.error_estimate, res.warning]]
    return ["x", "survival", "error_estimate", "warning"], rows, {"num_terms": sc.num_terms}


def _tails(cfg: RunConfig):
    x = _need_x(cfg)
    dist = normsq.NormSqDistribution.from_params(cfg.params)
    n = cfg.N or 10_000
    lb = normsq.large_deviation_tail(dist, x, "bessel_constant")
    lp = normsq.large_deviation_tail(dist, x, "product_constant", n)
    small, known = normsq.small_deviation(dist, x)
    return (["x", "large_deviation_bessel", "large_deviation_product", "small_deviation",
             "small_constant_known"], [[x, lb, lp, small, known]], {"truncation": n})


def _rayleigh(cfg: RunConfig):
    n = cfg.N or 1000
    nu = cfg.alpha - 0.5
    partial, exact = normsq.rayleigh_sum(nu, n)
    tail = normsq.rayleigh_tail_estimate(nu, n)
    return (["nu", "N", "partial", "exact", "tail_estimate"],
            [[nu, n, partial, exact, tail]], {"truncation": n})


def _verify(cfg: RunConfig):
    rows = []
    for rep in checks.run_suite(cfg.suite, cfg.params):
        for c in rep.checks:
            rows.append([rep.title, c.name, c.value, c.tol, "PASS" if c.passed else "FAIL",
                         c.detail])
    return ["suite", "check", "measured", "tol", "status", "detail"], rows, {}


HANDLERS = {"bessel": _bessel, "eigen": _eigen, "simulate": _simulate, "laplace": _laplace,
            "survival": _survival, "tails": _tails, "rayleigh": _rayleigh, "verify": _verify}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, bool, np.bool_)):
        return v.item() if hasattr(v, "item") else v
    return v


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg: RunConfig, columns, rows, extra) -> str:
    meta = {"version": __version__, **asdict(cfg), **extra}
    meta.pop("out")
    rows = [[_plain(v) for v in r] for r in rows]
    warnings = sorted({r[columns.index("warning")] for r in rows
                       if "warning" in columns and r[columns.index("warning")]})
    if cfg.format == "json":
        data = [dict(zip(columns, r)) for r in rows]
        return json.dumps({"meta": meta, "data": data}, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# awbridge " + " ".join(f"{k}={_csv_cell(_plain(v))}" for k, v in meta.items()
                                        if k != "version") + f" version={__version__}\n")
    for w in warnings:
        buf.write(f"# warning: {w}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_csv_cell(v) for v in r])
    return buf.getvalue()


def run(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\ngrammar: {GRAMMAR}\n")
        return 2
    try:
        columns, rows, extra = HANDLERS[cfg.subcommand](cfg)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\ngrammar: {GRAMMAR}\n")
        return 2
    except BridgeDomainError as exc:
        sys.stderr.write(f"error: {exc}\ngrammar: {GRAMMAR}\n")
        return 2
    except ZeroFinderError as exc:
        sys.stderr.write(f"numeric failure in bessel.bessel_zeros at index {exc.index} "
                         f"(nu={exc.nu:g}): {exc}\n")
        return 1
    except (ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"numeric failure in {cfg.subcommand}: {exc}\n")
        return 1
    text = render(cfg, columns, rows, extra)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.subcommand == "verify":
        failed = [f"{r[0]}: {r[1]}" for r in rows if r[4] == "FAIL"]
        for name in failed:
            sys.stderr.write(f"FAILED {name}\n")
        return 1 if failed else 0
    return 0


def main() -> None:
    raise SystemExit(run())
