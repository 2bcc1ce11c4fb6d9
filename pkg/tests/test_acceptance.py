"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a ``[PASS]``/``[FAIL]`` line that ``conftest.py`` prints in
the terminal summary.  Run it on its own with ``python3 tests/test_acceptance.py``.
Monte Carlo criteria use fixed seeds chosen before the first run.
"""

from __future__ import annotations

import math
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import stats

from awbridge import kl, normsq
from awbridge.bessel import bessel_j, bessel_zeros, cached_zeros, euler_product, lommel_integral
from awbridge.bridge import (BridgeParams, TimeGrid, covariance, simulate_euler,
                             simulate_spacetime, variance)
from awbridge.report import Check, Report, check_le

RESULTS: list[str] = []

COV_TIMES = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
SIM_ALPHAS = (0.3, 1.0, 2.0)
SIM_SEEDS = {0.3: 601, 1.0: 602, 2.0: 603}


@contextmanager
def criterion(number: int, title: str, budget: float):
    """Collect checks for one criterion, add its runtime budget and record the verdict."""
    rep = Report(f"criterion {number}: {title}")
    start = time.perf_counter()
    try:
        yield rep
    except Exception as exc:
        rep.add(Check("raised", math.nan, 0.0, False, f"{type(exc).__name__}: {exc}"))
        raise
    finally:
        elapsed = time.perf_counter() - start
        rep.add(check_le("runtime [s]", elapsed, budget))
        status = "PASS" if rep.passed else "FAIL"
        worst = ", ".join(f"{c.name}={c.value:.3g} (tol {c.tol:.3g})"
                          for c in rep.checks if not c.passed) or "all checks within tolerance"
        RESULTS.append(f"[{status}] {rep.title} ({elapsed:.1f} s): {worst}")
        RESULTS.extend("    " + c.line() for c in rep.checks)
    assert rep.passed, rep.format()


def z_score(est: float, ref: float, se: float) -> float:
    return abs(est - ref) / se


def test_criterion_01_special_case_eigenvalues():
    with criterion(1, "alpha=1 eigenvalues", 1.0) as rep:
        system = kl.eigen_unweighted(BridgeParams(1.0, 1.0), 50)
        k = np.arange(1, 51)
        ref = 1.0 / (k * math.pi) ** 2
        rel = np.max(np.abs(system.eigenvalues - ref) / ref)
        rep.add(check_le("max relative error, k <= 50", rel, 1e-12))


def test_criterion_02_rayleigh_identity():
    with criterion(2, "Rayleigh identity", 30.0) as rep:
        for nu in (-0.4, 0.0, 0.5, 1.0, 3.0):
            partial, exact = normsq.rayleigh_sum(nu, 10_000)
            est = partial + normsq.rayleigh_tail_estimate(nu, 10_000)
            rep.add(check_le(f"nu={nu:g} relative error", abs(est - exact) / exact, 1e-6))


def test_criterion_03_laplace_closed_forms():
    with criterion(3, "Laplace closed forms", 5.0) as rep:
        dist = normsq.NormSqDistribution.from_params(BridgeParams(1.0, 1.0))
        for c in (0.1, 1.0, 10.0):
            r = math.sqrt(2.0 * c)
            ref = math.sqrt(r / math.sinh(r))
            rep.add(check_le(f"alpha=1 c={c:g}", abs(normsq.laplace_transform(dist, c).value - ref),
                             1e-8))
        for T, S, c in ((1.0, 0.5, 1.0), (2.0, 1.0, 0.3)):
            ref = 1.0 / math.sqrt(math.cosh(math.sqrt(2.0 * c) * math.log(T / (T - S))))
            got = normsq.laplace_weighted_half_product(BridgeParams(0.5, T), S, c).value
            rep.add(check_le(f"weighted T={T:g} S={S:g} c={c:g}", abs(got - ref), 1e-8))


def test_criterion_04_fredholm_derivative_identity():
    with criterion(4, "Fredholm derivative identity", 10.0) as rep:
        for alpha in (0.3, 0.5, 1.0, 2.0):
            for T in (1.0, 2.0):
                dist = normsq.NormSqDistribution.from_params(BridgeParams(alpha, T))
                b = normsq.fredholm_derivative_at_first_zero(dist, "bessel")
                p = normsq.fredholm_derivative_at_first_zero(dist, "product")
                rep.add(check_le(f"alpha={alpha:g} T={T:g} relative gap", abs(b - p) / abs(b),
                                 1e-6))


def test_criterion_05_orthonormality_and_residual():
    with criterion(5, "orthonormality and eigen-residual", 60.0) as rep:
        for alpha in (0.3, 0.5, 1.0, 2.5):
            system = kl.eigen_unweighted(BridgeParams(alpha, 1.0), 20)
            gram = np.max(np.abs(kl.gram_matrix(system) - np.eye(20)))
            rep.add(check_le(f"alpha={alpha:g} Gram vs identity", gram, 1e-8))
            res = float(np.max(kl.eigen_residual(system))) / system.eigenvalues[0]
            rep.add(check_le(f"alpha={alpha:g} residual / lambda_1", res, 1e-6))


def _covariance_z(params: BridgeParams, x: np.ndarray) -> float:
    """Largest entrywise |z| of the zero-mean covariance estimate on ``COV_TIMES``."""
    n = x.shape[0]
    est = x.T @ x / n
    R = covariance(params, COV_TIMES[:, None], COV_TIMES[None, :])
    d = np.diag(R)
    # Var(X_s X_t) = R_ss R_tt + R_st^2 for a centred Gaussian pair
    se = np.sqrt((d[:, None] * d[None, :] + R * R) / n)
    return float(np.max(np.abs(est - R) / se))


@pytest.mark.slow
def test_criterion_06_simulator_cross_validation():
    n_cov, n_ks = 100_000, 10_000
    ks_crit = 1.628 * math.sqrt(2.0 / n_ks)  # two-sample, 1% level, equal sizes
    grid = TimeGrid(np.concatenate([[0.0], COV_TIMES]))
    with criterion(6, "simulator cross-validation", 300.0) as rep:
        for alpha in SIM_ALPHAS:
            p = BridgeParams(alpha, 1.0)
            seed = SIM_SEEDS[alpha]
            st = simulate_spacetime(p, grid, seed, n_cov).values[:, 1:]
            rep.add(check_le(f"alpha={alpha:g} spacetime covariance max |z|",
                             _covariance_z(p, st), 3.0))
            system = kl.eigen_unweighted(p, kl.truncation_for_tail(p))
            kv = kl.kl_sample(system, grid, seed + 1000, n_cov).values[:, 1:]
            rep.add(check_le(f"alpha={alpha:g} KL (N={system.count}) covariance max |z|",
                             _covariance_z(p, kv), 3.0))
            e = simulate_euler(p, TimeGrid.euler_default(1.0), seed + 2000, n_ks,
                               observe=[0.5]).at(0.5)
            s = simulate_spacetime(p, TimeGrid(np.array([0.0, 0.5])), seed + 3000, n_ks).at(0.5)
            rep.add(check_le(f"alpha={alpha:g} KS euler vs spacetime at T/2",
                             stats.ks_2samp(e, s).statistic, ks_crit))


@pytest.mark.slow
def test_criterion_07_survival_series_vs_monte_carlo():
    n = 1_000_000
    xs = (0.05, 0.1, 0.3)
    with criterion(7, "survival series vs Monte Carlo", 300.0) as rep:
        for alpha in (0.5, 1.0):
            dist = normsq.NormSqDistribution.from_params(BridgeParams(alpha, 1.0))
            y = normsq.sample_normsq(dist, n, seed=7, n_terms=500)
            shift = dist.tail_mass(500)
            for x in xs:
                series = normsq.survival(dist, x)
                p_mc = float(np.mean(y > x))
                se = math.sqrt(p_mc * (1.0 - p_mc) / n)
                # diagnostic only: the same draws with the exact mean of the dropped terms added
                p_fix = float(np.mean(y + shift > x))
                rep.add(check_le(f"alpha={alpha:g} x={x:g} |z|", z_score(p_mc, series.value, se),
                                 3.0, f"series={series.value:.6f} mc={p_mc:.6f} "
                                 f"tail-mean-shifted z={(p_fix - series.value) / se:+.2f}"))


def test_criterion_08_large_deviation_consistency():
    with criterion(8, "large-deviation consistency", 60.0) as rep:
        dist = normsq.NormSqDistribution.from_params(BridgeParams(1.0, 1.0))
        cb = normsq.large_deviation_constant(dist, "bessel_constant")
        cp = normsq.large_deviation_constant(dist, "product_constant")
        rep.add(check_le("constant forms relative gap", abs(cb - cp) / cb, 1e-6))
        ratio = normsq.survival(dist, 4.0).value / normsq.large_deviation_tail(dist, 4.0)
        # frozen after the first measurement (0.9854)
        rep.add(check_le("|survival/asymptote - 1| at x=4", abs(ratio - 1.0), 0.05,
                         f"ratio={ratio:.6f}"))


@pytest.mark.slow
def test_criterion_09_small_deviation_shape():
    n, floor = 10_000_000, 1e-5
    with criterion(9, "small-deviation shape", 600.0) as rep:
        c = normsq.small_deviation_constant(BridgeParams(0.5, 1.0))
        rep.add(check_le("constant vs 2^(3/2) pi^(-1/4)", abs(c - 2.0 ** 1.5 * math.pi ** -0.25),
                         1e-12))
        dist = normsq.NormSqDistribution.from_params(BridgeParams(0.5, 1.0))
        y = normsq.sample_normsq(dist, n, seed=9, n_terms=200, add_tail_mean=True)
        probs = {eps: float(np.mean(y < eps)) for eps in (0.02, 0.01)}
        ratios = {eps: math.log(p) / (-1.0 / (8.0 * eps)) if p > 0 else math.nan
                  for eps, p in probs.items()}
        detail = ", ".join(f"eps={e:g}: P={p:.3g} ratio={ratios[e]:.4f}"
                           for e, p in probs.items())
        if min(probs.values()) >= floor:
            # monotone in eps: the ratio at the smaller eps is closer to 1
            gap = abs(ratios[0.01] - 1.0) - abs(ratios[0.02] - 1.0)
            rep.add(check_le("ratio trends toward 1", gap, 0.0, detail))
        else:
            rep.add(Check("MC trend (not evaluated: P below 1e-5, constant check only)",
                          min(probs.values()), floor, True, detail))


@pytest.mark.slow
def test_criterion_10_weighted_functional_identity():
    n, terms = 100_000, 500
    p = BridgeParams(0.5, 1.0)
    S = 0.5
    with criterion(10, "weighted-functional identity", 300.0) as rep:
        system = kl.eigen_weighted(p, S, terms)
        grid = TimeGrid.uniform(S, 2 ** 10)
        t = grid.points
        w = np.full(t.size, t[1] - t[0])
        w[[0, -1]] *= 0.5
        w /= (p.T - t) ** 2
        y = kl.kl_reduce(system, grid, 11, n, lambda x: (x * x) @ w)

        kappa = normsq.weighted_half_eigenvalues(p, S, terms)
        mean, var = float(kappa.sum()), float(2.0 * np.sum(kappa ** 2))
        # discretization allowance: exact mean and variance of the trapezoid functional
        B = np.sqrt(system.eigenvalues)[:, None] * system.eigenfunctions(t)
        ev = np.linalg.eigvalsh((B * w) @ B.T)
        d_mean = abs(float(ev.sum()) - mean)
        d_var = abs(float(2.0 * np.sum(ev ** 2)) - var)

        se_mean = y.std(ddof=1) / math.sqrt(n)
        s2 = y.var(ddof=1)
        m4 = float(np.mean((y - y.mean()) ** 4))
        se_var = math.sqrt((m4 - s2 ** 2) / n)
        rep.add(check_le("mean |error| - allowance, in SE", (abs(y.mean() - mean) - d_mean) / se_mean,
                         3.0, f"mc={y.mean():.6g} series={mean:.6g} allowance={d_mean:.2g}"))
        rep.add(check_le("variance |error| - allowance, in SE", (abs(s2 - var) - d_var) / se_var,
                         3.0, f"mc={s2:.6g} series={var:.6g} allowance={d_var:.2g}"))


def test_criterion_11_appendix_properties():
    with criterion(11, "Bessel property suite", 120.0) as rep:
        x = np.linspace(0.05, 60.0, 600)
        env = np.sqrt(2.0 / (math.pi * x))
        rep.add(check_le("J_{1/2} closed form", np.max(np.abs(bessel_j(0.5, x) - env * np.sin(x))),
                         1e-12))
        rep.add(check_le("J_{-1/2} closed form",
                         np.max(np.abs(bessel_j(-0.5, x) - env * np.cos(x))), 1e-12))

        nus = np.linspace(-0.9, 5.0, 25)
        tables = np.array([bessel_zeros(nu, 50).zeros for nu in nus])
        rise = float(np.min(np.diff(tables, axis=0)))
        rep.add(Check("zeros increase with nu (smallest rise, must be > 0)", rise, 0.0, rise > 0,
                      "k <= 50, 25 orders in [-0.9, 5]"))

        lom = max(abs(q - c) for q, c in (lommel_integral(nu, k)
                                          for nu in (-0.4, 0.0, 0.5, 2.0) for k in (1, 2, 5)))
        rep.add(check_le("Lommel quadrature vs closed form", lom, 1e-9))

        xs = np.linspace(0.25, 5.0, 20)
        for nu in (0.0, 0.5, 1.0):
            err = np.max(np.abs(euler_product(nu, xs, 10_000, cached_zeros(nu, 10_000))
                                - bessel_j(nu, xs)))
            rep.add(check_le(f"nu={nu:g} Euler product N=1e4", err, 1e-4))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
