"""Invariant suites driven by ``awbridge verify``.

Each suite returns a :class:`~awbridge.report.Report`; the checks are cheap
enough to run in a few seconds apiece and use no randomness.
"""

from __future__ import annotations

import math

import numpy as np

from . import kl, normsq
from .bessel import (BesselOrder, _jv, bessel_j, bessel_j_small_x_limit_checks, bessel_zeros,
                     cached_zeros, euler_product, lommel_integral, mcmahon_guess)
from .bridge import BridgeParams, variance
from .report import Report, check_le

SUITES = ("bessel", "kl", "normsq", "all")


def bessel_suite(orders=(-0.4, 0.0, 0.5, 1.0, 3.0)) -> Report:
    rep = Report("bessel")
    x = np.linspace(0.05, 60.0, 600)
    env = np.sqrt(2.0 / (math.pi * x))
    err = np.max(np.abs(bessel_j(0.5, x) - env * np.sin(x)) / env)
    rep.add(check_le("closed-form J_{1/2}", err, 1e-12, "relative to sqrt(2/(pi x))"))
    err = np.max(np.abs(bessel_j(-0.5, x) - env * np.cos(x)) / env)
    rep.add(check_le("closed-form J_{-1/2}", err, 1e-12, "relative to sqrt(2/(pi x))"))

    worst_res, worst_mc = 0.0, 0.0
    for nu in orders:
        z = cached_zeros(nu, 200).zeros[:200]
        slope = np.abs(_jv(nu + 1.0, z))  # |J_nu'(z_k)| = |J_{nu+1}(z_k)|
        worst_res = max(worst_res, float(np.max(np.abs(_jv(nu, z)) / slope)))
        k = np.arange(100, 201)
        worst_mc = max(worst_mc, float(np.max(np.abs(z[99:] - mcmahon_guess(nu, k)))))
    rep.add(check_le("zero residual |J(z)/J'(z)|", worst_res, 1e-11, "k <= 200"))
    rep.add(check_le("McMahon residual", worst_mc, 1e-6, "|z_k - McMahon(k)| for 100 <= k <= 200"))

    nus = np.linspace(-0.45, 4.0, 12)
    tables = np.array([bessel_zeros(n, 30).zeros for n in nus])
    rep.add(check_le("zeros increase with nu", float(np.max(-np.diff(tables, axis=0))), 0.0))
    gaps = [np.min(np.diff(cached_zeros(nu, 200).zeros[:200])) for nu in orders]
    rep.add(check_le("zero gaps exceed 3", -float(min(gaps)) + 3.0, 0.0,
                     f"smallest gap {min(gaps):.4f}"))

    lom = 0.0
    for nu in (-0.4, 0.0, 1.0):
        for k in (1, 3):
            q, c = lommel_integral(nu, k)
            lom = max(lom, abs(q - c))
    rep.add(check_le("Lommel integral", lom, 1e-9))

    # truncation error is about |J(x)| x^2 / (pi^2 N): keep x^2 |J| well below 10
    xs = np.linspace(0.25, 5.0, 20)
    ep = max(float(np.max(np.abs(euler_product(nu, xs, 10_000, cached_zeros(nu, 10_000))
                                 - bessel_j(nu, xs)))) for nu in (0.0, 1.0))
    rep.add(check_le("Euler product N=1e4", ep, 1e-4))

    for nu in (-0.25, 0.0, 1.0):
        for c in bessel_j_small_x_limit_checks(BesselOrder(nu)).checks:
            rep.add(type(c)(f"nu={nu:g}: {c.name}", c.value, c.tol, c.passed, c.detail))
    return rep


def kl_suite(params: BridgeParams = BridgeParams(1.0, 1.0), count: int = 20) -> Report:
    rep = Report(f"kl alpha={params.alpha:g} T={params.T:g}")
    bb = kl.eigen_unweighted(BridgeParams(1.0, 1.0), 50)
    k = np.arange(1, 51)
    dev = np.max(np.abs(bb.eigenvalues * (k * math.pi) ** 2 - 1.0))
    rep.add(check_le("alpha=1 eigenvalues 1/(k pi)^2 (rel)", dev, 1e-12))

    system = kl.eigen_unweighted(params, count)
    gram = kl.gram_matrix(system)
    rep.add(check_le("Gram matrix vs identity", np.max(np.abs(gram - np.eye(count))), 1e-8))
    res = kl.eigen_residual(system)
    rep.add(check_le("eigen-equation residual / lambda_1",
                     float(np.max(res)) / system.eigenvalues[0], 1e-6))

    S = 0.5 * params.T
    wsys = kl.eigen_weighted(params, S, count)
    rep.add(check_le("weighted Gram matrix vs identity",
                     np.max(np.abs(kl.gram_matrix(wsys) - np.eye(count))), 1e-8))
    wres = kl.eigen_residual(wsys)
    rep.add(check_le("weighted eigen-equation residual / kappa_1",
                     float(np.max(wres)) / wsys.eigenvalues[0], 1e-6))

    big = kl.eigen_unweighted(params, 10_000)
    t = np.linspace(0.0, params.T, 9)[1:-1]
    err = np.max(np.abs(np.diag(big.truncated_covariance(t, t)) - variance(params, t)))
    rep.add(check_le("Mercer sum vs variance (N=1e4)", err, 1e-4 * params.T))

    rep.checks.extend(kl.scaling_law_check(BridgeParams(params.alpha, 2.0), count).checks)
    rep.checks.extend(kl.wiener_limit_check(1.0, 2, 0.5).checks)
    return rep


def normsq_suite(params: BridgeParams = BridgeParams(1.0, 1.0)) -> Report:
    rep = Report(f"normsq alpha={params.alpha:g} T={params.T:g}")
    unit = normsq.NormSqDistribution.from_params(BridgeParams(1.0, 1.0))
    err = max(abs(normsq.laplace_transform(unit, c).value - normsq.laplace_closed_form(1.0, c))
              for c in (0.1, 1.0, 10.0))
    rep.add(check_le("Laplace transform vs sinh closed form", err, 1e-8))

    err = 0.0
    for T, S, c in ((1.0, 0.5, 1.0), (2.0, 1.0, 0.3)):
        p = BridgeParams(0.5, T)
        err = max(err, abs(normsq.laplace_weighted_half_product(p, S, c).value
                           - normsq.laplace_weighted_half(p, S, c)))
    rep.add(check_le("weighted Laplace product vs cosh closed form", err, 1e-8))

    wiener = normsq.NormSqDistribution.from_params(BridgeParams(0.01, 1.0))
    err = max(abs(normsq.laplace_transform(wiener, c).value - normsq.laplace_closed_form(0.0, c))
              for c in (0.5, 2.0))
    rep.add(check_le("alpha=0.01 Laplace vs Wiener limit", err, 1e-2))

    dist = normsq.NormSqDistribution.from_params(params)
    u = np.linspace(0.0, (dist.zeros[3] / params.T) ** 2, 25)
    err = max(abs(normsq.fredholm_determinant(dist, v) - normsq.fredholm_product(dist, v))
              for v in u)
    rep.add(check_le("Fredholm closed form vs product", err, 1e-6))
    b = normsq.fredholm_derivative_at_first_zero(dist, "bessel")
    p = normsq.fredholm_derivative_at_first_zero(dist, "product")
    rep.add(check_le("Fredholm derivative identity", abs(b - p) / abs(b), 1e-6))

    partial, exact = normsq.rayleigh_sum(params.nu, 10_000)
    est = partial + normsq.rayleigh_tail_estimate(params.nu, 10_000)
    rep.add(check_le("Rayleigh sum with tail estimate (rel)", abs(est - exact) / exact, 1e-6))
    rep.add(check_le("Rayleigh partial below exact", partial - exact, 0.0))

    cb = normsq.large_deviation_constant(dist, "bessel_constant")
    cp = normsq.large_deviation_constant(dist, "product_constant")
    rep.add(check_le("large-deviation constants agree (rel)", abs(cb - cp) / cb, 1e-6))

    half = normsq.small_deviation_constant(BridgeParams(0.5, 1.0))
    rep.add(check_le("small-deviation constant at alpha=1/2",
                     abs(half - 2.0 ** 1.5 * math.pi ** -0.25), 1e-12))

    xs = (0.3, 1.0, 2.0)
    res = [normsq.survival(dist, x * params.T ** 2) for x in xs]
    vals = [r.value for r in res]
    rep.add(check_le("survival decreasing in x", float(np.max(np.diff(vals))), 0.0))
    rep.add(check_le("survival warnings", float(sum(r.warning is not None for r in res)), 0.0))
    mags = np.abs(res[0].terms)
    mags = mags[mags > 1e-300]
    signs = np.sign(res[0].terms[: mags.size])
    alt = bool(np.all(signs[:-1] * signs[1:] < 0))
    rep.add(check_le("survival terms alternate and decrease",
                     float(np.max(np.diff(mags))) if alt else math.inf, 0.0))
    return rep


def run_suite(name: str, params: BridgeParams | None = None) -> list[Report]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    params = params or BridgeParams(1.0, 1.0)
    out = []
    if name in ("bessel", "all"):
        out.append(bessel_suite())
    if name in ("kl", "all"):
        out.append(kl_suite(params))
    if name in ("normsq", "all"):
        out.append(normsq_suite(params))
    return out
