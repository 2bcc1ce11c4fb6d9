"""Karhunen-Loeve eigensystems of the alpha-Wiener bridge.

Unweighted, on ``L^2[0, T]``::

    lambda_k = T^2 / z_k^2
    e_k(t)   = sqrt(2/T (1 - t/T)) J_nu(z_k (1 - t/T)) / |J_{nu+1}(z_k)|

with ``z_k`` the positive zeros of ``J_nu``, ``nu = alpha - 1/2``.

Weighted, on ``L^2([0, S], (T-s)^(-4 alpha) ds)`` for ``0 < S < T``::

    kappa_k = (tau(S) / ((k - 1/2) pi))^2
    f_k(t)  = sqrt(2 / tau(S)) (T-t)^alpha sin((k - 1/2) pi tau(t) / tau(S))

The sign of each eigenfunction is the one fixed by the formulas above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import randomness
from .bessel import BesselOrder, ZeroTable, _jv, bessel_zeros
from .bridge import (BridgeDomainError, BridgeParams, PathSample, TimeGrid, _tau,
                     covariance, inverse_time_change)
from .quadrature import gauss_legendre, graded_edges
from .report import Check, Report, check_le

EXTENSION_CUTOFF = 1e-14
DEFAULT_TAIL_FRACTION = 1e-3


@dataclass(frozen=True)
class EigenSystem:
    params: BridgeParams
    kind: str
    count: int
    eigenvalues: np.ndarray
    zeros: ZeroTable | None = None
    S: float | None = None
    # |J_{nu+1}(z_k)| for the unweighted system
    norms: np.ndarray | None = None

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)

    @property
    def horizon(self) -> float:
        return self.params.T if self.kind == "unweighted" else self.S

    def eigenfunctions(self, t) -> np.ndarray:
        """Matrix ``[phi_k(t_j)]`` of shape ``(count, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.kind == "unweighted":
            return _unweighted_values(self, t)
        return _weighted_values(self, t)

    def eigenfunction(self, k: int) -> "EigenfunctionHandle":
        if not 1 <= k <= self.count:
            raise IndexError(f"eigenfunction index must be in 1..{self.count}")
        return EigenfunctionHandle(self, k)

    def truncated_covariance(self, s, t) -> np.ndarray:
        """Mercer partial sum ``sum_{k<=N} lambda_k phi_k(s) phi_k(t)``."""
        es = self.eigenfunctions(s)
        et = self.eigenfunctions(t)
        return np.einsum("k,ki,kj->ij", self.eigenvalues, es, et)

    def weight(self, t) -> np.ndarray:
        """Density of the reference measure (1 unweighted, (T-t)^(-4 alpha) weighted)."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "unweighted":
            return np.ones_like(t)
        return (self.params.T - t) ** (-4.0 * self.params.alpha)


@dataclass(frozen=True)
class EigenfunctionHandle:
    system: EigenSystem
    k: int

    @property
    def eigenvalue(self) -> float:
        return float(self.system.eigenvalues[self.k - 1])

    def __call__(self, t):
        vals = self.system.eigenfunctions(t)[self.k - 1]
        return float(vals[0]) if np.ndim(t) == 0 else vals


def _unweighted_values(system: EigenSystem, t: np.ndarray) -> np.ndarray:
    p = system.params
    if np.any(t < 0) or np.any(t > p.T):
        raise BridgeDomainError("unweighted eigenfunctions live on [0, T]")
    y = 1.0 - t / p.T
    z = system.zeros.zeros[: system.count]
    out = np.zeros((system.count, t.size))
    # e_k(0) = 0 exactly (J_nu(z_k) = 0); e_k = 0 on the extension near T
    live = (y >= EXTENSION_CUTOFF) & (t > 0)
    if live.any():
        arg = z[:, None] * y[None, live]
        j = _jv(p.nu, arg.ravel()).reshape(arg.shape)
        out[:, live] = np.sqrt(2.0 / p.T * y[live])[None, :] * j / system.norms[:, None]
    return out


def _weighted_values(system: EigenSystem, t: np.ndarray) -> np.ndarray:
    p, S = system.params, system.S
    if np.any(t < 0) or np.any(t > S):
        raise BridgeDomainError("weighted eigenfunctions live on [0, S]")
    tau_s = _tau(p, np.float64(S))
    phase = (np.arange(1, system.count + 1) - 0.5)[:, None] * math.pi * (_tau(p, t) / tau_s)[None, :]
    amp = math.sqrt(2.0 / tau_s) * (p.T - t) ** p.alpha
    return amp[None, :] * np.sin(phase)


def eigen_unweighted(params: BridgeParams, count: int,
                     zeros: ZeroTable | None = None) -> EigenSystem:
    """First ``count`` eigenpairs of the covariance operator on ``L^2[0, T]``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if zeros is None:
        zeros = bessel_zeros(BesselOrder(params.nu), count)
    elif len(zeros) < count:
        zeros = zeros.extend(count)
    z = zeros.zeros[:count]
    lam = params.T ** 2 / z ** 2
    norms = np.abs(_jv(params.nu + 1.0, z))
    return EigenSystem(params, "unweighted", count, lam, zeros=zeros, norms=norms)


def eigen_weighted(params: BridgeParams, S: float, count: int) -> EigenSystem:
    """First ``count`` eigenpairs of the weighted expansion on ``[0, S]``."""
    if not (0.0 < S < params.T):
        raise BridgeDomainError(f"S must lie in (0, T) = (0, {params.T}), got {S}")
    if count < 1:
        raise ValueError("count must be >= 1")
    tau_s = float(_tau(params, np.float64(S)))
    kappa = (tau_s / ((np.arange(1, count + 1) - 0.5) * math.pi)) ** 2
    return EigenSystem(params, "weighted", count, kappa, S=float(S))


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def total_mass(params: BridgeParams) -> float:
    """``sum_k lambda_k = int_0^T var(X_t) dt = T^2 / (4 (nu + 1))``."""
    return params.T ** 2 / (4.0 * (params.nu + 1.0))


def tail_mass(params: BridgeParams, zeros: ZeroTable, n: int) -> float:
    """Exact ``sum_{k>n} lambda_k`` from the Rayleigh sum."""
    partial = np.sum(zeros.zeros[:n] ** -2.0)
    return params.T ** 2 * (1.0 / (4.0 * (params.nu + 1.0)) - partial)


def truncation_for_tail(params: BridgeParams, fraction: float = DEFAULT_TAIL_FRACTION,
                        zeros: ZeroTable | None = None) -> int:
    """Smallest ``N`` whose dropped eigenvalue mass is at most ``fraction`` of the total."""
    # tail ~ T^2 / (pi^2 N): start a little beyond that estimate
    guess = int(math.ceil(4.0 * (params.nu + 1.0) / (math.pi ** 2 * fraction))) + 20
    if zeros is None:
        zeros = bessel_zeros(BesselOrder(params.nu), guess)
    while True:
        zeros = zeros.extend(guess)
        partial = np.cumsum(zeros.zeros[:guess] ** -2.0)
        exact = 1.0 / (4.0 * (params.nu + 1.0))
        ok = np.nonzero(exact - partial <= fraction * exact)[0]
        if ok.size:
            return int(ok[0]) + 1
        guess *= 2


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def kl_sample(system: EigenSystem, grid: TimeGrid, seed: int, n_paths: int = 1,
              chunk: int = randomness.DEFAULT_CHUNK) -> PathSample:
    """Truncated KL series ``sum_{k<=N} sqrt(lambda_k) xi_k phi_k(t)`` on ``grid``."""
    if grid.points[-1] > system.horizon:
        raise BridgeDomainError(
            f"grid exceeds the {system.kind} expansion horizon {system.horizon}")
    basis = np.sqrt(system.eigenvalues)[:, None] * system.eigenfunctions(grid.points)
    out = np.empty((n_paths, len(grid)))
    for i, lo, hi in randomness.chunks(n_paths, chunk):
        xi = randomness.stream(seed, i).standard_normal((hi - lo, system.count))
        out[lo:hi] = xi @ basis
    method = "kl_truncated" if system.kind == "unweighted" else "weighted_kl_truncated"
    meta = {} if system.S is None else {"S": system.S}
    return PathSample(grid, out, method, seed, system.params, truncation=system.count, meta=meta)


def kl_reduce(system: EigenSystem, grid: TimeGrid, seed: int, n_paths: int, fn,
              chunk: int = randomness.DEFAULT_CHUNK) -> np.ndarray:
    """Apply ``fn`` to each chunk of KL paths without keeping the paths.

    The paths are the ones :func:`kl_sample` would return for the same
    arguments; ``fn`` maps a ``(paths, len(grid))`` block to one value per path.
    """
    if grid.points[-1] > system.horizon:
        raise BridgeDomainError(
            f"grid exceeds the {system.kind} expansion horizon {system.horizon}")
    basis = np.sqrt(system.eigenvalues)[:, None] * system.eigenfunctions(grid.points)
    out = np.empty(n_paths)
    for i, lo, hi in randomness.chunks(n_paths, chunk):
        xi = randomness.stream(seed, i).standard_normal((hi - lo, system.count))
        out[lo:hi] = fn(xi @ basis)
    return out


# ---------------------------------------------------------------------------
# numerical checks
# ---------------------------------------------------------------------------

def gram_matrix(system: EigenSystem, order: int = 256, panels: int = 8) -> np.ndarray:
    """Quadrature Gram matrix of the eigenfunctions in their own ``L^2`` space.

    Weighted systems are integrated in the variable ``u = tau(t)``, which turns
    the measure ``(T-t)^(-4 alpha) dt`` into ``(T-t)^(-2 alpha) du``.
    """
    p = system.params
    if system.kind == "unweighted":
        # e_k ~ (T-t)^alpha near T: grade the panels towards T
        nodes, w = gauss_legendre(0.0, p.T, order, edges=graded_edges(0.0, p.T, panels, 0.5))
        e = system.eigenfunctions(nodes)
        return (e * w) @ e.T
    u_end = float(_tau(p, np.float64(system.S)))
    u, w = gauss_legendre(0.0, u_end, order, panels)
    t = np.minimum(inverse_time_change(p, u), system.S)
    f = system.eigenfunctions(t)
    w = w * (p.T - t) ** (-2.0 * p.alpha)
    return (f * w) @ f.T


def eigen_residual(system: EigenSystem, t_points=None, order: int = 64,
                   panels: int = 6) -> np.ndarray:
    """``sup_t |int R(t, s) phi_k(s) dmu(s) - lambda_k phi_k(t)|`` for every k.

    The integral is split at ``s = t`` (the kernel has a kink there); panels are
    graded towards the right end, where ``phi_k`` is only Hoelder continuous.
    """
    p = system.params
    H = system.horizon
    if t_points is None:
        t_points = np.linspace(0.0, H, 41)
    worst = np.zeros(system.count)
    for t in np.asarray(t_points, dtype=np.float64):
        pieces = []
        if t > 0:
            pieces.append(gauss_legendre(0.0, t, order, edges=np.linspace(0.0, t, panels + 1)))
        if t < H:
            pieces.append(gauss_legendre(t, H, order, edges=graded_edges(t, H, panels)))
        s = np.concatenate([q[0] for q in pieces])
        w = np.concatenate([q[1] for q in pieces])
        kernel = covariance(p, np.full_like(s, t), s) * system.weight(s)
        lhs = system.eigenfunctions(s) @ (kernel * w)
        rhs = system.eigenvalues * system.eigenfunctions(np.array([t]))[:, 0]
        worst = np.maximum(worst, np.abs(lhs - rhs))
    return worst


def scaling_law_check(params: BridgeParams, count: int, points: int = 33) -> Report:
    """Compare the ``[0, T]`` system with the rescaled ``[0, 1]`` system."""
    unit = BridgeParams(params.alpha, 1.0)
    sys_t = eigen_unweighted(params, count)
    sys_1 = eigen_unweighted(unit, count, zeros=sys_t.zeros)
    rep = Report(f"scaling law alpha={params.alpha:g} T={params.T:g} N={count}")

    lam_dev = np.max(np.abs(sys_t.eigenvalues - params.T ** 2 * sys_1.eigenvalues)
                     / sys_t.eigenvalues)
    rep.add(check_le("eigenvalues lambda^T = T^2 lambda^1 (rel)", lam_dev, 1e-10))

    t = np.linspace(0.0, params.T, points)
    e_dev = np.max(np.abs(sys_t.eigenfunctions(t)
                          - sys_1.eigenfunctions(t / params.T) / math.sqrt(params.T)))
    rep.add(check_le("eigenfunctions e^T(t) = e^1(t/T)/sqrt(T)", e_dev, 1e-10))

    s, tt = np.meshgrid(t, t)
    r_dev = np.max(np.abs(covariance(params, s, tt)
                          - params.T * covariance(unit, s / params.T, tt / params.T)))
    rep.add(check_le("covariance R^T(s,t) = T R^1(s/T,t/T)", r_dev, 1e-10))
    return rep


def wiener_limit_terms(T: float, k: int, S: float, alpha: float, points: int = 201):
    """Sup-distances of the k-th KL coefficients at ``alpha`` from their Wiener limits.

    Returns ``(unweighted, weighted)``: the unweighted term is compared on
    ``[0, S]`` against ``(-1)^(k-1) sqrt(2T) sin((k-1/2) pi t/T) / ((k-1/2) pi)``
    up to sign; the weighted term against ``sqrt(2S) sin((k-1/2) pi t/S) / ((k-1/2) pi)``.
    """
    params = BridgeParams(alpha, T)
    t = np.linspace(0.0, S, points)
    c = (k - 0.5) * math.pi
    sysu = eigen_unweighted(params, k)
    term = math.sqrt(sysu.eigenvalues[k - 1]) * sysu.eigenfunctions(t)[k - 1]
    ref = (-1) ** (k - 1) * math.sqrt(2.0 * T) * np.sin(c * t / T) / c
    d_u = min(np.max(np.abs(term - ref)), np.max(np.abs(term + ref)))

    sysw = eigen_weighted(params, S, k)
    wterm = math.sqrt(sysw.eigenvalues[k - 1]) * sysw.eigenfunctions(t)[k - 1]
    wref = math.sqrt(2.0 * S) * np.sin(c * t / S) / c
    d_w = np.max(np.abs(wterm - wref))
    return float(d_u), float(d_w)


def wiener_limit_check(T: float, k: int, S: float,
                       alphas=(0.1, 0.01, 0.001), final_tol: float = 0.05) -> Report:
    """alpha -> 0 behaviour of ``sqrt(lambda_k) e_k`` and ``sqrt(kappa_k) f_k``."""
    if k > 20:
        raise ValueError("wiener_limit_check is meant for k <= 20")
    if not 0 < S < T:
        raise BridgeDomainError("S must lie in (0, T)")
    dists = [wiener_limit_terms(T, k, S, a) for a in alphas]
    du = [d[0] for d in dists]
    dw = [d[1] for d in dists]
    rep = Report(f"Wiener limit T={T:g} k={k} S={S:g}")
    detail = ", ".join(f"a={a:g}: {d:.2e}" for a, d in zip(alphas, du))
    rep.add(check_le("unweighted distances shrink", float(np.max(np.diff(du))), 0.0, detail))
    rep.add(check_le("unweighted distance at smallest alpha", du[-1], final_tol))
    detail = ", ".join(f"a={a:g}: {d:.2e}" for a, d in zip(alphas, dw))
    rep.add(check_le("weighted distances shrink", float(np.max(np.diff(dw))), 0.0, detail))
    rep.add(check_le("weighted distance at smallest alpha", dw[-1], final_tol))
    return rep
