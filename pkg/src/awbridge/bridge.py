"""The alpha-Wiener bridge ``dX = -alpha/(T-t) X dt + dB``, ``X_0 = 0``.

Covariance, the deterministic time change ``tau(t) = int_0^t (T-s)^(-2 alpha) ds``
and two simulators that do not rely on the KL eigensystem:

* :func:`simulate_euler` - Euler-Maruyama on the SDE (biased by O(dt)).
* :func:`simulate_spacetime` - ``X_t = (T-t)^alpha W_{tau(t)}``, exact in
  distribution at the grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import randomness

HALF_BRANCH_TOL = 1e-9
METHODS = ("euler_sde", "spacetime_wiener", "kl_truncated", "weighted_kl_truncated")


class BridgeDomainError(ValueError):
    pass


@dataclass(frozen=True)
class BridgeParams:
    alpha: float
    T: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise BridgeDomainError(f"alpha must be > 0, got {self.alpha}")
        if not (np.isfinite(self.T) and self.T > 0):
            raise BridgeDomainError(f"T must be > 0, got {self.T}")

    @property
    def nu(self) -> float:
        return self.alpha - 0.5

    @property
    def is_half(self) -> bool:
        """True on the logarithmic (alpha = 1/2) branch."""
        return abs(self.alpha - 0.5) < HALF_BRANCH_TOL


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).ravel()
        if p.size == 0 or p[0] != 0.0:
            raise BridgeDomainError("a time grid must start at 0")
        if np.any(np.diff(p) <= 0):
            raise BridgeDomainError("time grid must be strictly increasing")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    @classmethod
    def uniform(cls, end: float, n: int) -> "TimeGrid":
        """``n`` equally spaced points on ``[0, end]``."""
        if n == 1:
            return cls(np.zeros(1))
        return cls(np.linspace(0.0, end, n))

    @classmethod
    def euler_default(cls, T: float, n: int = 2**12) -> "TimeGrid":
        """``n`` points ``j T / n``, ``j < n``: ends at ``T (1 - 1/n)``, strictly before T."""
        return cls(T * np.arange(n) / n)

    def __len__(self) -> int:
        return self.points.size

    def index_of(self, times) -> np.ndarray:
        """Indices of ``times`` in the grid (each must be a grid point up to 1e-12)."""
        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        idx = np.clip(np.searchsorted(self.points, times - 1e-12), 0, len(self) - 1)
        if not np.allclose(self.points[idx], times, rtol=0, atol=1e-12):
            raise BridgeDomainError("requested times are not grid points")
        return idx


@dataclass(frozen=True)
class PathSample:
    """Sampled trajectories; ``values`` has shape ``(n_paths, len(grid))``."""

    grid: TimeGrid
    values: np.ndarray
    method: str
    seed: int
    params: BridgeParams
    truncation: int | None = None
    extended_to_T: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.values.ndim != 2 or self.values.shape[1] != len(self.grid):
            raise ValueError("values must have shape (n_paths, len(grid))")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def at(self, t: float) -> np.ndarray:
        """Values of every path at grid time ``t``."""
        return self.values[:, int(self.grid.index_of(t)[0])]

    def with_terminal_point(self) -> "PathSample":
        """Append ``(T, 0)``; the bridge is pinned there, no dynamics are simulated."""
        T = self.params.T
        if self.grid.points[-1] >= T:
            return self
        grid = TimeGrid(np.append(self.grid.points, T))
        values = np.hstack([self.values, np.zeros((self.n_paths, 1))])
        return replace(self, grid=grid, values=values, extended_to_T=True)


# ---------------------------------------------------------------------------
# second-order structure
# ---------------------------------------------------------------------------

def _check_times(params: BridgeParams, *arrays, closed: bool = True):
    for a in arrays:
        a = np.asarray(a)
        bad = (a < 0) | (a > params.T) if closed else (a < 0) | (a >= params.T)
        if np.any(bad) or not np.all(np.isfinite(a)):
            rng = "[0, T]" if closed else "[0, T)"
            raise BridgeDomainError(f"times must lie in {rng} with T={params.T}")


def _tau(params: BridgeParams, t: np.ndarray) -> np.ndarray:
    # ((T-t)^q - T^q) / (2 alpha - 1) with q = 1 - 2 alpha, written via expm1
    # so that alpha near 1/2 does not cancel.
    T = params.T
    log_r = np.log1p(-t / T)
    if params.is_half:
        return -log_r
    q = 1.0 - 2.0 * params.alpha
    return T ** q * -np.expm1(q * log_r) / q


def time_change(params: BridgeParams, t):
    """``tau_T(t) = int_0^t (T-s)^(-2 alpha) ds`` in closed form, ``0 <= t < T``."""
    ta = np.asarray(t, dtype=np.float64)
    _check_times(params, ta, closed=False)
    out = _tau(params, ta)
    return float(out) if np.ndim(t) == 0 else out


def covariance(params: BridgeParams, s, t):
    """``cov(X_s, X_t)`` on ``[0, T]^2``, continuously extended by 0 at T.

    Computed as ``(T-s)^alpha (T-t)^alpha tau(min(s, t))``, which equals the
    two-branch closed form (logarithmic when alpha = 1/2).
    """
    sa = np.asarray(s, dtype=np.float64)
    ta = np.asarray(t, dtype=np.float64)
    _check_times(params, sa, ta)
    T, a = params.T, params.alpha
    m = np.minimum(sa, ta)
    at_end = (sa >= T) | (ta >= T)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (T - sa) ** a * (T - ta) ** a * _tau(params, np.where(at_end, 0.0, m))
    out = np.where(at_end, 0.0, out)
    return float(out) if out.ndim == 0 else out


def variance(params: BridgeParams, t):
    return covariance(params, t, t)


# ---------------------------------------------------------------------------
# simulators
# ---------------------------------------------------------------------------

def _open_grid(params: BridgeParams, grid: TimeGrid):
    if grid.points[-1] >= params.T:
        raise BridgeDomainError(
            "simulation grids must end strictly before T (drift is singular at T); "
            "use PathSample.with_terminal_point() to pin X_T = 0")


def _observed(grid: TimeGrid, observe):
    if observe is None:
        return np.arange(len(grid))
    # t = 0 is always kept so that the stored times still form a TimeGrid
    return np.union1d([0], grid.index_of(observe))


def simulate_euler(params: BridgeParams, grid: TimeGrid, seed: int, n_paths: int = 1,
                   observe=None, chunk: int = randomness.DEFAULT_CHUNK) -> PathSample:
    """Euler-Maruyama paths of the bridge SDE on ``grid`` (last point < T).

    ``observe`` optionally restricts the stored values to a subset of grid
    times (plus ``t = 0``), which keeps memory flat for long grids.
    """
    _open_grid(params, grid)
    keep = _observed(grid, observe)
    t = grid.points
    dt = np.diff(t)
    decay = 1.0 - params.alpha * dt / (params.T - t[:-1])
    sdt = np.sqrt(dt)
    out = np.empty((n_paths, keep.size))
    slot = np.full(len(grid), -1)
    slot[keep] = np.arange(keep.size)
    for i, lo, hi in randomness.chunks(n_paths, chunk):
        rng = randomness.stream(seed, i)
        x = np.zeros(hi - lo)
        if slot[0] >= 0:
            out[lo:hi, slot[0]] = 0.0
        for j in range(dt.size):
            x = x * decay[j] + sdt[j] * rng.standard_normal(hi - lo)
            if slot[j + 1] >= 0:
                out[lo:hi, slot[j + 1]] = x
    return PathSample(TimeGrid(t[keep]) if observe is not None else grid, out,
                      "euler_sde", seed, params)


def simulate_spacetime(params: BridgeParams, grid: TimeGrid, seed: int, n_paths: int = 1,
                       chunk: int = randomness.DEFAULT_CHUNK) -> PathSample:
    """Paths ``(T - t)^alpha W(tau(t))`` with exact Gaussian increments of ``W``."""
    _open_grid(params, grid)
    t = grid.points
    tau = _tau(params, t)
    sd = np.sqrt(np.diff(tau))
    scale = (params.T - t) ** params.alpha
    out = np.zeros((n_paths, t.size))
    if t.size > 1:
        for i, lo, hi in randomness.chunks(n_paths, chunk):
            z = randomness.stream(seed, i).standard_normal((hi - lo, t.size - 1))
            out[lo:hi, 1:] = np.cumsum(z * sd, axis=1) * scale[1:]
    return PathSample(grid, out, "spacetime_wiener", seed, params)


def inverse_time_change(params: BridgeParams, u):
    """Solve ``tau(t) = u`` for ``t`` in ``[0, T)``."""
    ua = np.asarray(u, dtype=np.float64)
    if np.any(ua < 0):
        raise BridgeDomainError("time-change values are nonnegative")
    T = params.T
    if params.is_half:
        out = -T * np.expm1(-ua)
    else:
        q = 1.0 - 2.0 * params.alpha
        # (T - t)/T = (1 - q u T^{-q})^{1/q}
        out = -T * np.expm1(np.log1p(-q * ua * T ** (-q)) / q)
    return float(out) if np.ndim(u) == 0 else out
