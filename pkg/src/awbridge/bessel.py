"""Bessel functions of the first kind for real order, and their positive zeros.

Evaluation uses two regimes:

* ``x <= 16``: the ascending power series, summed in extended precision
  (``np.longdouble``) because the alternating terms grow to ~1e5 before
  they decay.
* ``x > 16``: the Hankel large-argument expansion, truncated at its
  smallest term.

Both regimes agree with an mpmath reference to ~1e-14 absolute for
``-1/2 < nu <= 10``.  On platforms where ``longdouble`` is plain double the
series loses a few more digits near the switch point.

Zeros are bracketed by a sign scan with step pi/2 (consecutive zeros are
more than 3 apart for every nu > -1; the scan starts below ``z_1``, which
tends to 0 as nu -> -1), started from McMahon's asymptotic guess
and polished by a safeguarded Newton iteration using
``J_nu'(x) = nu J_nu(x) / x - J_{nu+1}(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .report import Report, check_le, Check

SERIES_SWITCH = 16.0
MAX_BISECTION_STEPS = 200
MAX_NEWTON_STEPS = 50
_SCAN_STEP = 0.5 * math.pi


class BesselDomainError(ValueError):
    pass


class ZeroFinderError(RuntimeError):
    """Raised when the zero iteration exceeds its step caps."""

    def __init__(self, index: int, nu: float, reason: str):
        self.index = index
        self.nu = nu
        super().__init__(f"bessel_zeros: zero k={index} of J_{nu} did not converge ({reason})")


@dataclass(frozen=True)
class BesselOrder:
    nu: float

    def __post_init__(self):
        if not np.isfinite(self.nu) or self.nu <= -1.0:
            raise BesselDomainError(f"Bessel order must satisfy nu > -1, got {self.nu}")


def _order(order) -> float:
    if isinstance(order, BesselOrder):
        return order.nu
    return BesselOrder(float(order)).nu


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _series(nu: float, x: np.ndarray) -> np.ndarray:
    xl = x.astype(np.longdouble)
    nul = np.longdouble(nu)
    q = -(xl * xl) / 4
    term = np.ones_like(xl)
    total = np.ones_like(xl)
    for k in range(1, 400):
        kl = np.longdouble(k)
        term = term * q / (kl * (kl + nul))
        total = total + term
        if np.all(np.abs(term) <= 1e-21 * np.abs(total)):
            break
    prefactor = np.power(x / 2.0, nu) / math.gamma(nu + 1.0)
    return prefactor * total.astype(np.float64)


def _hankel(nu: float, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    a = np.ones_like(x)
    last = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 400):
        a = a * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = np.abs(a)
        # terms may grow transiently while (2k-1)^2 < 4 nu^2
        if (2 * k - 1) ** 2 > mu:
            active &= mag < last
        last = np.where(active, mag, last)
        contrib = np.where(active, a, 0.0)
        if k % 2 == 0:
            p = p + (-1) ** (k // 2) * contrib
        else:
            q = q + (-1) ** ((k - 1) // 2) * contrib
        if not active.any() or mu == (2 * k - 1) ** 2:
            # mu == (2k-1)^2: expansion terminates exactly (half-integer order)
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _jv(nu: float, x) -> np.ndarray:
    """J_nu(x) for x > 0 and any real nu that is not a negative integer-ambiguous case."""
    x = np.asarray(x, dtype=np.float64)
    if nu < 0 and float(nu).is_integer():
        n = int(-nu)
        return (-1) ** n * _jv(float(n), x)
    out = np.empty_like(x)
    small = x <= max(SERIES_SWITCH, nu)
    if small.any():
        out[small] = _series(nu, x[small])
    if (~small).any():
        out[~small] = _hankel(nu, x[~small])
    return out


def bessel_j(order, x):
    """Bessel function of the first kind ``J_nu(x)`` for real ``nu > -1`` and ``x > 0``.

    Accepts a scalar or array ``x``; returns the same shape (a Python float
    for scalar input).
    """
    nu = _order(order)
    xa = np.asarray(x, dtype=np.float64)
    if not np.all(xa > 0) or not np.all(np.isfinite(xa)):
        raise BesselDomainError("bessel_j requires finite x > 0")
    out = _jv(nu, xa.ravel()).reshape(xa.shape)
    if np.ndim(x) == 0:
        return float(out)
    return out


def bessel_j_derivative(order, x):
    """``J_nu'(x) = nu J_nu(x)/x - J_{nu+1}(x)``."""
    nu = _order(order)
    xa = np.asarray(x, dtype=np.float64)
    d = nu * _jv(nu, xa) / xa - _jv(nu + 1.0, xa)
    return float(d) if np.ndim(x) == 0 else d


def bessel_j_small_x_limit_checks(order, xmin: float = 1e-8, xmax: float = 1e-1,
                                   points: int = 15) -> Report:
    """Check the small-argument behaviour of ``J_nu`` on a geometric grid.

    For every ``nu > -1/2``: ``sqrt(x) J_nu(x)`` decreases to 0 as ``x``
    decreases (the log-log slope is ``nu + 1/2 > 0``).  Additionally
    ``J_nu -> +inf`` for ``-1/2 < nu < 0``, ``J_0 -> 1`` and ``J_nu -> 0``
    for ``nu > 0``.
    """
    nu = _order(order)
    if nu <= -0.5:
        raise BesselDomainError("small-x limit checks are stated for nu > -1/2")
    xs = np.geomspace(xmax, xmin, points)
    j = _jv(nu, xs)
    g = np.sqrt(xs) * j
    rep = Report(f"small-x limits of J_{nu:g}")

    steps = np.diff(np.abs(g))
    rep.add(check_le("sqrt(x)J decreasing", float(np.max(steps)), 0.0,
                     f"|sqrt(x)J| at x={xmin:g} is {abs(g[-1]):.3e}"))
    slope = np.polyfit(np.log(xs), np.log(np.abs(g)), 1)[0]
    rep.add(check_le("sqrt(x)J log-slope vs nu+1/2", abs(slope - (nu + 0.5)), 1e-3))

    if nu < 0:
        growth = -float(np.min(np.diff(j)))
        rep.add(check_le("J increasing as x decreases", growth, 0.0,
                         f"J at x={xmin:g} is {j[-1]:.3e}"))
        rep.add(Check("J large at smallest x", float(j[-1]), 10.0, bool(j[-1] > 10.0)))
    elif nu == 0:
        rep.add(check_le("J_0 -> 1", abs(j[-1] - 1.0), 1e-12))
    else:
        rep.add(check_le("J -> 0", abs(j[-1]), 10.0 * xmin ** min(nu, 1.0)))
    return rep


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------

def mcmahon_leading(nu: float, k) -> np.ndarray:
    """Leading McMahon term ``(k + (nu - 1/2)/2) pi``."""
    return (np.asarray(k, dtype=np.float64) + 0.5 * (nu - 0.5)) * math.pi


def mcmahon_guess(nu: float, k) -> np.ndarray:
    """Three-term McMahon expansion of the k-th positive zero of ``J_nu``."""
    beta = mcmahon_leading(nu, k)
    mu = 4.0 * nu * nu
    b8 = 8.0 * beta
    return (beta - (mu - 1.0) / b8
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3))


@dataclass(frozen=True)
class ZeroTable:
    """Ascending positive zeros ``z_1 < z_2 < ...`` of ``J_nu``.

    ``zeros`` is a read-only array; :meth:`extend` returns a new table that
    reuses the stored prefix.
    """

    order: BesselOrder
    zeros: np.ndarray
    abs_tol: float

    def __post_init__(self):
        self.zeros.setflags(write=False)

    @property
    def nu(self) -> float:
        return self.order.nu

    def __len__(self) -> int:
        return len(self.zeros)

    def __getitem__(self, k: int) -> float:
        """1-based access: ``table[1]`` is the first zero."""
        if k < 1:
            raise IndexError("zero indices start at 1")
        return float(self.zeros[k - 1])

    def extend(self, count: int) -> "ZeroTable":
        if count <= len(self):
            return self
        more = _find_zeros(self.nu, len(self) + 1, count - len(self),
                           self.abs_tol, after=float(self.zeros[-1]))
        return ZeroTable(self.order, np.concatenate([self.zeros, more]), self.abs_tol)


def _scan_brackets(nu: float, first: int, count: int, start: float):
    """Intervals of width pi/2 holding zeros first..first+count-1 (one each)."""
    lo = []
    x0 = start
    f0 = float(_jv(nu, np.array([x0]))[0])
    # zeros up to index first+count-1 lie below the McMahon leading term + 1
    upper = float(mcmahon_leading(nu, first + count - 1)) + math.pi
    while len(lo) < count:
        n = max(16, int((upper - x0) / _SCAN_STEP) + 2)
        xs = x0 + _SCAN_STEP * np.arange(n + 1)
        fs = _jv(nu, xs)
        fs[0] = f0
        sign_change = np.nonzero(np.signbit(fs[:-1]) != np.signbit(fs[1:]))[0]
        lo.extend(xs[sign_change].tolist())
        x0, f0 = float(xs[-1]), float(fs[-1])
        upper = x0 + _SCAN_STEP * 4 * (count - len(lo))
    lo = np.array(lo[:count])
    return lo, lo + _SCAN_STEP


def _find_zeros(nu: float, first: int, count: int, abs_tol: float,
                after: float | None = None) -> np.ndarray:
    # J_nu > 0 near 0 and z_1 ~ 2 sqrt(nu + 1) as nu -> -1, so the scan starts below z_1
    first_start = min(0.25 * math.pi, math.sqrt(nu + 1.0))
    start = first_start if after is None else after + 0.25 * math.pi
    a, b = _scan_brackets(nu, first, count, start)
    fa = _jv(nu, a)
    idx = np.arange(first, first + count)

    guess = mcmahon_guess(nu, idx)
    x = np.where((guess > a) & (guess < b), guess, 0.5 * (a + b))
    tol = np.maximum(abs_tol, 4.0 * np.spacing(b))
    newton_steps = np.zeros(count, dtype=int)
    bisect_steps = np.zeros(count, dtype=int)
    done = np.zeros(count, dtype=bool)

    for _ in range(MAX_NEWTON_STEPS + MAX_BISECTION_STEPS):
        act = ~done
        if not act.any():
            break
        xa = x[act]
        f = _jv(nu, xa)
        same = np.signbit(f) == np.signbit(fa[act])
        a[act] = np.where(same, xa, a[act])
        b[act] = np.where(same, b[act], xa)
        fa[act] = np.where(same, f, fa[act])
        d = nu * f / xa - _jv(nu + 1.0, xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - f / d
        ok = np.isfinite(xn) & (xn > a[act]) & (xn < b[act])
        xn = np.where(ok, xn, 0.5 * (a[act] + b[act]))
        newton_steps[act] += ok
        bisect_steps[act] += ~ok
        step = np.abs(xn - xa)
        x[act] = xn
        conv = (f == 0) | (step <= tol[act]) | ((b[act] - a[act]) <= tol[act])
        x[act] = np.where(f == 0, xa, x[act])
        done[act] = conv
        over = (newton_steps > MAX_NEWTON_STEPS) | (bisect_steps > MAX_BISECTION_STEPS)
        if over.any():
            k = int(idx[np.argmax(over)])
            raise ZeroFinderError(k, nu, "iteration cap exceeded")
    if not done.all():
        raise ZeroFinderError(int(idx[np.argmin(done)]), nu, "iteration cap exceeded")
    return x


def bessel_zeros(order, count: int, abs_tol: float = 1e-13) -> ZeroTable:
    """First ``count`` positive zeros of ``J_nu``, each to ``abs_tol``.

    ``abs_tol`` is floored at a few ulps of the zero itself, so very large
    zeros are accurate to machine precision rather than to ``abs_tol``.
    """
    order = order if isinstance(order, BesselOrder) else BesselOrder(float(order))
    if count < 1:
        raise ValueError("count must be >= 1")
    if not (1e-14 <= abs_tol <= 1e-6):
        raise ValueError("abs_tol must lie in [1e-14, 1e-6]")
    zeros = _find_zeros(order.nu, 1, int(count), abs_tol)
    return ZeroTable(order, zeros, abs_tol)


# ---------------------------------------------------------------------------
# identities
# ---------------------------------------------------------------------------

def lommel_integral(order, k: int, zeros: ZeroTable | None = None) -> tuple[float, float]:
    """Both sides of ``int_0^{z_k} x J_nu(x)^2 dx = z_k^2 J_{nu+1}(z_k)^2 / 2``.

    Returns ``(quadrature, closed_form)``.  The quadrature is adaptive
    (QUADPACK) with the breakpoints at the interior zeros.
    """
    nu = _order(order)
    if zeros is None or len(zeros) < k:
        zeros = bessel_zeros(nu, k)
    z = zeros.zeros[:k]
    zk = float(z[-1])

    def integrand(x):
        if x <= 0.0:
            return 0.0
        return x * float(_jv(nu, np.array([x]))[0]) ** 2

    edges = np.concatenate([[0.0], z])
    quad = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, limit=200, epsabs=1e-14, epsrel=1e-13)
        quad += val
    closed = 0.5 * zk * zk * float(_jv(nu + 1.0, np.array([zk]))[0]) ** 2
    return quad, closed


def euler_product(order, x, n_factors: int, zeros: ZeroTable | None = None):
    """Partial Euler product ``(x/2)^nu / Gamma(nu+1) * prod_{k<=N} (1 - x^2/z_k^2)``."""
    nu = _order(order)
    if zeros is None or len(zeros) < n_factors:
        zeros = bessel_zeros(nu, n_factors) if zeros is None else zeros.extend(n_factors)
    z = zeros.zeros[:n_factors]
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ratio = np.square(xa[:, None] / z[None, :])
    with np.errstate(divide="ignore"):
        logs = np.where(ratio < 1.0, np.log1p(-np.minimum(ratio, 1.0)),
                        np.log(np.abs(1.0 - ratio))).sum(axis=1)
    sign = np.prod(np.sign(1.0 - ratio), axis=1)
    out = sign * np.power(xa / 2.0, nu) / math.gamma(nu + 1.0) * np.exp(logs)
    return float(out[0]) if np.ndim(x) == 0 else out


_ZERO_CACHE: dict[float, ZeroTable] = {}


def cached_zeros(order, count: int) -> ZeroTable:
    """Process-wide zero table for ``nu``, extended in place of recomputation."""
    nu = _order(order)
    table = _ZERO_CACHE.get(nu)
    if table is None:
        table = bessel_zeros(nu, count)
    elif len(table) < count:
        table = table.extend(count)
    _ZERO_CACHE[nu] = table
    return table
