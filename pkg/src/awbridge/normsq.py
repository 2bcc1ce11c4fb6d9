"""Distribution of the squared L^2 norm ``Y = int_0^T X_t^2 dt`` of the bridge.

By Parseval, ``Y = sum_k lambda_k xi_k^2`` with ``lambda_k = T^2 / z_k^2``
and iid standard normal ``xi_k``.  Everything here works from the zeros
``z_k`` of ``J_nu`` and the Rayleigh identity ``sum_k z_k^-2 = 1/(4 (nu+1))``,
which gives the exact tail mass of any truncated eigenvalue sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import randomness
from .bessel import BesselOrder, ZeroTable, _jv, _order, cached_zeros
from .bridge import BridgeDomainError, BridgeParams
from .quadrature import gauss_legendre

DEFAULT_ZEROS = 1000
LOOSE_TRUNCATION = 1e-3  # survival warns above this first-omitted-term bound


@dataclass(frozen=True)
class NormSqDistribution:
    params: BridgeParams
    zeros: ZeroTable

    @classmethod
    def from_params(cls, params: BridgeParams, count: int = DEFAULT_ZEROS) -> "NormSqDistribution":
        return cls(params, cached_zeros(params.nu, count))

    @property
    def nu(self) -> float:
        return self.params.nu

    @property
    def exact_total_mass(self) -> float:
        return self.params.T ** 2 / (4.0 * (self.nu + 1.0))

    def with_zeros(self, count: int) -> "NormSqDistribution":
        if len(self.zeros) >= count:
            return self
        return NormSqDistribution(self.params, cached_zeros(self.nu, count))

    def eigenvalues(self, n: int | None = None) -> np.ndarray:
        n = len(self.zeros) if n is None else n
        if n > len(self.zeros):
            return self.with_zeros(n).eigenvalues(n)
        return self.params.T ** 2 / self.zeros.zeros[:n] ** 2

    def tail_mass(self, n: int) -> float:
        """Exact ``sum_{k>n} lambda_k``."""
        return self.exact_total_mass - float(np.sum(self.eigenvalues(n)))

    def tail_square_bound(self, n: int) -> float:
        """Upper bound on ``sum_{k>n} lambda_k^2``.

        Uses ``z_k >= (k - 1/2) pi`` (zeros increase with the order and
        ``z_k = (k - 1/2) pi`` at ``nu = -1/2``).
        """
        return self.params.T ** 4 / (3.0 * math.pi ** 4 * (n - 0.5) ** 3)


class ValueWithError(NamedTuple):
    value: float
    error_bound: float


# ---------------------------------------------------------------------------
# Laplace transform and Fredholm determinant
# ---------------------------------------------------------------------------

def laplace_transform(dist: NormSqDistribution, c: float,
                      num_factors: int = DEFAULT_ZEROS) -> ValueWithError:
    """``E exp(-c Y) = prod_k (1 + 2 c lambda_k)^(-1/2)``.

    The product is truncated at ``num_factors`` and multiplied by
    ``exp(-c * tail_mass)``; the remaining error is at most
    ``c^2 sum_{k>N} lambda_k^2`` in the exponent.
    """
    if c < 0:
        raise ValueError("the Laplace transform is evaluated at c >= 0")
    if c == 0:
        return ValueWithError(1.0, 0.0)
    dist = dist.with_zeros(num_factors)
    lam = dist.eigenvalues(num_factors)
    log_val = -0.5 * np.sum(np.log1p(2.0 * c * lam)) - c * dist.tail_mass(num_factors)
    value = math.exp(log_val)
    bound = value * math.expm1(c * c * dist.tail_square_bound(num_factors))
    return ValueWithError(value, bound)


def laplace_closed_form(alpha: float, c: float) -> float:
    """Known closed forms on ``[0, 1]``: alpha = 1 (Brownian bridge) and alpha -> 0 (Wiener)."""
    r = math.sqrt(2.0 * c)
    if alpha == 1.0:
        return 1.0 if c == 0 else math.sqrt(r / math.sinh(r))
    if alpha == 0.0:
        return 1.0 / math.sqrt(math.cosh(r))
    raise ValueError("closed forms exist for alpha in {0, 1}")


def _half_params(params: BridgeParams, S: float) -> float:
    if not params.is_half:
        raise BridgeDomainError("the weighted functional is defined for alpha = 1/2 only")
    if not 0 < S < params.T:
        raise BridgeDomainError("S must lie in (0, T)")
    return math.log(params.T / (params.T - S))


def laplace_weighted_half(params: BridgeParams, S: float, c: float) -> float:
    """``E exp(-c int_0^S X_u^2 / (T-u)^2 du)`` for alpha = 1/2, closed form."""
    L = _half_params(params, S)
    if c < 0:
        raise ValueError("c must be >= 0")
    return 1.0 / math.sqrt(math.cosh(math.sqrt(2.0 * c) * L))


def laplace_weighted_half_product(params: BridgeParams, S: float, c: float,
                                  num_factors: int = 10_000) -> ValueWithError:
    """Product form ``prod_k (1 + 2 c L^2 / ((k-1/2) pi)^2)^(-1/2)``, ``L = log(T/(T-S))``.

    Same first-order tail correction as :func:`laplace_transform`, with the
    exact sums ``sum_k ((k-1/2) pi)^-2 = 1/2``.
    """
    L = _half_params(params, S)
    if c < 0:
        raise ValueError("c must be >= 0")
    kappa = (L / ((np.arange(1, num_factors + 1) - 0.5) * math.pi)) ** 2
    tail = 0.5 * L * L - float(np.sum(kappa))
    value = math.exp(-0.5 * np.sum(np.log1p(2.0 * c * kappa)) - c * tail)
    tail_sq = L ** 4 / (3.0 * math.pi ** 4 * (num_factors - 0.5) ** 3)
    return ValueWithError(value, value * math.expm1(c * c * tail_sq))


def weighted_half_eigenvalues(params: BridgeParams, S: float, n: int) -> np.ndarray:
    L = _half_params(params, S)
    return (L / ((np.arange(1, n + 1) - 0.5) * math.pi)) ** 2


def fredholm_determinant(dist: NormSqDistribution, u: float) -> float:
    """``F(u) = prod_k (1 - lambda_k u) = Gamma(nu+1) J_nu(sqrt(u) T) / (sqrt(u) T / 2)^nu``."""
    if u < 0:
        raise ValueError("u must be >= 0")
    x = math.sqrt(u) * dist.params.T
    nu = dist.nu
    if x < 1e-6:
        # two terms of the power series; the closed form is 0/0 at x = 0
        return 1.0 - x * x / (4.0 * (nu + 1.0))
    return math.gamma(nu + 1.0) * float(_jv(nu, np.array([x]))[0]) / (x / 2.0) ** nu


def fredholm_product(dist: NormSqDistribution, u: float,
                     num_factors: int = 10_000) -> float:
    """Truncated product for ``F(u)`` with the first-order tail factor ``exp(-u tail_mass)``."""
    dist = dist.with_zeros(num_factors)
    lam = dist.eigenvalues(num_factors)
    factors = 1.0 - lam * u
    return float(np.prod(factors)) * math.exp(-u * dist.tail_mass(num_factors))


def fredholm_derivative_at_first_zero(dist: NormSqDistribution, form: str = "bessel",
                                      num_factors: int = 10_000) -> float:
    """``F'(z_1^2 / T^2)`` in either of its two closed forms.

    ``form="bessel"``:  ``-Gamma(nu+1) 2^(nu-1) T^2 z_1^(-nu-1) J_{nu+1}(z_1)``.
    ``form="product"``: ``-(T^2 / z_1^2) prod_{k>=2} (1 - z_1^2 / z_k^2)``, the
    product truncated at ``num_factors`` with the exact Rayleigh tail folded
    into an exponential factor.
    """
    nu, T = dist.nu, dist.params.T
    z1 = dist.zeros[1]
    if form == "bessel":
        j = float(_jv(nu + 1.0, np.array([z1]))[0])
        return -math.gamma(nu + 1.0) * 2.0 ** (nu - 1.0) * T * T * z1 ** (-nu - 1.0) * j
    if form == "product":
        return -(T * T / (z1 * z1)) * _first_zero_product(dist, num_factors)
    raise ValueError("form must be 'bessel' or 'product'")


def _first_zero_product(dist: NormSqDistribution, num_factors: int) -> float:
    """``prod_{k>=2} (1 - z_1^2 / z_k^2)`` with the tail beyond N in closed form."""
    dist = dist.with_zeros(num_factors)
    z = dist.zeros.zeros[:num_factors]
    r = (z[0] / z[1:]) ** 2
    log_p = float(np.sum(np.log1p(-r)))
    tail = 1.0 / (4.0 * (dist.nu + 1.0)) - float(np.sum(z ** -2.0))
    return math.exp(log_p - z[0] ** 2 * tail)


# ---------------------------------------------------------------------------
# Rayleigh sum
# ---------------------------------------------------------------------------

def rayleigh_sum(order, N: int, zeros: ZeroTable | None = None) -> tuple[float, float]:
    """``(sum_{k<=N} z_k^-2, 1/(4 (nu + 1)))``."""
    nu = _order(order)
    if nu <= -0.5:
        raise ValueError("rayleigh_sum is used for nu > -1/2")
    zeros = cached_zeros(nu, N) if zeros is None else zeros.extend(N)
    return float(np.sum(zeros.zeros[:N] ** -2.0)), 1.0 / (4.0 * (nu + 1.0))


def rayleigh_tail_estimate(order, N: int) -> float:
    """McMahon estimate of ``sum_{k>N} z_k^-2``.

    Integrates ``1/beta^2 + (mu - 1)/(4 beta^4)``, ``beta = (k + nu/2 - 1/4) pi``,
    over ``k > N + 1/2`` (midpoint rule for the sum).
    """
    nu = _order(order)
    m = N + 0.5 + 0.5 * nu - 0.25
    mu = 4.0 * nu * nu
    return 1.0 / (math.pi ** 2 * m) + (mu - 1.0) / (12.0 * math.pi ** 4 * m ** 3)


# ---------------------------------------------------------------------------
# survival function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurvivalSeriesConfig:
    num_terms: int = 50
    quad_points_per_arc: int = 48
    # endpoint pieces of half-width singularity_split * (z_{2k} - z_{2k-1})
    singularity_split: float = 0.25

    def __post_init__(self):
        if self.num_terms < 1:
            raise ValueError("num_terms must be >= 1")
        if self.quad_points_per_arc < 2:
            raise ValueError("quad_points_per_arc must be >= 2")
        if not 0 < self.singularity_split < 0.5:
            raise ValueError("singularity_split must lie in (0, 1/2)")


@dataclass(frozen=True)
class SurvivalResult:
    value: float
    error_estimate: float
    terms: np.ndarray = field(repr=False)
    warning: str | None = None


def _arc_integrals(nu: float, T: float, x: float, a: np.ndarray, b: np.ndarray,
                   cfg: SurvivalSeriesConfig) -> np.ndarray:
    """``int_a^b u^(nu/2-1) exp(-x u^2 / (2 T^2)) / sqrt|J_nu(u)| du`` per arc.

    ``|J_nu|`` vanishes linearly at both ends, so the pieces within ``delta``
    of an end use ``u = end +- s^2``, which makes the integrand smooth in ``s``.
    """
    n = cfg.quad_points_per_arc
    s_unit, ws_unit = gauss_legendre(0.0, 1.0, n)
    m_unit, wm_unit = gauss_legendre(0.0, 1.0, n)
    delta = cfg.singularity_split * (b - a)
    root = np.sqrt(delta)

    def f(u):
        j = _jv(nu, u.ravel()).reshape(u.shape)
        with np.errstate(over="ignore", under="ignore"):
            return u ** (0.5 * nu - 1.0) * np.exp(-x * u * u / (2.0 * T * T)) / np.sqrt(np.abs(j))

    s = root[:, None] * s_unit[None, :]
    ws = root[:, None] * ws_unit[None, :]
    left = np.sum(f(a[:, None] + s * s) * 2.0 * s * ws, axis=1)
    right = np.sum(f(b[:, None] - s * s) * 2.0 * s * ws, axis=1)
    lo = a + delta
    span = (b - delta) - lo
    u = lo[:, None] + span[:, None] * m_unit[None, :]
    middle = np.sum(f(u) * (span[:, None] * wm_unit[None, :]), axis=1)
    return left + middle + right


def survival_terms(dist: NormSqDistribution, x: float, n_terms: int,
                   cfg: SurvivalSeriesConfig = SurvivalSeriesConfig()) -> np.ndarray:
    """Signed terms of the alternating series, prefactor included."""
    nu, T = dist.nu, dist.params.T
    dist = dist.with_zeros(2 * n_terms)
    z = dist.zeros.zeros[: 2 * n_terms]
    arcs = _arc_integrals(nu, T, x, z[0::2], z[1::2], cfg)
    pref = 2.0 ** (1.0 - 0.5 * nu) / (math.pi * math.sqrt(math.gamma(nu + 1.0)))
    signs = (-1.0) ** np.arange(n_terms)
    return pref * signs * arcs


def survival(dist: NormSqDistribution, x: float,
             cfg: SurvivalSeriesConfig = SurvivalSeriesConfig()) -> SurvivalResult:
    """``P(Y > x)`` from the alternating series over consecutive zero pairs.

    ``error_estimate`` is the magnitude of the first omitted term.  A warning
    is attached when the term magnitudes are not yet decreasing at
    ``num_terms``, when the first omitted term exceeds ``LOOSE_TRUNCATION``,
    or when the partial sum is not a probability (``x`` too
    small for the requested truncation).
    """
    if not x > 0:
        raise ValueError("survival is evaluated at x > 0")
    K = cfg.num_terms
    terms = survival_terms(dist, x, K + 1, cfg)
    mags = np.abs(terms)
    value = float(np.sum(terms[:K]))
    warning = None
    value_slack = float(mags[K]) + 1e-9  # truncation bound plus quadrature error
    tail = mags[K // 2:]
    if np.any(np.diff(tail) > 0) or (mags[K] > 0 and mags[K] >= mags[K - 1]):
        warning = (f"alternating terms not decreasing at num_terms={K} for x={x:g}; "
                   "increase num_terms")
    elif mags[K] > LOOSE_TRUNCATION:
        warning = (f"first omitted term {mags[K]:.3g} at num_terms={K} for x={x:g}; "
                   "increase num_terms")
    elif not -value_slack <= value <= 1.0 + value_slack:
        warning = (f"partial sum {value:.6g} lies outside [0, 1] at num_terms={K} "
                   f"for x={x:g}; increase num_terms")
    return SurvivalResult(value, float(mags[K]), terms[:K], warning)


# ---------------------------------------------------------------------------
# tail asymptotics
# ---------------------------------------------------------------------------

def large_deviation_constant(dist: NormSqDistribution, form: str = "bessel_constant",
                             num_factors: int = 10_000) -> float:
    """Prefactor ``C`` in ``P(Y > x) ~ C x^(-1/2) exp(-z_1^2 x / (2 T^2))``."""
    nu, T = dist.nu, dist.params.T
    z1 = dist.zeros[1]
    if form == "bessel_constant":
        j = float(_jv(nu + 1.0, np.array([z1]))[0])
        return (2.0 ** (1.0 - 0.5 * nu) * T * z1 ** (0.5 * (nu - 3.0))
                / math.sqrt(math.pi * math.gamma(nu + 1.0) * j))
    if form == "product_constant":
        prod = _first_zero_product(dist, num_factors)
        return math.sqrt(2.0 / math.pi) * T / z1 / math.sqrt(prod)
    raise ValueError("form must be 'bessel_constant' or 'product_constant'")


def large_deviation_tail(dist: NormSqDistribution, x: float,
                         form: str = "bessel_constant", num_factors: int = 10_000) -> float:
    """Leading-order asymptote of ``P(Y > x)`` as ``x -> infinity``."""
    if not x > 0:
        raise ValueError("x must be > 0")
    T = dist.params.T
    z1 = dist.zeros[1]
    C = large_deviation_constant(dist, form, num_factors)
    return C * x ** -0.5 * math.exp(-z1 * z1 * x / (2.0 * T * T))


def small_deviation_constant(params: BridgeParams) -> float | None:
    """Explicit constant of the small-ball asymptote, known for alpha >= 1/2 only."""
    nu, T = params.nu, params.T
    if nu < 0 and not params.is_half:
        return None
    nu = max(nu, 0.0)
    return 2.0 ** (1.5 - nu) * math.pi ** -0.25 / (math.sqrt(math.gamma(1.0 + nu)) * T ** (0.5 - nu))


def small_deviation(dist: NormSqDistribution, eps: float) -> tuple[float, bool]:
    """``P(Y < eps) ~ c eps^(1/4 - nu/2) exp(-T^2 / (8 eps))`` as ``eps -> 0``.

    Returns ``(asymptote, constant_known)``.  For ``alpha < 1/2`` only the
    shape is known and ``c = 1`` is used.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    nu, T = dist.nu, dist.params.T
    c = small_deviation_constant(dist.params)
    known = c is not None
    shape = eps ** (0.25 - 0.5 * nu) * math.exp(-T * T / (8.0 * eps))
    return (c if known else 1.0) * shape, known


# ---------------------------------------------------------------------------
# Monte Carlo oracle
# ---------------------------------------------------------------------------

def sample_normsq(dist: NormSqDistribution, n_draws: int, seed: int, n_terms: int = 500,
                  add_tail_mean: bool = False,
                  chunk: int = randomness.DEFAULT_CHUNK) -> np.ndarray:
    """Draws of ``sum_{k<=n_terms} lambda_k xi_k^2``.

    With ``add_tail_mean`` the exact mean of the dropped terms is added, which
    removes the truncation bias up to a variance of ``2 sum_{k>n} lambda_k^2``.
    """
    lam = dist.eigenvalues(n_terms)
    shift = dist.tail_mass(n_terms) if add_tail_mean else 0.0
    return randomness.quadratic_form_samples(lam, n_draws, seed, shift=shift, chunk=chunk)
