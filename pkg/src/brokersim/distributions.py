"""Parametric value distributions for agent valuations.

Three families are supported, each with closed-form cdf, pdf, quantile,
moments and maximum-order-statistic mean:

* ``Uniform(lo, hi)`` on ``[lo, hi]`` with ``0 <= lo < hi``.
* ``Exponential(rate)`` on ``[0, inf)``.
* ``Pareto(eps)`` on ``[1, inf)`` with cdf ``1 - x**(-1/(1-eps))`` for
  ``eps`` in ``(0, 1)``.  Its mean is ``1/eps``; the variance is infinite
  for ``eps <= 1/2`` and ``stats().std`` reports ``inf`` there.

Sampling is inverse-transform throughout: a draw is ``quantile(u)`` for a
uniform ``u`` on ``[0, 1)``, so results are reproducible given the uniform
stream and identical across array/scalar code paths.

``check_regularity`` verifies, on a quantile-spaced grid over the support
interior, the two regularity conditions used by the price mechanisms:

* monotone hazard rate (MHR): ``log(1 - F)`` concave, equivalently the
  virtual value ``x - (1 - F(x))/f(x)`` nondecreasing;
* log-concave cdf: ``log F`` concave, equivalently the virtual cost
  ``x + F(x)/f(x)`` nondecreasing.

Grid checks are numeric by design; they evaluate strictly interior points
and use a second-difference tolerance of 1e-9 on consecutive secant slopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import SpecParseError

__all__ = [
    "Distribution",
    "Uniform",
    "Exponential",
    "Pareto",
    "DistributionStats",
    "RegularityReport",
    "check_regularity",
    "order_stat_mean_quadrature",
    "top_k_sum_bound",
    "parse_distribution",
    "harmonic",
]

_SLOPE_TOL = 1e-9


@dataclass(frozen=True)
class DistributionStats:
    """First moments: ``std`` may be ``inf`` for heavy-tailed kinds."""

    mean: float
    std: float
    median: float


def _scalar_or_array(out: np.ndarray, scalar: bool):
    return float(out) if scalar else out


class Distribution:
    """Base class for the parametric value distributions."""

    def cdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def quantile(self, u):
        """Generalized inverse cdf; defined for ``u`` in ``[0, 1)``."""
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def stats(self) -> DistributionStats:
        raise NotImplementedError

    def max_order_stat_mean(self, m: int) -> float:
        """Expected maximum of ``m`` i.i.d. draws, by closed form."""
        raise NotImplementedError

    def upper_partial_mean(self, y: float) -> float:
        """``E[X * 1{X >= y}]``, the upper tail value integral."""
        raise NotImplementedError

    @property
    def mean(self) -> float:
        return self.stats().mean

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.quantile(rng.random()))

    def _check_u(self, u):
        arr = np.asarray(u, dtype=float)
        if np.any((arr < 0.0) | (arr >= 1.0)):
            raise ValueError(f"quantile argument must lie in [0, 1), got {u!r}")
        return arr


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi):
            raise ValueError(f"uniform requires 0 <= lo < hi, got lo={self.lo}, hi={self.hi}")

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.clip((arr - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return _scalar_or_array(out, arr.ndim == 0)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        inside = (arr >= self.lo) & (arr <= self.hi)
        out = np.where(inside, 1.0 / (self.hi - self.lo), 0.0)
        return _scalar_or_array(out, arr.ndim == 0)

    def quantile(self, u):
        arr = self._check_u(u)
        out = self.lo + arr * (self.hi - self.lo)
        return _scalar_or_array(out, arr.ndim == 0)

    def support(self):
        return (self.lo, self.hi)

    def stats(self):
        mid = 0.5 * (self.lo + self.hi)
        return DistributionStats(mid, (self.hi - self.lo) / math.sqrt(12.0), mid)

    def max_order_stat_mean(self, m):
        _check_m(m)
        return self.lo + (self.hi - self.lo) * m / (m + 1.0)

    def upper_partial_mean(self, y):
        if y <= self.lo:
            return self.stats().mean
        if y >= self.hi:
            return 0.0
        return (self.hi * self.hi - y * y) / (2.0 * (self.hi - self.lo))

    def __str__(self):
        return f"uniform:{self.lo:g},{self.hi:g}"


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError(f"exponential rate must be positive, got {self.rate}")

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr > 0.0, -np.expm1(-self.rate * np.maximum(arr, 0.0)), 0.0)
        return _scalar_or_array(out, arr.ndim == 0)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr >= 0.0, self.rate * np.exp(-self.rate * np.maximum(arr, 0.0)), 0.0)
        return _scalar_or_array(out, arr.ndim == 0)

    def quantile(self, u):
        arr = self._check_u(u)
        out = -np.log1p(-arr) / self.rate
        return _scalar_or_array(out, arr.ndim == 0)

    def support(self):
        return (0.0, math.inf)

    def stats(self):
        return DistributionStats(1.0 / self.rate, 1.0 / self.rate, math.log(2.0) / self.rate)

    def max_order_stat_mean(self, m):
        _check_m(m)
        return harmonic(m) / self.rate

    def upper_partial_mean(self, y):
        if y <= 0.0:
            return 1.0 / self.rate
        return math.exp(-self.rate * y) * (y + 1.0 / self.rate)

    def __str__(self):
        return f"exp:{self.rate:g}"


@dataclass(frozen=True)
class Pareto(Distribution):
    """Pareto on [1, inf) with cdf ``1 - x**(-1/(1-eps))``.

    Heavy-tailed by construction: not MHR for any ``eps``, and the variance
    is infinite for ``eps <= 1/2``.  Used to exercise worst-case welfare
    behaviour; mechanisms that require MHR buyer values refuse it.
    """

    eps: float

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ValueError(f"pareto eps must lie in (0, 1), got {self.eps}")

    @property
    def _shape(self) -> float:
        return 1.0 / (1.0 - self.eps)

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.where(arr >= 1.0, 1.0 - np.power(np.maximum(arr, 1.0), -self._shape), 0.0)
        return _scalar_or_array(out, arr.ndim == 0)

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        a = self._shape
        out = np.where(arr >= 1.0, a * np.power(np.maximum(arr, 1.0), -a - 1.0), 0.0)
        return _scalar_or_array(out, arr.ndim == 0)

    def quantile(self, u):
        arr = self._check_u(u)
        out = np.power(1.0 - arr, -(1.0 - self.eps))
        return _scalar_or_array(out, arr.ndim == 0)

    def support(self):
        return (1.0, math.inf)

    def stats(self):
        mean = 1.0 / self.eps
        if self.eps <= 0.5:
            std = math.inf
        else:
            std = (1.0 - self.eps) / (self.eps * math.sqrt(2.0 * self.eps - 1.0))
        return DistributionStats(mean, std, 2.0 ** (1.0 - self.eps))

    def max_order_stat_mean(self, m):
        # E[max] = Gamma(m+1) Gamma(eps) / Gamma(m+eps), grows like m**(1-eps)
        _check_m(m)
        return math.exp(gammaln(m + 1.0) + gammaln(self.eps) - gammaln(m + self.eps))

    def upper_partial_mean(self, y):
        if y <= 1.0:
            return 1.0 / self.eps
        return (1.0 / self.eps) * y ** (1.0 - self._shape)

    def __str__(self):
        return f"pareto-eps:{self.eps:g}"


def _check_m(m):
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ValueError(f"order statistic count must be a positive integer, got {m!r}")


def harmonic(n: int) -> float:
    """n-th harmonic number; exact summation, 0 for n = 0."""
    if n < 0:
        raise ValueError("harmonic number needs n >= 0")
    return math.fsum(1.0 / i for i in range(1, n + 1))


def order_stat_mean_quadrature(d: Distribution, m: int, rel_tol: float = 1e-8) -> float:
    """E[max of m draws] via adaptive quadrature of ``int_0^1 Q(u) m u^(m-1) du``.

    Integrating on the quantile domain sidesteps infinite supports.  The
    closed forms in ``max_order_stat_mean`` are the fast path; this is the
    generic route and the cross-check.
    """
    _check_m(m)

    def integrand(u):
        return float(d.quantile(u)) * m * u ** (m - 1)

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol, limit=200)
    return val


def top_k_sum_bound(mean: float, std: float, m: int, k: int) -> float:
    """Upper bound ``k*mean + 2*sqrt(k*m)*std`` on E[sum of the top k of m draws]."""
    if not (1 <= k <= m):
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    if not math.isfinite(std) or std < 0.0:
        raise ValueError(f"bound requires a finite nonnegative std, got {std}")
    return k * mean + 2.0 * math.sqrt(k * m) * std


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of the numeric regularity checks; ``failures`` names what broke."""

    mhr: bool
    log_concave_cdf: bool
    failures: tuple[str, ...] = ()


def _concave(values: np.ndarray, xs: np.ndarray) -> bool:
    slopes = np.diff(values) / np.diff(xs)
    tol = _SLOPE_TOL * np.maximum(1.0, np.maximum(np.abs(slopes[:-1]), np.abs(slopes[1:])))
    return bool(np.all(np.diff(slopes) <= tol))


def _nondecreasing(values: np.ndarray) -> bool:
    tol = _SLOPE_TOL * np.maximum(1.0, np.abs(values[:-1]))
    return bool(np.all(np.diff(values) >= -tol))


def check_regularity(d: Distribution, grid_points: int = 1024) -> RegularityReport:
    """Grid-test MHR and cdf log-concavity on the support interior.

    The grid is quantile-spaced (``grid_points`` interior quantiles), so the
    same probability mass sits between consecutive abscissae for every kind.
    """
    if grid_points < 3:
        raise ValueError("regularity grid needs at least 3 points")
    u = (np.arange(grid_points) + 1.0) / (grid_points + 1.0)
    x = d.quantile(u)
    f = d.pdf(x)

    failures = []
    surv_concave = _concave(np.log1p(-u), x)
    if not surv_concave:
        failures.append("log-survival not concave")
    vv = x - (1.0 - u) / f
    if not _nondecreasing(vv):
        surv_concave = False
        failures.append("virtual value not increasing")

    cdf_concave = _concave(np.log(u), x)
    if not cdf_concave:
        failures.append("log-cdf not concave")
    vc = x + u / f
    if not _nondecreasing(vc):
        cdf_concave = False
        failures.append("virtual cost not increasing")

    return RegularityReport(mhr=surv_concave, log_concave_cdf=cdf_concave, failures=tuple(failures))


def parse_distribution(text: str) -> Distribution:
    """Parse a distribution spec: ``uniform:<lo>,<hi>`` | ``exp:<rate>`` | ``pareto-eps:<eps>``."""
    body = text.strip()
    kind, sep, rest = body.partition(":")
    kind = kind.strip().lower()
    if not sep:
        raise SpecParseError(f"distribution spec {text!r} is missing ':<params>'")
    params = [p.strip() for p in rest.split(",")]

    def number(tok: str) -> float:
        try:
            return float(tok)
        except ValueError:
            raise SpecParseError(f"bad number {tok!r} in distribution spec {text!r}") from None

    try:
        if kind == "uniform":
            if len(params) != 2:
                raise SpecParseError(f"uniform spec needs '<lo>,<hi>', got {rest!r}")
            return Uniform(number(params[0]), number(params[1]))
        if kind == "exp":
            if len(params) != 1:
                raise SpecParseError(f"exp spec needs '<rate>', got {rest!r}")
            return Exponential(number(params[0]))
        if kind == "pareto-eps":
            if len(params) != 1:
                raise SpecParseError(f"pareto-eps spec needs '<eps>', got {rest!r}")
            return Pareto(number(params[0]))
    except ValueError as exc:
        if isinstance(exc, SpecParseError):
            raise
        raise SpecParseError(f"invalid distribution spec {text!r}: {exc}") from None
    raise SpecParseError(f"unknown distribution kind {kind!r} in {text!r}")
