"""Optimal fractional two-price program for block streams S^(alpha*m) B^m.

A fractional mechanism posting seller price q buys exactly F_S(q) units per
seller and posting buyer price p sells exactly 1 - F_B(p) units per buyer.
On S^(alpha*m) B^m the optimum uses a single price pair maximizing

    m * ( p*(1 - F_B(p)) - alpha * q * F_S(q) )
    subject to  1 - F_B(p) = alpha * F_S(q),

i.e. supply bought equals demand served.  Eliminating the constraint via
p(q) = F_B^-1(1 - alpha*F_S(q)) reduces this to a 1-D maximization in q,
solved by a coarse quantile grid followed by golden-section refinement.
At an interior optimum the Lagrange condition equates the buyer virtual
value and the seller virtual cost; the gap is reported as
``stationarity_residual``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, check_regularity
from .errors import RegularityError

__all__ = [
    "FractionalSolution",
    "CheckResult",
    "CertificateReport",
    "virtual_value",
    "virtual_cost",
    "solve_fractional",
    "certify_bounds",
]

_COARSE_GRID = 1024
_Q_TOL = 1e-10
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FractionalSolution:
    """Optimal (p, q) with the per-buyer objective value and residuals.

    ``constraint_residual`` is (1 - F_B(p)) - alpha*F_S(q).  For a no-trade
    solution (no profitable price pair) ``per_buyer_value`` is 0 and
    ``stationarity_residual`` is NaN.
    """

    p: float
    q: float
    per_buyer_value: float
    constraint_residual: float
    stationarity_residual: float


def virtual_value(f_b: Distribution, x: float) -> float:
    """Myerson virtual value ``x - (1 - F(x)) / f(x)``; needs positive density."""
    density = float(f_b.pdf(x))
    if density <= 0.0:
        raise ValueError(f"zero density at x={x}; virtual value undefined")
    return x - (1.0 - float(f_b.cdf(x))) / density


def virtual_cost(f_s: Distribution, x: float) -> float:
    """Myerson virtual cost ``x + F(x) / f(x)``; needs positive density."""
    density = float(f_s.pdf(x))
    if density <= 0.0:
        raise ValueError(f"zero density at x={x}; virtual cost undefined")
    return x + float(f_s.cdf(x)) / density


def require_regular(f_s: Distribution, f_b: Distribution, context: str) -> None:
    """Raise RegularityError naming the failed check unless F_S is
    log-concave-cdf and F_B is MHR."""
    rep_s = check_regularity(f_s)
    if not rep_s.log_concave_cdf:
        raise RegularityError(
            f"{context}: seller distribution {f_s} fails log-concavity ({', '.join(rep_s.failures)})"
        )
    rep_b = check_regularity(f_b)
    if not rep_b.mhr:
        raise RegularityError(
            f"{context}: buyer distribution {f_b} fails the MHR check ({', '.join(rep_b.failures)})"
        )


def _golden_max(fn, lo: float, hi: float, xtol: float) -> tuple[float, float]:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while (b - a) > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
    x = 0.5 * (a + b)
    return x, fn(x)


def solve_fractional(f_s: Distribution, f_b: Distribution, alpha: int) -> FractionalSolution:
    """Solve the balanced two-price program for the given seller/buyer priors.

    Both distributions must pass their regularity checks.  If no price pair
    yields positive value the no-trade solution (value 0) is returned.
    """
    if not (isinstance(alpha, (int, np.integer)) and alpha >= 1):
        raise ValueError(f"alpha must be a positive integer, got {alpha!r}")
    require_regular(f_s, f_b, "solve_fractional")

    u_max = 1.0 / alpha

    def value_at_q(q: float) -> float:
        u = float(f_s.cdf(q))
        demand = 1.0 - alpha * u
        if demand <= 0.0:
            demand = 0.0
        p = float(f_b.quantile(demand)) if demand < 1.0 else float(f_b.quantile(1.0 - 1e-15))
        return alpha * u * (p - q)

    # Coarse scan on seller quantiles, then golden-section inside the
    # bracketing cell; uniqueness of the interior stationary point under
    # regularity makes this safe.
    grid_u = u_max * (np.arange(_COARSE_GRID + 2) + 0.5) / (_COARSE_GRID + 2)
    grid_q = np.asarray(f_s.quantile(grid_u), dtype=float)
    grid_p = np.asarray(f_b.quantile(1.0 - alpha * grid_u), dtype=float)
    grid_h = alpha * grid_u * (grid_p - grid_q)
    g = int(np.argmax(grid_h))
    lo = grid_q[max(g - 1, 0)]
    hi = grid_q[min(g + 1, grid_q.size - 1)]
    q_star, h_star = _golden_max(value_at_q, lo, hi, _Q_TOL)
    if grid_h[g] > h_star:
        q_star, h_star = float(grid_q[g]), float(grid_h[g])

    if h_star <= 0.0:
        return FractionalSolution(
            p=f_b.support()[1],
            q=f_s.support()[0],
            per_buyer_value=0.0,
            constraint_residual=0.0,
            stationarity_residual=math.nan,
        )

    u = float(f_s.cdf(q_star))
    p_star = float(f_b.quantile(1.0 - alpha * u))
    constraint_residual = (1.0 - float(f_b.cdf(p_star))) - alpha * u
    try:
        stationarity = virtual_value(f_b, p_star) - virtual_cost(f_s, q_star)
    except ValueError:
        stationarity = math.nan
    return FractionalSolution(
        p=p_star,
        q=q_star,
        per_buyer_value=h_star,
        constraint_residual=constraint_residual,
        stationarity_residual=stationarity,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    slack: float


@dataclass(frozen=True)
class CertificateReport:
    checks: tuple[CheckResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def certify_bounds(
    sol: FractionalSolution,
    f_s: Distribution,
    f_b: Distribution,
    alpha: int,
    m: int,
) -> CertificateReport:
    """Check the solution against its analytic envelope.

    With r = max(2, mu_S/mu_B): (i) total value m*per_buyer_value is at least
    m*mu_B/(2*e*r); (ii) the buyer price is at most 4*ln(4*e*r)*mu_B.  Slacks
    are reported; a failure flags an infeasibility or regularity breach
    upstream.
    """
    mu_s = f_s.mean
    mu_b = f_b.mean
    r = max(2.0, mu_s / mu_b)
    value_floor = m * mu_b / (2.0 * math.e * r)
    value_slack = m * sol.per_buyer_value - value_floor
    price_ceiling = 4.0 * math.log(4.0 * math.e * r) * mu_b
    price_slack = price_ceiling - sol.p
    checks = (
        CheckResult("value-lower-bound", value_slack >= -1e-12, value_slack),
        CheckResult("buyer-price-upper-bound", price_slack >= -1e-12, price_slack),
    )
    return CertificateReport(checks)
