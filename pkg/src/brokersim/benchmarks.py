"""Offline benchmarks and analytic envelopes.

Upper bounds (analytic):

* ``welfare_upper_bound``: no schedule beats granting every seller her value
  and selling kappa items at the buyers' maximum order statistic.
* ``profit_upper_bound_general``: 3*sqrt(kappa*n)*mu_B for MHR buyer values.
* ``profit_upper_bound_stocked``: kappa_K * H_n * mu_B under a stock cap K.
* ``azuma_bound``: concentration cap on the expected terminal inventory of
  the balanced walk.

Offline strategies (explicit witnesses to simulate):

* ``uniform_offline_policy``: the fixed price pair whose expected profit on
  S^(n/2) B^(n/2) with uniform values is linear in n.
* ``prophet_price``: the threshold mu^(n)/2 that extracts at least half the
  expected maximum from n buyers, given stock.

``adaptive_dp_oracle`` computes the exact optimum of the best *adaptive*
posted-price mechanism on a quantile grid by backward induction; it is the
reference point that every implementable mechanism must sit below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution, check_regularity, harmonic
from .errors import RegularityError
from .fractional import FractionalSolution
from .matching import max_matchable
from .streams import AgentStream, SELLER

__all__ = [
    "BoundReport",
    "welfare_upper_bound",
    "profit_upper_bound_general",
    "profit_upper_bound_stocked",
    "uniform_offline_policy",
    "prophet_price",
    "azuma_bound",
    "balanced_profit_decomposition",
    "adaptive_dp_oracle",
]


@dataclass(frozen=True)
class BoundReport:
    """A named bound value with the inputs that produced it."""

    name: str
    value: float
    inputs: dict = field(default_factory=dict)


def welfare_upper_bound(stream: AgentStream, f_s: Distribution, f_b: Distribution) -> float:
    """n_S*mu_S plus kappa times the buyers' n_B-maximum order statistic mean."""
    base = stream.n_S * f_s.mean
    if stream.n_B == 0:
        return base
    kappa = max_matchable(stream, None)
    return base + kappa * f_b.max_order_stat_mean(stream.n_B)


def profit_upper_bound_general(stream: AgentStream, f_b: Distribution) -> float:
    """3*sqrt(kappa)*sqrt(n)*mu_B; valid for MHR buyer values."""
    report = check_regularity(f_b)
    if not report.mhr:
        raise RegularityError(f"profit bound requires an MHR buyer distribution, {f_b} fails")
    kappa = max_matchable(stream, None)
    return 3.0 * math.sqrt(kappa) * math.sqrt(len(stream)) * f_b.mean


def profit_upper_bound_stocked(stream: AgentStream, capacity: int, f_b: Distribution) -> float:
    """kappa_K * H_n * mu_B with kappa_K the stock-limited matching size."""
    kappa = max_matchable(stream, capacity)
    return kappa * harmonic(len(stream)) * f_b.mean


def uniform_offline_policy(a: float, b: float) -> tuple[float, float, float]:
    """Fixed offline price pair (q, p) and its per-agent profit floor for
    uniform values on [a, b] faced with S^(n/2) B^(n/2).

    The [0, 1] case uses (1/8, 1/2) and clears 1/128 per agent.  The general
    form needs b > 2a: with k = b/a - 1 and y = (1 - 1/k)/2 it posts
    p = a(yk + 1), q = (a/2)(2 + y^2 k) and clears (ak/128)(1 - 1/k)^4.
    """
    if a == 0.0:
        if b != 1.0:
            raise ValueError("for a = 0 only the [0, 1] case is defined")
        return (0.125, 0.5, 1.0 / 128.0)
    if not (a > 0.0 and b > 2.0 * a):
        raise ValueError(f"offline strategy needs b > 2a (or a=0, b=1), got a={a}, b={b}")
    k = b / a - 1.0
    y = 0.5 * (1.0 - 1.0 / k)
    p = a * (y * k + 1.0)
    q = 0.5 * a * (2.0 + y * y * k)
    profit_per_n = (a * k / 128.0) * (1.0 - 1.0 / k) ** 4
    return (q, p, profit_per_n)


def prophet_price(f: Distribution, n: int) -> float:
    """Threshold mu^(n)/2: guarantees welfare >= mu^(n)/2 from n buyers."""
    if n < 1:
        raise ValueError(f"prophet price needs n >= 1, got {n}")
    return f.max_order_stat_mean(n) / 2.0


def azuma_bound(m: int, alpha: int) -> float:
    """Cap on the expected terminal inventory of the balanced walk:
    sqrt(2*m*alpha^2*ln m) * (1 - 2/m) + 2*alpha, natural log, m >= 2."""
    if m < 2:
        raise ValueError(f"bound needs m >= 2, got {m}")
    return math.sqrt(2.0 * m * alpha * alpha * math.log(m)) * (1.0 - 2.0 / m) + 2.0 * alpha


def balanced_profit_decomposition(
    m: int, alpha: int, sol: FractionalSolution, expected_leftover: float
) -> float:
    """Expected profit of the balanced policy on (S^alpha B)^m given the
    expected leftover stock E[Z_m]:

        (alpha*m*F_S(q) - E[Z_m]) * (p - q) - E[Z_m] * q

    i.e. revenue on the expected number of completed trades minus the sunk
    cost of unsold items.  Under the balance constraint the first factor
    times (p - q) equals m * per_buyer_value.
    """
    if expected_leftover < 0.0:
        raise ValueError(f"expected leftover must be nonnegative, got {expected_leftover}")
    gross = m * sol.per_buyer_value
    return gross - expected_leftover * (sol.p - sol.q) - expected_leftover * sol.q


def adaptive_dp_oracle(
    stream: AgentStream,
    f_s: Distribution,
    f_b: Distribution,
    price_grid: int = 1024,
    stock_cap: int | None = None,
) -> float:
    """Exact expected profit of the optimal adaptive mechanism on a
    quantile-spaced price grid, by backward induction over (step, stock).

    The grid holds ``price_grid`` prices per side, uniform in cdf space, so
    one cell always covers 1/price_grid of probability mass regardless of
    the distribution.  Declining is always available.  Oracle-scale only:
    refuses streams longer than 30 or grids above 2048.
    """
    n = len(stream)
    if n > 30:
        raise ValueError(f"oracle limited to streams of length <= 30, got {n}")
    if price_grid > 2048 or price_grid < 2:
        raise ValueError(f"price grid must lie in [2, 2048], got {price_grid}")
    if stock_cap is not None and stock_cap > n:
        raise ValueError(f"stock_cap {stock_cap} exceeds stream length {n}")
    cap = stream.n_S if stock_cap is None else stock_cap
    if n == 0 or cap == 0:
        return 0.0

    grid_u = np.arange(price_grid) / price_grid
    q_prices = np.asarray(f_s.quantile(grid_u), dtype=float)
    buy_prob = grid_u
    p_prices = np.asarray(f_b.quantile(grid_u), dtype=float)
    sell_prob = 1.0 - grid_u

    value = np.zeros(cap + 1)
    for t in reversed(range(n)):
        nxt = value
        value = nxt.copy()
        if int(stream.roles[t]) == SELLER:
            for k in range(cap):
                candidates = buy_prob * (nxt[k + 1] - q_prices - nxt[k]) + nxt[k]
                value[k] = max(nxt[k], float(candidates.max()))
            value[cap] = nxt[cap]
        else:
            value[0] = nxt[0]
            for k in range(1, cap + 1):
                candidates = sell_prob * (p_prices + nxt[k - 1] - nxt[k]) + nxt[k]
                value[k] = max(nxt[k], float(candidates.max()))
    return float(value[0])
