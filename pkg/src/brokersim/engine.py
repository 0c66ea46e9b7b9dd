"""Execution engine: run policies against streams, score profit/welfare,
aggregate Monte Carlo estimates.

Trade semantics per step t (stock starts at 0):

* seller: trades iff the policy posted q, the drawn value is at most q, and
  stock is below the cap; stock then grows by one and q is paid out.
* buyer: always sees the posted p; trades iff the drawn value is at least p
  and stock is positive; stock then shrinks by one and p is collected.

Profit is income minus spend.  Welfare is the summed values of sellers who
kept their item plus buyers who obtained one.

Draws are inverse-transform: step t consumes one uniform u and the value is
``quantile(u)``.  Accept/reject comparisons are made in quantile space
(seller trades iff u < F_S(q), buyer iff u >= F_B(p)), which is the same
event as the value-space rule up to ties of measure zero and makes the
scalar and vectorized paths agree bit for bit.

Determinism: trial i draws from an independent substream derived from
(seed, i), and estimates reduce in trial-index order with compensated
summation, so results are identical across reruns, chunk sizes and worker
counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution
from .policies import BalancedPolicy, PricePolicy
from .streams import AgentStream, BUYER, SELLER, expand, parse_pattern

__all__ = [
    "RandomStream",
    "TradeLog",
    "MCEstimate",
    "run_trial",
    "profit",
    "welfare",
    "monte_carlo",
    "inventory_terminal",
    "welfare_series",
]

_TRIAL_CHUNK = 8192
_STEP_SLAB = 2048
_OBJECTIVES = ("profit", "welfare")


@dataclass(frozen=True)
class RandomStream:
    """Root of the per-trial substream derivation.

    Trial i uses ``substream(i)``, seeded from (seed, i); identical inputs
    reproduce identical draws on every platform.
    """

    seed: int

    def substream(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(index,)))


@dataclass
class TradeLog:
    """Per-step trace of one trial.

    ``prices`` holds the posted price, NaN where the policy declined;
    ``values`` the drawn valuations; ``stock_after`` the stock level once
    the step resolved.
    """

    roles: np.ndarray
    prices: np.ndarray
    values: np.ndarray
    traded: np.ndarray
    stock_after: np.ndarray

    @property
    def n(self) -> int:
        return self.roles.size

    @property
    def items_bought(self) -> int:
        return int(np.count_nonzero(self.traded & (self.roles == SELLER)))

    @property
    def items_sold(self) -> int:
        return int(np.count_nonzero(self.traded & (self.roles == BUYER)))

    @property
    def spend(self) -> float:
        mask = self.traded & (self.roles == SELLER)
        return float(np.sum(self.prices[mask]))

    @property
    def income(self) -> float:
        mask = self.traded & (self.roles == BUYER)
        return float(np.sum(self.prices[mask]))

    @property
    def leftover_stock(self) -> int:
        return int(self.stock_after[-1]) if self.n else 0

    def validate(self, stock_cap: int | None = None) -> None:
        """Fail fast on a broken stock trajectory."""
        stock = 0
        for t in range(self.n):
            delta = int(self.stock_after[t]) - stock
            if self.traded[t]:
                expected = 1 if self.roles[t] == SELLER else -1
                if delta != expected:
                    raise ValueError(f"stock moved by {delta} on a trade at step {t}")
                if self.roles[t] == BUYER and stock < 1:
                    raise ValueError(f"short sale at step {t}")
            elif delta != 0:
                raise ValueError(f"stock moved without a trade at step {t}")
            stock = int(self.stock_after[t])
            if stock < 0:
                raise ValueError(f"negative stock at step {t}")
            if stock_cap is not None and stock > stock_cap:
                raise ValueError(f"stock {stock} above cap {stock_cap} at step {t}")
        if self.items_sold > self.items_bought:
            raise ValueError("sold more items than bought")


def profit(log: TradeLog) -> float:
    """Income collected from buyers minus spend paid to sellers."""
    return log.income - log.spend


def welfare(log: TradeLog) -> float:
    """Values of sellers that kept their item plus buyers that got one."""
    kept = (log.roles == SELLER) & ~log.traded
    served = (log.roles == BUYER) & log.traded
    return float(np.sum(log.values[kept]) + np.sum(log.values[served]))


def _effective_cap(policy: PricePolicy, stock_cap: int | None) -> int | None:
    caps = [c for c in (policy.stock_limit, stock_cap) if c is not None]
    return min(caps) if caps else None


def run_trial(
    stream: AgentStream,
    policy: PricePolicy,
    f_s: Distribution,
    f_b: Distribution,
    rng: np.random.Generator | None = None,
    *,
    uniforms: tuple[np.ndarray, np.ndarray] | None = None,
    stock_cap: int | None = None,
) -> TradeLog:
    """Run one trial step by step and return the full trace.

    Draws come either from ``rng`` (one uniform per step, in step order) or
    from explicit ``uniforms`` = (seller_uniforms, buyer_uniforms) indexed
    by role rank.  The explicit form is the coupling device: running two
    streams with the same arrays hands the j-th seller (and j-th buyer) of
    both streams the same draw.
    """
    if (rng is None) == (uniforms is None):
        raise ValueError("provide exactly one of rng or uniforms")
    if stock_cap is not None and stock_cap < 1:
        raise ValueError(f"stock_cap must be positive or None, got {stock_cap}")
    pol = policy.fresh()
    cap = _effective_cap(pol, stock_cap)
    n = len(stream)
    roles = stream.roles.tolist()

    if uniforms is None:
        u_steps = rng.random(n)
    else:
        u_sellers, u_buyers = (np.asarray(a, dtype=float) for a in uniforms)
        if u_sellers.size < stream.n_S or u_buyers.size < stream.n_B:
            raise ValueError("not enough uniforms for the stream's role counts")

    prices = np.full(n, np.nan)
    values = np.empty(n)
    traded = np.zeros(n, dtype=bool)
    stock_after = np.zeros(n, dtype=np.int64)
    stock = 0
    s_seen = b_seen = 0

    for t in range(n):
        role = roles[t]
        action = pol.quote_price(role)
        if uniforms is None:
            u = float(u_steps[t])
        elif role == SELLER:
            u = float(u_sellers[s_seen])
        else:
            u = float(u_buyers[b_seen])

        if role == SELLER:
            s_seen += 1
            values[t] = float(f_s.quantile(u))
            if not action.declined:
                prices[t] = action.price
                if u < float(f_s.cdf(action.price)) and (cap is None or stock < cap):
                    traded[t] = True
                    stock += 1
        else:
            b_seen += 1
            values[t] = float(f_b.quantile(u))
            prices[t] = action.price
            if u >= float(f_b.cdf(action.price)) and stock > 0:
                traded[t] = True
                stock -= 1
        pol.update_on_outcome(role, bool(traded[t]))
        if pol.stock != stock:
            raise RuntimeError(f"policy stock {pol.stock} diverged from engine stock {stock}")
        stock_after[t] = stock

    return TradeLog(stream.roles, prices, values, traded, stock_after)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_err: float
    trials: int
    ci95_low: float
    ci95_high: float

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "MCEstimate":
        n = samples.size
        mean = math.fsum(samples) / n if n else 0.0
        if n > 1:
            var = math.fsum((s - mean) ** 2 for s in samples) / (n - 1)
            std_err = math.sqrt(var / n)
        else:
            std_err = 0.0
        half = 1.96 * std_err
        return cls(mean, std_err, n, mean - half, mean + half)


def _price_schedule(policy, stream, f_s, f_b):
    """Posted price and its acceptance quantile per position.

    Prices never depend on trade outcomes (only on role ordinals), so a dry
    run with no trades reproduces the live schedule exactly.  Stock-driven
    declines are reintroduced by the kernel through the policy's cap.
    """
    pol = policy.fresh()
    n = len(stream)
    roles = stream.roles.tolist()
    price = np.empty(n)
    thresh = np.empty(n)
    for t in range(n):
        role = roles[t]
        action = pol.quote_price(role)
        if action.declined:
            raise RuntimeError("policy declined during schedule derivation")
        price[t] = action.price
        thresh[t] = float(f_s.cdf(action.price) if role == SELLER else f_b.cdf(action.price))
        pol.update_on_outcome(role, False)
    return price, thresh


def _mc_samples(stream, policy, f_s, f_b, trials, seed, stock_cap, objective):
    """Per-trial objective values, vectorized across trials.

    Streams the per-trial substreams in (chunk of trials) x (slab of steps)
    tiles; per-trial results are independent of the tiling.
    """
    n = len(stream)
    out = np.empty(trials)
    if n == 0:
        out.fill(0.0)
        return out
    price, thresh = _price_schedule(policy, stream, f_s, f_b)
    cap = _effective_cap(policy, stock_cap)
    capv = n + 1 if cap is None else cap
    roles = stream.roles.tolist()
    need_values = objective == "welfare"
    root = RandomStream(seed)

    for start in range(0, trials, _TRIAL_CHUNK):
        width = min(_TRIAL_CHUNK, trials - start)
        gens = [root.substream(start + i) for i in range(width)]
        stock = np.zeros(width, dtype=np.int64)
        spend = np.zeros(width)
        income = np.zeros(width)
        wsum = np.zeros(width)
        slab = np.empty((min(_STEP_SLAB, n), width))
        for slab_start in range(0, n, _STEP_SLAB):
            depth = min(_STEP_SLAB, n - slab_start)
            for j, gen in enumerate(gens):
                slab[:depth, j] = gen.random(depth)
            for k in range(depth):
                t = slab_start + k
                u = slab[k]
                if roles[t] == SELLER:
                    trade = (u < thresh[t]) & (stock < capv)
                    spend += trade * price[t]
                    stock += trade
                    if need_values:
                        wsum += ~trade * f_s.quantile(u)
                else:
                    trade = (u >= thresh[t]) & (stock > 0)
                    income += trade * price[t]
                    stock -= trade
                    if need_values:
                        wsum += trade * f_b.quantile(u)
        if objective == "profit":
            out[start : start + width] = income - spend
        elif objective == "welfare":
            out[start : start + width] = wsum
        else:
            out[start : start + width] = stock
    return out


def monte_carlo(
    stream: AgentStream,
    policy: PricePolicy,
    f_s: Distribution,
    f_b: Distribution,
    trials: int,
    seed: int,
    stock_cap: int | None = None,
    objective: str = "profit",
) -> MCEstimate:
    """Estimate the expected profit or welfare of a policy on a stream."""
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    if objective not in _OBJECTIVES:
        raise ValueError(f"objective must be one of {_OBJECTIVES}, got {objective!r}")
    if stock_cap is not None and stock_cap < 1:
        raise ValueError(f"stock_cap must be positive or None, got {stock_cap}")
    samples = _mc_samples(stream, policy, f_s, f_b, trials, seed, stock_cap, objective)
    return MCEstimate.from_samples(samples)


def inventory_terminal(
    alpha: int,
    m: int,
    f_s: Distribution,
    f_b: Distribution,
    trials: int,
    seed: int,
) -> MCEstimate:
    """Expected leftover stock of the balanced policy on (S^alpha B)^m.

    The stock trajectory sampled here is the inventory random walk whose
    terminal value the analytic concentration bound caps.
    """
    if trials < 2:
        raise ValueError(f"need at least 2 trials, got {trials}")
    stream = expand(parse_pattern(f"(S^{alpha} B)^{m}"))
    policy = BalancedPolicy(alpha, f_s, f_b)
    samples = _mc_samples(stream, policy, f_s, f_b, trials, seed, None, "leftover")
    return MCEstimate.from_samples(samples)


def welfare_series(prices, f: Distribution) -> float:
    """Closed-form expected welfare of the one-seller-then-buyers scenario.

    The seller is granted her full expected value and the item enters stock
    for sure; buyer t then contributes only if no earlier buyer bought:

        W(p) = mu + sum_t prod_{j<t} F(p_j) * E[X 1{X >= p_t}].
    """
    total = f.mean
    survive = 1.0
    for p in prices:
        total += survive * f.upper_partial_mean(float(p))
        survive *= float(f.cdf(p))
    return total
