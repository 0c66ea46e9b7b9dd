"""Online posted-price policies.

Every policy maps the next agent's role plus its private state (sellers seen
so far, current stock) to an action: post a price, or decline the trade
outright (sellers only; buyers facing an empty stock are handled by the
engine).  Prices never depend on past trade outcomes, so a policy can be
replayed deterministically; all randomness lives in the engine.

Kinds and their price rules:

* ``median`` - post each side the median of its distribution.
* ``fixed:<q>,<p>`` - explicit constant prices.
* ``quantile:<c1>,<c2>`` - q = F_S^-1(1/c1), p = F_B^-1((c2-1)/c2); both
  constants must exceed 1.  ``quantile:2,2`` coincides with ``median``.
* ``decay:<eps>`` - the i-th seller gets q_i = F_S^-1(e^-1 * i^-(1/2+eps)),
  all buyers get p = mean of F_B; eps in (0, 1/2).
* ``stock:<K>`` - decline sellers when K items are held, else post
  q = F_S^-1(1/(2*e*K*r)) with r = max(1, mu_S/mu_B); buyers get mu_B.
* ``balanced:<alpha>`` - the optimal fractional price pair for
  alpha-balanced traffic (see :mod:`brokersim.fractional`).

``decay``, ``stock`` and ``balanced`` require regular priors (log-concave
F_S cdf, MHR F_B) and refuse construction otherwise, naming the failed
check.  ``median`` carries no such precondition.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution
from .errors import RegularityError, SpecParseError
from .fractional import FractionalSolution, require_regular, solve_fractional
from .streams import BUYER, SELLER

__all__ = [
    "PolicyAction",
    "DECLINE",
    "PricePolicy",
    "FixedPricePolicy",
    "MedianPolicy",
    "FixedQuantilePolicy",
    "DecayingSellerPolicy",
    "StockLimitedPolicy",
    "BalancedPolicy",
    "build_policy",
]


@dataclass(frozen=True)
class PolicyAction:
    """Either Post(price) or Decline (price is None)."""

    price: float | None

    @property
    def declined(self) -> bool:
        return self.price is None


DECLINE = PolicyAction(None)


class PricePolicy:
    """Base posted-price rule; subclasses provide the price schedule."""

    #: policy-imposed stock cap; None for kinds that never decline sellers
    stock_limit: int | None = None

    def __init__(self):
        self._sellers_seen = 0
        self._stock = 0

    @property
    def sellers_seen(self) -> int:
        return self._sellers_seen

    @property
    def stock(self) -> int:
        return self._stock

    def _seller_price(self, index: int) -> float:
        raise NotImplementedError

    def _buyer_price(self) -> float:
        raise NotImplementedError

    def quote_price(self, role: int) -> PolicyAction:
        """Action for the next agent; sellers may be declined at full stock."""
        if role == SELLER:
            if self.stock_limit is not None and self._stock >= self.stock_limit:
                return DECLINE
            return PolicyAction(self._seller_price(self._sellers_seen + 1))
        if role == BUYER:
            return PolicyAction(self._buyer_price())
        raise ValueError(f"unknown role {role!r}")

    def update_on_outcome(self, role: int, traded: bool) -> None:
        """Advance state after the engine resolves a step.

        The seller counter advances on every seller step, traded or not;
        stock moves by one on trades.  A buyer trade against an empty stock
        is an engine bug and fails fast.
        """
        if role == SELLER:
            self._sellers_seen += 1
            if traded:
                self._stock += 1
        elif role == BUYER:
            if traded:
                if self._stock <= 0:
                    raise RuntimeError("buyer trade recorded with empty stock")
                self._stock -= 1
        else:
            raise ValueError(f"unknown role {role!r}")

    def fresh(self) -> "PricePolicy":
        """Copy with zeroed state; one per trial for parallel Monte Carlo."""
        clone = copy.copy(self)
        clone._sellers_seen = 0
        clone._stock = 0
        return clone

    def spec_string(self) -> str:
        raise NotImplementedError


def _check_price(name, value):
    if not (math.isfinite(value) and value >= 0.0):
        raise ValueError(f"{name} must be a finite nonnegative price, got {value}")


class FixedPricePolicy(PricePolicy):
    """Constant prices q for sellers and p for buyers."""

    def __init__(self, q: float, p: float):
        super().__init__()
        _check_price("q", q)
        _check_price("p", p)
        self.q = q
        self.p = p

    def _seller_price(self, index):
        return self.q

    def _buyer_price(self):
        return self.p

    def spec_string(self):
        return f"fixed:{self.q:g},{self.p:g}"


class MedianPolicy(PricePolicy):
    """Post each side the median of its own distribution."""

    def __init__(self, f_s: Distribution, f_b: Distribution):
        super().__init__()
        self.q = float(f_s.quantile(0.5))
        self.p = float(f_b.quantile(0.5))

    def _seller_price(self, index):
        return self.q

    def _buyer_price(self):
        return self.p

    def spec_string(self):
        return "median"


class FixedQuantilePolicy(PricePolicy):
    """Seller price at the 1/c1 quantile, buyer price at (c2-1)/c2."""

    def __init__(self, c1: float, c2: float, f_s: Distribution, f_b: Distribution):
        super().__init__()
        if not (c1 > 1.0 and c2 > 1.0):
            raise ValueError(f"quantile constants must exceed 1, got c1={c1}, c2={c2}")
        self.c1 = c1
        self.c2 = c2
        self.q = float(f_s.quantile(1.0 / c1))
        self.p = float(f_b.quantile((c2 - 1.0) / c2))

    def _seller_price(self, index):
        return self.q

    def _buyer_price(self):
        return self.p

    def spec_string(self):
        return f"quantile:{self.c1:g},{self.c2:g}"


class DecayingSellerPolicy(PricePolicy):
    """Seller prices decay with the seller's ordinal in the stream.

    q_i = F_S^-1(e^-1 * i^-(1/2+eps)) is nonincreasing in i, which caps the
    total spend while still accumulating stock at a useful rate; buyers pay
    the buyer mean.
    """

    def __init__(self, eps: float, f_s: Distribution, f_b: Distribution):
        super().__init__()
        if not (0.0 < eps < 0.5):
            raise ValueError(f"decay exponent must lie in (0, 1/2), got {eps}")
        require_regular(f_s, f_b, "decay policy")
        self.eps = eps
        self._f_s = f_s
        self.p = f_b.mean

    def _seller_price(self, index):
        return float(self._f_s.quantile(math.exp(-1.0) * index ** -(0.5 + self.eps)))

    def _buyer_price(self):
        return self.p

    def spec_string(self):
        return f"decay:{self.eps:g}"


class StockLimitedPolicy(PricePolicy):
    """Buy only while fewer than K items are held.

    r = max(1, mu_S/mu_B); the seller quantile 1/(2*e*K*r) keeps the sunk
    cost of unsold stock at O(mu_S) while each sale clears at least mu_B/2.
    """

    def __init__(self, capacity: int, f_s: Distribution, f_b: Distribution):
        super().__init__()
        if not (isinstance(capacity, (int, np.integer)) and capacity >= 1):
            raise ValueError(f"stock capacity must be a positive integer, got {capacity!r}")
        require_regular(f_s, f_b, "stock policy")
        self.capacity = int(capacity)
        self.stock_limit = self.capacity
        r = max(1.0, f_s.mean / f_b.mean)
        self.q = float(f_s.quantile(1.0 / (2.0 * math.e * self.capacity * r)))
        self.p = f_b.mean

    def _seller_price(self, index):
        return self.q

    def _buyer_price(self):
        return self.p

    def spec_string(self):
        return f"stock:{self.capacity}"


class BalancedPolicy(PricePolicy):
    """Post the optimal fractional price pair for alpha-balanced traffic."""

    def __init__(self, alpha: int, f_s: Distribution, f_b: Distribution):
        super().__init__()
        solution = solve_fractional(f_s, f_b, alpha)
        if solution.per_buyer_value <= 0.0:
            raise ValueError(
                f"fractional program for {f_s}/{f_b} at alpha={alpha} admits no profitable trade"
            )
        self.alpha = int(alpha)
        self.solution: FractionalSolution = solution
        self.q = solution.q
        self.p = solution.p

    def _seller_price(self, index):
        return self.q

    def _buyer_price(self):
        return self.p

    def spec_string(self):
        return f"balanced:{self.alpha}"


def _number(tok: str, text: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise SpecParseError(f"bad number {tok!r} in policy spec {text!r}") from None


def _integer(tok: str, text: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise SpecParseError(f"bad integer {tok!r} in policy spec {text!r}") from None


def build_policy(spec: str, f_s: Distribution, f_b: Distribution) -> PricePolicy:
    """Construct a policy from its spec string.

    Grammar: ``median`` | ``fixed:<q>,<p>`` | ``quantile:<c1>,<c2>`` |
    ``decay:<eps>`` | ``stock:<K>`` | ``balanced:<alpha>``.
    """
    body = spec.strip()
    kind, _, rest = body.partition(":")
    kind = kind.strip().lower()
    params = [p.strip() for p in rest.split(",")] if rest else []

    def arity(k):
        if len(params) != k:
            raise SpecParseError(f"policy {kind!r} takes {k} parameter(s), got {rest!r}")

    try:
        if kind == "median":
            arity(0)
            return MedianPolicy(f_s, f_b)
        if kind == "fixed":
            arity(2)
            return FixedPricePolicy(_number(params[0], spec), _number(params[1], spec))
        if kind == "quantile":
            arity(2)
            return FixedQuantilePolicy(_number(params[0], spec), _number(params[1], spec), f_s, f_b)
        if kind == "decay":
            arity(1)
            return DecayingSellerPolicy(_number(params[0], spec), f_s, f_b)
        if kind == "stock":
            arity(1)
            return StockLimitedPolicy(_integer(params[0], spec), f_s, f_b)
        if kind == "balanced":
            arity(1)
            return BalancedPolicy(_integer(params[0], spec), f_s, f_b)
    except ValueError as exc:
        if isinstance(exc, (SpecParseError, RegularityError)):
            raise
        raise SpecParseError(f"invalid policy spec {spec!r}: {exc}") from None
    raise SpecParseError(f"unknown policy kind {kind!r} in {spec!r}")
