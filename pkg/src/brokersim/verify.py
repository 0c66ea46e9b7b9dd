"""Named invariant suites behind ``brokersim verify``.

Each suite runs a family of checks and reports one line per check with the
observed slack (how far the inequality is from binding, nonnegative when it
holds).  Suites are deterministic given the seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import benchmarks
from .distributions import (
    Distribution,
    Exponential,
    Uniform,
    check_regularity,
    harmonic,
    top_k_sum_bound,
)
from .engine import RandomStream, monte_carlo
from .fractional import certify_bounds, solve_fractional
from .matching import brute_force_max_matching, fifo_match
from .policies import MedianPolicy, StockLimitedPolicy
from .streams import AgentStream, enumerate_alpha_balanced

__all__ = ["CheckLine", "SUITES", "run_suite"]

SUITES = ("mhr", "matching", "adaptive", "azuma", "bounds")

_MHR_SET: tuple[Distribution, ...] = (
    Exponential(0.5),
    Exponential(1.0),
    Exponential(2.0),
    Uniform(0.0, 1.0),
    Uniform(0.0, 2.0),
)


@dataclass(frozen=True)
class CheckLine:
    suite: str
    name: str
    passed: bool
    slack: float

    def render(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{self.suite}] {self.name}: slack={self.slack:.6g} {status}"


def _line(suite, name, slack, tol=0.0):
    return CheckLine(suite, name, bool(slack >= -tol), float(slack))


def _suite_mhr(seed: int, trials: int) -> list[CheckLine]:
    checks = []
    grid = (np.arange(1024) + 1.0) / 1025.0
    for d in _MHR_SET:
        mu = d.mean
        x = np.asarray(d.quantile(grid))
        surv = 1.0 - grid

        below = x <= mu
        slack = float(np.min(surv[below] - 1.0 / math.e)) if below.any() else math.inf
        checks.append(_line("mhr", f"{d} survival>=1/e below mean", slack, 1e-9))

        above = x > 2.0 * mu
        slack = float(np.min(1.0 / math.e - surv[above])) if above.any() else math.inf
        checks.append(_line("mhr", f"{d} survival<1/e above twice mean", slack))

        slack = min(
            harmonic(m) * mu - d.max_order_stat_mean(m) for m in range(1, 65)
        )
        checks.append(_line("mhr", f"{d} order-stat mean under H_m*mu", slack, 1e-9))

        stats = d.stats()
        checks.append(_line("mhr", f"{d} std<=mean", stats.mean - stats.std, 1e-12))

        below = x <= mu
        slack = float(np.min(math.e * mu * grid[below] - x[below]))
        checks.append(_line("mhr", f"{d} tail bound x<=e*mu*F(x)", slack, 1e-9))

        report = check_regularity(d)
        checks.append(_line("mhr", f"{d} regularity flags", 0.0 if (report.mhr and report.log_concave_cdf) else -1.0))
    return checks


def _suite_matching(seed: int, trials: int) -> list[CheckLine]:
    checks = []
    max_len = 10
    for capacity in (1, 2, 3, None):
        mismatches = 0
        for length in range(1, max_len + 1):
            for bits in itertools.product((0, 1), repeat=length):
                stream = AgentStream(np.array(bits, dtype=np.uint8))
                if fifo_match(stream, capacity).size != brute_force_max_matching(stream, capacity):
                    mismatches += 1
        label = "unbounded" if capacity is None else f"K={capacity}"
        slack = 0.0 if mismatches == 0 else -float(mismatches)
        checks.append(_line("matching", f"fifo=oracle up to n={max_len}, {label}", slack))
    return checks


def _suite_adaptive(seed: int, trials: int) -> list[CheckLine]:
    checks = []
    f_s = f_b = Uniform(0.0, 1.0)
    grid = 1024
    for alpha, max_m in ((1, 4), (2, 3)):
        worst = math.inf
        for m in range(1, max_m + 1):
            per_buyer = solve_fractional(f_s, f_b, alpha).per_buyer_value
            for stream in enumerate_alpha_balanced(alpha, m):
                dp = benchmarks.adaptive_dp_oracle(stream, f_s, f_b, price_grid=grid)
                worst = min(worst, m * per_buyer + len(stream) / grid - dp)
        checks.append(_line("adaptive", f"dp<=fractional+slack, alpha={alpha}", worst))
    return checks


def _suite_azuma(seed: int, trials: int) -> list[CheckLine]:
    from .engine import inventory_terminal

    checks = []
    f_s = f_b = Uniform(0.0, 1.0)
    for alpha in (1, 2):
        for m in (10, 100):
            est = inventory_terminal(alpha, m, f_s, f_b, trials, seed)
            bound = benchmarks.azuma_bound(m, alpha)
            slack = bound + 3.0 * est.std_err - est.mean
            checks.append(_line("azuma", f"E[Z_m]<=bound m={m} alpha={alpha}", slack))
    return checks


def _suite_bounds(seed: int, trials: int) -> list[CheckLine]:
    checks = []
    f_s = f_b = Uniform(0.0, 1.0)

    for text in ("SB^8", "(SB)^20", "S^10 B^10"):
        stream = AgentStream.from_pattern(text)
        est = monte_carlo(stream, MedianPolicy(f_s, f_b), f_s, f_b, trials, seed, objective="welfare")
        bound = benchmarks.welfare_upper_bound(stream, f_s, f_b)
        checks.append(_line("bounds", f"median welfare under bound on {text}", bound - est.mean + 3 * est.std_err))

    for capacity in (1, 3):
        stream = AgentStream.from_pattern("(SB)^40")
        policy = StockLimitedPolicy(capacity, f_s, f_b)
        est = monte_carlo(stream, policy, f_s, f_b, trials, seed, stock_cap=capacity)
        bound = benchmarks.profit_upper_bound_stocked(stream, capacity, f_b)
        checks.append(_line("bounds", f"stocked profit under bound K={capacity}", bound - est.mean + 3 * est.std_err))

    for alpha in (1, 2):
        sol = solve_fractional(f_s, f_b, alpha)
        report = certify_bounds(sol, f_s, f_b, alpha, m=100)
        for check in report.checks:
            checks.append(_line("bounds", f"certificate {check.name} alpha={alpha}", check.slack))

    rng = RandomStream(seed).substream(0)
    for m, k in ((10, 3), (100, 10), (1000, 50)):
        draws = np.sort(rng.random((2000, m)), axis=1)
        top = draws[:, m - k :].sum(axis=1)
        est_mean = float(np.mean(top))
        se = float(np.std(top, ddof=1) / math.sqrt(top.shape[0]))
        stats = Uniform(0.0, 1.0).stats()
        bound = top_k_sum_bound(stats.mean, stats.std, m, k)
        checks.append(_line("bounds", f"top-{k}-of-{m} sum under bound", bound - est_mean + 3 * se))
    return checks


_RUNNERS = {
    "mhr": _suite_mhr,
    "matching": _suite_matching,
    "adaptive": _suite_adaptive,
    "azuma": _suite_azuma,
    "bounds": _suite_bounds,
}


def run_suite(name: str, seed: int = 42, trials: int = 20000) -> list[CheckLine]:
    """Run one invariant suite and return its check lines."""
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return _RUNNERS[name](seed, trials)
