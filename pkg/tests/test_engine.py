import math

import numpy as np
import pytest

import brokersim.engine as engine_mod
from brokersim import (
    AgentStream,
    BalancedPolicy,
    Exponential,
    FixedPricePolicy,
    MedianPolicy,
    Pareto,
    RandomStream,
    StockLimitedPolicy,
    DecayingSellerPolicy,
    Uniform,
    inventory_terminal,
    monte_carlo,
    profit,
    random_alpha_balanced,
    run_trial,
    welfare,
    welfare_series,
)
from brokersim.engine import MCEstimate, TradeLog, _mc_samples
from oracles import tail_value_by_quadrature

U = Uniform(0.0, 1.0)
E = Exponential(1.0)


def stream(text):
    return AgentStream.from_pattern(text)


class TestRandomStream:
    def test_same_trial_same_draws(self):
        a = RandomStream(7).substream(3).random(8)
        b = RandomStream(7).substream(3).random(8)
        assert np.array_equal(a, b)

    def test_different_trials_differ(self):
        a = RandomStream(7).substream(3).random(8)
        b = RandomStream(7).substream(4).random(8)
        assert not np.array_equal(a, b)

    def test_bulk_draw_equals_sequential(self):
        g1 = RandomStream(11).substream(0)
        g2 = RandomStream(11).substream(0)
        assert np.array_equal(g1.random(16), np.array([g2.random() for _ in range(16)]))


class TestRunTrial:
    def test_seller_at_support_max_always_buys(self, rng):
        log = run_trial(stream("S"), FixedPricePolicy(1.0, 0.5), U, U, rng)
        assert log.items_bought == 1
        assert log.spend == 1.0

    def test_buyer_without_stock_never_trades(self, rng):
        log = run_trial(stream("B"), FixedPricePolicy(1.0, 0.0), U, U, rng)
        assert not log.traded[0]
        assert welfare(log) == 0.0

    def test_hand_traced_sb(self, rng):
        log = run_trial(stream("SB"), FixedPricePolicy(1.0, 0.0), U, U, rng)
        assert log.traded.all()
        assert profit(log) == pytest.approx(-1.0, abs=1e-15)

    def test_declined_seller_logged_with_nan_price(self):
        gen = RandomStream(3).substream(0)
        pol = StockLimitedPolicy(1, U, U)
        log = run_trial(stream("S^30 B"), pol, U, U, gen)
        declined = np.isnan(log.prices[:30])
        assert declined.sum() >= 1
        assert log.stock_after.max() == 1

    def test_stock_cap_binds(self):
        gen = RandomStream(5).substream(0)
        log = run_trial(stream("S^40 B^3"), FixedPricePolicy(1.0, 0.0), U, U, gen, stock_cap=2)
        assert log.stock_after.max() == 2
        log.validate(stock_cap=2)

    def test_needs_exactly_one_randomness_source(self, rng):
        with pytest.raises(ValueError):
            run_trial(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U)
        with pytest.raises(ValueError):
            run_trial(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U, rng, uniforms=(np.array([0.1]), np.array([0.9])))

    def test_explicit_uniforms_by_role_rank(self):
        us = np.array([0.1, 0.9])
        ub = np.array([0.95])
        log = run_trial(stream("SSB"), FixedPricePolicy(0.5, 0.5), U, U, uniforms=(us, ub))
        assert log.traded.tolist() == [True, False, True]
        assert log.values[0] == pytest.approx(0.1)
        assert log.values[2] == pytest.approx(0.95)

    def test_logs_validate_on_random_configs(self, rng):
        for _ in range(20):
            roles = rng.integers(0, 2, size=30).astype(np.uint8)
            s = AgentStream(roles)
            gen = np.random.default_rng(int(rng.integers(0, 2**32)))
            log = run_trial(s, MedianPolicy(U, E), U, E, gen)
            log.validate()
            assert log.stock_after.min() >= 0


class TestScoring:
    def test_empty_log(self):
        log = TradeLog(
            roles=np.zeros(0, np.uint8),
            prices=np.zeros(0),
            values=np.zeros(0),
            traded=np.zeros(0, bool),
            stock_after=np.zeros(0, np.int64),
        )
        assert profit(log) == 0.0
        assert welfare(log) == 0.0
        assert log.leftover_stock == 0

    def test_profit_arithmetic(self):
        log = TradeLog(
            roles=np.array([0, 1], np.uint8),
            prices=np.array([0.25, 0.75]),
            values=np.array([0.1, 0.9]),
            traded=np.array([True, True]),
            stock_after=np.array([1, 0], np.int64),
        )
        assert profit(log) == pytest.approx(0.5)

    def test_unsold_inventory_cost(self):
        log = TradeLog(
            roles=np.array([0], np.uint8),
            prices=np.array([0.25]),
            values=np.array([0.1]),
            traded=np.array([True]),
            stock_after=np.array([1], np.int64),
        )
        assert profit(log) == pytest.approx(-0.25)
        assert welfare(log) == 0.0

    def test_welfare_counts_kept_sellers_and_served_buyers(self):
        log = TradeLog(
            roles=np.array([0, 0, 1, 1], np.uint8),
            prices=np.array([0.5, 0.5, 0.5, 0.5]),
            values=np.array([0.7, 0.2, 0.9, 0.4]),
            traded=np.array([False, True, True, False]),
            stock_after=np.array([0, 1, 0, 0], np.int64),
        )
        assert welfare(log) == pytest.approx(0.7 + 0.9)


class TestMonteCarlo:
    def test_profit_matches_closed_form_at_1e6(self):
        est = monte_carlo(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U, 1_000_000, 101)
        assert abs(est.mean - (-0.125)) < 4 * est.std_err

    def test_welfare_matches_closed_form_at_1e6(self):
        est = monte_carlo(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U, 1_000_000, 102, objective="welfare")
        assert abs(est.mean - 0.5625) < 4 * est.std_err

    def test_empty_stream(self):
        est = monte_carlo(stream("S^0"), FixedPricePolicy(0.5, 0.5), U, U, 10, 1)
        assert est.mean == 0.0 and est.std_err == 0.0

    def test_estimate_fields(self):
        est = MCEstimate.from_samples(np.array([1.0, 2.0, 3.0, 4.0]))
        assert est.mean == pytest.approx(2.5)
        assert est.trials == 4
        assert est.ci95_low == pytest.approx(est.mean - 1.96 * est.std_err)
        assert est.ci95_high == pytest.approx(est.mean + 1.96 * est.std_err)

    def test_validations(self):
        with pytest.raises(ValueError):
            monte_carlo(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U, 1, 0)
        with pytest.raises(ValueError):
            monte_carlo(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U, 10, 0, objective="leftover")
        with pytest.raises(ValueError):
            monte_carlo(stream("SB"), FixedPricePolicy(0.5, 0.5), U, U, 10, 0, stock_cap=0)

    @pytest.mark.parametrize(
        "policy_factory,f_s,f_b,cap",
        [
            (lambda: FixedPricePolicy(0.5, 0.5), U, U, None),
            (lambda: MedianPolicy(U, E), U, E, 2),
            (lambda: DecayingSellerPolicy(0.1, U, U), U, U, None),
            (lambda: StockLimitedPolicy(2, U, U), U, U, None),
            (lambda: MedianPolicy(Pareto(0.5), Pareto(0.5)), Pareto(0.5), Pareto(0.5), None),
        ],
    )
    def test_vector_kernel_matches_scalar_reference(self, policy_factory, f_s, f_b, cap):
        policy = policy_factory()
        s = stream("(S^2 B)^7 S B^4")
        trials = 40
        root = RandomStream(909)
        for objective, score in (("profit", profit), ("welfare", welfare)):
            vec = _mc_samples(s, policy, f_s, f_b, trials, 909, cap, objective)
            scalar = np.array(
                [score(run_trial(s, policy, f_s, f_b, root.substream(i), stock_cap=cap)) for i in range(trials)]
            )
            assert np.allclose(vec, scalar, atol=1e-9, rtol=1e-12)

    def test_same_seed_bitwise_identical(self):
        a = monte_carlo(stream("(SB)^20"), MedianPolicy(U, U), U, U, 500, 4242)
        b = monte_carlo(stream("(SB)^20"), MedianPolicy(U, U), U, U, 500, 4242)
        assert a == b

    def test_chunking_does_not_change_results(self, monkeypatch):
        args = (stream("(S^2 B)^9"), MedianPolicy(U, U), U, U, 101, 77, None, "profit")
        baseline = _mc_samples(*args)
        monkeypatch.setattr(engine_mod, "_TRIAL_CHUNK", 7)
        monkeypatch.setattr(engine_mod, "_STEP_SLAB", 3)
        assert np.array_equal(_mc_samples(*args), baseline)


class TestInventoryTerminal:
    def test_single_block_closed_form(self):
        # p=0.75, q=0.25: P(buy)=1/4, then P(no sale)=3/4 -> E[Z_1]=3/16
        est = inventory_terminal(1, 1, U, U, 200_000, 55)
        assert abs(est.mean - 0.1875) < 3 * est.std_err

    def test_empty_walk(self):
        est = inventory_terminal(1, 0, U, U, 10, 1)
        assert est.mean == 0.0

    def test_terminal_stock_equals_bought_minus_sold(self):
        gen = RandomStream(8).substream(0)
        pol = BalancedPolicy(1, U, U)
        log = run_trial(stream("(SB)^50"), pol, U, U, gen)
        assert log.leftover_stock == log.items_bought - log.items_sold


class TestWelfareSeries:
    def test_prices_at_support_max_give_mean(self):
        assert welfare_series([1.0, 1.0, 1.0], U) == pytest.approx(0.5, abs=1e-12)

    def test_free_item_gives_double_mean(self):
        assert welfare_series([0.0], U) == pytest.approx(1.0, abs=1e-12)

    def test_two_half_prices(self):
        assert welfare_series([0.5, 0.5], U) == pytest.approx(1.0625, abs=1e-12)

    @pytest.mark.parametrize("d", [U, E, Pareto(0.5), Uniform(0.5, 2.0)], ids=str)
    def test_tail_integral_against_quadrature(self, d):
        lo, hi = d.support()
        probe = [lo + 0.1, lo + 1.0, 2.0 * d.mean]
        if math.isfinite(hi):
            probe.append(hi - 1e-3)
        for y in probe:
            assert d.upper_partial_mean(y) == pytest.approx(tail_value_by_quadrature(d, y), rel=1e-7, abs=1e-10)

    @pytest.mark.parametrize("d", [U, E], ids=str)
    def test_swapping_ascending_pair_never_decreases_welfare(self, d, rng):
        for _ in range(60):
            prices = list(d.quantile(rng.random(6)))
            for t in range(5):
                if prices[t] < prices[t + 1]:
                    swapped = prices.copy()
                    swapped[t], swapped[t + 1] = swapped[t + 1], swapped[t]
                    assert welfare_series(swapped, d) >= welfare_series(prices, d) - 1e-12


class TestCoupledRuns:
    def test_prefix_domination_transfers_to_profit_per_trial(self, rng):
        pol = BalancedPolicy(1, U, U)
        pairs = [(AgentStream.from_text("SSBB"), AgentStream.from_text("SBSB"))]
        for m in (5, 12):
            s1 = random_alpha_balanced(1, m, rng)
            s2 = AgentStream.from_pattern(f"(SB)^{m}")
            pairs.append((s1, s2))
        for s1, s2 in pairs:
            for trial in range(200):
                gen = np.random.default_rng(trial)
                uniforms = (gen.random(s1.n_S), gen.random(s1.n_B))
                p1 = profit(run_trial(s1, pol, U, U, uniforms=uniforms))
                p2 = profit(run_trial(s2, pol, U, U, uniforms=uniforms))
                assert p1 >= p2 - 1e-12
