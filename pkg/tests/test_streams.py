import itertools

import numpy as np
import pytest

from brokersim import (
    AgentStream,
    SpecParseError,
    enumerate_alpha_balanced,
    expand,
    is_alpha_balanced,
    parse_pattern,
    prefix_dominates,
    random_alpha_balanced,
)


class TestParsePattern:
    @pytest.mark.parametrize(
        "text,expanded",
        [
            ("S B^3", "SBBB"),
            ("(S^2 B)^2", "SSBSSB"),
            ("S^0 B", "B"),
            ("SB^4", "SBBBB"),
            ("(SB)^2", "SBSB"),
        ],
    )
    def test_expansion(self, text, expanded):
        assert AgentStream.from_pattern(text).text == expanded

    def test_counts(self):
        s = AgentStream.from_pattern("S^500 B^500")
        assert (s.n_S, s.n_B, s.n) == (500, 500, 1000)

    @pytest.mark.parametrize(
        "bad",
        ["", "   ", "S^", "( S", ")S", "S^-1", "Q", "(SB)", "S B^", "((S)^2"],
    )
    def test_syntax_errors(self, bad):
        with pytest.raises(SpecParseError):
            parse_pattern(bad)

    def test_errors_carry_position(self):
        with pytest.raises(SpecParseError) as err:
            parse_pattern("SB)X")
        assert "position 2" in str(err.value)

    def test_overflow_rejected(self):
        with pytest.raises(SpecParseError):
            parse_pattern("S^200000000")
        with pytest.raises(SpecParseError):
            parse_pattern("(S^100000)^1001")

    def test_at_cap_is_fine(self):
        assert parse_pattern("S^100000000").length() == 10**8


class TestRenderRoundTrip:
    @pytest.mark.parametrize("text", ["S", "S B^3", "(S^2 B)^2", "(S B^2)^3 S^4", "B^0 S"])
    def test_parse_render_fixpoint(self, text):
        p = parse_pattern(text)
        rendered = p.render()
        again = parse_pattern(rendered)
        assert again.render() == rendered
        assert expand(again) == expand(p)

    def test_lazy_iteration_matches_expansion(self):
        for text in ["(S^3 B)^5", "S B^7 (SB)^2", "S^0"]:
            p = parse_pattern(text)
            lazy = list(itertools.islice(p.iter_roles(), 10**6))
            assert lazy == expand(p).roles.tolist()

    def test_lazy_prefix_agreement_without_materialization(self):
        p = parse_pattern("(S^7 B^3)^1000000")
        prefix = list(itertools.islice(p.iter_roles(), 25))
        assert prefix == expand(parse_pattern("(S^7 B^3)^3")).roles.tolist()[:25]


class TestAlphaBalance:
    def test_examples_alpha_1(self):
        assert is_alpha_balanced(AgentStream.from_text("SBSSBSBB"), 1)
        assert not is_alpha_balanced(AgentStream.from_text("SBBSSB"), 1)

    def test_examples_alpha_2(self):
        assert is_alpha_balanced(AgentStream.from_text("SSSBSB"), 2)
        assert not is_alpha_balanced(AgentStream.from_text("SSBSBSSSB"), 2)

    def test_count_mismatch_fails(self):
        assert not is_alpha_balanced(AgentStream.from_text("SSB"), 1)

    def test_blocks_are_balanced(self):
        for alpha in range(1, 5):
            for m in range(1, 101):
                s = AgentStream.from_pattern(f"(S^{alpha} B)^{m}")
                assert is_alpha_balanced(s, alpha)

    def test_alpha_validated(self):
        with pytest.raises(ValueError):
            is_alpha_balanced(AgentStream.from_text("SB"), 0)


class TestPrefixDominates:
    def test_basic(self):
        assert prefix_dominates(AgentStream.from_text("SSBB"), AgentStream.from_text("SBSB"))
        assert not prefix_dominates(AgentStream.from_text("SBSB"), AgentStream.from_text("SSBB"))

    def test_incomparable_pair(self):
        a = AgentStream.from_text("SSBBSB")
        b = AgentStream.from_text("SBSSBB")
        assert not prefix_dominates(a, b)
        assert not prefix_dominates(b, a)

    def test_reflexive(self):
        s = AgentStream.from_text("SBSB")
        assert prefix_dominates(s, s)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            prefix_dominates(AgentStream.from_text("SB"), AgentStream.from_text("SBB"))

    def test_block_pattern_is_bottom_element(self, rng):
        for alpha in (1, 2, 3):
            for m in (3, 7, 20):
                bottom = AgentStream.from_pattern(f"(S^{alpha} B)^{m}")
                for _ in range(10):
                    s = random_alpha_balanced(alpha, m, rng)
                    assert prefix_dominates(s, bottom)


class TestGenerators:
    def test_random_balanced_is_balanced(self, rng):
        for alpha, m in [(1, 12), (2, 8), (3, 5)]:
            s = random_alpha_balanced(alpha, m, rng)
            assert is_alpha_balanced(s, alpha)
            assert (s.n_S, s.n_B) == (alpha * m, m)

    def test_random_balanced_empty(self, rng):
        assert len(random_alpha_balanced(2, 0, rng)) == 0

    def test_enumeration_counts_match_catalan_numbers(self):
        # alpha=1 -> Catalan; alpha=2 -> Fuss-Catalan C(3m, m)/(2m+1)
        catalan = [1, 2, 5, 14, 42, 132]
        for m, want in enumerate(catalan, start=1):
            assert sum(1 for _ in enumerate_alpha_balanced(1, m)) == want
        fuss = [1, 3, 12, 55]
        for m, want in enumerate(fuss, start=1):
            assert sum(1 for _ in enumerate_alpha_balanced(2, m)) == want

    def test_enumeration_yields_balanced_unique(self):
        seen = set()
        for s in enumerate_alpha_balanced(2, 3):
            assert is_alpha_balanced(s, 2)
            seen.add(s.text)
        assert len(seen) == 12


class TestAgentStream:
    def test_prefix_sellers(self):
        s = AgentStream.from_text("SBSSB")
        assert [s.prefix_sellers(t) for t in range(6)] == [0, 1, 1, 2, 3, 3]

    def test_from_text_rejects_bad_chars(self):
        with pytest.raises(SpecParseError):
            AgentStream.from_text("SBX")

    def test_roles_are_read_only(self):
        s = AgentStream.from_text("SB")
        with pytest.raises(ValueError):
            s.roles[0] = 1

    def test_equality_and_hash(self):
        a = AgentStream.from_text("SBB")
        b = AgentStream.from_pattern("S B^2")
        assert a == b
        assert hash(a) == hash(b)

    def test_rejects_bad_role_values(self):
        with pytest.raises(ValueError):
            AgentStream(np.array([0, 2], dtype=np.uint8))
