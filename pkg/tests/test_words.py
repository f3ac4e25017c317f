import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuplab.errors import InvalidInputError, ResourceError
from fuplab.words import (
    PartitionParams,
    binomial_bound,
    controlled_set_size,
    count_X,
    density,
    derive_params,
    entropy,
    enumerate_uncontrolled,
    flip,
    parse_word,
    xy_membership,
)


class TestDensity:
    @pytest.mark.parametrize("text,value", [("222222222222", 0), ("111111111111", 1), ("112212221222", Fraction(1, 3)), ("112112122222", Fraction(5, 12))])
    def test_examples(self, text, value):
        assert density(parse_word(text)) == value

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            density(())

    def test_bad_letter(self):
        with pytest.raises(InvalidInputError):
            parse_word("1231")

    @given(st.lists(st.sampled_from([1, 2]), min_size=1, max_size=40))
    def test_flip_complements(self, w):
        assert density(w) + density(flip(w)) == 1


class TestCounting:
    def test_examples(self):
        assert controlled_set_size(12, 0.25) == 79
        assert controlled_set_size(12, 1e-9) == 1
        assert controlled_set_size(12, 0.999) == 4095

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5])
    def test_alpha_range(self, alpha):
        with pytest.raises(InvalidInputError):
            controlled_set_size(12, alpha)

    def test_boundary_is_controlled(self):
        # density exactly alpha counts as controlled: 0.1 means 1/10
        assert controlled_set_size(10, 0.1) == 1
        assert enumerate_uncontrolled(10, 0.1) == 1

    @pytest.mark.parametrize("N0", range(1, 17))
    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.75])
    def test_matches_enumeration(self, N0, alpha):
        assert controlled_set_size(N0, alpha) == enumerate_uncontrolled(N0, alpha)

    @given(st.integers(1, 200), st.floats(0.001, 0.999))
    def test_binomial_bound(self, N0, alpha):
        assert controlled_set_size(N0, alpha) <= binomial_bound(N0, alpha)

    def test_entropy_below_sqrt_on_admissible_alpha(self):
        # alpha = beta^2 / 64 with beta <= 1/8, so alpha <= 1/4096
        for i in range(1, 4097):
            a = i / 4096**2
            assert entropy(a) <= math.sqrt(a)

    def test_entropy_below_sqrt_small_alpha(self):
        for i in range(1, 861):
            a = i / 10_000
            assert entropy(a) <= math.sqrt(a)

    def test_entropy_exceeds_sqrt_in_middle_band(self):
        # the inequality is a small-alpha statement: it fails near alpha = 0.1
        assert entropy(0.1) > math.sqrt(0.1)
        assert entropy(0.47) > math.sqrt(0.47)
        assert entropy(0.49) < math.sqrt(0.49)


class TestParams:
    def test_derive(self):
        p = derive_params(math.exp(-20), 0.8, 0.08)
        assert (p.N0, p.N1) == (4, 16)
        assert p.alpha == pytest.approx(1e-4)

    @pytest.mark.parametrize("h,rho,beta", [(0, 0.5, 0.1), (0.5, 1.0, 0.1), (0.5, 0.5, 0.2)])
    def test_ranges(self, h, rho, beta):
        with pytest.raises(InvalidInputError):
            derive_params(h, rho, beta)


class TestCountX:
    def test_report(self):
        r = count_X(PartitionParams(12, 0.25), verify_exhaustive=True)
        assert r.n_uncontrolled == 79 and r.n_X == 79**8
        assert r.n_uncontrolled <= r.stirling_bound
        assert r.exhaustive is True

    def test_asymptotic_bound_ratio(self):
        p = derive_params(2.0**-40, 0.9, 0.125)
        r = count_X(p)
        assert r.asymptotic_bound == pytest.approx(p.h ** (-4 * math.sqrt(p.alpha)))
        assert r.ratio_to_bound == pytest.approx(r.n_X / r.asymptotic_bound)

    def test_exhaustive_refused_above_limit(self):
        with pytest.raises(ResourceError) as err:
            count_X(PartitionParams(30, 0.1), verify_exhaustive=True)
        assert err.value.report.n_uncontrolled == controlled_set_size(30, 0.1)


class TestMembership:
    def test_all_twos_in_X(self):
        assert xy_membership((2,) * 16, 0.25) == ("X", None)

    def test_first_controlled_block(self):
        w = (2, 2) * 2 + (1, 1) + (2, 2) * 5
        assert xy_membership(w, 0.5) == ("Y", 3)

    def test_length(self):
        with pytest.raises(InvalidInputError):
            xy_membership((1, 2, 1), 0.5)

    def test_count_by_enumeration(self):
        N0, alpha = 1, 0.5
        words = itertools.product((1, 2), repeat=8 * N0)
        n_X = sum(xy_membership(w, alpha)[0] == "X" for w in words)
        assert n_X == controlled_set_size(N0, alpha) ** 8
