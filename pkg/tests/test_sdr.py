import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from splab.errors import DimensionError
from splab.sdr import Sdr, density, hamming_distance, overlap_score

S = Sdr.from_string


def sdr_pairs(max_n=200):
    return st.integers(1, max_n).flatmap(
        lambda n: st.tuples(
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
        )
    )


class TestHamming:
    @pytest.mark.parametrize(
        "a, b, expected", [("1010", "1010", 0), ("1010", "1100", 2), ("1111", "0000", 4)]
    )
    def test_examples(self, a, b, expected):
        assert hamming_distance(S(a), S(b)) == expected

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            hamming_distance(S("101"), S("1010"))

    def test_metric_axioms_exhaustive_n5(self):
        space = [Sdr(bits) for bits in itertools.product((0, 1), repeat=5)]
        for a, b in itertools.product(space, repeat=2):
            d = hamming_distance(a, b)
            assert d >= 0
            assert (d == 0) == (a == b)
            assert d == hamming_distance(b, a)
        for a, b, c in itertools.product(space[::3], repeat=3):
            assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)

    @given(sdr_pairs())
    def test_distance_overlap_identity(self, pair):
        a, b = Sdr(pair[0]), Sdr(pair[1])
        assert hamming_distance(a, b) == a.weight + b.weight - 2 * overlap_score(a, b)


class TestOverlap:
    def test_examples(self):
        assert overlap_score(S("101"), S("111")) == 2
        assert overlap_score(S("101"), S("010")) == 0

    @given(sdr_pairs())
    def test_bounds_and_symmetry(self, pair):
        x, y = Sdr(pair[0]), Sdr(pair[1])
        ov = overlap_score(x, y)
        assert ov == overlap_score(y, x)
        assert 0 <= ov <= min(x.weight, y.weight)
        assert overlap_score(x, x) == x.weight
        assert ov == int(np.dot(pair[0], pair[1]))

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            overlap_score(S("1"), S("11"))


class TestDensity:
    def test_three_percent(self):
        assert density(Sdr.from_indices(100, [3, 50, 99])) == pytest.approx(0.03)

    def test_extremes(self):
        assert density(Sdr.zeros(8)) == 0.0
        assert density(S("11111111")) == 1.0


class TestSdrType:
    def test_word_boundaries(self):
        # 130 bits spans three 64-bit words
        on = [0, 63, 64, 127, 128, 129]
        s = Sdr.from_indices(130, on)
        assert s.n == 130
        assert s.weight == len(on)
        assert s.indices().tolist() == on
        assert s.words.shape == (3,)

    def test_string_round_trip(self):
        text = "0110100000000000000000000000000000000000000000000000000000000000011"
        assert S(text).to_string() == text
        assert S(text).bits[1] == 1 and S(text).bits[0] == 0

    def test_equality_ignores_w_target(self):
        a, b = Sdr([1, 0, 1], w_target=2), Sdr([1, 0, 1], w_target=3)
        assert a == b
        assert hash(a) == hash(b)
        assert a != Sdr([1, 1, 0])

    def test_immutable(self):
        s = S("1010")
        with pytest.raises(ValueError):
            s.words[0] = 0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            Sdr([0, 2, 1])
        with pytest.raises(ValueError):
            S("10a1")
        with pytest.raises(ValueError):
            Sdr([1, 0], w_target=3)
