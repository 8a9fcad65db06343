import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edfrec.dtw import DtwConfig, direction_cost, dtw_distance

from oracles import dtw_enumerate

codes = st.integers(1, 8)
short_seqs = st.lists(codes, min_size=1, max_size=6)


class TestDirectionCost:
    def test_identity(self):
        assert direction_cost(1, 1) == 0

    def test_antipodal(self):
        assert direction_cost(1, 5) == 4

    def test_wraparound(self):
        assert direction_cost(2, 8) == 2

    def test_symmetric_full_table(self):
        for a in range(1, 9):
            for b in range(1, 9):
                assert direction_cost(a, b) == direction_cost(b, a)
                assert 0 <= direction_cost(a, b) <= 4


class TestDtwDistance:
    def test_identical_sequences(self):
        assert dtw_distance([1, 2, 3, 4], [1, 2, 3, 4]) == 0

    def test_single_cell(self):
        assert dtw_distance([1], [5]) == 4

    def test_hand_enumerated(self):
        # minimum total cost 1 over a path of length 3
        assert dtw_distance([1, 2, 3], [1, 3]) == pytest.approx(1 / 3)

    def test_unnormalized(self):
        config = DtwConfig(normalize=False)
        assert dtw_distance([1, 2, 3], [1, 3], config) == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dtw_distance([], [1])

    def test_infeasible_window(self):
        with pytest.raises(ValueError):
            dtw_distance([1, 2, 3, 4, 5], [1], DtwConfig(window=2))

    def test_window_matches_unwindowed_when_wide(self):
        rng = random.Random(5)
        for _ in range(50):
            a = [rng.randint(1, 8) for _ in range(rng.randint(1, 8))]
            b = [rng.randint(1, 8) for _ in range(rng.randint(1, 8))]
            wide = DtwConfig(window=max(len(a), len(b)))
            assert dtw_distance(a, b, wide) == dtw_distance(a, b)

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(99)
        for _ in range(300):
            a = [rng.randint(1, 8) for _ in range(rng.randint(1, 6))]
            b = [rng.randint(1, 8) for _ in range(rng.randint(1, 6))]
            for normalize in (True, False):
                got = dtw_distance(a, b, DtwConfig(normalize=normalize))
                expected = dtw_enumerate(a, b, normalize=normalize)
                assert Fraction(got).limit_denominator(10**6) == expected
                assert abs(got - float(expected)) <= 1e-12


@settings(max_examples=200)
@given(short_seqs, short_seqs)
def test_symmetry(a, b):
    assert dtw_distance(a, b) == dtw_distance(b, a)


@settings(max_examples=100)
@given(short_seqs)
def test_self_distance_zero(a):
    assert dtw_distance(a, a) == 0


@settings(max_examples=200)
@given(short_seqs, short_seqs)
def test_bounds(a, b):
    d = dtw_distance(a, b)
    assert 0 <= d <= 4
