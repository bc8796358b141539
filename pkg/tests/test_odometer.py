import itertools

import pytest
from hypothesis import given, settings, strategies as st

from orbitscale.errors import CarryUnresolved, DepthExceeded, InvalidMultiplier, MalformedSequence
from orbitscale.odometer import (KneadingMap, OdometerWord, check_witness, cutting_times, expansion,
                                 is_admissible, is_increasing_modulo_intervals, kneading_from_odometer,
                                 kneading_from_vertex_sets, mixed_radix_successor, odometer_successor,
                                 rational_branch_dictionary, word_stats)

from conftest import doubling_q, fib_q, reference_cutting_times, zero_q


def test_kneading_map_validation():
    with pytest.raises(MalformedSequence):
        KneadingMap((1, 0))
    with pytest.raises(MalformedSequence):
        KneadingMap((0, 0, 2))
    assert fib_q(10).bound_ok
    assert not KneadingMap((0, 0, 1)).bound_ok


def test_witness_examples(golden_q, golden_pipeline):
    assert fib_q(12).witness == (0, 1, 3, 5, 7, 9, 11)
    assert is_increasing_modulo_intervals(zero_q(5)) is False
    assert doubling_q(8).witness == tuple(range(9))
    # the pipeline's q sequence certifies its own kneading map
    assert check_witness(golden_q.values, (0,) + golden_pipeline.vertices.q)
    assert not check_witness(fib_q(12).values, (0, 1, 2))
    with pytest.raises(MalformedSequence):
        KneadingMap(zero_q(5).values, given_witness=(0, 1, 3)).witness


def test_kneading_from_vertex_sets():
    assert kneading_from_vertex_sets([{1, 2}, {2, 3}, {3, 4}]).values == (0, 0, 0, 1, 2)
    assert kneading_from_vertex_sets([{1, 2, 3}, {2, 3}, {3, 4}]).values == (0, 0, 0, 0, 2)
    with pytest.raises(MalformedSequence):
        kneading_from_vertex_sets([{1, 3}])
    with pytest.raises(MalformedSequence):
        kneading_from_vertex_sets([{1, 2, 5}, {2, 3}])
    with pytest.raises(MalformedSequence):
        kneading_from_vertex_sets([])


def test_cutting_time_examples():
    assert cutting_times(fib_q(6)) == (1, 2, 3, 5, 8, 13, 21)
    assert cutting_times(doubling_q(5)) == (1, 2, 4, 8, 16, 32)
    assert cutting_times(zero_q(4)) == (1, 2, 3, 4, 5)
    with pytest.raises(DepthExceeded):
        cutting_times(fib_q(3), 5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=30))
def test_cutting_times_match_recursion(raw):
    values = [0] + [r % k for k, r in enumerate(raw, start=1)]
    assert cutting_times(values) == tuple(reference_cutting_times(values, len(values) - 1))


def test_expansion_examples():
    assert expansion(4, fib_q(10), 5).digits == (1, 0, 1, 0, 0)
    assert expansion(0, fib_q(10), 3).digits == (0, 0, 0)
    with pytest.raises(DepthExceeded):
        expansion(8, fib_q(10), 4)


def admissible_values(Q, L):
    seen: dict[int, list] = {}
    S = cutting_times(Q)
    for digits in itertools.product((0, 1), repeat=L):
        if is_admissible(digits, Q):
            seen.setdefault(sum(s for s, x in zip(S, digits) if x), []).append(digits)
    return seen


@pytest.mark.parametrize("Q", [fib_q(12), doubling_q(12), zero_q(12),
                               KneadingMap((0, 0, 0, 1, 1, 2, 3, 3, 4, 5, 6, 7, 8))],
                         ids=["fib", "doubling", "zero", "mixed"])
def test_expansion_matches_brute_force(Q):
    L = 10
    seen = admissible_values(Q, L)
    S = cutting_times(Q)
    assert sorted(seen) == list(range(S[L]))
    for n, words in seen.items():
        assert len(words) == 1
        assert expansion(n, Q, L).digits == words[0]


def test_successor_examples():
    Q = fib_q(10)
    assert odometer_successor(expansion(4, Q, 5), Q).digits == (0, 0, 0, 1, 0)
    assert str(odometer_successor(OdometerWord((0, 0, 0, 1), truncated=True), Q)) == "1001..."
    with pytest.raises(CarryUnresolved):
        odometer_successor(OdometerWord((1, 0, 1, 0), truncated=True), Q)
    with pytest.raises(CarryUnresolved):
        odometer_successor(OdometerWord((0, 1, 0, 1), truncated=True), Q)


def test_word_stats():
    Q = fib_q(10)
    assert word_stats((1, 0, 1, 0, 1), 4, Q) == (1 + 3 + 8, 0)
    assert word_stats((0, 0, 0, 1), 2, Q) == (0, None)
    assert word_stats((0, 0, 0, 1), 3, Q) == (5, 3)
    with pytest.raises(DepthExceeded):
        word_stats((0, 1), 2, Q)


def test_rational_branch_examples():
    Q = kneading_from_odometer((2, 2, 2))
    assert cutting_times(Q) == (1, 2, 4, 8)
    Q = kneading_from_odometer((3, 2))
    assert cutting_times(Q) == (1, 2, 3, 6)
    assert kneading_from_odometer((2,), depth=6).values == doubling_q(6).values
    with pytest.raises(InvalidMultiplier):
        kneading_from_odometer((1,))
    with pytest.raises(InvalidMultiplier):
        kneading_from_odometer(())


def test_mixed_radix_successor():
    assert mixed_radix_successor((0, 0), (3, 2)) == (1, 0)
    assert mixed_radix_successor((2, 0), (3, 2)) == (0, 1)
    assert mixed_radix_successor((2, 1), (3, 2)) is None


def binary_digits(n, L):
    return tuple((n >> k) & 1 for k in range(L))


def test_dyadic_odometer_is_binary_counting():
    Q = doubling_q(12)
    L = 10
    word = OdometerWord((0,) * L)
    for n in range(2 ** L - 1):
        assert word.digits == binary_digits(n, L)
        word = odometer_successor(word, Q)
        word = OdometerWord((word.digits + (0,) * L)[:L])


def test_dyadic_dictionary():
    d = rational_branch_dictionary((2, 2, 2), 512)
    assert d["S"] == [1, 2, 4, 8]
    assert d["scale_match"] and d["single_valued"] and d["injective"]
    assert d["keys"] == 8


@pytest.mark.parametrize("m", [(3, 2), (2, 3, 4), (5,)])
def test_other_dictionaries(m):
    d = rational_branch_dictionary(m, 400)
    assert d["scale_match"] and d["single_valued"] and d["injective"]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([fib_q(20), doubling_q(20), zero_q(20)]), st.integers(0, 2000))
def test_successor_closure(Q, n):
    S = cutting_times(Q)
    n %= S[-1] - 1
    L = next(k for k in range(Q.K + 1) if S[k] > n + 1)
    x = expansion(n, Q, L)
    y = odometer_successor(x, Q)
    assert is_admissible(x.digits, Q) and is_admissible(y.digits, Q)
    assert word_stats(y, len(y.digits) - 1, Q)[0] == n + 1
