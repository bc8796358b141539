from fractions import Fraction

import pytest

from orbitscale.errors import (DepthExceeded, InconclusiveAtDepth, NoMatchingIndex, PrecisionCapExceeded,
                               PreconditionFailed)
from orbitscale.logistic import (admissibility_checks, factor_map_check, find_lambda, hofbauer_tower,
                                 kneading_from_cutting_times, kneading_map_of, kneading_sequence_from_Q)
from orbitscale.odometer import KneadingMap, cutting_times

from conftest import doubling_q, exact_cutting_times, fib_q, zero_q

HALF = Fraction(1, 2)


def test_full_family_member_exact():
    tower = hofbauer_tower(4, 60)
    assert tower.bits is None
    assert tower.cutting_times[:51] == tuple(range(1, 52))
    assert exact_cutting_times(4, 51) == list(range(1, 52))
    assert kneading_map_of(4, 50).values == zero_q(50).values


def test_tower_at_three_point_six():
    tower = hofbauer_tower(Fraction(18, 5), 14, bits=128)
    assert tower.cutting_times[:2] == (1, 2)
    assert list(tower.cutting_times) == exact_cutting_times(Fraction(18, 5), 14)
    assert hofbauer_tower(Fraction(18, 5), 14).cutting_times == tower.cutting_times


def test_tower_precondition():
    with pytest.raises(PreconditionFailed):
        hofbauer_tower(2, 10)


def test_tower_geometry_at_four():
    tower = hofbauer_tower(4, 10)
    assert tower.c(1).lower == 1 and tower.c(2).upper == 0
    assert tower.D(1).lower == HALF and tower.D(1).upper == 1
    with pytest.raises(DepthExceeded):
        tower.D(0)


def test_kneading_from_cutting_times():
    assert kneading_from_cutting_times((1, 2, 3, 5, 8, 13)).values == fib_q(5).values
    assert kneading_from_cutting_times((1, 2, 4, 8)).values == doubling_q(3).values
    with pytest.raises(NoMatchingIndex):
        kneading_from_cutting_times((1, 2, 3, 7))
    with pytest.raises(NoMatchingIndex):
        kneading_from_cutting_times((2, 3))


def test_kneading_sequence_lengths():
    for Q in (fib_q(12), doubling_q(10), zero_q(10)):
        K = 8
        assert len(kneading_sequence_from_Q(Q, K)) == cutting_times(Q, K)[K]


def test_admissibility_examples(golden_q):
    fib = admissibility_checks(fib_q(20))
    assert fib.hofbauer_ok and fib.improved_ok and fib.q3 == 5
    golden = admissibility_checks(golden_q)
    assert golden.hofbauer_ok and golden.improved_ok
    # Q(4) = 0 after Q(3) = 1 drops below the required tail
    bad = admissibility_checks(KneadingMap((0, 0, 0, 1, 0, 0, 0)))
    assert not bad.hofbauer_ok


def test_find_feigenbaum():
    p = find_lambda(doubling_q(12), 12)
    assert p.lam.width <= Fraction(1, 10**12)
    assert p.cutting_times == tuple(2**k for k in range(13))
    assert abs(float(p.lam.midpoint) - 3.5699456) < 1e-6


def test_find_zero_map_is_four():
    p = find_lambda(zero_q(12), 12)
    assert p.exact and p.lam.lower == 4


def test_find_fibonacci_round_trip():
    p = find_lambda(fib_q(15), 15)
    assert p.lam.width <= Fraction(1, 10**12)
    assert abs(float(p.lam.midpoint) - 3.9124069991) < 1e-9
    assert kneading_map_of(p.lam, 15, bits=p.bits).values == fib_q(15).values


def test_find_golden_round_trip(golden_q):
    K = 15
    p = find_lambda(golden_q, K, max_bits=512)
    back = kneading_map_of(p.lam, K, bits=p.bits, max_bits=512)
    assert back.values == golden_q.values[:K + 1]


def test_find_rejects_inadmissible_and_deep_requests():
    with pytest.raises(PreconditionFailed):
        find_lambda(KneadingMap((0, 0, 0, 1, 0, 0, 0)), 6)
    with pytest.raises(DepthExceeded):
        find_lambda(fib_q(5), 8)


def test_find_respects_precision_cap():
    with pytest.raises(PrecisionCapExceeded):
        find_lambda(fib_q(20), 20, max_bits=64)


def test_factor_map_at_four():
    r = factor_map_check(4, zero_q(60), 50, 10)
    assert r.orbit_ok and r.orbit_checked == 50
    assert r.passed


def test_factor_map_fibonacci():
    p = find_lambda(fib_q(15), 15)
    r = factor_map_check(p, fib_q(40), 50, 10)
    assert r.orbit_ok and r.nested_ok
    assert r.separated > 0


def test_factor_map_feigenbaum_nested():
    p = find_lambda(doubling_q(12), 12)
    r = factor_map_check(p, doubling_q(30), 50, 8)
    assert r.passed and r.nested_failures == 0


def test_factor_map_detects_wrong_parameter():
    p = find_lambda(fib_q(15), 15)
    r = factor_map_check(p.lam.midpoint + Fraction(1, 1000), fib_q(40), 50, 10, bits=128)
    assert not r.orbit_ok


def test_factor_map_strict_separation():
    p = find_lambda(fib_q(15), 15)
    r = factor_map_check(p, fib_q(40), 50, 10)
    assert r.inconclusive_pairs > 0
    with pytest.raises(InconclusiveAtDepth):
        factor_map_check(p, fib_q(40), 50, 10, strict=True)
