from fractions import Fraction
from functools import cmp_to_key

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from orbitscale.errors import InvalidShape, NonPositiveInput, NotNonIncreasing, RankDropped
from orbitscale.euclid import admissible_matrix, euclid_step, iterate_algorithm, recognize_admissible
from orbitscale.matrices import determinant, identity, inverse_integer, matmul
from orbitscale.reals import MasterBasis, same_lattice, sign_of

R2 = MasterBasis(["sqrt:2"])
BIG = MasterBasis(["sqrt:2", "sqrt:3", "sqrt:5", "sqrt:7"])


def as_float(e):
    with mpmath.workdps(60):
        roots = [mpmath.mpf(1)] + [mpmath.sqrt(int(c.value)) for c in e.basis.constants[1:]]
        return sum(mpmath.mpf(c.numerator) / c.denominator * r for c, r in zip(e.coeffs, roots))


def test_sqrt2_step():
    s = R2.element([-1, 1])
    step = euclid_step((R2.one(), s))
    assert step.d_prime == 2
    assert step.a == (2, 1)
    assert step.x_prime == (s, R2.element([3, -2]))
    assert step.A.entries == ((2, 1), (1, 0))
    assert step.reconstruction_ok()


def test_golden_step(golden_alpha, sqrt5):
    a = golden_alpha
    step = euclid_step((sqrt5.one(), a))
    assert step.a == (1, 1)
    assert step.x_prime == (a, 1 - a)
    assert step.A.entries == ((1, 1), (1, 0))


def test_rational_step_drops_dimension():
    step = euclid_step((R2.rational(2), R2.rational(1)))
    assert step.d_prime == 1
    assert step.a == (2, 1)
    assert step.x_prime == (R2.rational(1),)
    assert step.A.entries == ((2,), (1,))


def test_admissible_matrix_examples():
    assert admissible_matrix((1, 1), (2, 1)).entries == ((1, 1), (1, 0))
    assert admissible_matrix((2, 1), (2,)).entries == ((2,), (1,))
    assert admissible_matrix((3, 2, 1), (3, 1, 2)).entries == ((3, 1, 1), (2, 0, 1), (1, 0, 0))


@pytest.mark.parametrize("a,sigma", [((1, 2), (2, 1)), ((2, 0), (2, 1)), ((2, 1), (1, 2)), ((2, 1), (2, 2))])
def test_admissible_matrix_rejects(a, sigma):
    with pytest.raises(InvalidShape):
        admissible_matrix(a, sigma)


def test_recognize_round_trip():
    m = admissible_matrix((4, 2, 1), (3, 2, 1))
    back = recognize_admissible(m.entries)
    assert back is not None and back.a == (4, 2, 1) and back.sigma == (3, 2, 1)
    assert recognize_admissible(((1, 2), (1, 0))) is None


def test_iterate_golden(golden_alpha, sqrt5):
    steps = iterate_algorithm((sqrt5.one(), golden_alpha), 10)
    assert [s.a for s in steps] == [(1, 1)] * 10
    assert all(s.reconstruction_ok() for s in steps)


def test_iterate_sqrt2():
    steps = iterate_algorithm((R2.one(), R2.element([-1, 1])), 10)
    assert [s.a for s in steps] == [(2, 1)] * 10


def test_rank_one_input_drops():
    with pytest.raises(RankDropped):
        iterate_algorithm((R2.rational(3), R2.rational(1)), 1)


def test_input_checks():
    with pytest.raises(InvalidShape):
        euclid_step((R2.one(),))
    with pytest.raises(NonPositiveInput):
        euclid_step((R2.one(), R2.zero()))
    with pytest.raises(NotNonIncreasing):
        euclid_step((R2.one(), R2.rational(2)))


coeff_rows = st.lists(st.lists(st.integers(0, 4), min_size=5, max_size=5), min_size=5, max_size=5)


@settings(max_examples=40, deadline=None)
@given(coeff_rows, st.integers(2, 5))
def test_step_properties(rows, d):
    xs = [BIG.element([c[0] + 1] + c[1:]) for c in rows[:d]]
    if len(set(xs)) < d:
        return
    xs.sort(key=cmp_to_key(lambda u, v: sign_of(v - u)))
    try:
        steps = iterate_algorithm(xs, 4)
    except RankDropped:
        return
    x = tuple(xs)
    for s in steps:
        assert s.x == x
        assert s.reconstruction_ok()
        assert sign_of(s.x_prime[-1]) == 1
        assert all(sign_of(s.x_prime[i] - s.x_prime[i + 1]) >= 0 for i in range(len(s.x_prime) - 1))
        assert s.x_prime[0] == s.x[-1]
        assert s.a[-1] == 1 and all(u >= v for u, v in zip(s.a, s.a[1:]))
        # a_j from an independent floating evaluation of floor((x_j - x_{j+1}) / x_d)
        with mpmath.workdps(60):
            b = [int(mpmath.floor((as_float(s.x[j]) - as_float(s.x[j + 1])) / as_float(s.x[-1])))
                 for j in range(s.d - 1)] + [1]
        assert s.a == tuple(sum(b[j:]) for j in range(s.d))
        if s.d == s.d_prime:
            assert abs(determinant(s.A.entries)) == 1
            assert matmul(s.A.entries, inverse_integer(s.A.entries)) == identity(s.d)
        again = euclid_step(s.x)
        assert (again.d_prime, again.x_prime, again.a, again.sigma) == (s.d_prime, s.x_prime, s.a, s.sigma)
        x = s.x_prime
    assert same_lattice(list(x), xs)


def test_fraction_entries_are_exact():
    x = (R2.rational(Fraction(7, 3)), R2.element([Fraction(1, 3), Fraction(1, 2)]))
    steps = iterate_algorithm(x, 5)
    assert all(s.reconstruction_ok() for s in steps)
