import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from orbitscale.errors import DimensionMismatch, NonPositiveMatrix
from orbitscale.euclid import admissible_matrix
from orbitscale.hilbert import (birkhoff_holds, check_contraction, diameter_ratio, log_enclosure,
                                proj_diameter, theta, theta_ratio)
from orbitscale.matrices import matmul, matvec


def encloses(iv, value) -> bool:
    with mpmath.workprec(300):
        lo = mpmath.mpf(iv.lower.numerator) / iv.lower.denominator
        hi = mpmath.mpf(iv.upper.numerator) / iv.upper.denominator
        return lo <= value <= hi


def test_theta_examples():
    assert theta((1, 1), (2, 2)).is_zero
    with mpmath.workprec(300):
        assert encloses(theta((1, 2), (2, 1)).enclosure, mpmath.log(4))
        assert encloses(theta((2, 1), (1, 1)).enclosure, mpmath.log(2))
    with pytest.raises(DimensionMismatch):
        theta((1, 2), (1, 2, 3))


def test_diameter_examples():
    assert proj_diameter(((1, 1), (1, 1))).is_zero
    with mpmath.workprec(300):
        assert encloses(proj_diameter(((2, 1), (1, 1))).enclosure, mpmath.log(2))
    with pytest.raises(NonPositiveMatrix):
        proj_diameter(((1, 0), (1, 1)))


def test_log_enclosure_width():
    iv = log_enclosure(Fraction(7, 3), 200)
    assert iv.width <= Fraction(2, 2**200)
    with mpmath.workprec(400):
        assert encloses(iv, mpmath.log(mpmath.mpf(7) / 3))


def test_contraction_example():
    a = ((1, 1), (1, 0))
    rep = check_contraction(a, a)
    assert rep.product == ((2, 1), (1, 1))
    assert rep.diameter.ratio == 2
    assert rep.bound_pass and rep.passed


def test_contraction_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        check_contraction(((2,), (1,)), ((1, 1),))


def admissible_square(d, rng, a_max):
    tail = sorted((rng.randint(1, a_max) for _ in range(d - 1)), reverse=True)
    a = tuple(tail) + (1,)
    sigma = (d,) + tuple(rng.sample(range(1, d), d - 1))
    return admissible_matrix(a, sigma).entries


def test_contraction_small_exhaustive():
    mats = [admissible_matrix((a1, 1), (2, 1)).entries for a1 in range(1, 11)]
    for a, b in itertools.product(mats, repeat=2):
        rep = check_contraction(a, b)
        assert rep.product_positive and rep.bound_pass
        # independent float evaluation of the bound
        assert math.log(diameter_ratio(matmul(a, b))) <= 2 * math.log(2) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32))
def test_random_admissible_pairs(d, seed):
    rng = random.Random(seed)
    a, b = admissible_square(d, rng, 50), admissible_square(d, rng, 50)
    rep = check_contraction(a, b)
    assert rep.product_positive
    assert rep.bound_pass


positive_vec = st.lists(st.integers(1, 40), min_size=3, max_size=3)


@settings(max_examples=80, deadline=None)
@given(positive_vec, positive_vec, positive_vec)
def test_theta_symmetry_and_triangle(x, y, z):
    assert theta_ratio(x, y) == theta_ratio(y, x)
    assert theta_ratio(x, z) <= theta_ratio(x, y) * theta_ratio(y, z)
    assert theta_ratio(x, [2 * v for v in x]) == 1


matrix3 = st.lists(st.lists(st.integers(1, 30), min_size=3, max_size=3), min_size=3, max_size=3)


@settings(max_examples=50, deadline=None)
@given(matrix3, matrix3)
def test_birkhoff_on_positive_pairs(a, b):
    assert birkhoff_holds(a, b) == "pass"


@settings(max_examples=40, deadline=None)
@given(matrix3, positive_vec, positive_vec)
def test_column_pairs_bound_the_cone(a, y, yp):
    # sampled cone points never exceed the column-pair diameter
    assert theta_ratio(matvec(a, y), matvec(a, yp)) <= diameter_ratio(a)
