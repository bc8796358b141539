"""Multidimensional Euclidean algorithm producing admissible matrices.

One step takes a strictly positive non-increasing vector x of length d,
subtracts consecutive coordinates, reduces each difference modulo the
smallest coordinate x_d and re-sorts the surviving remainders.  The change of
coordinates is a non-negative integer matrix A with x = A x'.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidShape, NonPositiveInput, NotNonIncreasing, RankDropped
from .matrices import Matrix, determinant, matvec
from .reals import GroupElement, floor_ratio, sign_of


@dataclass(frozen=True)
class AdmissibleMatrix:
    d: int
    d_prime: int
    a: tuple[int, ...]
    sigma: tuple[int, ...]  # 1-based images sigma(1..d')
    entries: Matrix

    @property
    def is_square(self) -> bool:
        return self.d == self.d_prime


def admissible_matrix(a: Sequence[int], sigma: Sequence[int]) -> AdmissibleMatrix:
    """Build A(a, sigma): column 1 is ``a``, column j >= 2 is e_1 + ... + e_sigma(j)."""
    a = tuple(int(v) for v in a)
    sigma = tuple(int(v) for v in sigma)
    d, dp = len(a), len(sigma)
    if d < 1 or dp < 1 or dp > d:
        raise InvalidShape(f"bad sizes d={d}, d'={dp}")
    if any(v <= 0 for v in a) or any(a[i] < a[i + 1] for i in range(d - 1)) or a[-1] != 1:
        raise InvalidShape(f"a={a} must be positive, non-increasing and end in 1")
    if sigma[0] != d or len(set(sigma)) != dp or not all(1 <= s <= d for s in sigma):
        raise InvalidShape(f"sigma={sigma} must be injective into 1..{d} with sigma(1) = d")
    rows = []
    for i in range(d):
        row = [a[i]]
        for j in range(1, dp):
            row.append(1 if i < sigma[j] else 0)
        rows.append(tuple(row))
    entries = tuple(rows)
    if d == dp and determinant(entries) not in (1, -1):
        raise InvalidShape("square admissible matrix is not unimodular")
    return AdmissibleMatrix(d, dp, a, sigma, entries)


def recognize_admissible(entries: Matrix) -> AdmissibleMatrix | None:
    """Recover (a, sigma) from a matrix of admissible shape, else None."""
    d = len(entries)
    if d == 0:
        return None
    dp = len(entries[0])
    a = tuple(row[0] for row in entries)
    sigma = [d]
    for j in range(1, dp):
        col = [row[j] for row in entries]
        m = sum(col)
        if col != [1] * m + [0] * (d - m):
            return None
        sigma.append(m)
    try:
        return admissible_matrix(a, sigma)
    except InvalidShape:
        return None


@dataclass(frozen=True)
class AdmissibleStep:
    d: int
    x: tuple[GroupElement, ...]
    d_prime: int
    x_prime: tuple[GroupElement, ...]
    a: tuple[int, ...]
    sigma: tuple[int, ...]
    A: AdmissibleMatrix
    b: tuple[int, ...]
    y: tuple[GroupElement, ...]

    def reconstruction_ok(self) -> bool:
        """Exact coefficient identity x = A x'."""
        return tuple(matvec(self.A.entries, self.x_prime)) == self.x


def _check_input(x: Sequence[GroupElement]) -> None:
    if len(x) < 2:
        raise InvalidShape("the algorithm needs d >= 2")
    for i, v in enumerate(x):
        if sign_of(v) != 1:
            raise NonPositiveInput(f"coordinate {i + 1} is not strictly positive")
    for i in range(len(x) - 1):
        if sign_of(x[i] - x[i + 1]) < 0:
            raise NotNonIncreasing(f"x_{i + 1} < x_{i + 2}")


def euclid_step(x: Sequence[GroupElement]) -> AdmissibleStep:
    x = tuple(x)
    _check_input(x)
    d = len(x)
    last = x[-1]
    b = [0] * d
    y: list[GroupElement] = [last] * d
    b[-1] = 1
    for j in range(d - 1):
        b[j], y[j] = floor_ratio(x[j] - x[j + 1], last)
    a = [sum(b[j:]) for j in range(d)]

    # positive remainders sorted descending, ties to the smaller index
    positive = [j for j in range(d - 1) if not y[j].is_zero()]
    order = _sort_desc(positive, y)
    sigma = (d,) + tuple(j + 1 for j in order)
    x_prime = tuple(y[s - 1] for s in sigma)
    A = admissible_matrix(a, sigma)
    step = AdmissibleStep(d, x, len(sigma), x_prime, tuple(a), sigma, A, tuple(b), tuple(y))
    if not step.reconstruction_ok():
        raise AssertionError("euclid step failed its exact reconstruction")
    return step


def _sort_desc(indices: list[int], y: Sequence[GroupElement]) -> list[int]:
    # insertion sort with certified comparisons; d is small
    out: list[int] = []
    for j in indices:
        pos = len(out)
        for i, k in enumerate(out):
            s = sign_of(y[j] - y[k])
            if s > 0:
                pos = i
                break
        out.insert(pos, j)
    return out


def iterate_algorithm(x0: Sequence[GroupElement], n: int) -> list[AdmissibleStep]:
    """Run ``n`` steps; every step must keep the dimension."""
    steps = []
    x = tuple(x0)
    for k in range(1, n + 1):
        step = euclid_step(x)
        if step.d_prime < step.d:
            raise RankDropped(f"step {k} dropped from dimension {step.d} to {step.d_prime}")
        steps.append(step)
        x = step.x_prime
    return steps
