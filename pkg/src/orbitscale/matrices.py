"""Small exact integer/rational matrix helpers.

Matrices are tuples of row tuples.  Entries are Python ints (or Fractions for
the rational solver), so nothing ever overflows.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = tuple[tuple[int, ...], ...]


def as_matrix(rows: Sequence[Sequence[int]]) -> Matrix:
    out = tuple(tuple(int(v) for v in row) for row in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if shape(a)[1] != shape(b)[0]:
        raise ValueError(f"cannot multiply {shape(a)} by {shape(b)}")
    cols = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def matvec(m: Matrix, v: Sequence):
    """Multiply an integer matrix by a vector of anything supporting + and int *."""
    out = []
    for row in m:
        acc = None
        for coef, x in zip(row, v):
            if coef == 0:
                continue
            term = x * coef
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else 0 * v[0])
    return out


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def column(m: Matrix, j: int) -> tuple[int, ...]:
    return tuple(row[j] for row in m)


def determinant(m: Matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    if n == 0:
        return 1
    if any(len(r) != n for r in m):
        raise ValueError("determinant of a non-square matrix")
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse_integer(m: Matrix) -> Matrix:
    """Inverse of a unimodular integer matrix (raises if not unimodular)."""
    n = len(m)
    det = determinant(m)
    if det not in (1, -1):
        raise ValueError("matrix is not unimodular")
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for c in range(n):
        p = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [v / piv for v in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    out = tuple(tuple(int(v) for v in row[n:]) for row in a)
    assert all(v.denominator == 1 for row in a for v in row[n:])
    return out


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def hermite_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form; returns the non-zero rows.

    The returned rows generate the same lattice as the input rows, pivots are
    positive and entries above each pivot are reduced into [0, pivot).
    """
    a = [list(r) for r in rows]
    if not a:
        return []
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        if r == m:
            break
        for i in range(r + 1, m):
            if a[i][c] == 0:
                continue
            p, q = a[r][c], a[i][c]
            g, x, y = xgcd(p, q)
            pg, qg = p // g, q // g
            new_r = [x * u + y * v for u, v in zip(a[r], a[i])]
            new_i = [qg * u - pg * v for u, v in zip(a[r], a[i])]
            a[r], a[i] = new_r, new_i
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-v for v in a[r]]
        piv = a[r][c]
        for i in range(r):
            f = a[i][c] // piv
            if f:
                a[i] = [u - f * v for u, v in zip(a[i], a[r])]
        r += 1
    return a[:r]


def solve_rational(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Solve sum_i t_i * columns[i] = target exactly.

    Returns the unique solution as a list of Fractions, or None when the system
    is inconsistent.  The columns must be linearly independent.
    """
    k = len(columns)
    n = len(target)
    aug = [[Fraction(columns[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    row = 0
    pivots = []
    for c in range(k):
        p = next((i for i in range(row, n) if aug[i][c] != 0), None)
        if p is None:
            raise ValueError("columns are linearly dependent")
        aug[row], aug[p] = aug[p], aug[row]
        piv = aug[row][c]
        aug[row] = [v / piv for v in aug[row]]
        for i in range(n):
            if i != row and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
        pivots.append(c)
        row += 1
    if any(aug[i][k] != 0 for i in range(row, n)):
        return None
    return [aug[i][k] for i in range(k)]
