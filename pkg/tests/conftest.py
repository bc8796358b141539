import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from orbitscale.basicfactor import build_pipeline
from orbitscale.odometer import KneadingMap, kneading_from_vertex_sets
from orbitscale.reals import MasterBasis


ACCEPTANCE_LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    """Record one acceptance criterion as a PASS/FAIL line, including the runtime limit."""
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.1f} s, limit {limit:.0f} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"FAIL criterion {number}: {title} ({elapsed:.2f} s) {type(exc).__name__}: {exc}"
        ACCEPTANCE_LINES.append(line.splitlines()[0])
        print(ACCEPTANCE_LINES[-1])
        raise
    ACCEPTANCE_LINES.append(f"PASS criterion {number}: {title} ({elapsed:.2f} s)")
    print(ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def fib_q(K: int = 40) -> KneadingMap:
    """Q(k) = max(k - 2, 0)."""
    return KneadingMap(tuple(max(k - 2, 0) for k in range(K + 1)))


def doubling_q(K: int = 30) -> KneadingMap:
    """Q(k) = max(k - 1, 0), the period-doubling limit."""
    return KneadingMap(tuple(max(k - 1, 0) for k in range(K + 1)))


def zero_q(K: int = 60) -> KneadingMap:
    return KneadingMap((0,) * (K + 1))


def reference_cutting_times(values, K):
    # the scale recursion written out independently of the package
    S = [1]
    for k in range(1, K + 1):
        S.append(S[-1] + S[values[k]])
    return S


def reference_basic(V, Vp):
    """0/1 matrix from the entrywise rule: identity, plus row min(V) covering v+1 and new columns."""
    v = min(V)
    return np.array([[int(i == j or (i == v and (j not in V or j == v + 1))) for j in sorted(Vp)]
                     for i in sorted(V)], dtype=object)


def reference_product(chain):
    out = reference_basic(chain[0], chain[1])
    for a, b in zip(chain[1:], chain[2:]):
        out = out.dot(reference_basic(a, b))
    return out


def random_factorable(rng, d, dp, limit=60):
    """Strictly decreasing columns with strictly decreasing positive differences, then shuffled."""
    while True:
        cols = [sorted(rng.sample(range(1, 12), d), reverse=True)]
        for _ in range(dp - 1):
            step = sorted(rng.sample(range(1, 12), d), reverse=True)
            cols.insert(0, [c + s for c, s in zip(cols[0], step)])
        if cols[0][0] > limit or cols[0][0] < 5:
            continue
        rest = cols[1:]
        rng.shuffle(rest)
        cols = [cols[0]] + rest
        return tuple(tuple(col[i] for col in cols) for i in range(d))


def exact_cutting_times(lam, N):
    """Cutting times from an exact rational orbit, tracking D_n by the orbit indices of its ends."""
    lam = Fraction(lam)
    c = [Fraction(1, 2)]
    for _ in range(N + 1):
        c.append(lam * c[-1] * (1 - c[-1]))
    ends, cuts = (0, 1), []
    for n in range(1, N + 1):
        lo, hi = sorted((c[ends[0]], c[ends[1]]))
        if lo <= Fraction(1, 2) <= hi:
            cuts.append(n)
            ends = (n + 1, 1)
        else:
            ends = (ends[0] + 1, ends[1] + 1)
    return cuts


@pytest.fixture(scope="session")
def sqrt5():
    return MasterBasis(["sqrt:5"])


@pytest.fixture(scope="session")
def golden_alpha(sqrt5):
    return sqrt5.element([Fraction(-1, 2), Fraction(1, 2)])


@pytest.fixture(scope="session")
def golden_pipeline(sqrt5, golden_alpha):
    return build_pipeline([sqrt5.one(), golden_alpha], levels=4)


@pytest.fixture(scope="session")
def golden_q(golden_pipeline):
    return kneading_from_vertex_sets(golden_pipeline.vertices.vertex_sets)
