"""Kneading maps, cutting times and the generalized odometer at finite depth.

A kneading map Q with Q(0) = 0 and Q(k) < k defines scales
S_k = S_{k-1} + S_{Q(k)} (S_0 = 1).  Every n >= 0 has a unique greedy
{0,1}-expansion over these scales; the odometer adds one to it.  Infinite
words are handled through finite prefixes, and a carry that could leave the
prefix is reported instead of guessed.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import CarryUnresolved, DepthExceeded, InvalidMultiplier, MalformedSequence


def _find_witness(values: Sequence[int]) -> tuple[int, ...] | None:
    """Lexicographically least q = (0, 1, q_2, ..., q_N), N >= 2, q_N <= K.

    Closed blocks [q_n, q_{n+1} - 1] map into [q_{n-1}, q_n - 1]; so does the
    open last block [q_N, K].
    """
    K = len(values) - 1
    if K < 2 or values[0] != 0:
        return None

    def fits(lo: int, hi: int, prev: int, cur: int) -> bool:
        return all(prev <= values[k] <= cur - 1 for k in range(lo, hi + 1))

    memo: dict[tuple[int, int], tuple[int, ...] | None] = {}

    def extend(prev: int, cur: int, closed: int) -> tuple[int, ...] | None:
        # q_{n-1} = prev, q_n = cur; ``closed`` counts closed blocks so far
        key = (prev, cur, min(closed, 1))
        if key in memo:
            return memo[key]
        result = None
        for nxt in range(cur + 1, K + 1):
            if not prev <= values[nxt - 1] <= cur - 1:
                break
            tail = extend(cur, nxt, closed + 1)
            if tail is not None:
                result = (nxt,) + tail
                break
        if result is None and closed >= 1 and fits(cur, K, prev, cur):
            result = ()
        memo[key] = result
        return result

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * K + 100))
    try:
        rest = extend(0, 1, 0)
    finally:
        sys.setrecursionlimit(old)
    return None if rest is None else (0, 1) + rest


def check_witness(values: Sequence[int], q: Sequence[int]) -> bool:
    """Does ``q`` (starting 0, 1) certify Q increasing modulo intervals on [0, K]?"""
    K = len(values) - 1
    q = [v for v in q if v <= K]
    if len(q) < 3 or q[0] != 0 or q[1] != 1 or any(a >= b for a, b in zip(q, q[1:])):
        return False
    for n in range(1, len(q)):
        hi = q[n + 1] - 1 if n + 1 < len(q) else K
        if not all(q[n - 1] <= values[k] <= q[n] - 1 for k in range(q[n], hi + 1)):
            return False
    return True


@dataclass(frozen=True)
class KneadingMap:
    """Q(0..K) with an optional externally supplied witness (q_n)."""

    values: tuple[int, ...]
    given_witness: tuple[int, ...] | None = None

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals or vals[0] != 0:
            raise MalformedSequence("Q(0) must be 0")
        for k, v in enumerate(vals[1:], start=1):
            if not 0 <= v <= k - 1:
                raise MalformedSequence(f"Q({k}) = {v} is outside [0, {k - 1}]")
        if self.given_witness is not None:
            object.__setattr__(self, "given_witness", tuple(int(v) for v in self.given_witness))

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def __call__(self, k: int) -> int:
        return self.values[k]

    @property
    def bound_ok(self) -> bool:
        """Q(0) = Q(1) = 0 and Q(k) <= k - 2 for k >= 2."""
        v = self.values
        return len(v) >= 2 and v[1] == 0 and all(v[k] <= k - 2 for k in range(2, len(v)))

    @cached_property
    def witness(self) -> tuple[int, ...] | None:
        if self.given_witness is not None:
            if not check_witness(self.values, self.given_witness):
                raise MalformedSequence("supplied witness does not certify the block condition")
            return tuple(v for v in self.given_witness if v <= self.K)
        return _find_witness(self.values)

    def tail_lower_bound(self) -> int | None:
        """Lower bound for Q(k), k > K, assuming the witness continues; None without one."""
        w = self.witness
        return None if w is None else w[-2]

    def cutting_times(self) -> tuple[int, ...]:
        return cutting_times(self.values)

    def to_json(self) -> dict:
        return {"Q": list(self.values), "witness": None if self.witness is None else list(self.witness),
                "bound_ok": self.bound_ok}


def as_kneading(Q) -> KneadingMap:
    return Q if isinstance(Q, KneadingMap) else KneadingMap(tuple(Q))


def is_increasing_modulo_intervals(Q) -> tuple[int, ...] | bool:
    """The least witness (q_0, q_1, ...) on the available prefix, or False."""
    w = as_kneading(Q).witness
    return False if w is None else w


def cutting_times(Q, K: int | None = None) -> tuple[int, ...]:
    values = as_kneading(Q).values
    K = len(values) - 1 if K is None else K
    if K > len(values) - 1:
        raise DepthExceeded(f"Q is known only on [0, {len(values) - 1}]")
    S = [1]
    for k in range(1, K + 1):
        S.append(S[k - 1] + S[values[k]])
    return tuple(S)


def kneading_from_vertex_sets(vertex_sets: Sequence[Iterable[int]]) -> KneadingMap:
    """Q(k) = least j >= 0 with k in V_{j+1}; ``vertex_sets[0]`` is V_1."""
    V = [frozenset(v) for v in vertex_sets]
    if not V:
        raise MalformedSequence("no vertex sets")
    for j, vj in enumerate(V, start=1):
        if not vj or min(vj) != j or j + 1 not in vj:
            raise MalformedSequence(f"V_{j} must have minimum {j} and contain {j + 1}")
        if j < len(V) and not (vj - {j}) <= V[j]:
            raise MalformedSequence(f"V_{j} minus {j} is not contained in V_{j + 1}")
    first: dict[int, int] = {}
    for j, vj in enumerate(V):
        for k in vj:
            first.setdefault(k, j)
    K = 0
    while K + 1 in first:
        K += 1
    return KneadingMap((0,) + tuple(first[k] for k in range(1, K + 1)))


def kneading_from_odometer(multipliers: Sequence[int], depth: int | None = None) -> KneadingMap:
    """Contiguous-block kneading map whose scales pass through m_1, m_1 m_2, ...

    With t_1 = m_1 - 1 and t_{i+1} = t_i + m_{i+1} - 1, Q vanishes on [0, t_1]
    and equals t_i on [t_i + 1, t_{i+1}].  When ``depth`` exceeds the last
    block, the multiplier list is repeated cyclically.
    """
    m = [int(v) for v in multipliers]
    if not m:
        raise InvalidMultiplier("empty multiplier list")
    for v in m:
        if v < 2:
            raise InvalidMultiplier(f"multiplier {v} < 2")
    values = [0] * m[0]
    t = m[0] - 1
    i = 1
    while True:
        if depth is None and i >= len(m):
            break
        if depth is not None and len(values) > depth:
            break
        mi = m[i % len(m)]
        values.extend([t] * (mi - 1))
        t += mi - 1
        i += 1
    if depth is not None:
        values = values[:depth + 1]
    return KneadingMap(tuple(values))


# ---------------------------------------------------------------------------
# words

@dataclass(frozen=True)
class OdometerWord:
    """Digits x_0..x_{L-1}; ``truncated`` means the tail beyond L is unknown."""

    digits: tuple[int, ...]
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(v) for v in self.digits))
        if any(v not in (0, 1) for v in self.digits):
            raise MalformedSequence("odometer digits must be 0 or 1")

    def prefix(self, n: int) -> tuple[int, ...]:
        return self.digits[:n]

    def __str__(self) -> str:
        return "".join(map(str, self.digits)) + ("..." if self.truncated else "")


def is_admissible(x, Q) -> bool:
    """x_k = 1 forces x_j = 0 for every j in [Q(k+1), k-1]."""
    Q = as_kneading(Q)
    digits = x.digits if isinstance(x, OdometerWord) else tuple(x)
    for k, v in enumerate(digits):
        if v != 1:
            continue
        if k + 1 > Q.K:
            raise DepthExceeded(f"Q({k + 1}) is needed to check digit {k}")
        if any(digits[j] for j in range(Q(k + 1), k)):
            return False
    return True


def expansion(n: int, Q, length: int | None = None) -> OdometerWord:
    """Greedy expansion of n over the scales; finite support, ``length`` digits."""
    Q = as_kneading(Q)
    S = cutting_times(Q)
    L = Q.K if length is None else length
    if L > Q.K:
        raise DepthExceeded(f"length {L} exceeds the known scales S_0..S_{Q.K}")
    if n < 0:
        raise ValueError("n must be non-negative")
    if n >= S[L]:
        raise DepthExceeded(f"n = {n} needs scales beyond S_{L - 1}")
    digits = [0] * L
    rest = n
    k = L - 1
    while rest:
        while S[k] > rest:
            k -= 1
        digits[k] = 1
        rest -= S[k]
        k -= 1
    return OdometerWord(tuple(digits))


def word_stats(x, n: int, Q) -> tuple[int, int | None]:
    """(sum_{k<=n} x_k S_k, least k with x_k = 1 or None if the prefix is zero)."""
    digits = x.digits if isinstance(x, OdometerWord) else tuple(x)
    if n >= len(digits):
        raise DepthExceeded(f"index {n} beyond the word length {len(digits)}")
    S = cutting_times(Q, n)
    total = sum(S[k] for k in range(n + 1) if digits[k])
    first = next((k for k in range(n + 1) if digits[k]), None)
    return total, first


def odometer_successor(x: OdometerWord, Q) -> OdometerWord:
    Q = as_kneading(Q)
    L = len(x.digits)
    S = cutting_times(Q)
    n = sum(S[k] for k, v in enumerate(x.digits) if v)
    if not x.truncated:
        length = L
        while length <= Q.K and n + 1 >= S[length]:
            length += 1
        if length > Q.K:
            raise DepthExceeded(f"successor of {n} needs scales beyond S_{Q.K}")
        return expansion(n + 1, Q, length)
    if n + 1 >= S[L]:
        raise CarryUnresolved(f"carry leaves the {L}-digit prefix")
    new = expansion(n + 1, Q, L).digits
    top_old = max((k for k, v in enumerate(x.digits) if v), default=-1)
    top_new = max(k for k, v in enumerate(new) if v)
    if top_new > top_old:
        # an unseen tail digit at position k >= L forbids ones in [Q(k+1), k-1]
        candidates = [Q(k + 1) for k in range(L, Q.K)]
        bound = Q.tail_lower_bound()
        if bound is None:
            raise CarryUnresolved("no witness to bound Q beyond the known prefix")
        candidates.append(bound)
        if any(top_old < c <= top_new for c in candidates) or bound <= top_new:
            raise CarryUnresolved("the carry may interact with the unknown tail")
    return OdometerWord(new, truncated=True)


def mixed_radix_successor(digits: Sequence[int], radices: Sequence[int]) -> tuple[int, ...] | None:
    """Add one in the (m_1, m_2, ...) adding machine; None on overflow of the prefix."""
    out = list(digits)
    for i, r in enumerate(radices[:len(out)]):
        if out[i] + 1 < r:
            out[i] += 1
            return tuple(out)
        out[i] = 0
    return None


def rational_branch_dictionary(multipliers: Sequence[int], n_max: int, blocks: int | None = None) -> dict:
    """Orbit dictionary between the Q-odometer and the mixed-radix adding machine.

    Orbit point n is truncated to the first ``blocks`` mixed-radix digits on one
    side and to the matching t_blocks odometer digits on the other.
    """
    m = [int(v) for v in multipliers]
    blocks = len(m) if blocks is None else blocks
    radices = [m[i % len(m)] for i in range(blocks)]
    depth = sum(r - 1 for r in radices)  # t_blocks
    K = depth
    while True:
        Q = kneading_from_odometer(m, depth=K)
        if cutting_times(Q)[-1] > n_max:
            break
        K += len(m)
    S = cutting_times(Q)
    forward: dict[tuple, set] = {}
    backward: dict[tuple, set] = {}
    word = OdometerWord((0,))
    radix_word = (0,) * blocks
    for n in range(n_max + 1):
        key = (word.digits + (0,) * depth)[:depth]
        forward.setdefault(key, set()).add(radix_word)
        backward.setdefault(radix_word, set()).add(key)
        if n < n_max:
            word = odometer_successor(word, Q)
            nxt = mixed_radix_successor(radix_word, radices)
            radix_word = nxt if nxt is not None else (0,) * blocks
    product = 1
    for r in radices:
        product *= r
    return {
        "Q": list(Q.values[:depth + 1]),
        "S": list(S[:depth + 1]),
        "radices": radices,
        "scale_match": S[depth] == product,
        "single_valued": all(len(v) == 1 for v in forward.values()),
        "injective": all(len(v) == 1 for v in backward.values()),
        "keys": len(forward),
        "n_max": n_max,
    }
