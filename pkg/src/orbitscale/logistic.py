"""Certified dynamics of the logistic family x -> lam * x * (1 - x).

The critical orbit c_n = f^n(1/2) is enclosed in fixed-point integer
intervals with outward rounding (or computed exactly with fractions, which
is only practical at lam = 4).  From the signs of c_n - 1/2 we build the
intervals D_n, the cutting times S_k and the kneading map, and bisect on lam
to realize a prescribed kneading map.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (DepthExceeded, InconclusiveAtDepth, NoMatchingIndex, PrecisionCapExceeded,
                     PreconditionFailed, UndecidableMembership, VerificationFailed)
from .odometer import KneadingMap, as_kneading, cutting_times, expansion
from .reals import START_BITS, CertifiedInterval, precision_cap, precision_schedule

HALF = Fraction(1, 2)
# left end of the bisection bracket; f^2(1/2) < 1/2 needs lam > 1 + sqrt(5)
BRACKET_LOW = Fraction(81, 25)
MAX_TOWER = 1 << 20


class _Undecided(Exception):
    def __init__(self, n: int):
        super().__init__(n)
        self.n = n


def as_interval(lam) -> CertifiedInterval:
    if isinstance(lam, CertifiedInterval):
        return lam
    if isinstance(lam, LogisticParameter):
        return lam.lam
    if isinstance(lam, (tuple, list)):
        return CertifiedInterval(Fraction(lam[0]), Fraction(lam[1]))
    v = Fraction(lam)
    return CertifiedInterval(v, v)


@dataclass(frozen=True)
class LogisticParameter:
    lam: CertifiedInterval
    bits: int | None = None          # None: exact rational arithmetic
    cutting_times: tuple[int, ...] | None = None

    @property
    def exact(self) -> bool:
        return self.bits is None and self.lam.lower == self.lam.upper

    def to_json(self) -> dict:
        return {"lower": str(self.lam.lower), "upper": str(self.lam.upper),
                "width": float(self.lam.width), "midpoint": float(self.lam.midpoint),
                "bits": self.bits, "exact": self.exact,
                "cutting_times": None if self.cutting_times is None else list(self.cutting_times)}


class _FixedPoint:
    """Intervals [lo, hi] / 2^bits over integers, rounded outward."""

    def __init__(self, lam: CertifiedInterval, bits: int):
        self.bits = bits
        one = 1 << bits
        self.one = one
        self.half = one >> 1
        self.quarter_sq = one * one >> 2  # g(1/2) at scale 2^(2 bits)
        lo = lam.lower * one
        hi = lam.upper * one
        self.lam = (lo.numerator // lo.denominator, -((-hi.numerator) // hi.denominator))

    def start(self):
        return (self.half, self.half)

    def step(self, x):
        a, b = x
        one, shift = self.one, 2 * self.bits
        ga, gb = a * (one - a), b * (one - b)
        if b <= self.half:
            g = (ga, gb)
        elif a >= self.half:
            g = (gb, ga)
        else:
            g = (min(ga, gb), self.quarter_sq)
        prods = [l * v for l in self.lam for v in g]
        return (min(prods) >> shift, -((-max(prods)) >> shift))

    def side(self, x, n: int) -> int:
        a, b = x
        if b < self.half:
            return -1
        if a > self.half:
            return 1
        if a == b == self.half:
            return 0
        raise _Undecided(n)

    def bounds(self, x) -> tuple[Fraction, Fraction]:
        return Fraction(x[0], self.one), Fraction(x[1], self.one)


class _Exact:
    bits = None

    def __init__(self, lam: CertifiedInterval):
        if lam.lower != lam.upper:
            raise PreconditionFailed("exact arithmetic needs a single rational parameter")
        self.lam = lam.lower

    def start(self):
        return HALF

    def step(self, x):
        return self.lam * x * (1 - x)

    def side(self, x, n: int) -> int:
        return (x > HALF) - (x < HALF)

    def bounds(self, x) -> tuple[Fraction, Fraction]:
        return x, x


@dataclass(frozen=True)
class HofbauerTower:
    """Critical orbit c_0..c_N, sides of 1/2, D_n endpoints and cutting times."""

    lam: CertifiedInterval
    bits: int | None
    N: int
    sides: tuple[int, ...]                 # sides[n] = sign(c_n - 1/2)
    ends: tuple[tuple[int, int], ...]      # ends[n] = orbit indices of D_n's endpoints
    cutting_times: tuple[int, ...]
    _orbit: tuple = field(repr=False, compare=False, default=())
    _arith: object = field(repr=False, compare=False, default=None)

    def c(self, n: int) -> CertifiedInterval:
        lo, hi = self._arith.bounds(self._orbit[n])
        return CertifiedInterval(lo, hi)

    def D(self, n: int) -> CertifiedInterval:
        """Hull of the enclosures of D_n's two endpoints."""
        if not 1 <= n <= self.N:
            raise DepthExceeded(f"D_{n} outside 1..{self.N}")
        i, j = self.ends[n]
        ci, cj = self.c(i), self.c(j)
        return CertifiedInterval(min(ci.lower, cj.lower), max(ci.upper, cj.upper))

    def D_inner(self, n: int) -> tuple[Fraction, Fraction]:
        """Points certainly inside D_n (may be an empty range when endpoints overlap)."""
        i, j = self.ends[n]
        ci, cj = self.c(i), self.c(j)
        if ci.upper <= cj.lower:
            return ci.upper, cj.lower
        if cj.upper <= ci.lower:
            return cj.upper, ci.lower
        return Fraction(1), Fraction(0)

    def nested_in(self, outer: int, inner: int) -> bool | None:
        """Whether D_inner lies in D_outer: True, False, or None when undecided."""
        shared = set(self.ends[outer])
        lo, hi = self.D_inner(outer)
        hull = self.D(outer)
        verdict: bool | None = True
        for e in self.ends[inner]:
            if e in shared:
                continue
            ce = self.c(e)
            if lo <= ce.lower and ce.upper <= hi:
                continue
            if ce.upper < hull.lower or ce.lower > hull.upper:
                return False
            verdict = None
        return verdict

    def to_rows(self) -> list[dict]:
        rows = []
        cuts = set(self.cutting_times)
        for n in range(self.N + 1):
            c = self.c(n)
            row = {"n": n, "c_lower": float(c.lower), "c_upper": float(c.upper),
                   "side": self.sides[n], "cut": n in cuts}
            if n >= 1:
                d = self.D(n)
                row.update(D_lower=float(d.lower), D_upper=float(d.upper))
            rows.append(row)
        return rows


def _arith_for(lam: CertifiedInterval, bits: int | None):
    return _Exact(lam) if bits is None else _FixedPoint(lam, bits)


def _tower_at(lam: CertifiedInterval, N: int, bits: int | None,
              cuts_wanted: int | None = None) -> HofbauerTower:
    ar = _arith_for(lam, bits)
    orbit = [ar.start()]
    sides = [0]

    def extend(n):
        while len(orbit) <= n:
            orbit.append(ar.step(orbit[-1]))
            sides.append(ar.side(orbit[-1], len(orbit) - 1))

    extend(min(N, 2))
    if sides[1] <= 0 or (N >= 2 and sides[2] >= 0):
        raise PreconditionFailed("need f^2(1/2) < 1/2 < f(1/2)")
    ends = [(0, 0), (0, 1)]
    cuts = [1]  # D_1 = [c_0, c_1] contains c_0
    prev_cut = True
    for n in range(2, N + 1):
        if cuts_wanted is not None and len(cuts) >= cuts_wanted:
            N = n - 1
            break
        if prev_cut:
            e = (n, 1)
        else:
            i, j = ends[-1]
            e = (i + 1, j + 1)
        extend(n)
        ends.append(e)
        prev_cut = sides[e[0]] * sides[e[1]] <= 0
        if prev_cut:
            cuts.append(n)
    return HofbauerTower(lam, bits, N, tuple(sides[:N + 1]), tuple(ends), tuple(cuts),
                         tuple(orbit[:N + 1]), ar)


def hofbauer_tower(lam, N: int, bits: int | None = None, max_bits: int | None = None,
                   cuts_wanted: int | None = None) -> HofbauerTower:
    """Tower through D_N; exact at lam = 4 unless ``bits`` is given, else certified.

    With ``cuts_wanted`` the tower stops at the cutting time that completes
    that many, so nothing past it has to be decided.
    """
    interval = as_interval(lam)
    if interval.lower <= 0 or interval.upper > 4:
        raise PreconditionFailed("lambda must lie in (0, 4]")
    if N < 1:
        raise PreconditionFailed("need N >= 1")
    if bits is None and interval.lower == interval.upper == 4:
        return _tower_at(interval, N, None, cuts_wanted)
    cap = precision_cap() if max_bits is None else max_bits
    last = None
    for b in precision_schedule(bits or START_BITS, cap):
        try:
            return _tower_at(interval, N, b, cuts_wanted)
        except _Undecided as exc:
            last = exc.n
    raise UndecidableMembership(f"side of c_{last} undecided at {cap} bits")


def kneading_map_of(lam, K: int, bits: int | None = None, max_bits: int | None = None) -> KneadingMap:
    """Q(0..K) read off from S_k - S_{k-1} = S_{Q(k)}."""
    N = 8
    while True:
        tower = hofbauer_tower(lam, N, bits, max_bits, cuts_wanted=K + 1)
        if len(tower.cutting_times) > K:
            break
        if N >= MAX_TOWER:
            raise DepthExceeded(f"fewer than {K + 1} cutting times up to {N}")
        N *= 2
    return kneading_from_cutting_times(tower.cutting_times[:K + 1])


def kneading_from_cutting_times(S: Sequence[int]) -> KneadingMap:
    if not S or S[0] != 1:
        raise NoMatchingIndex("cutting times must start at 1")
    index = {s: i for i, s in enumerate(S)}
    values = [0]
    for k in range(1, len(S)):
        gap = S[k] - S[k - 1]
        i = index.get(gap)
        if i is None or i > k - 1:
            raise NoMatchingIndex(f"S_{k} - S_{k - 1} = {gap} is not an earlier cutting time")
        values.append(i)
    return KneadingMap(tuple(values))


# ---------------------------------------------------------------------------
# admissibility

@dataclass(frozen=True)
class AdmissibilityReport:
    K: int
    q3: int | None
    hofbauer_violations: tuple[int, ...]
    hofbauer_open: tuple[int, ...]       # equal on the whole available range
    improved_violations: tuple[int, ...]
    improved_checked: int

    @property
    def hofbauer_ok(self) -> bool:
        return not self.hofbauer_violations

    @property
    def improved_ok(self) -> bool:
        return not self.improved_violations

    def to_json(self) -> dict:
        return {"K": self.K, "q3": self.q3, "hofbauer_ok": self.hofbauer_ok,
                "hofbauer_violations": list(self.hofbauer_violations),
                "hofbauer_open": list(self.hofbauer_open),
                "improved_ok": self.improved_ok,
                "improved_violations": list(self.improved_violations),
                "improved_checked": self.improved_checked}


def admissibility_checks(Q, K: int | None = None, q3: int | None = None) -> AdmissibilityReport:
    """Lexicographic condition (Q(k+j))_j >= (Q(Q(Q(k))+j))_j, strict at the first
    difference, and Q(k+1) >= Q(Q(Q(k))+1) + 2 for k >= q3."""
    Q = as_kneading(Q)
    v = Q.values
    K = Q.K if K is None else min(K, Q.K)
    violations, open_ = [], []
    for k in range(1, K):
        base = v[v[v[k]]]
        verdict = 0
        for j in range(1, K - k + 1):
            a, b = v[k + j], v[base + j]
            if a != b:
                verdict = 1 if a > b else -1
                break
        if verdict < 0:
            violations.append(k)
        elif verdict == 0:
            open_.append(k)
    if q3 is None and Q.witness is not None and len(Q.witness) > 3:
        q3 = Q.witness[3]
    improved, checked = [], 0
    if q3 is not None:
        for k in range(q3, K):
            checked += 1
            if v[k + 1] < v[v[v[k]] + 1] + 2:
                improved.append(k)
    return AdmissibilityReport(K, q3, tuple(violations), tuple(open_), tuple(improved), checked)


# ---------------------------------------------------------------------------
# parameter search

def kneading_sequence_from_Q(Q, K: int) -> tuple[int, ...]:
    """Symbols nu_1..nu_{S_K} (1 right of 1/2, 0 left) implied by Q."""
    Q = as_kneading(Q)
    S = cutting_times(Q, K)
    nu = [1]
    for k in range(1, K + 1):
        block = nu[:S[Q(k)]]
        block[-1] = 1 - block[-1]
        nu.extend(block)
    assert len(nu) == S[K]
    return tuple(nu)


def _compare(lam: Fraction, target: Sequence[int], bits: int) -> int:
    """Parity-lexicographic comparison of the critical itinerary with ``target``."""
    ar = _FixedPoint(CertifiedInterval(lam, lam), bits)
    x = ar.start()
    odd = False
    for n, want in enumerate(target, start=1):
        x = ar.step(x)
        s = ar.side(x, n)
        got = {1: 2, 0: 1, -1: 0}[s]  # left < critical < right
        ref = 2 * want
        if got != ref:
            return (1 if got > ref else -1) * (-1 if odd else 1)
        odd ^= want == 1
    return 0


def _compare_certified(lam: Fraction, target: Sequence[int], cap: int) -> int | None:
    for b in precision_schedule(START_BITS, cap):
        try:
            return _compare(lam, target, b)
        except _Undecided:
            continue
    return None


def _probe(lo: Fraction, hi: Fraction, target, cap: int) -> tuple[Fraction, int]:
    # try the midpoint first, then nearby dyadics if it is undecidable
    span = hi - lo
    for frac in (Fraction(1, 2), Fraction(3, 8), Fraction(5, 8), Fraction(1, 4), Fraction(3, 4)):
        mid = lo + span * frac
        c = _compare_certified(mid, target, cap)
        if c is not None:
            return mid, c
    raise UndecidableMembership(f"no decidable probe in [{float(lo)}, {float(hi)}] at {cap} bits")


def find_lambda(Q_target, K: int, tol: Fraction | float = Fraction(1, 10**12),
                max_bits: int | None = None) -> LogisticParameter:
    """Certified lam-interval of width <= tol on which the cutting times are S_0..S_K."""
    Q = as_kneading(Q_target)
    if K > Q.K:
        raise DepthExceeded(f"Q is known only on [0, {Q.K}]")
    report = admissibility_checks(Q, K)
    if report.hofbauer_violations:
        raise PreconditionFailed(f"lexicographic admissibility fails at k = {report.hofbauer_violations[0]}")
    tol = Fraction(tol)
    cap = precision_cap() if max_bits is None else max_bits
    S = cutting_times(Q, K)
    target = kneading_sequence_from_Q(Q, K)

    four = hofbauer_tower(4, S[K])
    if four.cutting_times[:K + 1] == S and S[K] == four.N:
        return LogisticParameter(CertifiedInterval(Fraction(4), Fraction(4)), None, S)

    lo, hi = BRACKET_LOW, Fraction(4)
    if _compare_certified(lo, target, cap) != -1:
        raise PreconditionFailed("target lies below the bisection bracket")
    # the window may be far narrower than tol, so keep halving until we land in it
    floor = Fraction(1, 2 ** (cap // 2))
    found = None
    while hi - lo > floor:
        mid, c = _probe(lo, hi, target, cap)
        if c < 0:
            lo = mid
        elif c > 0:
            hi = mid
        else:
            found = mid
            break
    if found is None:
        raise PrecisionCapExceeded(f"no parameter window wider than 2^-{cap // 2} was found "
                                   f"at the {cap}-bit cap")

    # push both window ends out until the gaps are small against tol and the
    # window itself, then keep to the middle half so the edges stay decidable
    left_out, left_in = lo, found
    right_in, right_out = found, hi

    def gap_ok(inner, outer):
        g = outer - inner
        return g <= tol / 8 and g <= (right_in - left_in) / 8

    while not (gap_ok(left_out, left_in) and gap_ok(right_in, right_out)):
        if not gap_ok(left_out, left_in):
            mid, c = _probe(left_out, left_in, target, cap)
            if c == 0:
                left_in = mid
            else:
                left_out = mid
        if not gap_ok(right_in, right_out):
            mid, c = _probe(right_in, right_out, target, cap)
            if c == 0:
                right_in = mid
            else:
                right_out = mid
    centre = (left_in + right_in) / 2
    half = min(tol / 2, (right_in - left_in) / 4)
    lower, upper = centre - half, centre + half
    enclosure = CertifiedInterval(lower, upper)

    tower = hofbauer_tower(enclosure, S[K], max_bits=cap)
    got = tower.cutting_times[:K + 1]
    if got != S or tower.cutting_times[-1] != S[K]:
        raise VerificationFailed(f"tower re-check gives {got}, expected {S}")
    return LogisticParameter(enclosure, tower.bits, S)


# ---------------------------------------------------------------------------
# factor map

def _sample_words(Q: KneadingMap, length: int, count: int, seed: int) -> list[tuple[int, ...]]:
    """Admissible words with several ones, built digit by digit."""
    rng = random.Random(seed)
    out: list[tuple[int, ...]] = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        digits = [0] * length
        for k in range(length):
            if rng.random() < 0.5 and not any(digits[j] for j in range(Q(k + 1), k)):
                digits[k] = 1
        if sum(digits) >= 2 and tuple(digits) not in out:
            out.append(tuple(digits))
    return out


@dataclass(frozen=True)
class FactorMapReport:
    orbit_checked: int
    orbit_failures: tuple[int, ...]
    nested_words: int
    nested_failures: int
    nested_inconclusive: int
    shrinking_failures: int
    separation_pairs: int
    separated: int
    inconclusive_pairs: int

    @property
    def orbit_ok(self) -> bool:
        return not self.orbit_failures

    @property
    def nested_ok(self) -> bool:
        return self.nested_failures == 0 and self.shrinking_failures == 0

    @property
    def passed(self) -> bool:
        return self.orbit_ok and self.nested_ok

    def to_json(self) -> dict:
        return {"orbit_checked": self.orbit_checked, "orbit_ok": self.orbit_ok,
                "orbit_failures": list(self.orbit_failures[:20]),
                "nested_words": self.nested_words, "nested_ok": self.nested_ok,
                "nested_failures": self.nested_failures,
                "nested_inconclusive": self.nested_inconclusive,
                "shrinking_failures": self.shrinking_failures,
                "separation_pairs": self.separation_pairs, "separated": self.separated,
                "inconclusive_pairs": self.inconclusive_pairs, "passed": self.passed}


def factor_map_check(lam, Q, n_max: int, depth: int, samples: int = 10, seed: int = 0,
                     bits: int | None = None, max_bits: int | None = None,
                     strict: bool = False) -> FactorMapReport:
    """Orbit consistency, nestedness and sampled separation of the D_{sigma(x|m)}.

    Pairs of sampled words whose intervals are not disjoint at any common level
    are counted as inconclusive, or raise InconclusiveAtDepth when ``strict``.
    """
    Q = as_kneading(Q)
    if depth + 1 > Q.K:
        raise DepthExceeded(f"depth {depth} needs Q on [0, {depth + 1}]")
    S = cutting_times(Q)
    length = 1
    while length < Q.K and S[length] <= n_max:
        length += 1
    if S[length] <= n_max:
        raise DepthExceeded(f"n_max = {n_max} needs scales beyond S_{Q.K}")
    words = _sample_words(Q, depth, samples, seed)
    N = max(n_max, max(sum(S[k] for k in range(depth) if w[k]) for w in words) if words else 1, 1)
    param = lam if isinstance(lam, LogisticParameter) else None
    interval = as_interval(lam)
    if bits is None and param is not None and param.bits is not None:
        bits = param.bits
    tower = hofbauer_tower(interval, N, bits, max_bits)

    # (i) c_n lies in D_{sigma(<n>|m)} for every usable m
    failures = []
    for n in range(1, n_max + 1):
        x = expansion(n, Q, length).digits
        cn = tower.c(n)
        total = 0
        for m, d in enumerate(x):
            total += S[m] if d else 0
            if total == 0:
                continue
            D = tower.D(total)
            if cn.upper < D.lower or cn.lower > D.upper:
                failures.append(n)
                break

    # (ii) nested, non-increasing intervals along sampled words
    nested_fail = nested_open = shrink_fail = 0
    slack = Fraction(0) if tower.bits is None else Fraction(4, 1 << tower.bits)
    chains: list[dict[int, CertifiedInterval]] = []
    for w in words:
        by_level: dict[int, CertifiedInterval] = {}
        sigmas: list[int] = []
        total = 0
        for m, d in enumerate(w):
            total += S[m] if d else 0
            if total:
                by_level[m] = tower.D(total)
                if not sigmas or sigmas[-1] != total:
                    sigmas.append(total)
        chains.append(by_level)
        for outer_s, inner_s in zip(sigmas, sigmas[1:]):
            outer, inner = tower.D(outer_s), tower.D(inner_s)
            verdict = tower.nested_in(outer_s, inner_s)
            if verdict is False:
                nested_fail += 1
            elif verdict is None:
                nested_open += 1
            if inner.width > outer.width + slack:
                shrink_fail += 1

    # (iii) sampled separation at a common level
    pairs = separated = 0
    for i in range(len(chains)):
        for j in range(i + 1, len(chains)):
            pairs += 1
            a, b = chains[i], chains[j]
            if any(a[m].upper < b[m].lower or b[m].upper < a[m].lower for m in a.keys() & b.keys()):
                separated += 1
            elif strict:
                raise InconclusiveAtDepth(f"words {i} and {j} are not separated by level {depth}")
    return FactorMapReport(n_max, tuple(failures), len(words), nested_fail, nested_open,
                           shrink_fail, pairs, separated, pairs - separated)
