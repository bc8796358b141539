"""Truncated direct limits of ordered groups Z^{d_n} with optional states."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, LevelOutOfRange, NoStateVectors, Undecidable, VerificationFailed
from .hilbert import theta_ratio, diameter_ratio
from .matrices import Matrix, as_matrix, identity, matmul, matvec, shape, transpose
from .reals import GroupElement, evaluate, sign_of


class Positivity(enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class LimitElement:
    level: int
    vector: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(int(v) for v in self.vector))


def _dot(v: Sequence[int], xs: Sequence[GroupElement]) -> GroupElement:
    acc = xs[0] * 0
    for c, x in zip(v, xs):
        if c:
            acc = acc + x * c
    return acc


class DirectLimitGroup:
    """lim (Z^{d_n}, L_n) for levels start .. start + len(dims) - 1.

    ``connecting[i]`` is the d_{n+1} x d_n matrix L_n for n = start + i.  When
    state vectors are given they must satisfy x^(n) = L_n^T x^(n+1) exactly.
    """

    def __init__(self, dims: Sequence[int], connecting: Sequence[Matrix],
                 state_vectors: Sequence[Sequence[GroupElement]] | None = None,
                 start: int = 0, unit: LimitElement | None = None):
        self.dims = tuple(int(d) for d in dims)
        self.connecting = tuple(as_matrix(m) for m in connecting)
        self.start = start
        if len(self.connecting) != len(self.dims) - 1:
            raise DimensionMismatch("need exactly one connecting matrix between consecutive levels")
        for i, m in enumerate(self.connecting):
            if shape(m) != (self.dims[i + 1], self.dims[i]):
                raise DimensionMismatch(f"L_{start + i} has shape {shape(m)}, expected "
                                        f"{(self.dims[i + 1], self.dims[i])}")
            if any(v < 0 for row in m for v in row):
                raise DimensionMismatch(f"L_{start + i} has a negative entry")
        self.state_vectors = None
        if state_vectors is not None:
            sv = tuple(tuple(v) for v in state_vectors)
            if len(sv) != len(self.dims) or any(len(v) != d for v, d in zip(sv, self.dims)):
                raise DimensionMismatch("state vectors must match the level dimensions")
            for i, m in enumerate(self.connecting):
                pulled = tuple(matvec(transpose(m), sv[i + 1]))
                if pulled != sv[i]:
                    raise VerificationFailed(f"state vectors violate x^(n) = L_n^T x^(n+1) at n = {start + i}")
            self.state_vectors = sv
        self.unit = unit

    @property
    def last_level(self) -> int:
        return self.start + len(self.dims) - 1

    def dim(self, level: int) -> int:
        self._check_level(level)
        return self.dims[level - self.start]

    def _check_level(self, level: int) -> None:
        if not self.start <= level <= self.last_level:
            raise LevelOutOfRange(f"level {level} outside {self.start}..{self.last_level}")

    def element(self, level: int, vector: Sequence[int]) -> LimitElement:
        if len(vector) != self.dim(level):
            raise DimensionMismatch(f"level {level} has dimension {self.dim(level)}")
        return LimitElement(level, tuple(vector))

    def composite(self, n: int, m: int) -> Matrix:
        """L_{m-1} ... L_n (identity when m = n)."""
        self._check_level(n)
        self._check_level(m)
        if m < n:
            raise LevelOutOfRange("cannot push an element backwards")
        out = identity(self.dim(n))
        for k in range(n, m):
            out = matmul(self.connecting[k - self.start], out)
        return out

    def push_forward(self, e: LimitElement, m: int) -> LimitElement:
        self._check_level(e.level)
        self._check_level(m)
        if m < e.level:
            raise LevelOutOfRange("cannot push an element backwards")
        v = e.vector
        for k in range(e.level, m):
            v = tuple(matvec(self.connecting[k - self.start], v))
        return LimitElement(m, v)

    def add(self, e: LimitElement, f: LimitElement, scale_f: int = 1) -> LimitElement:
        top = max(e.level, f.level)
        u, w = self.push_forward(e, top), self.push_forward(f, top)
        return LimitElement(top, tuple(a + scale_f * b for a, b in zip(u.vector, w.vector)))

    def state_value(self, e: LimitElement) -> GroupElement:
        if self.state_vectors is None:
            raise NoStateVectors("this group carries no state vectors")
        self._check_level(e.level)
        return _dot(e.vector, self.state_vectors[e.level - self.start])

    def limit_equals(self, e: LimitElement, f: LimitElement) -> bool:
        top = self.last_level
        u, w = self.push_forward(e, top), self.push_forward(f, top)
        if u.vector == w.vector:
            return True
        if self.state_vectors is not None and not (self.state_value(u) - self.state_value(w)).is_zero():
            return False
        raise Undecidable("vectors differ at the last level but no state separates them")

    def _pushforward_certificate(self, e: LimitElement) -> Positivity | None:
        for m in range(e.level, self.last_level + 1):
            v = self.push_forward(e, m).vector
            if all(c == 0 for c in v):
                return Positivity.ZERO
            if all(c >= 0 for c in v):
                return Positivity.POSITIVE
            if all(c <= 0 for c in v):
                return Positivity.NEGATIVE
        return None

    def is_positive(self, e: LimitElement) -> Positivity:
        """Sign of e in the limit order: state sign, cross-checked by pushforward."""
        cert = self._pushforward_certificate(e)
        if self.state_vectors is None:
            if cert is None:
                raise Undecidable("no coordinatewise sign within the available levels")
            return cert
        s = sign_of(self.state_value(e))
        by_state = {1: Positivity.POSITIVE, 0: Positivity.ZERO, -1: Positivity.NEGATIVE}[s]
        if cert is not None and cert is not by_state:
            raise VerificationFailed(f"state sign {by_state.value} contradicts pushforward {cert.value}")
        return by_state

    def state_direction_bound(self, n: int, m: int) -> tuple[float, float]:
        """Hilbert distance between the pulled-back cone direction and x^(n),
        together with the contraction bound D((L_{m-1}...L_n)^T)."""
        if self.state_vectors is None:
            raise NoStateVectors("this group carries no state vectors")
        comp_t = transpose(self.composite(n, m))
        pulled = matvec(comp_t, [1] * self.dim(m))
        state = [evaluate(x, 200).midpoint for x in self.state_vectors[n - self.start]]
        dist = theta_ratio(pulled, state)
        bound = diameter_ratio(comp_t)
        return math.log(float(dist)), math.log(float(bound))

    def to_json(self) -> dict:
        out = {"start": self.start, "dims": list(self.dims),
               "connecting": [[list(r) for r in m] for m in self.connecting]}
        if self.state_vectors is not None:
            out["state_vectors"] = [[[str(c) for c in x.coeffs] for x in level]
                                    for level in self.state_vectors]
        if self.unit is not None:
            out["unit"] = {"level": self.unit.level, "vector": list(self.unit.vector)}
        return out


def group_of_diagram(diagram) -> DirectLimitGroup:
    """Ordered group of a Bratteli diagram: connecting maps M_n^T, unit [1, 0]."""
    mats = diagram.transition_matrices()
    dims = [len(diagram.levels[0])] + [len(m[0]) for m in mats]
    return DirectLimitGroup(dims, [transpose(m) for m in mats], start=0,
                            unit=LimitElement(0, (1,) * dims[0]))

