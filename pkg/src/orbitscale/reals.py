"""Exact elements of finitely generated subgroups of the reals.

An element is a rational coefficient vector over a :class:`MasterBasis` of
symbolic constants (rationals, square roots of rationals, or user supplied
digit oracles).  Equality is exact on coefficients; order questions are
answered by certified dyadic enclosures whose precision is doubled on demand
up to a configurable cap.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Callable, Iterable, Sequence

from .errors import DependentBasis, InvalidInput, PrecisionCapExceeded
from .matrices import hermite_rows, solve_rational

START_BITS = 128
DEFAULT_CAP = 4096
DEFAULT_HEIGHT = 1000


def precision_cap() -> int:
    """Working precision cap in bits (env ORBITSCALE_PREC_CAP overrides)."""
    raw = os.environ.get("ORBITSCALE_PREC_CAP")
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise InvalidInput(f"ORBITSCALE_PREC_CAP must be an integer, got {raw!r}") from exc
        if value < 8:
            raise InvalidInput("ORBITSCALE_PREC_CAP must be at least 8")
        return value
    return DEFAULT_CAP


def precision_schedule(start: int = START_BITS, cap: int | None = None) -> Iterable[int]:
    """Yield start, 2*start, ... up to and including the cap."""
    cap = precision_cap() if cap is None else cap
    bits = min(start, cap)
    while True:
        yield bits
        if bits >= cap:
            return
        bits = min(2 * bits, cap)


def floor_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(x * (1 << bits)), 1 << bits)


def ceil_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval [lower, upper] with dyadic endpoints."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("empty interval")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper

    def sign(self) -> int | None:
        """Certified sign, or None when the interval straddles or touches 0 ambiguously."""
        if self.lower > 0:
            return 1
        if self.upper < 0:
            return -1
        if self.lower == self.upper == 0:
            return 0
        return None

    def __repr__(self) -> str:
        return f"[{float(self.lower)!r}, {float(self.upper)!r}]"


# ---------------------------------------------------------------------------
# symbolic constants

OracleProcedure = Callable[[int], tuple[Fraction, Fraction]]
_ORACLES: dict[str, OracleProcedure] = {}


def register_oracle(name: str, procedure: OracleProcedure) -> None:
    """Register a digit oracle.

    ``procedure(bits)`` must return ``(lo, hi)`` rationals with the true value
    in ``[lo, hi]`` and ``hi - lo <= 2**(1 - bits)``.
    """
    if not name or ":" in name:
        raise InvalidInput(f"bad oracle name {name!r}")
    _ORACLES[name] = procedure


def mpf_raw_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def _mpmath_oracle(attr: str) -> OracleProcedure:
    def procedure(bits: int) -> tuple[Fraction, Fraction]:
        from mpmath import iv

        old = iv.prec
        try:
            iv.prec = bits + 16
            v = getattr(iv, attr)
            if callable(v):
                v = v(1)
            lo_raw, hi_raw = v._mpi_
            return mpf_raw_to_fraction(lo_raw), mpf_raw_to_fraction(hi_raw)
        finally:
            iv.prec = old

    return procedure


register_oracle("pi", _mpmath_oracle("pi"))
register_oracle("e", _mpmath_oracle("exp"))


@dataclass(frozen=True)
class SymbolicConstant:
    """A real constant: ``rat`` (exact rational), ``sqrt`` (square root of a
    positive rational) or ``oracle`` (named digit oracle)."""

    kind: str
    value: Fraction | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind == "rat":
            if self.value is None:
                raise InvalidInput("rat constant needs a value")
        elif self.kind == "sqrt":
            if self.value is None or self.value <= 0:
                raise InvalidInput("sqrt constant needs a positive rational")
        elif self.kind == "oracle":
            if self.name is None:
                raise InvalidInput("oracle constant needs a name")
        else:
            raise InvalidInput(f"unknown constant kind {self.kind!r}")

    @classmethod
    def rational(cls, value) -> SymbolicConstant:
        return cls("rat", Fraction(value))

    @classmethod
    def sqrt(cls, value) -> SymbolicConstant:
        return cls("sqrt", Fraction(value))

    @classmethod
    def oracle(cls, name: str) -> SymbolicConstant:
        return cls("oracle", name=name)

    @classmethod
    def parse(cls, text: str) -> SymbolicConstant:
        kind, sep, rest = text.strip().partition(":")
        if not sep:
            raise InvalidInput(f"constant {text!r} must look like kind:value")
        if kind in ("rat", "sqrt"):
            try:
                value = Fraction(rest)
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidInput(f"bad rational in {text!r}") from exc
            return cls(kind, value)
        if kind == "oracle":
            return cls("oracle", name=rest)
        raise InvalidInput(f"unknown constant kind in {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "oracle":
            return f"oracle:{self.name}"
        return f"{self.kind}:{self.value}"

    @property
    def is_exact(self) -> bool:
        return self.kind == "rat"

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational bounds of width at most 2**-bits."""
        return _enclosure(self, bits)


@lru_cache(maxsize=4096)
def _enclosure(c: SymbolicConstant, bits: int) -> tuple[Fraction, Fraction]:
    if c.kind == "rat":
        return c.value, c.value
    if c.kind == "sqrt":
        p, q = c.value.numerator, c.value.denominator
        scaled = p << (2 * bits)
        s = math.isqrt(scaled // q)
        lo = Fraction(s, 1 << bits)
        exact = s * s * q == scaled
        return lo, (lo if exact else Fraction(s + 1, 1 << bits))
    proc = _ORACLES.get(c.name)
    if proc is None:
        raise InvalidInput(f"no oracle registered under {c.name!r}")
    lo, hi = proc(bits + 1)
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo <= hi or hi - lo > Fraction(1, 1 << bits):
        raise InvalidInput(f"oracle {c.name!r} broke its width contract at {bits} bits")
    return lo, hi


# ---------------------------------------------------------------------------
# basis and elements

def _squarefree_part(n: int, limit: int = 10**7) -> int | None:
    """Square-free kernel of n by trial division, None if n is too large."""
    out = 1
    d = 2
    while d * d <= n:
        if d > limit:
            return None
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e % 2:
            out *= d
        d += 1 if d == 2 else 2
    return out * n


class MasterBasis:
    """Ordered list of symbolic constants with the constant 1 at index 0.

    The basis is declared rationally independent.  Construction runs a
    relation check: square roots are compared by square-free kernels, and when
    oracle constants are present an integer-relation search (PSLQ) bounded by
    ``height`` looks for candidate relations, each of which is then tested
    against certified enclosures.
    """

    def __init__(self, constants: Sequence[SymbolicConstant | str] = (), *,
                 check_relations: bool = True, height: int = DEFAULT_HEIGHT):
        consts = [SymbolicConstant.parse(c) if isinstance(c, str) else c for c in constants]
        one = SymbolicConstant.rational(1)
        if not consts or consts[0] != one:
            consts.insert(0, one)
        self.constants: tuple[SymbolicConstant, ...] = tuple(consts)
        self.height = height
        self.independence_declared = True
        if check_relations:
            self._check_relations()

    def __len__(self) -> int:
        return len(self.constants)

    def __repr__(self) -> str:
        return f"MasterBasis({[c.label for c in self.constants]})"

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.constants]

    def _check_relations(self) -> None:
        kernels: dict[int, int] = {}
        numeric_needed = False
        for i, c in enumerate(self.constants):
            if i == 0:
                continue
            if c.kind == "rat":
                raise DependentBasis(f"{c.label} is a rational multiple of 1")
            if c.kind == "sqrt":
                k = _squarefree_part(c.value.numerator * c.value.denominator)
                if k is None:
                    numeric_needed = True
                    continue
                if k == 1:
                    raise DependentBasis(f"{c.label} is rational")
                if k in kernels:
                    other = self.constants[kernels[k]].label
                    raise DependentBasis(f"{c.label} is a rational multiple of {other}")
                kernels[k] = i
            else:
                numeric_needed = True
        if numeric_needed:
            self._numeric_relation_check()

    def _numeric_relation_check(self) -> None:
        import mpmath

        bits = 256
        with mpmath.workprec(bits):
            values = []
            for c in self.constants:
                lo, hi = c.enclosure(bits)
                mid = (lo + hi) / 2
                values.append(mpmath.mpf(mid.numerator) / mid.denominator)
            rel = mpmath.pslq(values, maxcoeff=self.height, maxsteps=10**5)
        if rel is None:
            return
        probe = GroupElement(self, [Fraction(r) for r in rel])
        if probe.is_zero():
            return
        iv = evaluate(probe, 2 * bits, cap=max(2 * bits, precision_cap()))
        if iv.contains(0):
            raise DependentBasis(f"integer relation {list(rel)} among {self.labels}")

    def element(self, coeffs: Sequence) -> GroupElement:
        return GroupElement(self, coeffs)

    def one(self) -> GroupElement:
        return self.unit(0)

    def unit(self, i: int) -> GroupElement:
        return GroupElement(self, [int(j == i) for j in range(len(self))])

    def zero(self) -> GroupElement:
        return GroupElement(self, [0] * len(self))

    def rational(self, value) -> GroupElement:
        return GroupElement(self, [Fraction(value)] + [0] * (len(self) - 1))


class GroupElement:
    """Immutable exact element: sum_i coeffs[i] * basis.constants[i]."""

    __slots__ = ("basis", "coeffs", "_hash")

    def __init__(self, basis: MasterBasis, coeffs: Sequence):
        coeffs = tuple(Fraction(c) for c in coeffs)
        if len(coeffs) != len(basis):
            raise InvalidInput(f"expected {len(basis)} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, key, value):
        raise AttributeError("GroupElement is immutable")

    def _coerce(self, other) -> GroupElement | None:
        if isinstance(other, GroupElement):
            if other.basis is not self.basis:
                raise InvalidInput("elements live over different bases")
            return other
        if isinstance(other, (int, Fraction)):
            return self.basis.rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GroupElement(self.basis, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GroupElement(self.basis, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GroupElement(self.basis, [-a for a in self.coeffs])

    def __mul__(self, k):
        if isinstance(k, (int, Fraction)):
            return GroupElement(self.basis, [a * k for a in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, GroupElement):
            return other.basis is self.basis and other.coeffs == self.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == self.basis.rational(other).coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((id(self.basis), self.coeffs)))
        return self._hash

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return sign_of(o - self) > 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return sign_of(self - o) > 0

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 or k.is_exact for c, k in zip(self.coeffs, self.basis.constants))

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise InvalidInput("element is irrational")
        return sum((c * k.value for c, k in zip(self.coeffs, self.basis.constants) if c), Fraction(0))

    def __float__(self) -> float:
        return float(evaluate(self, 64).midpoint)

    def __repr__(self) -> str:
        terms = []
        for c, k in zip(self.coeffs, self.basis.constants):
            if c:
                terms.append(f"{c}" if k.label == "rat:1" else f"{c}*{k.label}")
        return "GroupElement(" + (" + ".join(terms) or "0") + ")"


# ---------------------------------------------------------------------------
# certified evaluation and comparisons

def evaluate(e: GroupElement, bits: int, cap: int | None = None) -> CertifiedInterval:
    """Dyadic enclosure of ``e`` with width at most 2**(1 - bits)."""
    cap = precision_cap() if cap is None else cap
    if bits < 1:
        raise InvalidInput("bits must be positive")
    if bits > cap:
        raise PrecisionCapExceeded(f"{bits} bits requested, cap is {cap}")
    if e.is_zero():
        return CertifiedInterval(Fraction(0), Fraction(0))
    mass = sum(abs(c) for c, k in zip(e.coeffs, e.basis.constants) if c and not k.is_exact)
    inner = bits + 2 + (math.ceil(mass).bit_length() if mass else 0)
    lo = hi = Fraction(0)
    for c, k in zip(e.coeffs, e.basis.constants):
        if not c:
            continue
        a, b = k.enclosure(inner)
        if c > 0:
            lo += c * a
            hi += c * b
        else:
            lo += c * b
            hi += c * a
    grid = bits + 1
    out = CertifiedInterval(floor_dyadic(lo, grid), ceil_dyadic(hi, grid))
    assert out.width <= Fraction(2) ** (1 - bits)
    return out


# Short public alias; ``evaluate`` avoids shadowing the builtin inside this module.
eval = evaluate  # noqa: A001


def sign_of(e: GroupElement, cap: int | None = None) -> int:
    """Exact zero test on coefficients, otherwise a certified sign."""
    if e.is_zero():
        return 0
    if e.is_rational():
        v = e.rational_value()
        return (v > 0) - (v < 0)
    for bits in precision_schedule(cap=cap):
        s = evaluate(e, bits, cap=cap).sign()
        if s is not None:
            return s
    raise PrecisionCapExceeded(f"sign of {e!r} undecided at the precision cap; "
                               "is the basis really independent?")


def _proportional(x: GroupElement, y: GroupElement) -> Fraction | None:
    t = None
    for a, b in zip(x.coeffs, y.coeffs):
        if b == 0:
            if a != 0:
                return None
            continue
        r = a / b
        if t is None:
            t = r
        elif r != t:
            return None
    return t


def floor_ratio(x: GroupElement, y: GroupElement, cap: int | None = None) -> tuple[int, GroupElement]:
    """Return (q, r) with x = q*y + r exactly and 0 <= r < y."""
    if sign_of(y, cap) != 1:
        raise InvalidInput("floor_ratio needs a positive divisor")
    t = _proportional(x, y)
    if t is not None:
        q = math.floor(t)
        return q, x - y * q
    for bits in precision_schedule(cap=cap):
        xi = evaluate(x, bits, cap=cap)
        yi = evaluate(y, bits, cap=cap)
        if yi.lower <= 0:
            continue
        cands = [xi.lower / yi.lower, xi.lower / yi.upper, xi.upper / yi.lower, xi.upper / yi.upper]
        lo, hi = math.floor(min(cands)), math.floor(max(cands))
        if lo == hi:
            return lo, x - y * lo
    raise PrecisionCapExceeded("x/y is numerically indistinguishable from an integer at the cap")


def lattice_basis(gens: Sequence[GroupElement]) -> list[GroupElement]:
    """Z-basis of the subgroup generated by ``gens`` (Hermite normal form)."""
    if not gens:
        raise InvalidInput("lattice_basis needs at least one generator")
    basis = gens[0].basis
    denom = reduce(math.lcm, (c.denominator for g in gens for c in g.coeffs), 1)
    rows = [[int(c * denom) for c in g.coeffs] for g in gens]
    reduced = hermite_rows(rows)
    return [GroupElement(basis, [Fraction(v, denom) for v in row]) for row in reduced]


def express_in(e: GroupElement, basis: Sequence[GroupElement]) -> list[int] | None:
    """Integer coordinates of ``e`` in an independent family, or None."""
    sol = solve_rational([b.coeffs for b in basis], e.coeffs)
    if sol is None or any(v.denominator != 1 for v in sol):
        return None
    return [int(v) for v in sol]


def same_lattice(a: Sequence[GroupElement], b: Sequence[GroupElement]) -> bool:
    """Mutual integer expressibility of two generating families."""
    ba, bb = lattice_basis(a), lattice_basis(b)
    return (len(ba) == len(bb)
            and all(express_in(g, bb) is not None for g in ba)
            and all(express_in(g, ba) is not None for g in bb))


def fractional_part(x: GroupElement) -> GroupElement:
    """{x} = x - floor(x) as an exact element."""
    q, r = floor_ratio(x, x.basis.one())
    return r
