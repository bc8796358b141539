"""Hilbert projective metric on the positive cone and Birkhoff contraction.

Every distance here is the logarithm of an exact rational ratio, so each
value carries that ratio alongside a certified enclosure of its logarithm.
Comparisons are decided on enclosures first; equality cases fall back to the
exact ratios.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch, InvalidShape, NonPositiveInput, NonPositiveMatrix
from .euclid import recognize_admissible
from .matrices import Matrix, as_matrix, column, matmul, shape
from .reals import START_BITS, CertifiedInterval, mpf_raw_to_fraction, floor_dyadic, ceil_dyadic


def _iv_bounds(v) -> tuple[Fraction, Fraction]:
    lo, hi = v._mpi_
    return mpf_raw_to_fraction(lo), mpf_raw_to_fraction(hi)


def _iv_ratio(iv, r: Fraction):
    return iv.mpf(r.numerator) / iv.mpf(r.denominator)


def log_enclosure(r: Fraction, bits: int = START_BITS) -> CertifiedInterval:
    """Dyadic enclosure of ln r for a positive rational r."""
    if r <= 0:
        raise NonPositiveInput("logarithm of a non-positive number")
    if r == 1:
        return CertifiedInterval(Fraction(0), Fraction(0))
    from mpmath import iv

    old = iv.prec
    try:
        iv.prec = bits + 8
        lo, hi = _iv_bounds(iv.log(_iv_ratio(iv, r)))
    finally:
        iv.prec = old
    return CertifiedInterval(floor_dyadic(lo, bits), ceil_dyadic(hi, bits))


@dataclass(frozen=True)
class ProjectiveValue:
    """ln(ratio) with its certified enclosure; ``ratio`` is None when infinite."""

    ratio: Fraction | None
    enclosure: CertifiedInterval | None

    @property
    def infinite(self) -> bool:
        return self.ratio is None

    @property
    def is_zero(self) -> bool:
        return self.ratio == 1

    @classmethod
    def from_ratio(cls, ratio: Fraction | None, bits: int = START_BITS) -> ProjectiveValue:
        if ratio is None:
            return cls(None, None)
        return cls(ratio, log_enclosure(ratio, bits))

    def refined(self, bits: int) -> ProjectiveValue:
        return ProjectiveValue.from_ratio(self.ratio, bits)

    def __float__(self) -> float:
        return float("inf") if self.infinite else float(self.enclosure.midpoint)

    def to_json(self) -> dict:
        if self.infinite:
            return {"infinite": True}
        return {"ratio": str(self.ratio), "lower": str(self.enclosure.lower),
                "upper": str(self.enclosure.upper), "approx": float(self)}


def theta_ratio(x: Sequence, xp: Sequence) -> Fraction | None:
    """Exact (max x'_i/x_i) * (max x_i/x'_i); None encodes +infinity."""
    if len(x) != len(xp):
        raise DimensionMismatch(f"vectors of length {len(x)} and {len(xp)}")
    up = down = None
    for u, v in zip(x, xp):
        u, v = Fraction(u), Fraction(v)
        if u < 0 or v < 0:
            raise NonPositiveInput("Hilbert metric needs non-negative vectors")
        if u == 0 and v == 0:
            continue
        if u == 0 or v == 0:
            return None
        up = v / u if up is None else max(up, v / u)
        down = u / v if down is None else max(down, u / v)
    if up is None:
        raise NonPositiveInput("Hilbert metric of zero vectors")
    return up * down


def theta(x: Sequence, xp: Sequence, bits: int = START_BITS) -> ProjectiveValue:
    return ProjectiveValue.from_ratio(theta_ratio(x, xp), bits)


def diameter_ratio(a: Matrix) -> Fraction:
    a = as_matrix(a)
    if not a or any(v <= 0 for row in a for v in row):
        raise NonPositiveMatrix("projective diameter needs a strictly positive matrix")
    cols = [column(a, j) for j in range(shape(a)[1])]
    best = Fraction(1)
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            best = max(best, theta_ratio(cols[i], cols[j]))
    return best


def proj_diameter(a: Matrix, bits: int = START_BITS) -> ProjectiveValue:
    """Max over column pairs of the Hilbert distance; equals the cone supremum."""
    return ProjectiveValue.from_ratio(diameter_ratio(a), bits)


def _diameter_or_infinite(a: Matrix) -> Fraction | None:
    try:
        return diameter_ratio(a)
    except NonPositiveMatrix:
        return None


@dataclass(frozen=True)
class ContractionReport:
    d: int
    product: Matrix
    product_positive: bool
    diameter: ProjectiveValue
    bound: CertifiedInterval
    bound_pass: bool
    decided_by: str
    birkhoff: str

    @property
    def passed(self) -> bool:
        return self.bound_pass and self.birkhoff in ("pass", "vacuous", "n/a")

    def to_json(self) -> dict:
        return {"d": self.d, "product": [list(r) for r in self.product],
                "product_positive": self.product_positive,
                "diameter": self.diameter.to_json(),
                "bound_2lnd": {"lower": str(self.bound.lower), "upper": str(self.bound.upper)},
                "bound_pass": self.bound_pass, "decided_by": self.decided_by,
                "birkhoff": self.birkhoff}


def _decide_le(ratio: Fraction, bound_ratio: Fraction, bits: int, max_bits: int) -> tuple[bool, str, CertifiedInterval]:
    # ln(ratio) <= ln(bound_ratio), enclosures first
    while True:
        lhs = log_enclosure(ratio, bits)
        rhs = log_enclosure(bound_ratio, bits)
        if lhs.upper <= rhs.lower:
            return True, f"enclosure@{bits}", rhs
        if lhs.lower > rhs.upper:
            return False, f"enclosure@{bits}", rhs
        if bits >= max_bits:
            return ratio <= bound_ratio, "exact-ratio", rhs
        bits *= 2


def _birkhoff(ratio_a: Fraction, ratio_ap: Fraction | None, ratio_p: Fraction | None,
              bits: int, max_bits: int) -> str:
    if ratio_ap is None:
        return "vacuous"
    if ratio_p is None:
        return "fail"
    if ratio_ap == 1:
        return "pass" if ratio_p == 1 else "fail"
    from mpmath import iv

    while True:
        old = iv.prec
        try:
            iv.prec = bits + 8
            root = iv.sqrt(_iv_ratio(iv, ratio_a))
            rhs = (root - 1) / (root + 1) * iv.log(_iv_ratio(iv, ratio_ap))
            lhs = iv.log(_iv_ratio(iv, ratio_p)) if ratio_p != 1 else iv.mpf(0)
            lhs_lo, lhs_hi = _iv_bounds(lhs)
            rhs_lo, rhs_hi = _iv_bounds(rhs)
        finally:
            iv.prec = old
        if lhs_hi <= rhs_lo:
            return "pass"
        if lhs_lo > rhs_hi:
            return "fail"
        if bits >= max_bits:
            return "undecided"
        bits *= 2


def check_contraction(a: Matrix, ap: Matrix, bits: int = START_BITS, max_bits: int = 1024) -> ContractionReport:
    """Check D(A A') <= 2 ln d for square admissible A, A' and the Birkhoff bound."""
    a, ap = as_matrix(a), as_matrix(ap)
    (r1, c1), (r2, c2) = shape(a), shape(ap)
    if c1 != r2:
        raise DimensionMismatch(f"cannot compose {r1}x{c1} with {r2}x{c2}")
    if r1 != c1 or r2 != c2:
        raise DimensionMismatch("the 2 ln d bound needs square matrices")
    d = r1
    if d < 2:
        raise DimensionMismatch("the 2 ln d bound needs d >= 2")
    if recognize_admissible(a) is None or recognize_admissible(ap) is None:
        raise InvalidShape("both matrices must be admissible")
    product = matmul(a, ap)
    ratio_p = _diameter_or_infinite(product)
    if ratio_p is None:
        diameter = ProjectiveValue(None, None)
        bound = log_enclosure(Fraction(d * d), bits)
        ok, how = False, "infinite"
    else:
        ok, how, bound = _decide_le(ratio_p, Fraction(d * d), bits, max_bits)
        diameter = ProjectiveValue.from_ratio(ratio_p, bits)
    ratio_a = _diameter_or_infinite(a)
    if ratio_a is None:
        birk = "n/a"
    else:
        birk = _birkhoff(ratio_a, _diameter_or_infinite(ap), ratio_p, bits, max_bits)
    return ContractionReport(d, product, ratio_p is not None, diameter, bound, ok, how, birk)


def birkhoff_holds(a: Matrix, ap: Matrix, bits: int = START_BITS, max_bits: int = 1024) -> str:
    """D(A A') <= tanh(D(A)/4) D(A') for strictly positive A (any composable A')."""
    a, ap = as_matrix(a), as_matrix(ap)
    if shape(a)[1] != shape(ap)[0]:
        raise DimensionMismatch("matrices are not composable")
    ratio_a = _diameter_or_infinite(a)
    if ratio_a is None:
        return "n/a"
    return _birkhoff(ratio_a, _diameter_or_infinite(ap), _diameter_or_infinite(matmul(a, ap)), bits, max_bits)
