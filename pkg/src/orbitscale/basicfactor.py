"""Basic matrices, their chains, and the group-to-vertex-set pipeline.

A basic matrix B(V, V') is the 0/1 incidence of one elementary Bratteli
level.  Any strictly positive integer matrix that is strictly decreasing up
to a column permutation (and whose corner entry is at least 5) factors as a
product of basic matrices along an explicit chain of vertex sets W_0..W_k.
The pipeline repeatedly applies the Euclidean algorithm to bases of a growing
group until the change-of-basis matrix qualifies for that factorization, and
then glues the chains into one global vertex-set sequence (V_j).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .dimgroup import DirectLimitGroup
from .errors import (InvalidInput, NotBasicPair, NotDecreasing, PreconditionFailed,
                     QualificationTimeout, RankDropped, SearchExhausted)
from .euclid import euclid_step
from .hilbert import diameter_ratio, log_enclosure
from .matrices import Matrix, as_matrix, column, matmul, shape, transpose
from .reals import GroupElement, express_in, floor_ratio, lattice_basis, sign_of

QUALIFICATION_CAP = 64
# explicit W-sets cost O(k^2) memory, so chains longer than this are refused
CHAIN_BUDGET = 1024
EXHAUSTIVE_LIMIT = 8


def interval(lo: int, hi: int) -> frozenset[int]:
    """Integer interval [lo, hi]; empty when hi < lo."""
    return frozenset(range(lo, hi + 1))


@dataclass(frozen=True)
class IndexedMatrix:
    """Integer matrix whose rows and columns carry sorted integer labels."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    entries: Matrix

    def __matmul__(self, other: IndexedMatrix) -> IndexedMatrix:
        if self.cols != other.rows:
            raise InvalidInput(f"index mismatch {self.cols} vs {other.rows}")
        return IndexedMatrix(self.rows, other.cols, matmul(self.entries, other.entries))

    def to_json(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols),
                "entries": [list(r) for r in self.entries]}


# The basic matrix type is just an indexed 0/1 matrix built by basic_matrix().
BasicMatrix = IndexedMatrix


def basic_matrix(V: Iterable[int], Vp: Iterable[int]) -> BasicMatrix:
    V, Vp = frozenset(V), frozenset(Vp)
    if not V or not Vp:
        raise NotBasicPair("vertex sets must be non-empty")
    v = min(V)
    if v + 1 not in V:
        raise NotBasicPair(f"{v + 1} is not in V = {sorted(V)}")
    if min(Vp) != v + 1:
        raise NotBasicPair(f"min V' = {min(Vp)} differs from {v + 1}")
    if not (V - {v}) <= Vp:
        raise NotBasicPair(f"V' = {sorted(Vp)} does not contain V minus its minimum")
    rows, cols = tuple(sorted(V)), tuple(sorted(Vp))
    pos = {r: i for i, r in enumerate(rows)}
    ent = [[0] * len(cols) for _ in rows]
    for c, j in enumerate(cols):
        if j == v + 1:
            ent[pos[v]][c] = 1
            ent[pos[v + 1]][c] = 1
        elif j in V:
            ent[pos[j]][c] = 1
        else:
            ent[pos[v]][c] = 1
    return IndexedMatrix(rows, cols, as_matrix(ent))


def chain_product(chain: Sequence[Iterable[int]]) -> IndexedMatrix:
    """B(W_0, W_1) ... B(W_{k-1}, W_k)."""
    if len(chain) < 2:
        raise InvalidInput("a chain needs at least two vertex sets")
    out = basic_matrix(chain[0], chain[1])
    for a, b in zip(chain[1:], chain[2:]):
        out = out @ basic_matrix(a, b)
    return out


def equal_up_to_reindexing(m, mt) -> bool:
    """Compare two matrices after the increasing relabelling of their indices."""
    a = m.entries if isinstance(m, IndexedMatrix) else as_matrix(m)
    b = mt.entries if isinstance(mt, IndexedMatrix) else as_matrix(mt)
    return shape(a) == shape(b) and a == b


# ---------------------------------------------------------------------------
# strictly decreasing matrices

def _strictly_decreasing(v: Sequence[int]) -> bool:
    return all(v[i] > v[i + 1] for i in range(len(v) - 1))


def is_strictly_decreasing_matrix(m: Matrix) -> bool:
    m = as_matrix(m)
    d, dp = shape(m)
    cols = [column(m, j) for j in range(dp)]
    if not all(_strictly_decreasing(c) for c in cols):
        return False
    return all(_strictly_decreasing([x - y for x, y in zip(cols[j], cols[j + 1])])
               for j in range(dp - 1))


def _permuted(m: Matrix, tau: Sequence[int]) -> Matrix:
    return tuple(tuple(row[t - 1] for t in tau) for row in m)


def decreasing_permutation(m: Matrix) -> tuple[int, ...]:
    """A permutation tau (1-based, tau(1) = 1) making M(., tau(.)) strictly decreasing."""
    m = as_matrix(m)
    d, dp = shape(m)
    if any(v <= 0 for row in m for v in row):
        raise NotDecreasing("matrix is not strictly positive")
    rest = sorted(range(2, dp + 1), key=lambda j: (-m[0][j - 1], j))
    tau = (1, *rest)
    if is_strictly_decreasing_matrix(_permuted(m, tau)):
        return tau
    if dp > EXHAUSTIVE_LIMIT:
        raise SearchExhausted(f"sorted order failed and d' = {dp} is too large to search")
    for perm in itertools.permutations(range(2, dp + 1)):
        tau = (1, *perm)
        if is_strictly_decreasing_matrix(_permuted(m, tau)):
            return tau
    raise NotDecreasing("no column permutation fixing 1 is strictly decreasing")


# ---------------------------------------------------------------------------
# factorization into basic matrices

@dataclass(frozen=True)
class FactorChain:
    matrix: Matrix
    tau: tuple[int, ...]
    k: int
    a_vectors: tuple[tuple[int, ...], ...]  # a^(1) .. a^(d')
    chain: tuple[frozenset[int], ...]       # W_0 .. W_k

    def product(self) -> IndexedMatrix:
        return chain_product(self.chain)

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], "tau": list(self.tau), "k": self.k,
                "a_vectors": [list(a) for a in self.a_vectors],
                "chain": [sorted(w) for w in self.chain]}


def factor_into_basics(m: Matrix, verify: bool = True) -> FactorChain:
    """Chain W_0..W_k with B(W_0,W_1)...B(W_{k-1},W_k) equal to M after re-indexing.

    Preconditions: d, d' >= 2, M strictly positive and strictly decreasing up
    to a permutation tau, M(1,1) >= 5, and the consecutive differences of the
    permuted columns strictly positive.
    """
    m = as_matrix(m)
    d, dp = shape(m)
    if d < 2 or dp < 2:
        raise PreconditionFailed(f"need d, d' >= 2, got {d}x{dp}")
    if any(v <= 0 for row in m for v in row):
        raise PreconditionFailed("M is not strictly positive")
    if m[0][0] < 5:
        raise PreconditionFailed(f"M(1,1) = {m[0][0]} < 5")
    try:
        tau = decreasing_permutation(m)
    except (NotDecreasing, SearchExhausted) as exc:
        raise PreconditionFailed(f"M is not strictly decreasing up to a permutation: {exc}") from exc
    mp = _permuted(m, tau)
    cols = [column(mp, t) for t in range(dp)]  # cols[t-1] is M~'(., t)

    def diff(t: int) -> list[int]:
        return [x - y for x, y in zip(cols[t - 1], cols[t])]

    for t in range(1, dp):
        if diff(t)[-1] <= 0:
            raise PreconditionFailed(f"permuted column difference {t} - {t + 1} is not strictly positive")

    a: dict[int, list[int]] = {1: list(cols[dp - 1])}
    for t in range(2, dp):
        a[t] = diff(dp + 1 - t)
    a[dp] = [v - (2 if s == 0 else 1) for s, v in enumerate(diff(1))]
    assert sum(a[t][0] for t in a) == m[0][0] - 2

    k = d - 3 + m[0][0]
    prefix = [d - 1]  # prefix[t] = d - 1 + sum_{t' <= t} a_0^(t')
    for t in range(1, dp + 1):
        prefix.append(prefix[-1] + a[t][0])
    assert prefix[dp] == k

    W: dict[int, frozenset[int]] = {0: interval(0, d - 1)}
    for j in range(1, d):
        w = set(interval(j, prefix[1] - a[1][j]))
        for t0 in range(2, dp + 1):
            w |= interval(prefix[t0 - 1], prefix[t0] - 1 - a[t0][j])
        W[j] = frozenset(w)
    W[d] = interval(d, k - 1)
    for j in range(d + 1, prefix[1]):
        W[j] = interval(j, k)
    for t0 in range(2, dp + 1):
        extra = frozenset(k - 1 + tau[t - 1] for t in range(dp + 2 - t0, dp + 1))
        for j in range(prefix[t0 - 1], prefix[t0]):
            W[j] = interval(j, k) | extra
    W[k] = interval(k, k + dp - 1)
    if sorted(W) != list(range(k + 1)):
        raise AssertionError(f"chain indices incomplete: {sorted(W)}")
    chain = tuple(W[j] for j in range(k + 1))
    out = FactorChain(m, tau, k, tuple(tuple(a[t]) for t in range(1, dp + 1)), chain)
    if verify and not equal_up_to_reindexing(out.product(), m):
        raise AssertionError(f"basic product does not reproduce {m}")
    return out


def chain_is_well_formed(chain: Sequence[frozenset[int]]) -> bool:
    """min W_j = j, j+1 in W_j, W_j minus j inside W_{j+1} (relative to W_0's minimum)."""
    base = min(chain[0])
    for j, w in enumerate(chain):
        if min(w) != base + j:
            return False
        if j + 1 < len(chain) and (base + j + 1 not in w or not (w - {base + j}) <= chain[j + 1]):
            return False
    return True


# ---------------------------------------------------------------------------
# the pipeline from a group to vertex sets

@dataclass(frozen=True)
class PipelineLevel:
    level: int
    generator: GroupElement | None
    start_basis: tuple[GroupElement, ...]
    iterations: int
    euclid_a: tuple[tuple[int, ...], ...]
    matrix: Matrix
    diameter_ratio: Fraction
    factor: FactorChain


@dataclass(frozen=True)
class VertexSequence:
    vertex_sets: tuple[frozenset[int], ...]  # V_1, V_2, ... (index 0 holds V_1)
    t: tuple[int, ...]                       # t_1, t_2, ...
    q: tuple[int, ...]                       # q_1, q_2, ...

    def V(self, j: int) -> frozenset[int]:
        return self.vertex_sets[j - 1]

    @property
    def J(self) -> int:
        return len(self.vertex_sets)

    def to_json(self) -> dict:
        return {"V": [sorted(v) for v in self.vertex_sets], "t": list(self.t), "q": list(self.q)}


@dataclass(frozen=True)
class PipelinePresentation:
    generators: tuple[GroupElement, ...]
    bases: tuple[tuple[GroupElement, ...], ...]  # y^(0) .. y^(L+1)
    matrices: tuple[Matrix, ...]                 # M_0 .. M_L
    levels: tuple[PipelineLevel, ...]            # records for l = 1..L
    vertices: VertexSequence | None = field(default=None)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.bases)

    def identities_ok(self) -> bool:
        """y^(l) = M_l y^(l+1) exactly for every level."""
        from .matrices import matvec

        return all(tuple(matvec(m, self.bases[i + 1])) == self.bases[i]
                   for i, m in enumerate(self.matrices))

    def direct_limit(self) -> DirectLimitGroup:
        dims = self.ranks
        return DirectLimitGroup(dims, [transpose(m) for m in self.matrices], self.bases, start=0)

    def to_json(self) -> dict:
        def coeffs(v):
            return [[str(c) for c in x.coeffs] for x in v]

        return {
            "basis": self.generators[0].basis.labels,
            "generators": coeffs(self.generators),
            "ranks": list(self.ranks),
            "bases": [coeffs(b) for b in self.bases],
            "matrices": [[list(r) for r in m] for m in self.matrices],
            "levels": [{"level": lv.level, "iterations": lv.iterations,
                        "euclid_a": [list(a) for a in lv.euclid_a],
                        "diameter_ratio": str(lv.diameter_ratio),
                        "factor": lv.factor.to_json()} for lv in self.levels],
            "vertices": None if self.vertices is None else self.vertices.to_json(),
        }


def normalize_alpha(alpha: GroupElement) -> GroupElement:
    """Replace an irrational generator by {alpha} or 1 - {alpha}, whichever is below 1/2."""
    _, frac = floor_ratio(alpha, alpha.basis.one())
    if sign_of(frac * 2 - 1) < 0:
        return frac
    return 1 - frac


def positive_basis(family: Sequence[GroupElement]) -> tuple[GroupElement, ...]:
    """Strictly positive, strictly decreasing Z-basis of the group generated by ``family``."""
    basis = [b if sign_of(b) > 0 else -b for b in lattice_basis(list(family))]
    ordered: list[GroupElement] = []
    for b in basis:
        pos = len(ordered)
        for i, c in enumerate(ordered):
            if sign_of(b - c) > 0:
                pos = i
                break
        ordered.insert(pos, b)
    return tuple(ordered)


def _diameter_at_most_one(ratio: Fraction) -> bool:
    bits = 128
    while True:
        enc = log_enclosure(ratio, bits)
        if enc.upper <= 1:
            return True
        if enc.lower > 1:
            return False
        bits *= 2


def _qualify(m: Matrix) -> FactorChain | None:
    if any(v <= 0 for row in m for v in row) or m[0][0] < 5:
        return None
    if not _diameter_at_most_one(diameter_ratio(m)):
        return None
    try:
        return factor_into_basics(m)
    except PreconditionFailed:
        return None


def build_pipeline(gens: Sequence[GroupElement], levels: int = 4,
                   max_iterations: int = QUALIFICATION_CAP,
                   chain_budget: int = CHAIN_BUDGET) -> PipelinePresentation:
    """Bases y^(l), matrices M_l and factor chains for l = 0..levels."""
    gens = list(gens)
    if not gens:
        raise InvalidInput("no generators given")
    basis = gens[0].basis
    if gens[0] != basis.one():
        raise InvalidInput("the first generator must be 1")
    irr = next((i for i, g in enumerate(gens) if not g.is_rational()), None)
    if irr is None:
        raise InvalidInput("no irrational generator: use the rational (odometer) branch")
    rest = [g for i, g in enumerate(gens[1:], start=1) if i != irr]
    alpha = normalize_alpha(gens[irr])
    generators = (basis.one(), alpha, *rest)

    bases = [(basis.one(),), (1 - alpha, alpha)]
    matrices: list[Matrix] = [((1, 1),)]
    records: list[PipelineLevel] = []
    for level in range(1, levels + 1):
        new = generators[level + 1] if level + 1 < len(generators) else None
        if new is None:
            x = bases[level]
        else:
            x = positive_basis(list(bases[level]) + [new])
        rows = []
        for y in bases[level]:
            coords = express_in(y, x)
            if coords is None:
                raise AssertionError("previous basis is not inside the new lattice")
            rows.append(tuple(coords))
        mat = as_matrix(rows)
        start = x
        a_seq = []
        found = None
        for n in range(1, max_iterations + 1):
            step = euclid_step(x)
            if step.d_prime < step.d:
                raise RankDropped(f"level {level}: Euclid step {n} dropped rank")
            mat = matmul(mat, step.A.entries)
            x = step.x_prime
            a_seq.append(step.a)
            # M(1,1) never decreases along the loop, so the budget is final
            if mat[0][0] + len(mat) - 3 > chain_budget:
                raise QualificationTimeout(f"level {level}: chain length would exceed {chain_budget} "
                                           f"before the matrix qualified")
            found = _qualify(mat)
            if found is not None:
                break
        if found is None:
            raise QualificationTimeout(f"level {level}: no qualifying matrix in {max_iterations} steps")
        bases.append(tuple(x))
        matrices.append(mat)
        records.append(PipelineLevel(level, new, start, len(a_seq), tuple(a_seq), mat,
                                     diameter_ratio(mat), found))
    p = PipelinePresentation(generators, tuple(bases), tuple(matrices), tuple(records))
    if not p.identities_ok():
        raise AssertionError("pipeline identities y^(l) = M_l y^(l+1) failed")
    return PipelinePresentation(p.generators, p.bases, p.matrices, p.levels, assemble_vertex_sequence(p))


def assemble_vertex_sequence(p: PipelinePresentation) -> VertexSequence:
    """Glue the translated chains into (V_j) and read off (t_l) and (q_n)."""
    ranks = p.ranks
    t = [1]
    sets: dict[int, frozenset[int]] = {}
    for lv in p.levels:
        base = t[-1]
        for i, w in enumerate(lv.factor.chain):
            shifted = frozenset(base + v for v in w)
            j = base + i
            if j in sets and sets[j] != shifted:
                raise AssertionError(f"blocks disagree on V_{j}")
            sets[j] = shifted
        t.append(base + lv.factor.k)
    J = max(sets)
    vertex_sets = tuple(sets[j] for j in range(1, J + 1))
    q = []
    for ell, tl in enumerate(t, start=1):
        q.extend([tl, tl + ranks[ell]])
    return VertexSequence(vertex_sets, tuple(t), tuple(q))


def block_products(p: PipelinePresentation) -> list[bool]:
    """Per level: does the product of basic matrices over the block equal M_l?"""
    vs = p.vertices or assemble_vertex_sequence(p)
    out = []
    for ell, lv in enumerate(p.levels, start=1):
        lo, hi = vs.t[ell - 1], vs.t[ell]
        prod = chain_product([vs.V(j) for j in range(lo, hi + 1)])
        out.append(equal_up_to_reindexing(prod, p.matrices[ell]))
    return out


def property_one_violations(vs: VertexSequence) -> list[int]:
    """Indices j where V_{j+1} minus V_j escapes [q_{n+1}, q_{n+2} - 1]."""
    bad = []
    q = vs.q
    for n in range(len(q) - 2):
        for j in range(q[n], q[n + 1]):
            if j + 1 > vs.J:
                break
            new = vs.V(j + 1) - vs.V(j)
            if not new <= interval(q[n + 1], q[n + 2] - 1):
                bad.append(j)
    return bad
