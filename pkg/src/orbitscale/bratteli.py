"""Ordered Bratteli diagrams truncated at a finite level, and the Vershik map.

``diagram_from_Q`` builds the diagram attached to a kneading map: vertex j
at level j is reached either from j - 1 (the minimal edge) or from j itself
(the maximal one); every other vertex has a single incoming edge.  The
conjugacy check compares the Vershik orbit of the minimal path with the
odometer orbit of the zero word through finite-depth dictionaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidKneadingMap, MultipleMinimal
from .matrices import Matrix, matvec
from .odometer import as_kneading, expansion, cutting_times


@dataclass(frozen=True, order=True)
class Edge:
    level: int   # the edge runs from level - 1 to level
    source: int
    target: int
    rank: int = 0  # position among the edges entering ``target``

    def __str__(self) -> str:
        return f"{self.source}->{self.target}"


FinitePath = tuple[Edge, ...]


class OrderedBratteliDiagram:
    """Levels V_0..V_J and edge sets E_1..E_J with ranked incoming edges."""

    def __init__(self, levels: Sequence[Iterable[int]], edges: Sequence[Iterable[Edge]]):
        self.levels = tuple(tuple(sorted(set(v))) for v in levels)
        self.edges = tuple(tuple(sorted(e, key=lambda x: (x.target, x.rank, x.source))) for e in edges)
        if len(self.edges) != len(self.levels) - 1:
            raise InvalidKneadingMap("need one edge set per level above the root")
        if len(self.levels[0]) != 1:
            raise InvalidKneadingMap("the root level must be a singleton")
        self._incoming: list[dict[int, tuple[Edge, ...]]] = [{}]
        self._outgoing: list[dict[int, list[Edge]]] = []
        for j, es in enumerate(self.edges, start=1):
            inc: dict[int, list[Edge]] = {}
            out: dict[int, list[Edge]] = {}
            lower, upper = set(self.levels[j - 1]), set(self.levels[j])
            for e in es:
                if e.level != j or e.source not in lower or e.target not in upper:
                    raise InvalidKneadingMap(f"edge {e} does not join levels {j - 1} and {j}")
                inc.setdefault(e.target, []).append(e)
                out.setdefault(e.source, []).append(e)
            for v, lst in inc.items():
                ranks = [e.rank for e in lst]
                if len(set(ranks)) != len(ranks):
                    raise InvalidKneadingMap(f"incoming edges at ({j}, {v}) are not totally ordered")
                lst.sort(key=lambda e: e.rank)
            missing = upper - set(inc)
            if missing:
                raise InvalidKneadingMap(f"vertices {sorted(missing)} at level {j} have no incoming edge")
            self._incoming.append({v: tuple(lst) for v, lst in inc.items()})
            self._outgoing.append(out)
        for j, out in enumerate(self._outgoing):
            stuck = set(self.levels[j]) - set(out)
            if stuck:
                raise InvalidKneadingMap(f"vertices {sorted(stuck)} at level {j} have no outgoing edge")

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def incoming(self, level: int, v: int) -> tuple[Edge, ...]:
        return self._incoming[level][v]

    def is_minimal(self, e: Edge) -> bool:
        return self.incoming(e.level, e.target)[0] == e

    def is_maximal(self, e: Edge) -> bool:
        return self.incoming(e.level, e.target)[-1] == e

    def edge_successor(self, e: Edge) -> Edge | None:
        inc = self.incoming(e.level, e.target)
        i = inc.index(e)
        return inc[i + 1] if i + 1 < len(inc) else None

    def transition_matrices(self) -> list[Matrix]:
        """Matrix j counts edges from V_j to V_{j+1} (rows and columns sorted)."""
        mats = []
        for j, es in enumerate(self.edges):
            rows, cols = self.levels[j], self.levels[j + 1]
            ri = {v: i for i, v in enumerate(rows)}
            ci = {v: i for i, v in enumerate(cols)}
            m = [[0] * len(cols) for _ in rows]
            for e in es:
                m[ri[e.source]][ci[e.target]] += 1
            mats.append(tuple(tuple(r) for r in m))
        return mats

    def path_counts(self, level: int) -> dict[int, int]:
        """Number of root paths ending at each vertex of ``level``."""
        counts = {self.levels[0][0]: 1}
        for j in range(1, level + 1):
            nxt = {v: 0 for v in self.levels[j]}
            for e in self.edges[j - 1]:
                nxt[e.target] += counts[e.source]
            counts = nxt
        return counts

    def minimal_path_to(self, level: int, v: int) -> FinitePath:
        path = []
        for j in range(level, 0, -1):
            e = self.incoming(j, v)[0]
            path.append(e)
            v = e.source
        return tuple(reversed(path))

    def is_path(self, p: Sequence[Edge]) -> bool:
        if not p or p[0].source != self.levels[0][0]:
            return False
        for j, e in enumerate(p, start=1):
            if e.level != j or e not in self._incoming[j].get(e.target, ()):
                return False
            if j > 1 and p[j - 2].target != e.source:
                return False
        return True

    def to_dot(self) -> str:
        lines = ["digraph bratteli {", "  rankdir=TB;"]
        for j, vs in enumerate(self.levels):
            names = " ".join(f'"{j}:{v}"' for v in vs)
            lines.append(f"  {{ rank=same; {names} }}")
        for es in self.edges:
            for e in es:
                style = "" if self.is_minimal(e) == self.is_maximal(e) else (
                    ' [style=dashed]' if self.is_minimal(e) else ' [style=bold]')
                lines.append(f'  "{e.level - 1}:{e.source}" -> "{e.level}:{e.target}"{style};')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"levels": [list(v) for v in self.levels],
                "edges": [[[e.source, e.target, e.rank] for e in es] for es in self.edges]}


def diagram_from_Q(Q, J: int) -> OrderedBratteliDiagram:
    """The diagram B_Q truncated at level J."""
    Q = as_kneading(Q)
    v = Q.values
    if len(v) < 2 or v[1] != 0:
        raise InvalidKneadingMap("need Q(0) = Q(1) = 0")
    for k in range(2, len(v)):
        if v[k] > k - 2:
            raise InvalidKneadingMap(f"Q({k}) = {v[k]} > {k - 2}")
    if J < 1:
        raise InvalidKneadingMap("need at least one level")
    bound = Q.tail_lower_bound()
    # membership of k > K + 1 is decided by the witness bound on unseen Q values
    if bound is None or J - 2 >= bound:
        raise InvalidKneadingMap(f"level {J} is not determined by Q on [0, {Q.K}]")
    K = Q.K
    levels: list[set[int]] = [{0}, {k for k in range(1, K + 1) if v[k] == 0}]
    for j in range(2, J + 1):
        levels.append({k for k in range(j, K + 2) if v[k - 1] <= j - 2})
    return _diagram_from_levels(levels)


def diagram_from_vertex_sets(vertex_sets: Sequence[Iterable[int]]) -> OrderedBratteliDiagram:
    """Same edge families on given levels V_1..V_J (``vertex_sets[0]`` is V_1)."""
    levels = [{0}] + [set(v) for v in vertex_sets]
    for j in range(1, len(levels)):
        if not levels[j] or min(levels[j]) != j or j + 1 not in levels[j]:
            raise InvalidKneadingMap(f"V_{j} must have minimum {j} and contain {j + 1}")
        if j >= 2 and not (levels[j - 1] - {j - 1}) <= levels[j]:
            raise InvalidKneadingMap(f"V_{j - 1} minus {j - 1} is not inside V_{j}")
    return _diagram_from_levels(levels)


def _diagram_from_levels(levels: list[set[int]]) -> OrderedBratteliDiagram:
    edges: list[set[Edge]] = []
    for j in range(1, len(levels)):
        es = {Edge(j, j - 1, j, 0)}
        for k in levels[j] - levels[j - 1]:
            es.add(Edge(j, j - 1, k, 0))
        for k in levels[j - 1] - {j - 1}:
            es.add(Edge(j, k, k, 1 if k == j else 0))
        edges.append(es)
    return OrderedBratteliDiagram(levels, edges)


def vershik_successor(p: FinitePath, B: OrderedBratteliDiagram) -> FinitePath | None:
    """Successor of a truncated path; None when every edge is maximal."""
    for j, e in enumerate(p):
        nxt = B.edge_successor(e)
        if nxt is not None:
            head = B.minimal_path_to(j, nxt.source) if j > 0 else ()
            return head + (nxt,) + tuple(p[j + 1:])
    return None


def unique_minimal_path(B: OrderedBratteliDiagram, depth: int | None = None) -> FinitePath:
    """The common prefix of all minimal paths that survive to the last level.

    Without ``depth`` the deepest level where the survivors agree is used;
    MultipleMinimal is raised when they disagree at ``depth`` (or at level 1).
    """
    J = B.depth
    # vertices whose minimal path extends minimally all the way to level J
    alive = [set() for _ in range(J + 1)]
    alive[J] = set(B.levels[J])
    for j in range(J, 0, -1):
        alive[j - 1] = {B.incoming(j, v)[0].source for v in alive[j]}
    prefixes = {}
    for j in range(1, J + 1):
        prefixes[j] = {B.minimal_path_to(j, v) for v in alive[j]}
    if depth is not None:
        if len(prefixes[depth]) != 1:
            raise MultipleMinimal(f"{len(prefixes[depth])} minimal prefixes at level {depth}")
        return next(iter(prefixes[depth]))
    best = 0
    for j in range(1, J + 1):
        if len(prefixes[j]) == 1:
            best = j
        else:
            break
    if best == 0:
        raise MultipleMinimal(f"{len(prefixes[1])} minimal edges survive at level 1")
    return next(iter(prefixes[best]))


def path_string(p: Sequence[Edge]) -> str:
    return " ".join(str(e) for e in p)


@dataclass(frozen=True)
class ConjugacyReport:
    n_steps: int
    depth: int
    word_depth: int
    levels: int
    resolved: int
    keys: int
    single_valued: bool
    injective: bool
    first_conflict: tuple | None

    @property
    def passed(self) -> bool:
        return self.single_valued and self.injective and self.resolved == self.n_steps + 1

    def to_json(self) -> dict:
        return {"n_steps": self.n_steps, "depth": self.depth, "word_depth": self.word_depth, "levels": self.levels,
                "resolved": self.resolved, "keys": self.keys,
                "single_valued": self.single_valued, "injective": self.injective,
                "passed": self.passed,
                "first_conflict": None if self.first_conflict is None else [str(x) for x in self.first_conflict]}


def levels_for_orbit(Q, n_steps: int) -> int:
    """Smallest J whose minimal path to vertex J has more than n_steps successors."""
    Q = as_kneading(Q)
    J = 2
    while True:
        B = diagram_from_Q(Q, J)
        if B.path_counts(J)[J] > n_steps:
            return J
        J += 1


def conjugacy_check(B: OrderedBratteliDiagram | None, Q, n_steps: int, depth: int,
                    word_depth: int | None = None) -> ConjugacyReport:
    """Orbit dictionary {T_B^n(x_min)|depth <-> <n>|word_depth} for n = 0..n_steps.

    ``word_depth`` defaults to ``depth``.  Equal depths match for Fibonacci-like
    maps; in general a cylinder may correspond to a deeper word prefix.
    """
    word_depth = depth if word_depth is None else word_depth
    Q = as_kneading(Q)
    if B is None:
        B = diagram_from_Q(Q, levels_for_orbit(Q, n_steps))
    J = B.depth
    path = B.minimal_path_to(J, J)
    length = 1
    S = cutting_times(Q)
    while length < Q.K and S[length] <= n_steps:
        length += 1
    forward: dict[tuple, tuple] = {}
    backward: dict[tuple, tuple] = {}
    single = inj = True
    conflict = None
    resolved = 0
    for n in range(n_steps + 1):
        if path is None:
            break
        resolved += 1
        word = expansion(n, Q, max(length, word_depth)).digits[:word_depth]
        key_path = tuple((e.source, e.target) for e in path[:depth])
        if forward.setdefault(key_path, word) != word:
            single = False
            conflict = conflict or (n, key_path, word)
        if backward.setdefault(word, key_path) != key_path:
            inj = False
            conflict = conflict or (n, word, key_path)
        if n < n_steps:
            path = vershik_successor(path, B)
    return ConjugacyReport(n_steps, depth, word_depth, J, resolved, len(forward), single, inj, conflict)


def check_path_counts(B: OrderedBratteliDiagram) -> bool:
    """Path counts agree with products of transposed transition matrices."""
    mats = B.transition_matrices()
    vec = [1]
    for j, m in enumerate(mats, start=1):
        vec = matvec(tuple(zip(*m)), vec)
        counts = B.path_counts(j)
        if [counts[v] for v in B.levels[j]] != list(vec):
            return False
    return True
