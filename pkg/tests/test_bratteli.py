import pytest

from orbitscale.basicfactor import basic_matrix
from orbitscale.bratteli import (Edge, OrderedBratteliDiagram, check_path_counts, conjugacy_check,
                                 diagram_from_Q, diagram_from_vertex_sets, levels_for_orbit,
                                 path_string, unique_minimal_path, vershik_successor)
from orbitscale.errors import InvalidKneadingMap, MultipleMinimal
from orbitscale.odometer import KneadingMap, cutting_times

from conftest import fib_q


def with_swapped_ranks(B, level, v):
    """Copy of B with the order of the edges entering (level, v) reversed."""
    edges = [list(es) for es in B.edges]
    inc = [e for e in edges[level - 1] if e.target == v]
    top = max(e.rank for e in inc)
    edges[level - 1] = [Edge(e.level, e.source, e.target, top - e.rank) if e.target == v else e
                        for e in edges[level - 1]]
    return OrderedBratteliDiagram(B.levels, edges)


def brute_path_count(B, level, v):
    if level == 0:
        return 1
    return sum(brute_path_count(B, level - 1, e.source) for e in B.incoming(level, v))


def test_fibonacci_levels():
    B = diagram_from_Q(fib_q(), 8)
    assert B.levels[0] == (0,)
    assert all(B.levels[j] == (j, j + 1) for j in range(1, 9))
    assert B.transition_matrices()[0] == ((1, 1),)
    assert all(m == ((1, 1), (1, 0)) for m in B.transition_matrices()[1:])


def test_golden_levels_match_pipeline(golden_q, golden_pipeline):
    vs = golden_pipeline.vertices.vertex_sets
    B = diagram_from_Q(golden_q, 5)
    assert [set(B.levels[j]) for j in range(1, 6)] == [set(v) for v in vs[:5]]
    A = diagram_from_vertex_sets(vs[:5])
    for j, (m, v, w) in enumerate(zip(A.transition_matrices()[1:], vs, vs[1:]), start=1):
        assert m == basic_matrix(v, w).entries


def test_rejects_bad_kneading_maps():
    with pytest.raises(InvalidKneadingMap):
        diagram_from_Q(KneadingMap((0, 0, 0, 1, 2, 4)), 3)
    with pytest.raises(InvalidKneadingMap):
        diagram_from_Q(KneadingMap((0, 0, 0, 1, 2)), 0)
    with pytest.raises(InvalidKneadingMap):
        diagram_from_Q(fib_q(10), 30)
    with pytest.raises(InvalidKneadingMap):
        diagram_from_vertex_sets([{1, 3}])


def test_structural_validation():
    with pytest.raises(InvalidKneadingMap):
        OrderedBratteliDiagram([[0], [1]], [[]])
    with pytest.raises(InvalidKneadingMap):
        OrderedBratteliDiagram([[0], [1]], [[Edge(1, 0, 1, 0), Edge(1, 0, 1, 0)]])
    with pytest.raises(InvalidKneadingMap):
        OrderedBratteliDiagram([[0], [1, 2], [2]], [[Edge(1, 0, 1), Edge(1, 0, 2)], [Edge(2, 2, 2)]])


@pytest.mark.parametrize("Q", [fib_q(20), KneadingMap((0, 0, 0, 1, 1, 2, 3, 3, 4, 5, 6, 7, 8, 9, 10))],
                         ids=["fib", "mixed"])
def test_path_counts(Q):
    B = diagram_from_Q(Q, 7)
    assert check_path_counts(B)
    S = cutting_times(Q)
    for j in range(1, 8):
        counts = B.path_counts(j)
        for v in B.levels[j]:
            assert counts[v] == brute_path_count(B, j, v)
        # the minimal vertex carries the scale S_{j-1}
        assert counts[j] == S[j - 1]


def test_vershik_examples():
    B = diagram_from_Q(fib_q(), 2)
    p = B.minimal_path_to(2, 2)
    assert path_string(p) == "0->1 1->2"
    q = vershik_successor(p, B)
    assert path_string(q) == "0->2 2->2"
    assert B.is_path(q)
    assert vershik_successor(q, B) is None


def test_unique_minimal_path():
    B = diagram_from_Q(fib_q(), 10)
    p = unique_minimal_path(B)
    assert path_string(p[:3]) == "0->1 1->2 2->3"
    assert unique_minimal_path(B, depth=4) == p[:4]


def test_multiple_minimal_paths():
    B = OrderedBratteliDiagram([[0], [1, 2], [1, 2]],
                               [[Edge(1, 0, 1), Edge(1, 0, 2)], [Edge(2, 1, 1), Edge(2, 2, 2)]])
    with pytest.raises(MultipleMinimal):
        unique_minimal_path(B)
    with pytest.raises(MultipleMinimal):
        unique_minimal_path(B, depth=1)


def test_conjugacy_fibonacci():
    Q = fib_q()
    r = conjugacy_check(None, Q, 10**4, 12)
    assert r.passed
    assert r.resolved == 10**4 + 1
    assert r.levels == levels_for_orbit(Q, 10**4)


def test_conjugacy_golden(golden_q):
    r = conjugacy_check(None, golden_q, 1000, 10)
    assert r.passed


def test_swapped_order_is_detected():
    Q = fib_q()
    J = levels_for_orbit(Q, 10**4)
    B = diagram_from_Q(Q, J)
    bad = with_swapped_ranks(B, 13, 13)
    r = conjugacy_check(bad, Q, 10**4, 12)
    assert not r.passed
    assert r.first_conflict is not None


def test_dot_export():
    dot = diagram_from_Q(fib_q(), 3).to_dot()
    assert dot.startswith("digraph bratteli {")
    assert '"1:1" -> "2:2" [style=dashed];' in dot
    assert '"1:2" -> "2:2" [style=bold];' in dot
    assert dot.rstrip().endswith("}")
