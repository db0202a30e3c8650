import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    all_separators,
    cpdag_bruteforce,
    cpdag_chickering,
    descendants_closure,
    dsep_paths,
    max_separator_size,
    random_dag,
    to_nx,
)
from revpc.graph import (
    CycleError,
    Dag,
    MixedGraph,
    adj_path_candidates,
    ancestors,
    apply_meek_rules,
    construct_kmax,
    cpdag_of,
    d_separated,
    dag_from_mixed,
    descendants,
    find_kmin,
    format_edges,
    orient_v_structures,
    parse_edges,
    v_structure_nodes,
)


@st.composite
def dags(draw, max_n=7):
    n = draw(st.integers(2, max_n))
    perm = draw(st.permutations(range(n)))
    pairs = [(perm[a], perm[b]) for a in range(n) for b in range(a + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Dag.from_edges(n, [e for e, k in zip(pairs, keep) if k])


# -- Dag ---------------------------------------------------------------------


def test_cycle_rejected():
    with pytest.raises(CycleError):
        Dag.from_edges(3, [(0, 1), (1, 2), (2, 0)])


def test_self_loop_and_range():
    with pytest.raises(ValueError):
        Dag.from_edges(2, [(1, 1)])
    with pytest.raises(IndexError):
        Dag.from_edges(2, [(0, 5)])


@given(dags())
def test_topological_order(dag):
    pos = {v: r for r, v in enumerate(dag.order)}
    assert sorted(dag.order) == list(range(dag.n))
    assert all(pos[a] < pos[b] for a, b in dag.edges)


@given(dags())
def test_descendants_match_closure(dag):
    reach = descendants_closure(dag)
    for v in range(dag.n):
        assert descendants(dag, [v]) == {u for u in range(dag.n) if reach[v, u] and u != v}
        assert ancestors(dag, [v]) == {u for u in range(dag.n) if reach[u, v]}


def test_descendants_exclude_self_without_cycle():
    dag = Dag.from_edges(3, [(0, 1), (1, 2)])
    assert descendants(dag, [0]) == {1, 2}
    assert ancestors(dag, [2]) == {0, 1, 2}


def test_v_structure_nodes_are_common_children():
    dag = Dag.from_edges(5, [(0, 2), (1, 2), (0, 3), (1, 3), (2, 4)])
    assert v_structure_nodes(dag, 0, 1) == {2, 3}
    assert v_structure_nodes(dag, 0, 4) == frozenset()


# -- d-separation ------------------------------------------------------------


def test_dsep_textbook_cases():
    chain = Dag.from_edges(3, [(0, 1), (1, 2)])
    fork = Dag.from_edges(3, [(1, 0), (1, 2)])
    collider = Dag.from_edges(4, [(0, 1), (2, 1), (1, 3)])
    for g in (chain, fork):
        assert not d_separated(g, 0, 2, ())
        assert d_separated(g, 0, 2, (1,))
    assert d_separated(collider, 0, 2, ())
    assert not d_separated(collider, 0, 2, (1,))
    assert not d_separated(collider, 0, 2, (3,))  # conditioning on a descendant opens it


@settings(max_examples=60, deadline=None)
@given(dags(max_n=6), st.data())
def test_dsep_against_path_enumeration_and_networkx(dag, data):
    g = to_nx(dag)
    for i, j in itertools.combinations(range(dag.n), 2):
        rest = [k for k in range(dag.n) if k not in (i, j)]
        z = data.draw(st.lists(st.sampled_from(rest), unique=True) if rest else st.just([]))
        ours = d_separated(dag, i, j, z)
        assert ours == dsep_paths(dag, i, j, z)
        assert ours == nx.is_d_separator(g, {i}, {j}, set(z))


def test_dsep_exhaustive_small():
    rng = np.random.default_rng(3)
    for _ in range(15):
        dag = random_dag(rng, 5, 0.5)
        for i, j in itertools.combinations(range(5), 2):
            rest = [k for k in range(5) if k not in (i, j)]
            for r in range(len(rest) + 1):
                for z in itertools.combinations(rest, r):
                    assert d_separated(dag, i, j, z) == dsep_paths(dag, i, j, z)


def test_dsep_symmetric():
    dag = Dag.from_edges(3, [(0, 1), (1, 2)])
    assert d_separated(dag, 0, 2, [1]) == d_separated(dag, 2, 0, [1])


# -- separating sets ---------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(dags(max_n=6))
def test_kmin_kmax_bruteforce(dag):
    for i, j in itertools.combinations(range(dag.n), 2):
        kmin = find_kmin(dag, i, j)
        if dag.adjacent(i, j):
            assert kmin is None
            assert all_separators(dag, i, j) == []
            continue
        seps = all_separators(dag, i, j)
        assert len(kmin) == min(map(len, seps))
        kmax = construct_kmax(dag, i, j, kmin)
        assert d_separated(dag, i, j, kmax)
        assert kmin <= kmax
        assert len(kmax) == max_separator_size(dag, i, j)
        w = v_structure_nodes(dag, i, j)
        assert not kmax & (w | descendants(dag, w))


def test_kmax_rejects_non_separator():
    dag = Dag.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        construct_kmax(dag, 0, 2, [])


def test_kmax_collider_with_blocking_partner():
    # 2 is a collider on the only path; adding it is fine once 3 or 4 blocks the path again
    dag = Dag.from_edges(5, [(0, 3), (3, 2), (1, 4), (4, 2)])
    kmin = find_kmin(dag, 0, 1)
    assert kmin == frozenset()
    kmax = construct_kmax(dag, 0, 1, kmin)
    assert kmax == {2, 3, 4}


# -- candidate sets ----------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(dags(max_n=7))
def test_path_candidates_cover_simple_paths(dag):
    g = dag.skeleton()
    und = nx.Graph(list(dag.edges))
    und.add_nodes_from(range(dag.n))
    for i, j in dag.edges:
        cand = adj_path_candidates(g, i, j)
        near = (g.neighbors(i) | g.neighbors(j)) - {i, j}
        assert cand <= near
        on_path = set()
        for p in nx.all_simple_paths(und, i, j):
            if len(p) > 2:
                on_path |= set(p[1:-1]) & near
        assert on_path <= cand


def test_path_candidates_need_adjacency():
    with pytest.raises(ValueError):
        adj_path_candidates(MixedGraph(3), 0, 1)


def test_path_candidates_drop_dangling_neighbours():
    # 3 hangs off 0 only, so it cannot lie on a 0..1 path other than the edge
    g = MixedGraph(4)
    for a, b in [(0, 1), (0, 2), (1, 2), (0, 3)]:
        g.add_undirected(a, b)
    assert adj_path_candidates(g, 0, 1) == {2}


# -- MixedGraph --------------------------------------------------------------


def test_mixed_graph_edges():
    g = MixedGraph(3)
    g.add_undirected(0, 1)
    g.add_directed(2, 1)
    assert g.edge_state(0, 1) == "--"
    assert g.edge_state(2, 1) == "->"
    assert g.edge_state(1, 2) == "<-"
    assert g.edge_state(0, 2) == "none"
    g.orient(1, 0)
    assert g.is_directed(1, 0)
    with pytest.raises(ValueError):
        g.orient(2, 1)
    g.remove_edge(0, 1)
    assert not g.adjacent(0, 1)


def test_mixed_graph_equality_ignores_conflicts():
    a, b = MixedGraph.complete(3), MixedGraph.complete(3)
    b.conflicts = 4
    assert a == b
    b.orient(0, 1)
    assert a != b


# -- CPDAG -------------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(dags(max_n=6))
def test_cpdag_matches_independent_oracles(dag):
    c = cpdag_of(dag)
    assert c == cpdag_chickering(dag)
    assert c == cpdag_bruteforce(dag)


def test_cpdag_v_structure_and_chain():
    collider = Dag.from_edges(3, [(0, 2), (1, 2)])
    assert cpdag_of(collider).directed_edges == {(0, 2), (1, 2)}
    chain = Dag.from_edges(3, [(0, 1), (1, 2)])
    assert cpdag_of(chain).directed_edges == set()
    # R1 propagation: 0 -> 2 <- 1, 2 -> 3
    dag = Dag.from_edges(4, [(0, 2), (1, 2), (2, 3)])
    assert cpdag_of(dag).directed_edges == {(0, 2), (1, 2), (2, 3)}


@pytest.mark.parametrize(
    "setup, edge",
    [
        # R1: 0 -> 1 -- 2, 0 and 2 non-adjacent
        ([("->", 0, 1), ("--", 1, 2)], (1, 2)),
        # R2: 0 -> 1 -> 2 and 0 -- 2
        ([("->", 0, 1), ("->", 1, 2), ("--", 0, 2)], (0, 2)),
        # R3: 0 -- 1, 0 -- 2, 1 -> 3, 2 -> 3, 0 -- 3, 1 and 2 non-adjacent
        ([("--", 0, 1), ("--", 0, 2), ("->", 1, 3), ("->", 2, 3), ("--", 0, 3)], (0, 3)),
        # R4: 0 -- 1, 1 -> 2, 2 -> 3, 0 -- 3, 0 -- 2, 1 and 3 non-adjacent
        ([("--", 0, 1), ("->", 1, 2), ("->", 2, 3), ("--", 0, 3), ("--", 0, 2)], (0, 3)),
    ],
    ids=["R1", "R2", "R3", "R4"],
)
def test_meek_rules_individually(setup, edge):
    g = MixedGraph(4)
    for mark, a, b in setup:
        (g.add_directed if mark == "->" else g.add_undirected)(a, b)
    apply_meek_rules(g)
    assert g.is_directed(*edge)


def test_v_structures_first_wins_and_conflicts():
    # chain 0 - 1 - 2 - 3 with empty sepsets asks for 0 -> 1 <- 2 and 1 -> 2 <- 3
    g = MixedGraph(4)
    for a, b in [(0, 1), (1, 2), (2, 3)]:
        g.add_undirected(a, b)
    seps = {(0, 2): frozenset(), (1, 3): frozenset(), (0, 3): frozenset({1})}
    orient_v_structures(g, lambda i, j: seps.get((min(i, j), max(i, j))))
    # the second triple cannot reverse 2 -> 1, so only 3 -> 2 is added
    assert g.is_directed(0, 1) and g.is_directed(2, 1) and g.is_directed(3, 2)
    assert g.conflicts == 1


def test_v_structures_skip_missing_sepset():
    g = MixedGraph(3)
    g.add_undirected(0, 2)
    g.add_undirected(1, 2)
    orient_v_structures(g, lambda i, j: None)
    assert g.directed_edges == set()


# -- text format -------------------------------------------------------------


@given(dags())
def test_edge_text_round_trip(dag):
    g, _ = parse_edges(format_edges(dag))
    assert dag_from_mixed(g) == dag
    c = cpdag_of(dag)
    assert parse_edges(format_edges(c))[0] == c


def test_edge_text_weights_and_errors():
    dag = Dag.from_edges(3, [(0, 1), (1, 2)])
    text = format_edges(dag, {(0, 1): 0.25, (1, 2): -0.7000000000000001})
    g, w = parse_edges("# comment\n\n" + text)
    assert w == {(0, 1): 0.25, (1, 2): -0.7000000000000001}
    with pytest.raises(ValueError):
        parse_edges("0 -> 1\n")
    with pytest.raises(ValueError):
        parse_edges("nodes: 2\n0 => 1\n")
    with pytest.raises(ValueError):
        dag_from_mixed(MixedGraph.complete(2))
