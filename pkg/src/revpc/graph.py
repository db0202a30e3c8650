"""Graph types and graphical queries.

Nodes are the integers ``0..n-1``. :class:`Dag` is the immutable ground truth
used by oracles and simulation; :class:`MixedGraph` is the working graph of the
discovery algorithms (skeleton, then CPDAG).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

NodeSet = frozenset  # frozenset[int]


class CycleError(ValueError):
    pass


def _check_node(n: int, *nodes: int) -> None:
    for v in nodes:
        if not 0 <= v < n:
            raise IndexError(f"node {v} out of range for graph with {n} nodes")


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph stored as per-node parent sets."""

    n: int
    parents: tuple[frozenset[int], ...]
    children: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)
    order: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one node")
        if len(self.parents) != self.n:
            raise ValueError(f"expected {self.n} parent sets, got {len(self.parents)}")
        kids: list[set[int]] = [set() for _ in range(self.n)]
        for v, ps in enumerate(self.parents):
            _check_node(self.n, *ps)
            if v in ps:
                raise ValueError(f"self-loop at node {v}")
            for p in ps:
                kids[p].add(v)
        object.__setattr__(self, "parents", tuple(frozenset(p) for p in self.parents))
        object.__setattr__(self, "children", tuple(frozenset(k) for k in kids))
        object.__setattr__(self, "order", self._toposort())

    def _toposort(self) -> tuple[int, ...]:
        indeg = [len(p) for p in self.parents]
        ready = [v for v in range(self.n) if indeg[v] == 0]
        out = []
        while ready:
            v = ready.pop(0)
            out.append(v)
            for c in sorted(self.children[v]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(out) != self.n:
            raise CycleError("edge set contains a directed cycle")
        return tuple(out)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Dag":
        parents: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            _check_node(n, a, b)
            parents[b].add(a)
        return cls(n, tuple(frozenset(p) for p in parents))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, v) for v in range(self.n) for p in self.parents[v])

    def has_edge(self, a: int, b: int) -> bool:
        return a in self.parents[b]

    def adjacent(self, a: int, b: int) -> bool:
        return a in self.parents[b] or b in self.parents[a]

    def neighbors(self, v: int) -> frozenset[int]:
        return self.parents[v] | self.children[v]

    def max_degree(self) -> int:
        return max(len(self.neighbors(v)) for v in range(self.n))

    def skeleton(self) -> "MixedGraph":
        g = MixedGraph(self.n)
        for a, b in self.edges:
            g.add_undirected(a, b)
        return g

    def permuted(self, perm: list[int]) -> "Dag":
        """Relabel node ``v`` as ``perm[v]``."""
        return Dag.from_edges(self.n, [(perm[a], perm[b]) for a, b in self.edges])


class MixedGraph:
    """Graph with undirected and directed edges; at most one edge per pair."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("a graph needs at least one node")
        self.n = n
        self._adj: list[set[int]] = [set() for _ in range(n)]
        self._directed: set[tuple[int, int]] = set()
        # orientation conflicts seen while building a CPDAG; not part of equality
        self.conflicts = 0

    @classmethod
    def complete(cls, n: int) -> "MixedGraph":
        g = cls(n)
        for v in range(n):
            g._adj[v] = set(range(n)) - {v}
        return g

    def copy(self) -> "MixedGraph":
        g = MixedGraph(self.n)
        g._adj = [set(a) for a in self._adj]
        g._directed = set(self._directed)
        g.conflicts = self.conflicts
        return g

    def add_undirected(self, a: int, b: int) -> None:
        _check_node(self.n, a, b)
        if a == b:
            raise ValueError(f"self-loop at node {a}")
        if self.adjacent(a, b):
            raise ValueError(f"pair ({a}, {b}) already has an edge")
        self._adj[a].add(b)
        self._adj[b].add(a)

    def add_directed(self, a: int, b: int) -> None:
        self.add_undirected(a, b)
        self._directed.add((a, b))

    def remove_edge(self, a: int, b: int) -> None:
        self._adj[a].discard(b)
        self._adj[b].discard(a)
        self._directed.discard((a, b))
        self._directed.discard((b, a))

    def orient(self, a: int, b: int) -> None:
        """Turn the undirected edge ``a -- b`` into ``a -> b``."""
        if not self.is_undirected(a, b):
            raise ValueError(f"no undirected edge between {a} and {b}")
        self._directed.add((a, b))

    def adjacent(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def neighbors(self, v: int) -> set[int]:
        return self._adj[v]

    def is_directed(self, a: int, b: int) -> bool:
        return (a, b) in self._directed

    def is_undirected(self, a: int, b: int) -> bool:
        return b in self._adj[a] and (a, b) not in self._directed and (b, a) not in self._directed

    @property
    def directed_edges(self) -> set[tuple[int, int]]:
        return set(self._directed)

    @property
    def undirected_edges(self) -> set[frozenset[int]]:
        return {
            frozenset((a, b))
            for a in range(self.n)
            for b in self._adj[a]
            if a < b and self.is_undirected(a, b)
        }

    def adjacencies(self) -> set[frozenset[int]]:
        return {frozenset((a, b)) for a in range(self.n) for b in self._adj[a] if a < b}

    def edge_state(self, a: int, b: int) -> str:
        """One of ``none``, ``->``, ``<-``, ``--`` for the ordered pair (a, b)."""
        if b not in self._adj[a]:
            return "none"
        if (a, b) in self._directed:
            return "->"
        if (b, a) in self._directed:
            return "<-"
        return "--"

    def iter_edges(self) -> Iterator[tuple[int, int, str]]:
        """Each edge once: ``(tail, head, "->")`` or ``(a, b, "--")`` with a < b."""
        for a in range(self.n):
            for b in sorted(self._adj[a]):
                if (a, b) in self._directed:
                    yield a, b, "->"
                elif (b, a) in self._directed:
                    continue
                elif a < b:
                    yield a, b, "--"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self.n == other.n and self._adj == other._adj and self._directed == other._directed

    def __repr__(self) -> str:
        body = ", ".join(f"{a}{'->' if s == '->' else '--'}{b}" for a, b, s in self.iter_edges())
        return f"MixedGraph(n={self.n}, [{body}])"


def descendants(dag: Dag, s: Iterable[int]) -> frozenset[int]:
    """Union of de(x) over x in ``s``; x itself is only included if reachable from s."""
    s = list(s)
    _check_node(dag.n, *s)
    seen: set[int] = set()
    queue = deque(c for x in s for c in dag.children[x])
    while queue:
        v = queue.popleft()
        if v in seen:
            continue
        seen.add(v)
        queue.extend(dag.children[v] - seen)
    return frozenset(seen)


def ancestors(dag: Dag, s: Iterable[int]) -> frozenset[int]:
    """Nodes with a directed path into ``s``, plus ``s`` itself."""
    seen = set(s)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for p in dag.parents[v]:
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return frozenset(seen)


def v_structure_nodes(dag: Dag, i: int, j: int) -> frozenset[int]:
    """Common children of ``i`` and ``j``; adjacency of i, j is not checked."""
    _check_node(dag.n, i, j)
    if i == j:
        raise ValueError("v-structure nodes need two distinct endpoints")
    return dag.children[i] & dag.children[j]


def d_separated(dag: Dag, i: int, j: int, z: Iterable[int]) -> bool:
    """True iff ``z`` d-separates ``i`` and ``j`` in ``dag``.

    Breadth-first search over (node, arrival direction) states: a trail may
    pass a non-collider outside ``z``, or a collider with a descendant in ``z``.
    """
    z = frozenset(z)
    _check_node(dag.n, i, j, *z)
    if i == j:
        raise ValueError("d-separation needs two distinct endpoints")
    if i in z or j in z:
        raise ValueError("endpoints may not be in the conditioning set")
    anc_z = ancestors(dag, z)
    # direction "up": arrived from a child; "down": arrived from a parent
    visited: set[tuple[int, str]] = set()
    queue = deque([(i, "up")])
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v == j:
            return False
        if direction == "up" and v not in z:
            queue.extend((p, "up") for p in dag.parents[v])
            queue.extend((c, "down") for c in dag.children[v])
        elif direction == "down":
            if v not in z:
                queue.extend((c, "down") for c in dag.children[v])
            if v in anc_z:
                queue.extend((p, "up") for p in dag.parents[v])
    return True


def find_kmin(dag: Dag, i: int, j: int) -> frozenset[int] | None:
    """Smallest separating set of (i, j), first in lexicographic combination order.

    Returns None when i and j are adjacent. Exhaustive: meant for small graphs.
    """
    _check_node(dag.n, i, j)
    if dag.adjacent(i, j):
        return None
    rest = [k for k in range(dag.n) if k not in (i, j)]
    for size in range(len(rest) + 1):
        for k in itertools.combinations(rest, size):
            if d_separated(dag, i, j, k):
                return frozenset(k)
    # unreachable for a DAG: non-adjacent pairs are separated by parents of one endpoint
    raise AssertionError(f"no separating set for non-adjacent pair ({i}, {j})")


def construct_kmax(dag: Dag, i: int, j: int, kmin: Iterable[int]) -> frozenset[int]:
    """Grow a separating set of (i, j) to a largest separating superset.

    Common children of i and j and all their descendants can never be added,
    since each opens the collider path ``i -> w <- j``. Any other collider may
    be added only together with a non-collider that re-blocks every path it
    opens; the search keeps the largest admissible superset, so such colliders
    enter exactly when a blocking partner is available.
    """
    kmin = frozenset(kmin)
    if not d_separated(dag, i, j, kmin):
        raise ValueError(f"{sorted(kmin)} does not separate {i} and {j}")
    w = v_structure_nodes(dag, i, j)
    forbidden = w | descendants(dag, w)
    free = [k for k in range(dag.n) if k not in (i, j) and k not in forbidden and k not in kmin]
    for size in range(len(free), -1, -1):
        for extra in itertools.combinations(free, size):
            cand = kmin | frozenset(extra)
            if d_separated(dag, i, j, cand):
                return cand
    return kmin  # size 0 always succeeds; kept for type checkers


def _reachable_avoiding(g: MixedGraph, start: int, banned: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in g.neighbors(v):
            if u != banned and u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def adj_path_candidates(g: MixedGraph, i: int, j: int) -> frozenset[int]:
    """Neighbours of i or j that can lie on an i--j path other than the edge itself.

    A node qualifies when it is reachable from i without passing j and from j
    without passing i. This over-approximates membership in a simple path,
    which only ever adds tests and never hides a separating set.
    """
    if not g.adjacent(i, j):
        raise ValueError(f"nodes {i} and {j} are not adjacent")
    near = (g.neighbors(i) | g.neighbors(j)) - {i, j}
    if not near:
        return frozenset()
    from_i = _reachable_avoiding(g, i, j)
    from_j = _reachable_avoiding(g, j, i)
    return frozenset(k for k in near if k in from_i and k in from_j)


# -- CPDAG orientation ------------------------------------------------------


def _rule1(g: MixedGraph, a: int, b: int) -> bool:
    # c -> a -- b with c, b non-adjacent
    return any(g.is_directed(c, a) and not g.adjacent(c, b) for c in g.neighbors(a) if c != b)


def _rule2(g: MixedGraph, a: int, b: int) -> bool:
    # a -> c -> b
    return any(g.is_directed(a, c) and g.is_directed(c, b) for c in g.neighbors(a) if c != b)


def _rule3(g: MixedGraph, a: int, b: int) -> bool:
    # a -- c -> b and a -- d -> b with c, d non-adjacent
    mids = sorted(c for c in g.neighbors(a) if c != b and g.is_undirected(a, c) and g.is_directed(c, b))
    return any(not g.adjacent(c, d) for c, d in itertools.combinations(mids, 2))


def _rule4(g: MixedGraph, a: int, b: int) -> bool:
    # a -- c -> d -> b with a adjacent to d and c, b non-adjacent
    for c in g.neighbors(a):
        if c == b or not g.is_undirected(a, c) or g.adjacent(c, b):
            continue
        for d in g.neighbors(c):
            if d not in (a, b) and g.is_directed(c, d) and g.is_directed(d, b) and g.adjacent(a, d):
                return True
    return False


MEEK_RULES = (_rule1, _rule2, _rule3, _rule4)


def apply_meek_rules(g: MixedGraph) -> MixedGraph:
    """Orient undirected edges of ``g`` in place with R1-R4 until a fixpoint.

    Rules are tried in order R1..R4; each rule scans undirected edges in
    lexicographic order, both directions, and passes repeat until nothing changes.
    """
    changed = True
    while changed:
        changed = False
        for rule in MEEK_RULES:
            for edge in sorted(tuple(sorted(e)) for e in g.undirected_edges):
                a, b = edge
                if not g.is_undirected(a, b):
                    continue
                if rule(g, a, b):
                    g.orient(a, b)
                    changed = True
                elif rule(g, b, a):
                    g.orient(b, a)
                    changed = True
    return g


def orient_v_structures(g: MixedGraph, separated_by) -> MixedGraph:
    """Orient ``i -> k <- j`` for unshielded triples where k is not in the separating set.

    ``separated_by(i, j)`` returns the witness set for a non-adjacent pair, or
    None if there is none (the triple is then left alone). An orientation that
    would reverse an already directed edge is dropped and counted in
    ``g.conflicts``.
    """
    for i, j in itertools.combinations(range(g.n), 2):
        if g.adjacent(i, j):
            continue
        common = sorted(g.neighbors(i) & g.neighbors(j))
        if not common:
            continue
        sep = separated_by(i, j)
        if sep is None:
            continue
        for k in common:
            if k in sep:
                continue
            for end in (i, j):
                if g.is_directed(k, end):
                    g.conflicts += 1
                elif g.is_undirected(end, k):
                    g.orient(end, k)
    return g


def cpdag_of(dag: Dag) -> MixedGraph:
    """CPDAG of the Markov equivalence class of ``dag``."""
    g = dag.skeleton()
    for k in range(dag.n):
        for a, b in itertools.combinations(sorted(dag.parents[k]), 2):
            if not dag.adjacent(a, b):
                for end in (a, b):
                    if g.is_undirected(end, k):
                        g.orient(end, k)
    return apply_meek_rules(g)


# -- edge-list text format --------------------------------------------------


def format_edges(g: MixedGraph | Dag, weights: dict[tuple[int, int], float] | None = None) -> str:
    """Serialize to ``nodes: n`` followed by ``i -> j`` / ``i -- j`` lines."""
    lines = [f"nodes: {g.n}"]
    if isinstance(g, Dag):
        items = [(a, b, "->") for a, b in g.edges]
    else:
        items = sorted(g.iter_edges())
    for a, b, mark in items:
        line = f"{a} {mark} {b}"
        if weights is not None:
            line += f" {weights[(a, b)]!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_edges(text: str) -> tuple[MixedGraph, dict[tuple[int, int], float]]:
    """Inverse of :func:`format_edges`; returns the graph and any weight column."""
    rows = [ln.strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln and not ln.startswith("#")]
    if not rows or not rows[0].startswith("nodes:"):
        raise ValueError("edge list must start with a 'nodes: n' header")
    try:
        n = int(rows[0].split(":", 1)[1])
    except ValueError as exc:
        raise ValueError(f"bad header line {rows[0]!r}") from exc
    g = MixedGraph(n)
    weights: dict[tuple[int, int], float] = {}
    for lineno, ln in enumerate(rows[1:], start=2):
        parts = ln.split()
        if len(parts) not in (3, 4) or parts[1] not in ("->", "--"):
            raise ValueError(f"line {lineno}: cannot parse edge {ln!r}")
        a, b = int(parts[0]), int(parts[2])
        if parts[1] == "->":
            g.add_directed(a, b)
        else:
            g.add_undirected(a, b)
        if len(parts) == 4:
            weights[(a, b)] = float(parts[3])
    return g, weights


def dag_from_mixed(g: MixedGraph) -> Dag:
    if g.undirected_edges:
        raise ValueError("graph has undirected edges; a DAG needs every edge directed")
    return Dag.from_edges(g.n, sorted(g.directed_edges))
