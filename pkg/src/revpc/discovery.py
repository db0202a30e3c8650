"""Skeleton search (forward PC, reverse-order pruning, batched reverse) and CPDAG orientation.

All three searches start from the complete undirected graph and visit pairs
in ascending ``(i, j)`` order, enumerating conditioning sets as
lexicographic combinations of the pair's candidate set. They differ only in
the direction of the stage loop and in how tests are evaluated:

* forward PC runs stages ``l = 0, 1, ...`` and stops at the first stage in
  which no pair has ``l`` candidates;
* reverse-order pruning runs ``l = n-2, ..., 0`` and never stops early, so a
  non-adjacent pair is removed at the size of its largest separating set;
* the batched variant evaluates ``(i, j, K)`` rows ahead of time with the
  vectorised partial-correlation kernel and commits them in serial order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .citest import CiSource, GaussianSource, TestCounter, ci_test
from .graph import MixedGraph, adj_path_candidates, apply_meek_rules, orient_v_structures

VARIANTS = ("pc", "pc_reverse", "pc_reverse_parallel")


@dataclass
class AlgoConfig:
    variant: str = "pc"
    stable: bool = False
    alpha: float = 1e-3
    batch_size: int = 64
    workers: int = 1
    # test every subset of V \ {i, j}; instrumentation for the stage and query-count laws
    full_candidates: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be positive, got {self.batch_size}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")


class SepsetTable:
    """Symmetric table of separating sets recorded per pair, in recording order."""

    def __init__(self, n: int):
        self.n = n
        self._table: dict[tuple[int, int], list[frozenset[int]]] = {}

    @staticmethod
    def _key(i: int, j: int) -> tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def add(self, i: int, j: int, k) -> None:
        k = frozenset(k)
        if i in k or j in k:
            raise ValueError(f"separating set {sorted(k)} contains an endpoint of ({i}, {j})")
        self._table.setdefault(self._key(i, j), []).append(k)

    def get(self, i: int, j: int) -> list[frozenset[int]]:
        return list(self._table.get(self._key(i, j), []))

    def first(self, i: int, j: int) -> frozenset[int] | None:
        """The witness used for orientation: the first set recorded for the pair."""
        sets = self._table.get(self._key(i, j))
        return sets[0] if sets else None

    def items(self) -> Iterator[tuple[tuple[int, int], list[frozenset[int]]]]:
        for key in sorted(self._table):
            yield key, list(self._table[key])

    def __contains__(self, pair) -> bool:
        return self._key(*pair) in self._table

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SepsetTable):
            return NotImplemented
        return self.n == other.n and self._table == other._table

    def __repr__(self) -> str:
        return f"SepsetTable({dict(self.items())})"


@dataclass
class SkeletonResult:
    graph: MixedGraph
    sepsets: SepsetTable
    counter: TestCounter
    deletion_stage: dict[tuple[int, int], int] = field(default_factory=dict)
    stages: list[int] = field(default_factory=list)
    # batched variant only: kernel calls, rows evaluated, rows evaluated but never committed
    batches: int = 0
    evaluated: int = 0
    speculative: int = 0

    @property
    def n(self) -> int:
        return self.graph.n


def _candidates(g: MixedGraph, i: int, j: int, full: bool) -> list[int]:
    if full:
        return [k for k in range(g.n) if k not in (i, j)]
    return sorted(adj_path_candidates(g, i, j))


def _adjacent_pairs(g: MixedGraph) -> Iterator[tuple[int, int]]:
    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.adjacent(i, j):
                yield i, j


def _search(src: CiSource, stages, *, stable: bool, early_stop: bool, full: bool) -> SkeletonResult:
    n = src.n
    if n < 2:
        raise ValueError("skeleton search needs at least two variables")
    g = MixedGraph.complete(n)
    res = SkeletonResult(g, SepsetTable(n), TestCounter())
    for l in stages:
        res.stages.append(l)
        active = False
        doomed: list[tuple[int, int]] = []
        for i, j in list(_adjacent_pairs(g)):
            if not g.adjacent(i, j):
                continue
            cand = _candidates(g, i, j, full)
            if len(cand) < l:
                continue
            active = True
            for k in itertools.combinations(cand, l):
                if ci_test(src, i, j, k, res.counter).independent:
                    res.sepsets.add(i, j, k)
                    res.deletion_stage[(i, j)] = l
                    if stable:
                        doomed.append((i, j))
                    else:
                        g.remove_edge(i, j)
                    break
        for i, j in doomed:
            g.remove_edge(i, j)
        if early_stop and not active:
            break
    return res


def pc_skeleton(src: CiSource, cfg: AlgoConfig | None = None) -> SkeletonResult:
    """Forward PC / PC-stable skeleton: stages ascend and stop early."""
    cfg = cfg or AlgoConfig()
    return _search(
        src, range(0, src.n - 1), stable=cfg.stable, early_stop=True, full=cfg.full_candidates
    )


def reverse_skeleton(src: CiSource, cfg: AlgoConfig | None = None) -> SkeletonResult:
    """Reverse-order pruning skeleton: stages descend from n-2 and always finish stage 0."""
    cfg = cfg or AlgoConfig(variant="pc_reverse")
    return _search(
        src, range(src.n - 2, -1, -1), stable=cfg.stable, early_stop=False, full=cfg.full_candidates
    )


def reverse_skeleton_parallel(corr: np.ndarray, N: int, cfg: AlgoConfig | None = None) -> SkeletonResult:
    """Reverse-order pruning with batched Fisher-z tests.

    Tests are evaluated ahead of time in batches of ``cfg.batch_size`` rows,
    enumerated from the current graph as if no further edge were removed.
    Decisions are then committed in exactly the order of the serial search;
    once a removal changes the candidate sets of later pairs, rows the serial
    search would never ask are left uncommitted and a new batch starts from
    the first unanswered query. The result (graph, sepsets, counts) is
    therefore identical to :func:`reverse_skeleton` for every batch size.
    Rows evaluated but never committed are counted in ``res.speculative``.
    """
    cfg = cfg or AlgoConfig(variant="pc_reverse_parallel")
    src = GaussianSource(corr, N, cfg.alpha)
    n = src.n
    if n < 2:
        raise ValueError("skeleton search needs at least two variables")
    g = MixedGraph.complete(n)
    res = SkeletonResult(g, SepsetTable(n), TestCounter())
    b = cfg.batch_size

    for l in range(n - 2, -1, -1):
        res.stages.append(l)
        doomed: set[tuple[int, int]] = set()
        pairs = list(_adjacent_pairs(g))
        cache: dict[tuple[int, ...], tuple[bool, bool]] = {}

        def lookahead(p: int, first: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
            # serial query order from pair index p on, assuming no more removals
            for q in range(p, len(pairs)):
                i, j = pairs[q]
                if not g.adjacent(i, j) or (i, j) in doomed:
                    continue
                cand = _candidates(g, i, j, cfg.full_candidates)
                if len(cand) < l:
                    continue
                combos = itertools.combinations(cand, l)
                if q == p:
                    combos = itertools.dropwhile(lambda k: k != first, combos)
                for k in combos:
                    yield (i, j, *k)

        def fill(p: int, first: tuple[int, ...]) -> None:
            rows = list(itertools.islice((r for r in lookahead(p, first) if r not in cache), b))
            batch = np.asarray(rows, dtype=np.intp).reshape(len(rows), 2 + l)
            indep, _, degenerate = src.decide_batch(batch, workers=cfg.workers)
            for row, ok, deg in zip(rows, indep, degenerate):
                cache[row] = (bool(ok), bool(deg))
            res.batches += 1
            res.evaluated += len(rows)

        for p, (i, j) in enumerate(pairs):
            if not g.adjacent(i, j):
                continue
            cand = _candidates(g, i, j, cfg.full_candidates)
            if len(cand) < l:
                continue
            for k in itertools.combinations(cand, l):
                row = (i, j, *k)
                if row not in cache:
                    fill(p, k)
                ok, deg = cache[row]
                res.counter.record(i, j, l, deg)
                if ok:
                    res.sepsets.add(i, j, k)
                    res.deletion_stage[(i, j)] = l
                    if cfg.stable:
                        doomed.add((i, j))
                    else:
                        g.remove_edge(i, j)
                    break
        for i, j in sorted(doomed):
            g.remove_edge(i, j)
    res.speculative = res.evaluated - res.counter.total
    return res


def run_skeleton(src: CiSource, cfg: AlgoConfig) -> SkeletonResult:
    """Dispatch on ``cfg.variant``."""
    if cfg.variant == "pc":
        return pc_skeleton(src, cfg)
    if cfg.variant == "pc_reverse":
        return reverse_skeleton(src, cfg)
    if not isinstance(src, GaussianSource):
        raise TypeError("the batched variant needs a Gaussian (correlation-matrix) source")
    return reverse_skeleton_parallel(src.corr, src.N, cfg)


def orient_cpdag(skel: SkeletonResult) -> MixedGraph:
    """Phase II: orient unshielded colliders from the sepsets, then close under R1-R4.

    Only the first recorded separating set of a pair is consulted.
    Orientation conflicts are resolved first-wins and counted in the
    returned graph's ``conflicts`` attribute.
    """
    g = skel.graph.copy()
    g.conflicts = 0
    if g.directed_edges:
        raise ValueError("skeleton must be fully undirected")
    orient_v_structures(g, skel.sepsets.first)
    return apply_meek_rules(g)


def discover(src: CiSource, cfg: AlgoConfig) -> tuple[MixedGraph, SkeletonResult]:
    skel = run_skeleton(src, cfg)
    return orient_cpdag(skel), skel

