"""Accuracy metrics for estimated CPDAGs and the repeated-sampling power experiment."""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .citest import CiDecision, GaussianSource
from .discovery import AlgoConfig, SkeletonResult, pc_skeleton, reverse_skeleton
from .graph import MixedGraph
from .linalg import correlation_matrix
from .simgen import WeightedDag, gen_data

METRICS_COLUMNS = (
    "run_id", "algo", "n", "d", "N", "alpha", "tpr", "fpr", "shd",
    "ci_tests", "wall_ms", "conflicts", "degenerate_tests",
)


@dataclass
class GraphMetrics:
    """Edge-level comparison against a reference CPDAG.

    ``tpr`` is None when the reference has no edges and ``fpr`` is None when
    it is complete, rather than reporting a misleading 0.
    """

    tpr: float | None
    fpr: float | None
    shd: int
    ci_tests: int = 0
    wall_ms: float = 0.0
    conflicts: int = 0
    degenerate_tests: int = 0


def shd(a: MixedGraph, b: MixedGraph) -> int:
    """Structural Hamming distance: one edit per pair whose edge differs (add, delete or reorient)."""
    if a.n != b.n:
        raise ValueError(f"graphs have different sizes ({a.n} vs {b.n})")
    return sum(a.edge_state(i, j) != b.edge_state(i, j) for i, j in itertools.combinations(range(a.n), 2))


def compare_graphs(estimated: MixedGraph, truth: MixedGraph) -> GraphMetrics:
    """TPR, FPR and SHD of ``estimated`` against the reference ``truth``.

    A true edge counts as recovered only with the same mark: the same
    direction, or undirected in both. A wrongly oriented edge is a miss for
    TPR but not a false positive, since the adjacency exists in the truth.
    """
    if estimated.n != truth.n:
        raise ValueError(f"graphs have different sizes ({estimated.n} vs {truth.n})")
    hits = true_edges = false_edges = absent = 0
    for i, j in itertools.combinations(range(truth.n), 2):
        t, e = truth.edge_state(i, j), estimated.edge_state(i, j)
        if t == "none":
            absent += 1
            false_edges += e != "none"
        else:
            true_edges += 1
            hits += e == t
    return GraphMetrics(
        tpr=hits / true_edges if true_edges else None,
        fpr=false_edges / absent if absent else None,
        shd=shd(estimated, truth),
    )


def skeleton_hash(g: MixedGraph) -> str:
    """Short digest of the adjacency set, ignoring orientation."""
    key = ";".join(f"{min(e)}-{max(e)}" for e in sorted(tuple(sorted(e)) for e in g.adjacencies()))
    return hashlib.sha1(f"{g.n}|{key}".encode()).hexdigest()[:12]


def format_metric(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


# -- power experiment -------------------------------------------------------


class RecordingSource:
    """Wraps a source and keeps every decision made for the watched pairs."""

    def __init__(self, src: GaussianSource, watch):
        self.src = src
        self.watch = {(min(p), max(p)) for p in watch}
        self.log: dict[tuple[int, int], list[tuple[tuple[int, ...], CiDecision]]] = {p: [] for p in self.watch}

    @property
    def n(self) -> int:
        return self.src.n

    def decide(self, i, j, k):
        dec = self.src.decide(i, j, k)
        key = (min(i, j), max(i, j))
        if key in self.watch:
            self.log[key].append((tuple(k), dec))
        return dec


@dataclass
class PowerRecord:
    run: int
    algo: str
    i: int
    j: int
    deleted: bool
    statistic: float
    threshold: float
    stage: int | None
    cond_set: tuple[int, ...]


@dataclass
class PowerResult:
    records: list[PowerRecord] = field(default_factory=list)

    def tally(self) -> dict[tuple[str, int, int], dict[str, int]]:
        out: dict[tuple[str, int, int], dict[str, int]] = {}
        for r in self.records:
            t = out.setdefault((r.algo, r.i, r.j), {"deleted": 0, "kept": 0})
            t["deleted" if r.deleted else "kept"] += 1
        return out


def _decisive(entries, deleted: bool):
    """The accepting test for a deleted edge, else the test closest to accepting."""
    if deleted:
        return next((k, d) for k, d in entries if d.independent)
    finite = [(k, d) for k, d in entries if not math.isnan(d.statistic)]
    if not finite:
        return entries[-1] if entries else ((), None)
    return min(finite, key=lambda e: e[1].statistic / e[1].threshold)


def power_experiment(
    wdag: WeightedDag,
    edges_of_interest,
    runs: int,
    N: int,
    alpha: float,
    rng: np.random.Generator,
) -> PowerResult:
    """Resample data ``runs`` times and run forward and reverse PC on each sample.

    For every pair of interest each run records whether the edge was removed,
    the |z| statistic and threshold of the decisive test, and the stage of
    removal. For a kept edge the decisive test is the one whose statistic came
    closest to the threshold.
    """
    pairs = [(min(p), max(p)) for p in edges_of_interest]
    for i, j in pairs:
        if i == j or not (0 <= i < wdag.n and 0 <= j < wdag.n):
            raise ValueError(f"pair ({i}, {j}) is not a valid pair of distinct nodes")
    result = PowerResult()
    algos = (("pc", pc_skeleton), ("pc_reverse", reverse_skeleton))
    for run in range(runs):
        corr = correlation_matrix(gen_data(wdag, N, rng))
        for name, search in algos:
            rec = RecordingSource(GaussianSource(corr, N, alpha), pairs)
            skel: SkeletonResult = search(rec, AlgoConfig(variant=name, alpha=alpha))
            for i, j in pairs:
                deleted = not skel.graph.adjacent(i, j)
                k, dec = _decisive(rec.log[(i, j)], deleted)
                result.records.append(
                    PowerRecord(
                        run=run,
                        algo=name,
                        i=i,
                        j=j,
                        deleted=deleted,
                        statistic=dec.statistic if dec else math.nan,
                        threshold=dec.threshold if dec else math.nan,
                        stage=skel.deletion_stage.get((i, j)),
                        cond_set=k,
                    )
                )
    return result
