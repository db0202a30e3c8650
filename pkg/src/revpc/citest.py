"""Conditional-independence decisions shared by every skeleton search.

Two sources answer "is i independent of j given K?": an exact d-separation
oracle over a known DAG, and the Fisher-z test on a sample correlation matrix.
Every query goes through :func:`ci_test`, which also does the bookkeeping.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import Dag, d_separated
from .linalg import (
    SingularPartialCorrelation,
    batch_partial_correlation,
    fisher_z,
    normal_quantile,
    partial_correlation,
)


@dataclass(frozen=True)
class CiDecision:
    independent: bool
    statistic: float
    threshold: float
    cond_size: int
    degenerate: bool = False


@dataclass
class TestCounter:
    """Counts CI queries per stage (conditioning-set size) and per pair."""

    __test__ = False  # not a pytest class

    total: int = 0
    per_stage: Counter = field(default_factory=Counter)
    per_pair: Counter = field(default_factory=Counter)
    degenerate: int = 0

    def record(self, i: int, j: int, cond_size: int, degenerate: bool = False) -> None:
        self.total += 1
        self.per_stage[cond_size] += 1
        self.per_pair[(min(i, j), max(i, j))] += 1
        self.degenerate += int(degenerate)

    def merge(self, other: "TestCounter") -> None:
        self.total += other.total
        self.per_stage.update(other.per_stage)
        self.per_pair.update(other.per_pair)
        self.degenerate += other.degenerate


def ci_threshold(alpha: float, N: int, k: int) -> float:
    """Rejection bound on |arctanh r| for a test with ``k`` conditioning variables."""
    dof = N - k - 3
    if dof < 1:
        raise ValueError(f"insufficient samples for conditioning size {k} (N={N})")
    return normal_quantile(1 - alpha / 2) / math.sqrt(dof)


class OracleSource:
    """Exact answers from d-separation in a known DAG."""

    def __init__(self, dag: Dag):
        if not isinstance(dag, Dag):
            raise TypeError("oracle source needs a Dag")
        self.dag = dag

    @property
    def n(self) -> int:
        return self.dag.n

    def decide(self, i: int, j: int, k: tuple[int, ...]) -> CiDecision:
        sep = d_separated(self.dag, i, j, k)
        return CiDecision(sep, float(sep), 0.5, len(k))


class GaussianSource:
    """Fisher-z tests on a sample correlation matrix of ``N`` observations."""

    def __init__(self, corr: np.ndarray, N: int, alpha: float):
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if N <= 4:
            raise ValueError(f"need more than 4 samples, got {N}")
        corr = np.asarray(corr, dtype=float)
        if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
            raise ValueError(f"correlation matrix must be square, got {corr.shape}")
        self.corr = corr
        self.N = int(N)
        self.alpha = float(alpha)
        self._thresholds: dict[int, float] = {}

    @property
    def n(self) -> int:
        return self.corr.shape[0]

    def threshold(self, k: int) -> float:
        if k not in self._thresholds:
            self._thresholds[k] = ci_threshold(self.alpha, self.N, k)
        return self._thresholds[k]

    def decide(self, i: int, j: int, k: tuple[int, ...]) -> CiDecision:
        thr = self.threshold(len(k))
        try:
            # fixed endpoint order keeps the decision exactly symmetric in (i, j)
            r = partial_correlation(self.corr, min(i, j), max(i, j), k)
        except SingularPartialCorrelation:
            return CiDecision(False, math.nan, thr, len(k), degenerate=True)
        stat = abs(float(fisher_z(r)))
        return CiDecision(stat <= thr, stat, thr, len(k))

    def decide_batch(self, rows: np.ndarray, workers: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorised :meth:`decide` for rows sharing one conditioning size.

        Returns (independent, statistic, degenerate) arrays.
        """
        rows = np.array(rows, dtype=np.intp)
        rows[:, :2].sort(axis=1)
        rho = batch_partial_correlation(self.corr, rows, workers=workers)
        degenerate = np.isnan(rho)
        stat = np.abs(fisher_z(np.where(degenerate, 0.0, rho)))
        stat[degenerate] = np.nan
        indep = ~degenerate & (stat <= self.threshold(rows.shape[1] - 2))
        return indep, stat, degenerate


CiSource = OracleSource | GaussianSource


def ci_test(
    src: CiSource, i: int, j: int, k: Iterable[int], counter: TestCounter | None = None
) -> CiDecision:
    """Decide i _||_ j | k and count the query once under stage ``len(k)``.

    A singular partial correlation is reported as dependent with the
    ``degenerate`` flag set, so the caller keeps the edge.
    """
    k = tuple(k)
    if i == j or i in k or j in k:
        raise ValueError(f"invalid query ({i}, {j} | {k})")
    dec = src.decide(i, j, k)
    if counter is not None:
        counter.record(i, j, len(k), dec.degenerate)
    return dec
