"""Random linear-Gaussian DAGs and samples from them.

Nodes are generated in the fixed order 0..n-1; edge ``i -> j`` (i < j) is
present with probability ``density`` and carries a coefficient whose magnitude
is uniform on [0.2, 0.8] with a fair random sign. Each variable is the weighted
sum of its parents plus independent standard normal noise.

Randomness comes from numpy's PCG64 bit generator. Seeds are expanded with
``numpy.random.SeedSequence`` so independent streams can be derived from a
base seed and run coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Dag
from .linalg import DataMatrix

WEIGHT_LOW = 0.2
WEIGHT_HIGH = 0.8
RNG_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class SimConfig:
    n: int
    density: float
    N: int = 1000
    seed: int = 0
    hub_count: int = 0
    hub_degree: int = 10

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least two nodes, got {self.n}")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density must lie in [0, 1], got {self.density}")
        if self.N < 1:
            raise ValueError(f"need at least one sample, got {self.N}")
        if not 0 <= self.hub_count <= self.n:
            raise ValueError(f"hub count must lie in [0, {self.n}], got {self.hub_count}")
        if self.hub_count and not 0 < self.hub_degree < self.n:
            raise ValueError(f"hub degree must lie in [1, {self.n - 1}], got {self.hub_degree}")


@dataclass(frozen=True)
class WeightedDag:
    dag: Dag
    weights: dict[tuple[int, int], float]
    order: tuple[int, ...]

    def __post_init__(self):
        if set(self.weights) != set(self.dag.edges):
            raise ValueError("weights must be given for exactly the DAG's edges")
        for edge, w in self.weights.items():
            if not WEIGHT_LOW <= abs(w) <= WEIGHT_HIGH:
                raise ValueError(f"weight {w} on {edge} outside +/-[{WEIGHT_LOW}, {WEIGHT_HIGH}]")

    @property
    def n(self) -> int:
        return self.dag.n

    def matrix(self) -> np.ndarray:
        """Coefficient matrix A with ``A[i, j]`` the weight of ``i -> j``."""
        a = np.zeros((self.n, self.n))
        for (i, j), w in self.weights.items():
            a[i, j] = w
        return a


def make_rng(seed: int, *coords: int) -> np.random.Generator:
    """Generator for ``seed``, optionally specialised to run coordinates."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *coords])))


def density_for_degree(n: int, avg_degree: float) -> float:
    """Edge probability giving the requested expected node degree."""
    if n < 2:
        raise ValueError("need at least two nodes")
    return min(1.0, avg_degree / (n - 1))


def _weight(rng: np.random.Generator) -> float:
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return sign * rng.uniform(WEIGHT_LOW, WEIGHT_HIGH)


def gen_weighted_dag(cfg: SimConfig, rng: np.random.Generator) -> WeightedDag:
    n = cfg.n
    edges: dict[tuple[int, int], float] = {}
    draws = rng.random((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if draws[i, j] < cfg.density:
                edges[(i, j)] = _weight(rng)
    if cfg.hub_count:
        _add_hubs(edges, cfg, rng)
    dag = Dag.from_edges(n, edges)
    return WeightedDag(dag, edges, tuple(range(n)))


def _add_hubs(edges: dict[tuple[int, int], float], cfg: SimConfig, rng: np.random.Generator) -> None:
    # edges always point from the lower to the higher index, so the order stays topological
    hubs = rng.choice(cfg.n, size=cfg.hub_count, replace=False)
    for h in sorted(int(x) for x in hubs):
        nbrs = {b if a == h else a for a, b in edges if h in (a, b)}
        others = [v for v in rng.permutation(cfg.n) if v != h and v not in nbrs]
        for v in others[: max(0, cfg.hub_degree - len(nbrs))]:
            v = int(v)
            edges[(min(h, v), max(h, v))] = _weight(rng)


def gen_data(wdag: WeightedDag, N: int, rng: np.random.Generator) -> DataMatrix:
    """N rows from the structural model, generated column by column in topological order."""
    a = wdag.matrix()
    noise = rng.standard_normal((N, wdag.n))
    x = np.zeros_like(noise)
    for j in wdag.order:
        x[:, j] = x @ a[:, j] + noise[:, j]
    return DataMatrix(x)


def population_covariance(wdag: WeightedDag) -> np.ndarray:
    # X = E (I - A)^-1 with unit-variance noise, so Cov = B^T B
    b = np.linalg.inv(np.eye(wdag.n) - wdag.matrix())
    return b.T @ b


def population_correlation(wdag: WeightedDag) -> np.ndarray:
    cov = population_covariance(wdag)
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    np.fill_diagonal(corr, 1.0)
    return corr


def simulate(cfg: SimConfig) -> tuple[WeightedDag, DataMatrix]:
    """Graph and data for ``cfg`` from one generator seeded with ``cfg.seed``."""
    rng = make_rng(cfg.seed)
    wdag = gen_weighted_dag(cfg, rng)
    return wdag, gen_data(wdag, cfg.N, rng)
