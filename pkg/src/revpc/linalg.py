"""Correlation estimation and (batched) partial correlations.

Partial correlations are read off the 2x2 Schur complement

    H = H0 - H1 H2^{-1} H1^T

where H0, H1 and H2 are the (i,j)x(i,j), (i,j)xK and KxK blocks of the
correlation matrix. The batched kernel gathers these blocks for many
(i, j, K) rows at once with fancy indexing and solves every slice together.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import LinAlgError as ScipyLinAlgError
from scipy.linalg import cho_factor, cho_solve

# condition number above which a conditioning block is treated as singular
MAX_CONDITION = 1e12
# clamp for the Fisher transform so collinear samples stay finite
R_CLAMP = 1.0 - 1e-12


class SingularPartialCorrelation(ArithmeticError):
    """The conditioning block is numerically singular."""


@dataclass
class DataMatrix:
    """``N x n`` sample matrix with column names."""

    values: np.ndarray
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError(f"data must be two-dimensional, got shape {self.values.shape}")
        if not self.names:
            self.names = [f"x{k}" for k in range(self.values.shape[1])]
        if len(self.names) != self.values.shape[1]:
            raise ValueError(f"{len(self.names)} names for {self.values.shape[1]} columns")
        bad = np.argwhere(~np.isfinite(self.values))
        if len(bad):
            row, col = bad[0]
            raise ValueError(f"non-finite value at row {row}, column {col} ({self.names[col]})")

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def correlation_matrix(data: DataMatrix | np.ndarray) -> np.ndarray:
    """Pearson correlation matrix with an exact unit diagonal."""
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    if data.N < 2:
        raise ValueError("need at least two samples to estimate correlations")
    sd = data.values.std(axis=0)
    for col in np.flatnonzero(sd == 0):
        raise ValueError(f"column {col} ({data.names[col]}) has zero variance")
    corr = np.corrcoef(data.values, rowvar=False)
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def partial_correlation(corr: np.ndarray, i: int, j: int, k: Iterable[int] = ()) -> float:
    """Partial correlation of i and j given k via the Schur complement.

    Raises :class:`SingularPartialCorrelation` when the conditioning block is
    ill-conditioned (condition number above ``MAX_CONDITION``).
    """
    k = list(k)
    if i == j:
        raise ValueError("partial correlation needs two distinct variables")
    if i in k or j in k:
        raise ValueError("conditioning set must not contain i or j")
    ij = [i, j]
    h = corr[np.ix_(ij, ij)]
    if k:
        h1 = corr[np.ix_(ij, k)]
        h2 = corr[np.ix_(k, k)]
        if np.linalg.cond(h2) > MAX_CONDITION:
            raise SingularPartialCorrelation(f"conditioning block for {sorted(k)} is singular")
        try:
            x = cho_solve(cho_factor(h2), h1.T)
        except ScipyLinAlgError:
            x = np.linalg.solve(h2, h1.T)
        h = h - h1 @ x
    denom = h[0, 0] * h[1, 1]
    if not denom > 0:
        raise SingularPartialCorrelation("residual variance is not positive")
    return float(h[0, 1] / np.sqrt(denom))


def _gather(corr: np.ndarray, rows: np.ndarray):
    ij = rows[:, :2]
    k = rows[:, 2:]
    h0 = corr[ij[:, :, None], ij[:, None, :]]
    h1 = corr[ij[:, :, None], k[:, None, :]]
    h2 = corr[k[:, :, None], k[:, None, :]]
    return h0, h1, h2


def _batch_kernel(corr: np.ndarray, rows: np.ndarray) -> np.ndarray:
    h0, h1, h2 = _gather(corr, rows)
    out = np.full(len(rows), np.nan)
    if rows.shape[1] > 2:
        ok = np.linalg.cond(h2) <= MAX_CONDITION
        if not ok.any():
            return out
        h0, h1, h2 = h0[ok], h1[ok], h2[ok]
        try:
            # H1 H2^-1 H1^T = Z^T Z with Z = L^-1 H1^T
            low = np.linalg.cholesky(h2)
            z = np.linalg.solve(low, np.swapaxes(h1, 1, 2))
            h = h0 - np.swapaxes(z, 1, 2) @ z
        except np.linalg.LinAlgError:
            h = h0 - h1 @ np.linalg.solve(h2, np.swapaxes(h1, 1, 2))
    else:
        ok = np.ones(len(rows), dtype=bool)
        h = h0
    denom = h[:, 0, 0] * h[:, 1, 1]
    rho = np.full(len(h), np.nan)
    pos = denom > 0
    rho[pos] = h[pos, 0, 1] / np.sqrt(denom[pos])
    out[ok] = rho
    return out


def batch_partial_correlation(
    corr: np.ndarray, batch: np.ndarray | Sequence[Sequence[int]], workers: int = 1
) -> np.ndarray:
    """Partial correlations for every row ``(i, j, k_1..k_l)`` of ``batch``.

    Rows with a singular conditioning block come back as NaN; the rest of the
    batch is unaffected. With ``workers > 1`` the rows are split into
    contiguous chunks evaluated on a thread pool.
    """
    rows = np.asarray(batch, dtype=np.intp)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise ValueError(f"batch must have shape (b, 2 + l), got {rows.shape}")
    if len(rows) == 0:
        return np.empty(0)
    n = corr.shape[0]
    if rows.min() < 0 or rows.max() >= n:
        raise IndexError(f"batch refers to nodes outside 0..{n - 1}")
    srt = np.sort(rows, axis=1)
    if (srt[:, 1:] == srt[:, :-1]).any():
        raise ValueError("indices within a batch row must be distinct")
    if workers <= 1 or len(rows) < 2 * workers:
        return _batch_kernel(corr, rows)
    chunks = np.array_split(rows, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: _batch_kernel(corr, c), chunks))
    return np.concatenate(parts)


_STD_NORMAL = statistics.NormalDist()


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


def fisher_z(r):
    """arctanh of r, with r clamped just inside (-1, 1)."""
    return np.arctanh(np.clip(r, -R_CLAMP, R_CLAMP))
