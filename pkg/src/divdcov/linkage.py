"""Monotone linkage over pairwise distance covariances.

The linkage of feature ``i`` to a set ``S`` is ``-sum_{j in S} dcov2(i, j)``.
It can only decrease as ``S`` grows, which makes

    M(T) = min_{i not in T} linkage(i, T)

a quasi-concave set function on the nonempty proper subsets of the
features.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dcov_core import (
    DataError,
    DataMatrix,
    DCovConfig,
    as_column_set,
    centered_distances,
)

# Budget for one stack of flattened centered distance matrices.
_BLOCK_BYTES = 256 * 2**20


@dataclass(frozen=True)
class PairwiseDCovCache:
    """Symmetric matrix of singleton-pair squared distance covariances.

    ``features`` records which data columns the rows correspond to, so that
    a cache restricted to a subset still maps back to the original data.
    """

    matrix: np.ndarray
    column_names: tuple[str, ...]
    features: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DataError(f"cache matrix must be square, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise DataError("cache matrix must be exactly symmetric")
        p = m.shape[0]
        if len(self.column_names) != p:
            raise DataError(f"{len(self.column_names)} names for {p} features")
        features = tuple(self.features) or tuple(range(p))
        if len(features) != p:
            raise DataError(f"{len(features)} feature ids for {p} features")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "features", features)

    @classmethod
    def from_matrix(cls, matrix, column_names: Sequence[str] | None = None) -> "PairwiseDCovCache":
        """Wrap an arbitrary nonnegative symmetric matrix, e.g. for testing."""
        m = np.asarray(matrix, dtype=np.float64)
        m = np.triu(m) + np.triu(m, 1).T
        names = tuple(column_names) if column_names else tuple(f"x{j}" for j in range(m.shape[0]))
        return cls(m, names)

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    def restrict(self, local: Sequence[int]) -> "PairwiseDCovCache":
        """Cache over a subset of this cache's features (local indices)."""
        local = as_column_set(local, self.p)
        idx = np.asarray(local, dtype=np.intp)
        return PairwiseDCovCache(
            self.matrix[np.ix_(idx, idx)],
            tuple(self.column_names[i] for i in local),
            tuple(self.features[i] for i in local),
        )


def _centered_stack(data: DataMatrix, cols: Sequence[int], exponent: float) -> np.ndarray:
    n = data.n
    out = np.empty((len(cols), n * n))
    for row, c in enumerate(cols):
        out[row] = centered_distances(data.values[:, c], exponent).ravel()
    return out


def build_cache(data: DataMatrix, features: Sequence[int] | None = None,
                cfg: DCovConfig = DCovConfig(), threads: int = 1) -> PairwiseDCovCache:
    """Compute ``dcov2`` for every unordered pair of single feature columns.

    Centered distance matrices are stacked in blocks and contracted with one
    matrix product per block pair; each unordered pair is written once and
    mirrored, so the result is exactly symmetric.
    """
    features = as_column_set(range(data.p) if features is None else features, data.p)
    p = len(features)
    if p < 2:
        raise DataError(f"need at least 2 features for a pairwise cache, got {p}")
    n = data.n
    block = max(1, _BLOCK_BYTES // (8 * n * n))
    starts = list(range(0, p, block))
    blocks = [features[s:s + block] for s in starts]

    def stack(b: int) -> np.ndarray:
        return _centered_stack(data, blocks[b], cfg.exponent)

    out = np.empty((p, p))

    def fill_row(bi: int) -> None:
        left = stack(bi)
        for bj in range(bi, len(blocks)):
            right = left if bj == bi else stack(bj)
            out[starts[bi]:starts[bi] + len(blocks[bi]),
                starts[bj]:starts[bj] + len(blocks[bj])] = (left @ right.T) / (n * n)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_row, range(len(blocks))))
    else:
        for bi in range(len(blocks)):
            fill_row(bi)

    upper = np.triu(out)
    matrix = upper + np.triu(upper, 1).T
    return PairwiseDCovCache(matrix, tuple(data.column_names[c] for c in features), features)


def pi_linkage(i: int, s: Sequence[int], cache: PairwiseDCovCache) -> float:
    """Linkage of feature ``i`` to the set ``s``: ``-sum_j cache[i, j]``."""
    s = as_column_set(s, cache.p)
    if not s:
        raise DataError("linkage needs a nonempty set")
    if not 0 <= i < cache.p:
        raise DataError(f"feature index {i} out of range [0, {cache.p})")
    if i in s:
        raise DataError(f"feature {i} must not belong to the set")
    return -float(np.sum(cache.matrix[i, list(s)]))


def m_pi(t: Sequence[int], cache: PairwiseDCovCache) -> float:
    """Smallest linkage from any feature outside ``t`` to ``t``."""
    t = as_column_set(t, cache.p)
    if not t:
        raise DataError("objective is undefined on the empty set")
    inside = np.zeros(cache.p, dtype=bool)
    inside[list(t)] = True
    if inside.all():
        raise DataError("objective is undefined on the full feature set")
    outside = np.flatnonzero(~inside)
    links = -cache.matrix[np.ix_(outside, np.asarray(t))].sum(axis=1)
    return float(links.min())
