"""Greedy enumeration of all inclusion-minimal maximizers of the linkage objective.

From every starting feature a series is grown greedily, always appending the
feature with the smallest linkage to the current prefix.  The shortest prefix
attaining the largest recorded linkage is that series' cluster; the clusters
with the globally best objective are exactly the inclusion-minimal
maximizers.  Total cost is O(p^3) after the pairwise cache is built.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dcov_core import DataError, DataMatrix, DCovConfig, as_column_set, standardize
from .linkage import PairwiseDCovCache, build_cache


@dataclass(frozen=True)
class PiSeries:
    """Greedy ordering of all features together with the linkage at each step.

    ``step_values[k - 1]`` is the linkage of ``order[k]`` to ``order[:k]``.
    """

    order: tuple[int, ...]
    step_values: tuple[float, ...]


@dataclass(frozen=True)
class PiCluster:
    members: tuple[int, ...]
    value: float
    origin_start: int


@dataclass(frozen=True)
class MinimalMaximizerResult:
    clusters: tuple[PiCluster, ...]
    objective: float

    def union(self) -> tuple[int, ...]:
        """Members of all clusters, in cluster order."""
        return tuple(i for c in self.clusters for i in c.members)


@dataclass(frozen=True)
class Tier:
    """One peeling round: the features removed and the objective they attained.

    ``objective`` is None for the leftover tier of a single feature.
    """

    features: tuple[int, ...]
    names: tuple[str, ...]
    objective: float | None
    clusters: tuple[tuple[int, ...], ...]


def _greedy_series(matrix: np.ndarray, starts: Sequence[int], eps: float):
    """Grow one greedy series per start, all starts advanced together."""
    p = matrix.shape[0]
    starts = np.asarray(starts, dtype=np.intp)
    k = starts.shape[0]
    rows = np.arange(k)
    orders = np.empty((k, p), dtype=np.intp)
    steps = np.empty((k, p - 1))
    orders[:, 0] = starts
    # Linkage of every feature to each prefix; members are pinned at +inf.
    links = -matrix[starts]
    links[rows, starts] = np.inf
    for step in range(1, p):
        lowest = links.min(axis=1)
        # First index within eps of the minimum: lowest-index tie break.
        nxt = np.argmax(links <= (lowest + eps)[:, None], axis=1)
        steps[:, step - 1] = links[rows, nxt]
        orders[:, step] = nxt
        links[rows, nxt] = np.inf
        links -= matrix[nxt]
    return orders, steps


def build_pi_series(start: int, cache: PairwiseDCovCache, eps: float = 1e-12) -> PiSeries:
    """Greedy series from ``start``; ties go to the lowest feature index."""
    if cache.p < 2:
        raise DataError(f"need at least 2 features, got {cache.p}")
    if not 0 <= start < cache.p:
        raise DataError(f"start {start} out of range [0, {cache.p})")
    orders, steps = _greedy_series(cache.matrix, [start], eps)
    return PiSeries(tuple(int(i) for i in orders[0]), tuple(float(v) for v in steps[0]))


def _cluster_length(step_values: np.ndarray, eps: float) -> int:
    best = step_values.max()
    return int(np.argmax(step_values >= best - eps)) + 1


def extract_pi_cluster(series: PiSeries, cache: PairwiseDCovCache,
                       eps: float = 1e-12) -> PiCluster:
    """Shortest prefix of ``series`` whose recorded linkage is maximal.

    Along a greedy series the objective of the prefix of length ``k`` equals
    ``step_values[k - 1]``, so no further linkage evaluations are needed.
    """
    if sorted(series.order) != list(range(cache.p)):
        raise DataError("series is not a permutation of the cache's features")
    steps = np.asarray(series.step_values)
    k = _cluster_length(steps, eps)
    return PiCluster(series.order[:k], float(steps[k - 1]), series.order[0])


def minimal_maximizers(cache: PairwiseDCovCache, eps: float = 1e-12) -> MinimalMaximizerResult:
    """All inclusion-minimal maximizers of the linkage objective.

    One series per starting feature; the resulting clusters are deduplicated
    by member set and those within ``eps`` of the best objective are kept.
    """
    p = cache.p
    if p < 2:
        raise DataError(f"need at least 2 features, got {p}")
    orders, steps = _greedy_series(cache.matrix, range(p), eps)

    seen: dict[frozenset, PiCluster] = {}
    for start in range(p):
        k = _cluster_length(steps[start], eps)
        members = tuple(int(i) for i in orders[start, :k])
        key = frozenset(members)
        if key not in seen:
            seen[key] = PiCluster(members, float(steps[start, k - 1]), start)

    best = max(c.value for c in seen.values())
    keep = [c for c in seen.values() if c.value >= best - eps]
    # Only reachable through eps-ties: drop clusters that strictly contain another.
    sets = [frozenset(c.members) for c in keep]
    keep = [c for c, s in zip(keep, sets) if not any(o < s for o in sets)]
    return MinimalMaximizerResult(tuple(keep), float(best))


def diversity_ordering_from_cache(cache: PairwiseDCovCache, eps: float = 1e-12) -> list[Tier]:
    """Peel minimal maximizers off repeatedly until fewer than 2 features remain.

    Restricting the cache is equivalent to rebuilding it on the remaining
    features, since every entry depends on its own pair only.
    """
    tiers: list[Tier] = []
    current = cache
    while current.p >= 2:
        result = minimal_maximizers(current, eps)
        local = result.union()
        tiers.append(Tier(
            tuple(current.features[i] for i in local),
            tuple(current.column_names[i] for i in local),
            result.objective,
            tuple(tuple(current.features[i] for i in c.members) for c in result.clusters),
        ))
        chosen = set(local)
        current = current.restrict([i for i in range(current.p) if i not in chosen]) \
            if len(chosen) < current.p else None
        if current is None:
            break
    if current is not None and current.p == 1:
        tiers.append(Tier(current.features, current.column_names, None, (current.features,)))
    return tiers


def diversity_ordering(data: DataMatrix, cfg: DCovConfig = DCovConfig(),
                       features: Sequence[int] | None = None, threads: int = 1) -> list[Tier]:
    """Partition the features into tiers ordered from most to least diverse.

    Features are standardized first when ``cfg.standardize`` is set.
    """
    features = as_column_set(range(data.p) if features is None else features, data.p)
    if len(features) < 2:
        raise DataError(f"need at least 2 features, got {len(features)}")
    if cfg.standardize:
        data = standardize(data)
    cache = build_cache(data, features, cfg, threads)
    return diversity_ordering_from_cache(cache, cfg.eps)
