"""All-relevant forward selection by distance covariance with a response.

Features are ranked by marginal squared distance correlation with the
response.  Starting from the top feature, the next ranked feature is added
while the joint distance covariance of the selected block with the response
does not decrease; the pass stops at the first decrease.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dcov_core import (
    ColumnSet,
    DataError,
    DataMatrix,
    DCovConfig,
    as_column_set,
    centered_distances,
    dcor2_centered,
    dcov2_centered,
    _power_of_squared,
)


@dataclass(frozen=True)
class RelevanceRanking:
    """Features with their marginal squared distance correlation, best first."""

    ranked: tuple[tuple[int, float], ...]

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.ranked)


@dataclass(frozen=True)
class RelevantSet:
    """Accepted prefix of the ranking.

    ``dcov_trace`` holds the distance covariance (not squared) of the
    selected block with the response after each accepted feature.
    """

    selected: ColumnSet
    dcov_trace: tuple[float, ...]
    ranking: RelevanceRanking
    stopped_at: int | None = None


def split_features(data: DataMatrix, response: Sequence[int],
                   features: Sequence[int] | None = None) -> tuple[ColumnSet, ColumnSet]:
    response = as_column_set(response, data.p)
    if not response:
        raise DataError("response column set is empty")
    if features is None:
        features = [j for j in range(data.p) if j not in response]
    features = as_column_set(features, data.p)
    if set(features) & set(response):
        raise DataError("response columns overlap the feature columns")
    if not features:
        raise DataError("no feature columns left besides the response")
    return features, response


def marginal_ranking(data: DataMatrix, response: Sequence[int],
                     cfg: DCovConfig = DCovConfig(),
                     features: Sequence[int] | None = None) -> RelevanceRanking:
    """Rank features by squared distance correlation with the response.

    Features default to every column outside ``response``.  Ties keep the
    lower column index first.
    """
    features, response = split_features(data, response, features)
    b = centered_distances(data.columns(response), cfg.exponent)
    values = [dcor2_centered(centered_distances(data.values[:, j], cfg.exponent), b, cfg.eps)
              for j in features]
    order = sorted(range(len(features)), key=lambda k: (-values[k], features[k]))
    return RelevanceRanking(tuple((features[k], float(values[k])) for k in order))


def kww_select(data: DataMatrix, response: Sequence[int],
               cfg: DCovConfig = DCovConfig(),
               features: Sequence[int] | None = None) -> RelevantSet:
    """Forward pass down the marginal ranking with a strict first-failure stop.

    A candidate is accepted when the squared distance covariance of the
    enlarged block with the response is at least the current value minus
    ``cfg.eps``.  Squared values are compared directly; the trace reports
    their square roots.
    """
    ranking = marginal_ranking(data, response, cfg, features)
    _, response = split_features(data, response, features)
    b = centered_distances(data.columns(response), cfg.exponent)
    order = ranking.order

    def column_sq(j: int) -> np.ndarray:
        d = data.values[:, j][:, None] - data.values[:, j][None, :]
        return d * d

    # Running squared Euclidean distances of the selected block.
    block_sq = column_sq(order[0])

    def dcov2_of(sq: np.ndarray) -> float:
        d = _power_of_squared(sq.copy(), cfg.exponent)
        row = d.mean(axis=1)
        a = d - row[:, None] - row[None, :] + row.mean()
        return dcov2_centered(a, b)

    current = dcov2_of(block_sq)
    selected = [order[0]]
    trace = [float(np.sqrt(max(current, 0.0)))]
    stopped_at = None
    for j in order[1:]:
        trial_sq = block_sq + column_sq(j)
        value = dcov2_of(trial_sq)
        if value < current - cfg.eps:
            stopped_at = j
            break
        block_sq = trial_sq
        current = value
        selected.append(j)
        trace.append(float(np.sqrt(max(current, 0.0))))
    return RelevantSet(tuple(selected), tuple(trace), ranking, stopped_at)
