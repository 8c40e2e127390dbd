"""Exhaustive power-set computations used as an independent check.

Subsets are encoded as bitmasks over the features (bit ``j`` set means
feature ``j`` is a member) and always visited in ascending mask order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dcov_core import (
    DataError,
    DataMatrix,
    DCovConfig,
    centered_distances,
    dcor2,
    dcor2_centered,
    dcov2_centered,
    standardize,
)
from .linkage import PairwiseDCovCache
from .relevant import split_features

MAX_ENUMERATION_FEATURES = 20
_CHUNK = 1 << 15


class SizeGuardError(DataError):
    """Exhaustive enumeration requested over too many features."""


def _guard(p: int, low: int) -> None:
    if p > MAX_ENUMERATION_FEATURES:
        raise SizeGuardError(
            f"power-set enumeration limited to {MAX_ENUMERATION_FEATURES} features, got {p}")
    if p < low:
        raise DataError(f"need at least {low} features, got {p}")


def mask_members(mask: int) -> tuple[int, ...]:
    return tuple(j for j in range(mask.bit_length()) if mask >> j & 1)


def members_mask(members) -> int:
    mask = 0
    for j in members:
        mask |= 1 << int(j)
    return mask


@dataclass(frozen=True)
class EnumerationResult:
    """Objective value of every nonempty proper subset and its maximizers.

    ``values[m - 1]`` is the objective of subset mask ``m`` for
    ``m = 1 .. 2**p - 2``.
    """

    p: int
    values: np.ndarray
    maximizers: tuple[int, ...]
    minimal_maximizers: tuple[int, ...]

    def value(self, mask: int) -> float:
        return float(self.values[mask - 1])

    def as_dict(self) -> dict[int, float]:
        return {m: float(v) for m, v in enumerate(self.values, start=1)}


def enumerate_m_pi(cache: PairwiseDCovCache, eps: float = 1e-12) -> EnumerationResult:
    """Brute-force objective over all nonempty proper subsets.

    For each subset the linkage of every outside feature is summed directly
    from the cache and the minimum taken; nothing is reused from the greedy
    series.
    """
    p = cache.p
    _guard(p, 2)
    c = cache.matrix
    bits = 1 << np.arange(p)
    total = (1 << p) - 2
    values = np.empty(total)
    for lo in range(1, total + 1, _CHUNK):
        masks = np.arange(lo, min(lo + _CHUNK, total + 1), dtype=np.int64)
        member = (masks[:, None] & bits[None, :]) != 0
        links = -(member.astype(np.float64) @ c)
        links[member] = np.inf
        values[lo - 1:lo - 1 + masks.shape[0]] = links.min(axis=1)

    best = values.max()
    maximizers = [int(m) for m in np.flatnonzero(values >= best - eps) + 1]
    minimal = [m for m in maximizers
               if not any(o != m and o & m == o for o in maximizers)]
    return EnumerationResult(p, values, tuple(maximizers), tuple(minimal))


def brute_minimal_maximizers(cache: PairwiseDCovCache, eps: float = 1e-12) -> set[frozenset]:
    """Minimal maximizers as a set of member sets."""
    result = enumerate_m_pi(cache, eps)
    return {frozenset(mask_members(m)) for m in result.minimal_maximizers}


def union_decomposition_check(result: EnumerationResult) -> bool:
    """True iff every maximizer is exactly a union of minimal maximizers."""
    for m in result.maximizers:
        covered = 0
        for mm in result.minimal_maximizers:
            if mm & m == mm:
                covered |= mm
        if covered != m:
            return False
    return True


def intersection_closure_check(result: EnumerationResult, eps: float = 1e-12) -> bool:
    """True iff overlapping maximizers always intersect in a maximizer."""
    best = float(result.values.max())
    maxs = result.maximizers
    for a in range(len(maxs)):
        for b in range(a + 1, len(maxs)):
            inter = maxs[a] & maxs[b]
            if inter and result.value(inter) < best - eps:
                return False
    return True


@dataclass(frozen=True)
class ScalingExperimentResult:
    """Dependence of each feature subset on the response, by correlation and covariance.

    ``rho_of_rho_nu`` is the distance correlation (not squared) between the
    two lists, each treated as a univariate sample indexed by subset mask.
    """

    rho_E: tuple[float, ...]
    nu_E: tuple[float, ...]
    rho_of_rho_nu: float
    standardized: bool


def power_set_dependence_experiment(data: DataMatrix, response: Sequence[int],
                                    cfg: DCovConfig = DCovConfig(),
                                    standardize_features: bool = False,
                                    features: Sequence[int] | None = None,
                                    ) -> ScalingExperimentResult:
    """Compare squared distance correlation and covariance with the response
    over every nonempty feature subset, the full set included."""
    features, response = split_features(data, response, features)
    p = len(features)
    _guard(p, 1)
    x = data.columns(features)
    if standardize_features:
        x = standardize(DataMatrix(x)).values
    b = centered_distances(data.columns(response), cfg.exponent)

    rho_e, nu_e = [], []
    for mask in range(1, 1 << p):
        a = centered_distances(x[:, list(mask_members(mask))], cfg.exponent)
        rho_e.append(dcor2_centered(a, b, cfg.eps))
        nu_e.append(dcov2_centered(a, b))

    if len(rho_e) < 2:
        rho = 0.0
    else:
        rho = float(np.sqrt(max(dcor2(rho_e, nu_e, cfg.exponent, cfg.eps), 0.0)))
    return ScalingExperimentResult(tuple(rho_e), tuple(nu_e), rho, standardize_features)
