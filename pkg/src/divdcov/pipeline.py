"""Diverse-and-relevant selection built from the two basic procedures.

Three modes are supported:

``controlled``
    keep features whose marginal squared distance correlation with the
    response is at least ``alpha``, then take the minimal maximizers of the
    diversity objective over them.
``kww_then_diverse``
    forward relevance selection first, minimal maximizers over its output.
``diverse_then_kww``
    minimal maximizers over all features first, forward relevance selection
    restricted to the union of the clusters.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .dcov_core import DataError, DataMatrix, DCovConfig, sample_dcov2, standardize
from .diverse import MinimalMaximizerResult, minimal_maximizers
from .linkage import PairwiseDCovCache, build_cache
from .relevant import RelevantSet, kww_select, marginal_ranking, split_features
from .report import SelectionReport, Stage

MODES = ("controlled", "kww_then_diverse", "diverse_then_kww")


class StageEmptyError(DataError):
    """A pipeline stage left too few features for the next one."""


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "kww_then_diverse"
    alpha: float | None = None
    base: DCovConfig = field(default_factory=DCovConfig)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise DataError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if (self.alpha is not None) != (self.mode == "controlled"):
            raise DataError("alpha is required for, and only for, the controlled mode")
        if self.alpha is not None and not self.alpha >= 0:
            raise DataError(f"alpha must be nonnegative, got {self.alpha}")


def _config_echo(cfg: PipelineConfig) -> dict:
    return {"mode": cfg.mode, "alpha": cfg.alpha, **asdict(cfg.base)}


def _diverse_stage(name: str, cache: PairwiseDCovCache, result: MinimalMaximizerResult) -> Stage:
    clusters = [[cache.column_names[i] for i in c.members] for c in result.clusters]
    return Stage(name, [n for c in clusters for n in c], {
        "clusters": clusters,
        "cluster_values": [c.value for c in result.clusters],
        "objective": result.objective,
    })


def _relevant_stage(name: str, data: DataMatrix, rel: RelevantSet) -> Stage:
    names = data.column_names
    return Stage(name, [names[i] for i in rel.selected], {
        "ranking": [[names[i], v] for i, v in rel.ranking.ranked],
        "dcov_trace": list(rel.dcov_trace),
        "stopped_at": None if rel.stopped_at is None else names[rel.stopped_at],
    })


def _final_stage(data: DataMatrix, response: Sequence[int], final: Sequence[int],
                 cfg: DCovConfig) -> Stage:
    """Relevance and pairwise diversity statistics of the final feature set."""
    ranking = marginal_ranking(data, response, cfg, final)
    marginal = dict(ranking.ranked)
    names = [data.column_names[i] for i in final]
    if len(final) >= 2:
        pairwise = build_cache(data, final, cfg).matrix.tolist()
    else:
        pairwise = [[sample_dcov2(data, final, final, cfg)]]
    return Stage("final", names, {
        "marginal_dcor2": [marginal[i] for i in final],
        "pairwise_dcov2": pairwise,
    })


def _prepare(data: DataMatrix, cfg: DCovConfig) -> DataMatrix:
    return standardize(data) if cfg.standardize else data


@contextmanager
def _timed(timing: dict[str, float], name: str):
    t0 = time.perf_counter()
    yield
    timing[name] = (time.perf_counter() - t0) * 1000.0


def controlled_select(data: DataMatrix, response: Sequence[int], cfg: PipelineConfig,
                      threads: int = 1) -> SelectionReport:
    """Threshold marginal relevance at ``cfg.alpha``, then select for diversity."""
    if cfg.mode != "controlled" or cfg.alpha is None:
        raise DataError("controlled selection needs mode 'controlled' and an alpha")
    base = cfg.base
    features, response = split_features(data, response)
    data = _prepare(data, base)
    timing: dict[str, float] = {}

    with _timed(timing, "controlled"):
        ranking = marginal_ranking(data, response, base, features)
        kept = sorted(i for i, v in ranking.ranked if v >= cfg.alpha)
    if len(kept) < 2:
        raise StageEmptyError(
            f"controlled set has {len(kept)} feature(s) at alpha={cfg.alpha}; "
            "the diverse stage needs at least 2")
    names = data.column_names
    stage1 = Stage("controlled", [names[i] for i in kept], {
        "alpha": cfg.alpha,
        "marginal_dcor2": [[names[i], v] for i, v in ranking.ranked],
    })

    with _timed(timing, "diverse"):
        cache = build_cache(data, kept, base, threads)
        result = minimal_maximizers(cache, base.eps)
    stage2 = _diverse_stage("diverse", cache, result)
    final = [cache.features[i] for i in result.union()]

    return SelectionReport("select", _config_echo(cfg),
                           [stage1, stage2, _final_stage(data, response, final, base)],
                           timing)


def two_stage(data: DataMatrix, response: Sequence[int], cfg: PipelineConfig,
              threads: int = 1) -> SelectionReport:
    """Run relevance and diversity selection one after the other."""
    base = cfg.base
    features, response = split_features(data, response)
    data = _prepare(data, base)
    timing: dict[str, float] = {}

    if cfg.mode == "kww_then_diverse":
        with _timed(timing, "relevant"):
            rel = kww_select(data, response, base, features)
        stage1 = _relevant_stage("relevant", data, rel)
        if len(rel.selected) < 2:
            raise StageEmptyError(
                f"relevance stage kept {len(rel.selected)} feature(s) "
                f"({', '.join(stage1.selected)}); the diverse stage needs at least 2")
        with _timed(timing, "diverse"):
            cache = build_cache(data, sorted(rel.selected), base, threads)
            result = minimal_maximizers(cache, base.eps)
        stage2 = _diverse_stage("diverse", cache, result)
        final = [cache.features[i] for i in result.union()]
    elif cfg.mode == "diverse_then_kww":
        if len(features) < 2:
            raise StageEmptyError("the diverse stage needs at least 2 features")
        with _timed(timing, "diverse"):
            cache = build_cache(data, features, base, threads)
            result = minimal_maximizers(cache, base.eps)
        stage1 = _diverse_stage("diverse", cache, result)
        union = sorted(cache.features[i] for i in result.union())
        with _timed(timing, "relevant"):
            rel = kww_select(data, response, base, union)
        stage2 = _relevant_stage("relevant", data, rel)
        final = list(rel.selected)
    else:
        raise DataError(f"two_stage does not handle mode {cfg.mode!r}")

    return SelectionReport("select", _config_echo(cfg),
                           [stage1, stage2, _final_stage(data, response, final, base)],
                           timing)


def run_pipeline(data: DataMatrix, response: Sequence[int], cfg: PipelineConfig,
                 threads: int = 1) -> SelectionReport:
    if cfg.mode == "controlled":
        return controlled_select(data, response, cfg, threads)
    return two_stage(data, response, cfg, threads)
