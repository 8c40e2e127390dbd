"""Command-line interface.

Input is a UTF-8 CSV with a header row, comma delimiter and '.' decimals.
Reports go to standard output as JSON (default) or, for flat tables, CSV;
diagnostics go to standard error.

Exit codes: 0 success, 2 usage error, 3 data error, 4 size-guard violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .dcov_core import DataError, DataMatrix, DCovConfig, sample_dcor2, sample_dcov2, standardize
from .diverse import diversity_ordering, minimal_maximizers
from .linkage import build_cache
from .oracle import (
    SizeGuardError,
    enumerate_m_pi,
    intersection_closure_check,
    mask_members,
    power_set_dependence_experiment,
    union_decomposition_check,
)
from .pipeline import MODES, PipelineConfig, run_pipeline
from .relevant import kww_select
from .report import SelectionReport, Stage

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SIZE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def load_csv(path, response_spec: str | Sequence[str] | None = None
             ) -> tuple[DataMatrix, DataMatrix | None]:
    """Read a numeric CSV and split off the response columns.

    ``response_spec`` names response columns, either comma-separated or as a
    list; a token that is not a column name but is an integer is taken as a
    0-based column index.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    body = [r for r in rows[1:] if r]
    if len(body) < 2:
        raise DataError(f"{path}: need at least 2 data rows, got {len(body)}")

    values = np.empty((len(body), len(header)))
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                v = None
            if v is None or not np.isfinite(v):
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {r} (line {r + 1}), "
                    f"column {header[c]!r}")
            values[r - 1, c] = v

    if response_spec is None or response_spec == "":
        return DataMatrix(values, tuple(header)), None
    tokens = response_spec.split(",") if isinstance(response_spec, str) else list(response_spec)
    response = []
    for tok in (t.strip() for t in tokens):
        if tok in header:
            response.append(header.index(tok))
        elif tok.lstrip("-").isdigit() and 0 <= int(tok) < len(header):
            response.append(int(tok))
        else:
            raise DataError(f"{path}: unknown response column {tok!r}")
    if len(set(response)) != len(response):
        raise DataError(f"{path}: response columns repeated")
    feats = [j for j in range(len(header)) if j not in response]
    if not feats:
        raise DataError(f"{path}: no feature columns besides the response")
    return (DataMatrix(values[:, feats], tuple(header[j] for j in feats)),
            DataMatrix(values[:, response], tuple(header[j] for j in response)))


def _names_to_indices(data: DataMatrix, spec: str) -> list[int]:
    return [data.index_of(t.strip()) for t in spec.split(",") if t.strip()]


def _base_config(args) -> DCovConfig:
    return DCovConfig(exponent=args.exponent, standardize=args.standardize, eps=args.eps)


def _echo(args, **extra) -> dict:
    cfg = {"input": str(args.input), "response": args.response, **asdict(_base_config(args))}
    cfg.update(extra)
    return cfg


def _load(args, need_response: bool):
    if need_response and not args.response:
        raise UsageError(f"{args.command} requires --response")
    feats, resp = load_csv(args.input, args.response)
    if resp is None:
        return feats, (), list(range(feats.p))
    data = feats.hstack(resp)
    return data, tuple(range(feats.p, data.p)), list(range(feats.p))


def _timed(timing: dict, name: str, fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    timing[name] = (time.perf_counter() - t0) * 1000.0
    return out


def cmd_dcov(args) -> tuple[SelectionReport, list | None]:
    data, response, _ = _load(args, need_response=False)
    if not args.x:
        raise UsageError("dcov requires --x")
    cfg = _base_config(args)
    if cfg.standardize:
        data = standardize(data)
    a = _names_to_indices(data, args.x)
    if args.y:
        b = _names_to_indices(data, args.y)
    elif response:
        b = list(response)
    else:
        raise UsageError("dcov requires --y or --response")
    timing: dict = {}
    v = _timed(timing, "dcov", sample_dcov2, data, a, b, cfg)
    r = sample_dcor2(data, a, b, cfg)
    stage = Stage("dcov", [data.column_names[i] for i in a], {
        "y": [data.column_names[i] for i in b],
        "dcov2": v,
        "dcor2": r,
    })
    return SelectionReport("dcov", _echo(args, x=args.x, y=args.y), [stage], timing), None


def cmd_diverse(args):
    data, _, features = _load(args, need_response=False)
    cfg = _base_config(args)
    if cfg.standardize:
        data = standardize(data)
    timing: dict = {}
    cache = _timed(timing, "cache", build_cache, data, features, cfg, args.threads)
    result = _timed(timing, "diverse", minimal_maximizers, cache, cfg.eps)
    clusters = [[cache.column_names[i] for i in c.members] for c in result.clusters]
    stage = Stage("diverse", [n for c in clusters for n in c], {
        "clusters": clusters,
        "cluster_values": [c.value for c in result.clusters],
        "objective": result.objective,
    })
    rows = [["cluster", "feature", "value"]]
    for k, (names, c) in enumerate(zip(clusters, result.clusters)):
        rows += [[k, n, c.value] for n in names]
    return SelectionReport("diverse", _echo(args), [stage], timing), rows


def cmd_relevant(args):
    data, response, features = _load(args, need_response=True)
    cfg = _base_config(args)
    if cfg.standardize:
        data = standardize(data)
    timing: dict = {}
    rel = _timed(timing, "relevant", kww_select, data, response, cfg, features)
    names = data.column_names
    stage = Stage("relevant", [names[i] for i in rel.selected], {
        "ranking": [[names[i], v] for i, v in rel.ranking.ranked],
        "dcov_trace": list(rel.dcov_trace),
        "stopped_at": None if rel.stopped_at is None else names[rel.stopped_at],
    })
    chosen = set(rel.selected)
    rows = [["rank", "feature", "marginal_dcor2", "selected"]]
    rows += [[k + 1, names[i], v, int(i in chosen)] for k, (i, v) in enumerate(rel.ranking.ranked)]
    return SelectionReport("relevant", _echo(args), [stage], timing), rows


def cmd_select(args):
    if args.mode == "controlled" and args.alpha is None:
        raise UsageError("--mode controlled requires --alpha")
    if args.mode != "controlled" and args.alpha is not None:
        raise UsageError(f"--alpha is only valid with --mode controlled, not {args.mode}")
    data, response, _ = _load(args, need_response=True)
    cfg = PipelineConfig(args.mode, args.alpha, _base_config(args))
    report = run_pipeline(data, response, cfg, args.threads)
    report.config = _echo(args, mode=args.mode, alpha=args.alpha)
    return report, None


def cmd_order(args):
    data, _, features = _load(args, need_response=False)
    if args.top_k is not None and args.top_k < 1:
        raise UsageError("--top-k must be at least 1")
    timing: dict = {}
    tiers = _timed(timing, "order", diversity_ordering, data, _base_config(args),
                   features, args.threads)
    if args.top_k is not None:
        tiers = tiers[:args.top_k]
    stages = [Stage(f"tier{k + 1}", list(t.names), {
        "objective": t.objective,
        "clusters": [[data.column_names[i] for i in c] for c in t.clusters],
    }) for k, t in enumerate(tiers)]
    rows = [["tier", "feature", "objective"]]
    for k, t in enumerate(tiers):
        rows += [[k + 1, n, "" if t.objective is None else t.objective] for n in t.names]
    return SelectionReport("order", _echo(args, top_k=args.top_k), stages, timing), rows


def cmd_enumerate(args):
    cfg = _base_config(args)
    timing: dict = {}
    if args.experiment == "scaling":
        data, response, features = _load(args, need_response=True)
        stages = []
        for std in (False, True):
            name = "standardized" if std else "raw"
            res = _timed(timing, name, power_set_dependence_experiment,
                         data, response, cfg, std, features)
            stages.append(Stage(name, [data.column_names[i] for i in features], {
                "subsets": len(res.rho_E),
                "rho_of_rho_nu": res.rho_of_rho_nu,
            }))
        return SelectionReport("enumerate", _echo(args, experiment="scaling"), stages, timing), None

    data, _, features = _load(args, need_response=False)
    if len(features) > 20:
        raise SizeGuardError(f"power-set enumeration limited to 20 features, got {len(features)}")
    if cfg.standardize:
        data = standardize(data)
    cache = build_cache(data, features, cfg, args.threads)
    result = _timed(timing, "enumerate", enumerate_m_pi, cache, cfg.eps)
    greedy = minimal_maximizers(cache, cfg.eps)

    def names(mask):
        return [cache.column_names[i] for i in mask_members(mask)]

    minimal = [names(m) for m in result.minimal_maximizers]
    stage = Stage("enumerate", [n for m in minimal for n in m], {
        "objective": float(result.values.max()),
        "subsets": int(result.values.shape[0]),
        "maximizers": [names(m) for m in result.maximizers],
        "minimal_maximizers": minimal,
        "greedy_minimal_maximizers": [[cache.column_names[i] for i in sorted(c.members)]
                                      for c in greedy.clusters],
        "union_decomposition": union_decomposition_check(result),
        "intersection_closure": intersection_closure_check(result, cfg.eps),
    })
    return SelectionReport("enumerate", _echo(args, experiment="mpi"), [stage], timing), None


def cmd_synth(args):
    """Planted two-block dataset with a response driven by one feature per block."""
    rng = np.random.default_rng(args.seed)
    n, p = args.n, args.p
    half = p // 2
    z = rng.normal(size=(n, 2))
    x = np.empty((n, p))
    x[:, :half] = z[:, [0]] + 0.5 * rng.normal(size=(n, half))
    x[:, half:] = z[:, [1]] + 0.5 * rng.normal(size=(n, p - half))
    x *= rng.uniform(0.5, 20.0, size=p)
    y = x[:, 0] / np.std(x[:, 0]) + x[:, half] / np.std(x[:, half]) + 0.1 * rng.normal(size=n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j}" for j in range(p)] + ["y"])
    for row in np.column_stack([x, y]):
        w.writerow([f"{v:.12g}" for v in row])
    if args.output:
        Path(args.output).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    return None, None


COMMANDS = {
    "dcov": cmd_dcov,
    "diverse": cmd_diverse,
    "relevant": cmd_relevant,
    "select": cmd_select,
    "order": cmd_order,
    "enumerate": cmd_enumerate,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="CSV file with a header row")
    common.add_argument("--response", help="response column name(s), comma-separated")
    common.add_argument("--exponent", type=float, default=1.0,
                        help="power applied to Euclidean distances, in (0, 2] (default 1)")
    common.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True,
                        help="center columns and scale to unit standard deviation, "
                             "population divisor n (default on)")
    common.add_argument("--eps", type=float, default=1e-12, help="comparison tolerance")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for the pairwise cache")
    common.add_argument("--timing", action="store_true",
                        help="record wall-clock milliseconds per stage "
                             "(output is then no longer byte-reproducible)")

    parser = argparse.ArgumentParser(
        prog="divdcov",
        description="Diverse and relevant feature selection with distance covariance.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dcov", parents=[common], help="distance covariance/correlation of column groups")
    p.add_argument("--x", help="first column group, comma-separated names")
    p.add_argument("--y", help="second column group (defaults to --response)")

    sub.add_parser("diverse", parents=[common], help="all inclusion-minimal maximizers")
    sub.add_parser("relevant", parents=[common], help="all-relevant forward selection")

    p = sub.add_parser("select", parents=[common], help="diverse and relevant selection")
    p.add_argument("--mode", choices=MODES, default="kww_then_diverse")
    p.add_argument("--alpha", type=float, help="marginal dcor^2 threshold (controlled mode)")

    p = sub.add_parser("order", parents=[common], help="full diversity ordering by peeling")
    p.add_argument("--top-k", type=int, help="keep only the first K tiers")

    p = sub.add_parser("enumerate", parents=[common], help="exhaustive power-set checks")
    p.add_argument("--experiment", choices=("mpi", "scaling"), default="mpi")

    p = sub.add_parser("synth", help="write a planted synthetic dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--p", type=int, default=6)
    p.add_argument("--output", help="file to write (default stdout)")
    return parser


def _write_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command != "synth" and args.threads < 1:
            raise UsageError("--threads must be at least 1")
        report, rows = COMMANDS[args.command](args)
        if report is None:
            return EXIT_OK
        if not args.timing:
            report.timing = {}
        if args.format == "csv":
            if rows is None:
                raise UsageError(f"--format csv is not available for {args.command}; use json")
            sys.stdout.write(_write_csv(rows))
        else:
            sys.stdout.write(report.to_json())
        return EXIT_OK
    except UsageError as exc:
        print(f"divdcov {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeGuardError as exc:
        print(f"divdcov {args.command}: size guard: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except DataError as exc:
        print(f"divdcov {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
