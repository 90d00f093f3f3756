"""Command-line interface.

Subcommands: generate (synthetic dataset pools), resample (one dataset,
one method), evaluate (cross-validated quality of one configuration),
benchmark (full experiment matrix, resumable), curves (Dolan-More profiles
from a results CSV).

Reproducibility contract: every run is fully determined by its arguments;
a ``run.json`` config echo is written alongside every artifact (inside
output directories, next to output files as ``<name>.run.json``). Equal
configurations produce byte-identical artifacts. Diagnostics go to stderr.

Exit codes: 0 success; 1 usage error; 2 data error; 3 benchmark completed
but some cells failed with data errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .benchmark import (
    DEFAULT_CELLS,
    dolan_more,
    emit_curves,
    parse_cell,
    read_results,
    run_benchmark,
)
from .classifiers import Family, ModelSpec
from .datasets import GaussianPoolConfig, generate_gaussian_pool, load_csv, load_pool, save_csv, write_pool
from .errors import ConfigError, DataError, UsageError
from .evaluation import (
    DEFAULT_MULTIPLIER_GRID,
    cv_quality,
    eqs_strategy,
    select_multiplier_cvs,
)
from .resampling import DEFAULT_SMOTE_K, Method, ResamplingSpec, resample

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exceptions, not exit code 2."""

    def error(self, message):
        raise UsageError(message)


def _int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise UsageError(f"expected LO:HI integer range, got {text!r}") from None


def _float_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise UsageError(f"expected LO:HI real range, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated reals, got {text!r}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="imbalance-bench", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a synthetic Gaussian-mixture dataset pool")
    p.add_argument("--pool-size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--d-range", type=_int_range, default=(6, 40), metavar="LO:HI")
    p.add_argument("--size-range", type=_int_range, default=(200, 1000), metavar="LO:HI")
    p.add_argument("--minor-fraction-range", type=_float_range, default=(0.05, 0.35), metavar="LO:HI")
    p.add_argument("--components", type=_int_range, default=(1, 3), metavar="LO:HI")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("resample", help="resample one dataset CSV")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--multiplier", type=float, default=None)
    p.add_argument("--k", "--smote-k", dest="smote_k", type=int, default=DEFAULT_SMOTE_K)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--provenance-out", type=Path, default=None, help="sidecar CSV of added-element provenance")
    p.add_argument("--relabel", action="store_true", help="flip labels when class 1 is the majority")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("evaluate", help="cross-validated PR-AUC of one configuration")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--model", choices=[f.value for f in Family], required=True)
    p.add_argument("--method", choices=[m.value for m in Method], default="none")
    p.add_argument("--strategy", default="fixed", help="fixed | fixed:<m> | eqs | cvs")
    p.add_argument("--multiplier", type=float, default=None)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--smote-k", type=int, default=DEFAULT_SMOTE_K)
    p.add_argument("--tuning-folds", type=int, default=3)
    p.add_argument("--cvs-mode", choices=["oracle", "nested"], default="oracle")
    p.add_argument("--cvs-grid", type=_float_list, default=DEFAULT_MULTIPLIER_GRID, metavar="M1,M2,...")
    p.add_argument("--relabel", action="store_true")
    p.add_argument("--out", type=Path, required=True, help="output JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run the full experiment matrix")
    p.add_argument("--pool", type=Path, required=True, help="pool manifest.json or directory of CSVs")
    p.add_argument("--models", default="tree,knn,logreg", help="comma-separated model families")
    p.add_argument("--cells", default=",".join(DEFAULT_CELLS), help="comma-separated cells")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--smote-k", type=int, default=DEFAULT_SMOTE_K)
    p.add_argument("--tuning-folds", type=int, default=3)
    p.add_argument("--cvs-mode", choices=["oracle", "nested"], default="oracle")
    p.add_argument("--multiplier-grid", type=_float_list, default=DEFAULT_MULTIPLIER_GRID, metavar="M1,M2,...")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", action="store_true", help="reuse complete cells from an existing results CSV")
    p.add_argument("--out", type=Path, required=True, help="output results CSV")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("curves", help="Dolan-More curves from a results CSV")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cells", default=None, help="comma-separated subset of cells to compare")
    p.add_argument("--format", choices=["csv", "svg"], default="csv")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_curves)

    return parser


def _echo_config(args: argparse.Namespace) -> dict:
    config = {}
    for key, value in vars(args).items():
        if key == "func":
            continue
        if isinstance(value, Path):
            value = str(value)
        config[key] = value
    return config


def _write_echo(artifact: Path, args: argparse.Namespace) -> None:
    payload = {"version": __version__, "config": _echo_config(args)}
    target = artifact / "run.json" if artifact.is_dir() else artifact.with_name(artifact.name + ".run.json")
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_generate(args) -> int:
    try:
        cfg = GaussianPoolConfig(
            pool_size=args.pool_size,
            seed=args.seed,
            components_per_class=args.components,
            d_range=args.d_range,
            size_range=args.size_range,
            minor_fraction_range=args.minor_fraction_range,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    entries = generate_gaussian_pool(cfg)
    manifest = write_pool(entries, args.out, args.seed)
    _write_echo(args.out, args)
    log.info("wrote %d datasets and %s", len(entries), manifest)
    return 0


def _fixed_spec(method: Method, multiplier: float | None, smote_k: int) -> ResamplingSpec:
    if method is Method.NONE:
        if multiplier not in (None, 1.0):
            raise UsageError("method none takes no multiplier (or exactly 1)")
        return ResamplingSpec(Method.NONE)
    if multiplier is None:
        raise UsageError(f"method {method.value} requires --multiplier")
    if multiplier <= 1.0:
        raise UsageError(f"multiplier must exceed 1, got {multiplier}")
    return ResamplingSpec(method, multiplier, smote_k)


def cmd_resample(args) -> int:
    method = Method(args.method)
    spec = _fixed_spec(method, args.multiplier, args.smote_k)
    dataset = load_csv(args.input, relabel=args.relabel)
    result = resample(dataset, spec, args.seed)
    save_csv(result.dataset, args.out)
    if args.provenance_out is not None:
        with args.provenance_out.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["synth_id", "seed_id", "neighbor_id", "lambda"])
            for rec in result.added:
                writer.writerow([rec.synth_id, rec.seed_id, rec.neighbor_id, repr(rec.lam)])
    _write_echo(args.out, args)
    log.info(
        "%s -> %s: %d added, %d removed, %d total rows",
        args.input, args.out, len(result.added), len(result.removed_ids), result.dataset.size,
    )
    return 0


def _report_payload(report) -> dict:
    return {
        "qcv": report.qcv,
        "fold_scores": list(report.fold_scores),
        "fold_multipliers": list(report.fold_multipliers),
        "fold_methods": list(report.fold_methods),
        "fold_params": list(report.fold_params),
        "fold_train_sizes": list(report.fold_train_sizes),
        "degraded": report.degraded,
    }


def cmd_evaluate(args) -> int:
    method = Method(args.method)
    strategy = args.strategy
    fixed_m = args.multiplier
    if strategy.startswith("fixed:"):
        try:
            suffix = float(strategy.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad fixed multiplier in --strategy {strategy!r}") from None
        if fixed_m is not None and fixed_m != suffix:
            raise UsageError("--multiplier disagrees with --strategy fixed:<m>")
        fixed_m = suffix
        strategy = "fixed"
    if strategy not in ("fixed", "eqs", "cvs"):
        raise UsageError(f"--strategy must be fixed[:<m>], eqs or cvs, got {args.strategy!r}")
    if strategy != "fixed" and method is Method.NONE:
        raise UsageError(f"strategy {strategy} requires a resampling method")
    if strategy != "fixed" and fixed_m is not None:
        raise UsageError(f"--multiplier is meaningless with strategy {strategy}")
    if args.folds < 2:
        raise UsageError(f"--folds must be at least 2, got {args.folds}")

    dataset = load_csv(args.input, relabel=args.relabel)
    model = ModelSpec(family=Family(args.model), tuning_folds=args.tuning_folds, seed=args.seed)
    payload: dict
    if strategy == "fixed":
        spec = _fixed_spec(method, fixed_m, args.smote_k)
        report = cv_quality(dataset, spec, model, args.folds, args.seed)
        payload = _report_payload(report)
        payload["multiplier"] = spec.multiplier
    elif strategy == "eqs":
        report = cv_quality(dataset, eqs_strategy(method, args.smote_k), model, args.folds, args.seed)
        payload = _report_payload(report)
    else:
        result = select_multiplier_cvs(
            dataset, method, model, grid=args.cvs_grid, folds=args.folds,
            seed=args.seed, mode=args.cvs_mode, smote_k=args.smote_k,
        )
        payload = _report_payload(result.report)
        payload["mode"] = result.mode
        payload["best_multiplier"] = result.best_multiplier
        payload["table"] = [[m, None if q != q else q] for m, q in result.table]
    payload["model"] = args.model
    payload["method"] = method.value
    payload["strategy"] = strategy
    payload["folds"] = args.folds
    payload["seed"] = args.seed

    args.out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_echo(args.out, args)
    log.info("qcv = %.6f -> %s", payload["qcv"], args.out)
    return 0


def cmd_benchmark(args) -> int:
    model_names = [name.strip() for name in args.models.split(",") if name.strip()]
    if not model_names:
        raise UsageError("--models must name at least one model family")
    models = []
    for name in model_names:
        try:
            family = Family(name)
        except ValueError:
            raise UsageError(f"unknown model family {name!r}") from None
        models.append((name, ModelSpec(family=family, tuning_folds=args.tuning_folds, seed=args.seed)))
    cells = tuple(cell.strip() for cell in args.cells.split(",") if cell.strip())
    try:
        for cell in cells:
            parse_cell(cell)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.folds < 2:
        raise UsageError(f"--folds must be at least 2, got {args.folds}")
    if args.jobs < 1:
        raise UsageError(f"--jobs must be at least 1, got {args.jobs}")

    pool = load_pool(args.pool)
    result = run_benchmark(
        pool, models, cells, folds=args.folds, seed=args.seed, out=args.out,
        resume=args.resume, jobs=args.jobs, grid=args.multiplier_grid,
        smote_k=args.smote_k, cvs_mode=args.cvs_mode,
    )
    _write_echo(args.out, args)
    log.info("%d cells, %d errors -> %s", result.n_cells, result.n_errors, args.out)
    return 3 if result.n_errors else 0


def cmd_curves(args) -> int:
    matrices = read_results(args.results)
    if args.model not in matrices:
        raise ConfigError(f"model {args.model!r} not in {args.results} (has {sorted(matrices)})")
    methods = None
    if args.cells is not None:
        methods = [cell.strip() for cell in args.cells.split(",") if cell.strip()]
    result = dolan_more(matrices[args.model], methods=methods)
    emit_curves(result.curves, args.format, args.out)
    _write_echo(args.out, args)
    log.info(
        "%d curves over %d tasks (%d dropped) -> %s",
        len(result.curves), result.retained_rows, result.dropped_rows, args.out,
    )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
