"""Command-line entry point.

Verbs: train, cluster, eval, sweep, gradcheck, compare-table1,
print-config. Every command is deterministic given its config file, and
no command leaves partial output behind on error (all writers go through
a temp-file rename).

Exit codes: 0 success, 1 check failed (gradcheck/comparison), 2 config
error, 3 data or input error, 4 training diverged, 5 training stopped at
max_epochs without converging.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import evaluation
from .clustering import assign_batch, read_assignments, write_assignments
from .config import DEFAULT_CONFIG, load_dataset, read_run_config
from .data import data_dir, load_uci
from .errors import ConfigError, DataError, EntclustError, InputError, TrainingError
from .network import init_network, load_network, save_network
from .training import run_gradient_check, train, write_train_report

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRAINING = 4
EXIT_NOT_CONVERGED = 5


def _fail(category: str, exc: Exception, code: int) -> int:
    message = str(exc).replace("\n", " ")
    print(f"error: {category}: {message}", file=sys.stderr)
    return code


def cmd_train(args) -> int:
    cfg = read_run_config(args.config)
    data = load_dataset(cfg)
    net = init_network(cfg.network_config(data.dim))
    report = train(net, data, cfg.training)
    save_network(net, cfg.output_path("model", args.model))
    write_train_report(cfg.output_path("report", args.report), report)
    print(f"final_objective={report.final_objective!r} epochs={report.epochs_run} "
          f"converged={report.converged}")
    print(f"wall_time_s={report.wall_time_s:.3f}", file=sys.stderr)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_cluster(args) -> int:
    cfg = read_run_config(args.config)
    net = load_network(args.model)
    data = load_dataset(cfg)
    if data.dim != net.config.input_dim:
        raise DataError(
            f"feature width {data.dim} does not match model input width {net.config.input_dim}"
        )
    result = assign_batch(net, data)
    write_assignments(cfg.output_path("assignments", args.out), result)
    print(f"samples={data.n} clusters={net.config.cluster_count}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = read_run_config(args.config)
    data = load_dataset(cfg)
    if data.labels is None:
        raise DataError("configured dataset has no labels to evaluate against")
    result = read_assignments(args.assignments)
    if result.assignments.shape[0] != data.n:
        raise DataError(
            f"assignments cover {result.assignments.shape[0]} samples, dataset has {data.n}"
        )
    table = evaluation.tabulate(result.assignments, data.labels)
    score = evaluation.purity(table)
    evaluation.write_contingency(cfg.output_path("table", args.table), table)
    print(f"purity={score:.4f}")
    if args.compare:
        ref = evaluation.PUBLISHED_PURITY.get(args.compare)
        if ref is None:
            raise InputError(
                f"no published numbers for {args.compare!r}; "
                f"known: {sorted(evaluation.PUBLISHED_PURITY)}"
            )
        cols = " ".join(f"{k}={v:.2f}" for k, v in ref.items())
        print(f"published[{args.compare}]: {cols}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = read_run_config(args.config)
    data = load_dataset(cfg)
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    report = evaluation.sweep_hidden_nodes(
        data,
        sizes,
        cfg.network_config(data.dim),
        cfg.training,
        dataset_name=cfg.data.dataset or cfg.data.path or "",
    )
    evaluation.write_sweep_csv(cfg.output_path("sweep", args.out), report)
    for row in report.rows:
        print(f"hidden={row.hidden_size} purity={row.purity!r} objective={row.final_objective!r}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    seed = 0
    if args.config:
        seed = read_run_config(args.config).training.seed
    bits = None if args.float64 else 120
    worst = run_gradient_check(
        trials=args.trials, seed=seed, step=args.step, precision_bits=bits, perturb=args.perturb
    )
    print(f"max_relative_error={worst!r} trials={args.trials} threshold=1e-06")
    return EXIT_OK if worst < 1e-6 else EXIT_CHECK_FAILED


def cmd_compare_table1(args) -> int:
    all_rows = []
    shortfall = False
    summary = []
    for name in ("banknote", "glass"):
        data = load_uci(name, args.data_dir)
        from .data import normalize_minmax

        data = normalize_minmax(data)
        rows = evaluation.purity_grid(data, name)
        all_rows.extend(rows)
        best = evaluation.best_grid_purity(rows)
        km = evaluation.best_grid_purity(rows, method="kmeans")
        published = evaluation.PUBLISHED_PURITY[name]["ours"]
        summary.append((name, best, km, published))
        print(f"{name}: best_purity={best:.4f} kmeans={km:.4f} published_ours={published:.2f}")
    evaluation.write_grid_csv(args.out, all_rows)
    beats = [name for name, best, km, _ in summary if best > km]
    if beats:
        print(f"entropy network beats k-means on: {', '.join(beats)}")
        return EXIT_OK
    print(f"entropy network did not beat k-means on either set; full grid in {args.out}")
    return EXIT_CHECK_FAILED


def cmd_print_config(args) -> int:
    print(DEFAULT_CONFIG, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entclust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a run config")
    p.add_argument("--config", required=True)
    p.add_argument("--model", help="model output path (default from config)")
    p.add_argument("--report", help="training report output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cluster", help="assign clusters with a trained model")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="assignments output path")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="purity of an assignments file against labels")
    p.add_argument("--config", required=True)
    p.add_argument("--assignments", required=True)
    p.add_argument("--table", help="contingency table output path")
    p.add_argument("--compare", help="print the published purity row for this dataset")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="train across hidden-layer widths")
    p.add_argument("--config", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated hidden widths")
    p.add_argument("--out", help="sweep CSV output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients")
    p.add_argument("--config", help="take the sampling seed from this run config")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--step", type=float, default=1e-8)
    p.add_argument("--float64", action="store_true",
                   help="evaluate the oracle in float64 instead of multi-precision")
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("compare-table1", help="grid run on banknote+glass vs published purity")
    p.add_argument("--data-dir", default=None, help=f"benchmark file directory (default {data_dir()})")
    p.add_argument("--out", default="table1_grid.csv", help="full grid CSV output path")
    p.set_defaults(func=cmd_compare_table1)

    p = sub.add_parser("print-config", help="print the default run config with comments")
    p.set_defaults(func=cmd_print_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except (DataError, InputError) as exc:
        return _fail("data", exc, EXIT_DATA)
    except TrainingError as exc:
        return _fail("training", exc, EXIT_TRAINING)
    except EntclustError as exc:  # pragma: no cover - safety net
        return _fail("internal", exc, EXIT_CHECK_FAILED)


if __name__ == "__main__":
    sys.exit(main())
