"""Command-line interface.

Subcommands: make-corpus, train-model, build-grid, run-assure, report.
Exit codes: 0 success, 2 config error, 3 numerical/oracle error, 4 format
error.
"""

import argparse
import csv
import sys
from pathlib import Path

from assuremap import classifier, digits, harness, idx
from assuremap.errors import ConfigError, FormatError, NumericalError, OracleError


def _config_overrides(args) -> dict:
    keys = ("seed", "budget", "threshold", "points_per_dim", "synthetic", "alpha")
    overrides = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "few_shot", False):
        overrides["few_shot"] = True
    return overrides


def _resolved_config(args) -> dict:
    raw = harness.load_config(args.config) if args.config else {}
    return harness.resolve_config(raw, _config_overrides(args))


def _cmd_make_corpus(args) -> int:
    corpus = digits.make_corpus(args.per_class, args.seed)
    idx.write_idx_pair(args.out_images, args.out_labels, corpus)
    print(f"wrote {len(corpus)} images: {args.out_images}, {args.out_labels}")
    return 0


def _cmd_train_model(args) -> int:
    if (args.corpus_images is None) != (args.corpus_labels is None):
        raise ConfigError("--corpus-images and --corpus-labels must be given together")
    if (args.held_out_images is None) != (args.held_out_labels is None):
        raise ConfigError("--held-out-images and --held-out-labels must be given together")
    if args.corpus_images:
        corpus = idx.read_idx_pair(args.corpus_images, args.corpus_labels)
    else:
        corpus = digits.make_corpus(args.per_class, args.corpus_seed)
    train, held_out = digits.train_test_split(corpus, args.test_fraction, args.corpus_seed)
    config = classifier.TrainConfig(
        hidden_dim=args.hidden, epochs=args.epochs, seed=args.seed
    )
    model = classifier.train_model(train, config)
    accuracy = classifier.evaluate_accuracy(model, held_out)
    classifier.export_model(model, args.out)
    print(f"trained model -> {args.out} (held-out accuracy {accuracy:.4f})")
    if args.held_out_images:
        idx.write_idx_pair(args.held_out_images, args.held_out_labels, held_out)
        print(
            f"wrote {len(held_out)} held-out images: "
            f"{args.held_out_images}, {args.held_out_labels}"
        )
    return 0


def _cmd_build_grid(args) -> int:
    cfg = _resolved_config(args)
    space, threshold, truth_fn, _ = harness.prepare_experiment(cfg)
    grid = harness.build_grid(space, cfg["points_per_dim"], truth_fn, threshold)
    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*space.names, "value", "truth"])
        for lvl, value, truth in zip(grid.levels, grid.values, grid.truth):
            writer.writerow([*(repr(float(v)) for v in lvl), repr(float(value)), int(truth)])
    positives = int(grid.truth.sum())
    print(f"wrote {len(grid.truth)} grid points ({positives} positive) -> {out}")
    return 0


def _cmd_run_assure(args) -> int:
    report, run_dir = harness.run_experiment(_resolved_config(args), args.out)
    print(
        f"run {run_dir}: f1={report.f1:.4f} precision={report.precision:.4f} "
        f"recall={report.recall:.4f} oracle_calls={report.oracle_calls} "
        f"wall_clock={report.wall_clock_seconds:.1f}s"
    )
    return 0


def _cmd_report(args) -> int:
    run = Path(args.run)
    src = run / "report.json" if run.is_dir() else run
    if not src.is_file():
        raise ConfigError(f"missing report file: {src}")
    report = harness.report_load(src)
    out = args.out or f"report.{args.format}"
    harness.report_emit(report, args.format, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assuremap",
        description="Level-set assurance maps for image classifiers under distortion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("make-corpus", help="render the generated digit corpus to IDX")
    corpus.add_argument("--out-images", required=True)
    corpus.add_argument("--out-labels", required=True)
    corpus.add_argument("--per-class", type=int, default=200)
    corpus.add_argument("--seed", type=int, default=0)
    corpus.set_defaults(func=_cmd_make_corpus)

    train = sub.add_parser("train-model", help="train the classifier under test")
    train.add_argument("--out", required=True, help="model text file to write")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--hidden", type=int, default=64)
    train.add_argument("--epochs", type=int, default=30)
    train.add_argument("--per-class", type=int, default=200)
    train.add_argument("--corpus-seed", type=int, default=0)
    train.add_argument("--test-fraction", type=float, default=0.2)
    train.add_argument("--corpus-images", help="train on this IDX pair instead of rendering")
    train.add_argument("--corpus-labels")
    train.add_argument("--held-out-images", help="write the held-out split to this IDX pair")
    train.add_argument("--held-out-labels")
    train.set_defaults(func=_cmd_train_model)

    def add_run_flags(p, with_run_only: bool):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--threshold", type=float)
        p.add_argument("--points-per-dim", type=int, dest="points_per_dim")
        if with_run_only:
            p.add_argument("--few-shot", action="store_true", dest="few_shot")
            p.add_argument("--synthetic", help="IDX images file or augmenter output dir")
            p.add_argument("--alpha", type=float)

    grid = sub.add_parser("build-grid", help="evaluate ground truth on the full grid")
    add_run_flags(grid, with_run_only=False)
    grid.add_argument("--out", default="grid.csv", help="CSV file to write")
    grid.set_defaults(func=_cmd_build_grid)

    assure = sub.add_parser("run-assure", help="run the sampling loop and score the grid")
    add_run_flags(assure, with_run_only=True)
    assure.add_argument("--out", default="runs", help="directory for run outputs")
    assure.set_defaults(func=_cmd_run_assure)

    report = sub.add_parser("report", help="re-emit a persisted run report")
    report.add_argument("--run", required=True, help="run directory or report.json path")
    report.add_argument("--format", choices=("json", "csv"), default="json")
    report.add_argument("--out")
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except (NumericalError, OracleError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
