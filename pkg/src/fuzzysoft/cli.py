"""Command-line interface: ``fuzzysoft {filter,train,predict,evaluate,dendrogram}``.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import classifier as fss
from .dataset import csv_has_column, read_csv, write_csv
from .evaluation import (
    CLASSIFIERS,
    LINKAGES,
    METRICS,
    BenchmarkConfig,
    hcluster_dendrogram,
    report_json,
    run_benchmark,
    write_accuracy_csv,
    write_metrics_csv,
    write_table_csv,
)
from .fuzzify import fit_params, transform
from .genefilter import DEFAULT_BINS, MODES, rank_genes, select_top_k

log = logging.getLogger("fuzzysoft")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("fraction must lie in (0, 1)")
    return v


def _fuzzifier(text: str) -> float:
    v = float(text)
    if not v > 1.0:
        raise argparse.ArgumentTypeError("m must exceed 1")
    return v


def _classifier_list(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [n for n in names if n not in CLASSIFIERS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"classifiers must be drawn from {','.join(CLASSIFIERS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, type=Path, help="input CSV")
    common.add_argument("--delimiter", default=",")
    common.add_argument("--label-column", default="class")
    common.add_argument("--config", type=Path, help="key=value file supplying defaults")
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    common.add_argument("-v", "--verbose", action="store_true")

    filtering = argparse.ArgumentParser(add_help=False)
    filtering.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
    filtering.add_argument("--filter-mode", choices=MODES, default="information_gain")
    filtering.add_argument("--top-k", type=_positive_int)

    parser = _Parser(prog="fuzzysoft", description="Fuzzy soft set classification of expression data")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("filter", parents=[common, filtering], help="rank genes and keep the top k")
    p.add_argument("--ranking", required=True, type=Path, help="ranking CSV (gene_id,score,rank)")
    p.add_argument("--output", type=Path, help="reduced dataset CSV (needs --top-k)")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("train", parents=[common, filtering], help="fit a fuzzy soft set model")
    p.add_argument("--model", required=True, type=Path)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="classify samples with a saved model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--output", type=Path, help="predictions CSV (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common, filtering], help="cross-validated comparison")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--classifiers", type=_classifier_list, default=CLASSIFIERS)
    split = p.add_mutually_exclusive_group()
    split.add_argument("--folds", type=_positive_int, default=5)
    split.add_argument("--test-fraction", type=_fraction)
    p.add_argument("--seed", type=_seed, default=42)
    p.add_argument("--k", type=_positive_int, default=5, help="neighbours for KNN / fuzzy KNN")
    p.add_argument("--m", type=_fuzzifier, default=2.0, help="fuzzy KNN fuzzifier")
    p.add_argument("--positive-class")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("dendrogram", parents=[common, filtering], help="gene dendrogram as Newick")
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--linkage", choices=LINKAGES, default="complete")
    p.add_argument("--metric", choices=METRICS, default="euclidean")
    p.set_defaults(func=cmd_dendrogram)
    return parser


def read_config_file(path: Path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _config_argv(cfg: dict[str, str], sub: argparse.ArgumentParser) -> list[str]:
    """Turn config entries into flags placed before the command-line flags."""
    known = {a.dest: a for a in sub._actions if a.option_strings}
    argv = []
    for key, value in cfg.items():
        if key not in known or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes"):
                argv.append(action.option_strings[-1])
        else:
            argv += [action.option_strings[-1], value]
    return argv


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        extra = _config_argv(read_config_file(args.config), sub)
        # later flags win in argparse, so config values go first
        args = parser.parse_args([args.command, *extra, *argv[1:]])
    return args


def _load(args, label_column="__default__"):
    col = args.label_column if label_column == "__default__" else label_column
    return read_csv(args.input, delimiter=args.delimiter, label_column=col)


def _filtered(ds, args):
    if args.top_k is None:
        return ds, None
    if args.top_k > ds.n_genes:
        raise ValueError(f"--top-k {args.top_k} exceeds the {ds.n_genes} genes in {args.input}")
    ranking = rank_genes(ds, args.filter_mode, args.bins)
    return select_top_k(ranking, args.top_k, ds), ranking


def cmd_filter(args) -> int:
    ds = _load(args)
    if args.output is not None and args.top_k is None:
        raise UsageError("--output requires --top-k")
    ranking = rank_genes(ds, args.filter_mode, args.bins)
    with open(args.ranking, "w", newline="", encoding="utf-8") as fh:
        ranking.write_csv(fh)
    if args.top_k is not None:
        if args.top_k > ds.n_genes:
            raise ValueError(f"--top-k {args.top_k} exceeds the {ds.n_genes} genes in {args.input}")
        reduced = select_top_k(ranking, args.top_k, ds)
        if args.output is not None:
            with open(args.output, "w", newline="", encoding="utf-8") as fh:
                write_csv(reduced, fh, delimiter=args.delimiter, label_column=args.label_column)
        log.info("kept %d of %d genes", reduced.n_genes, ds.n_genes)
    return EXIT_OK


def cmd_train(args) -> int:
    ds, _ = _filtered(_load(args), args)
    params = fit_params(ds)
    model = fss.fit(transform(ds, params), params)
    args.model.write_text(fss.save_model(model), encoding="utf-8")
    log.info("trained %d class centres over %d genes", len(model.class_ids), ds.n_genes)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = fss.load_model(args.model.read_text(encoding="utf-8"))
    if model.params is None:
        raise ValueError(f"model {args.model} has no fuzzification parameters")
    labeled = csv_has_column(args.input, args.label_column, args.delimiter)
    ds = _load(args, args.label_column if labeled else None)
    ds = ds.reindex_genes(model.params.gene_ids)
    preds, sims = model.predict_many(transform(ds, model.params).grades)

    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["sample_id", "predicted", *(f"similarity:{c}" for c in model.class_ids)])
        for sid, p, row in zip(ds.sample_ids, preds, sims.tolist()):
            w.writerow([sid, p, *map(repr, row)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_evaluate(args) -> int:
    ds = _load(args)
    config = BenchmarkConfig(
        classifiers=tuple(args.classifiers),
        folds=args.folds,
        test_fraction=args.test_fraction,
        seed=args.seed,
        bins=args.bins,
        top_k=args.top_k,
        k=args.k,
        m=args.m,
        filter_mode=args.filter_mode,
        positive_class=args.positive_class,
        threads=args.threads,
    )
    report = run_benchmark(ds, config)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(report) + "\n", encoding="utf-8")
    for name, writer in (("metrics.csv", write_metrics_csv), ("table.csv", write_table_csv)):
        with open(out / name, "w", newline="", encoding="utf-8") as fh:
            writer(report, fh)
    with open(out / "accuracy.csv", "w", newline="", encoding="utf-8") as fh:
        write_accuracy_csv(report, fh, dataset=args.input.stem)
    return EXIT_OK


def cmd_dendrogram(args) -> int:
    ds, _ = _filtered(_load(args), args)
    args.output.write_text(hcluster_dendrogram(ds, args.linkage, args.metric) + "\n", encoding="utf-8")
    log.info("dendrogram over %d genes", ds.n_genes)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        name = exc.filename if getattr(exc, "filename", None) else ""
        print(f"error: {exc.strerror or exc} {name}".rstrip(), file=sys.stderr)
        return EXIT_IO
    except (ValueError, csv.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
