"""Confusion counts, per-class metrics, the cross-validated benchmark and
gene dendrogram export."""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence, TextIO

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import classifier as fss
from .baselines import KNNClassifier, minmax_scale
from .dataset import DatasetError, ExpressionDataset, stratified_kfold, stratified_split
from .fuzzify import fit_params, transform
from .genefilter import DEFAULT_BINS, INFORMATION_GAIN, MODES, rank_genes

log = logging.getLogger(__name__)

CLASSIFIERS = ("fssc", "knn", "fknn")
CLASSIFIER_TITLES = {"fssc": "Fuzzy Soft Set", "knn": "KNN", "fknn": "Fuzzy KNN"}


@dataclass(frozen=True)
class ClassCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class ConfusionCounts:
    classes: tuple[str, ...]
    per_class: dict[str, ClassCounts]
    n_correct: int
    n_total: int
    # matrix[i][j]: true class i predicted as class j
    matrix: tuple[tuple[int, ...], ...] = ()


def confusion(y_true: Sequence[str], y_pred: Sequence[str], class_set: Sequence[str]) -> ConfusionCounts:
    """One-vs-rest tp/fp/tn/fn for every class."""
    if len(y_true) != len(y_pred) or len(y_true) == 0:
        raise ValueError("y_true and y_pred must be non-empty and of equal length")
    classes = tuple(class_set)
    pos = {c: i for i, c in enumerate(classes)}
    for y in (*y_true, *y_pred):
        if y not in pos:
            raise ValueError(f"label {y!r} not in class set {list(classes)}")
    mat = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        mat[pos[t], pos[p]] += 1
    n = len(y_true)
    per_class = {}
    for i, c in enumerate(classes):
        tp = int(mat[i, i])
        fn = int(mat[i].sum()) - tp
        fp = int(mat[:, i].sum()) - tp
        per_class[c] = ClassCounts(tp=tp, fp=fp, tn=n - tp - fp - fn, fn=fn)
    return ConfusionCounts(
        classes=classes,
        per_class=per_class,
        n_correct=int(np.trace(mat)),
        n_total=n,
        matrix=tuple(tuple(int(v) for v in row) for row in mat),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def class_metrics(counts: ClassCounts) -> dict[str, float | None]:
    return {
        "precision": _ratio(counts.tp, counts.tp + counts.fp),
        "sensitivity": _ratio(counts.tp, counts.tp + counts.fn),
        "specificity": _ratio(counts.tn, counts.tn + counts.fp),
    }


def metrics(counts: ConfusionCounts) -> dict:
    """Precision, sensitivity and specificity per class plus overall accuracy.

    A metric whose denominator is zero is ``None``.
    """
    return {
        "accuracy": _ratio(counts.n_correct, counts.n_total),
        "per_class": {c: class_metrics(counts.per_class[c]) for c in counts.classes},
    }


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkConfig:
    classifiers: tuple[str, ...] = CLASSIFIERS
    folds: int = 5
    test_fraction: float | None = None
    seed: int = 42
    bins: int = DEFAULT_BINS
    top_k: int | None = None
    k: int = 5
    m: float = 2.0
    filter_mode: str = INFORMATION_GAIN
    positive_class: str | None = None
    threads: int = 1

    def validate(self, ds: ExpressionDataset):
        unknown = [c for c in self.classifiers if c not in CLASSIFIERS]
        if unknown or not self.classifiers:
            raise ValueError(f"unknown classifier(s) {unknown}; choose from {CLASSIFIERS}")
        if self.filter_mode not in MODES:
            raise ValueError(f"unknown filter mode {self.filter_mode!r}")
        if self.bins < 1:
            raise ValueError("bins must be a positive integer")
        if self.top_k is not None and not 1 <= self.top_k <= ds.n_genes:
            raise ValueError(f"top-k must lie in [1, {ds.n_genes}], got {self.top_k}")
        if self.k < 1:
            raise ValueError("K must be a positive integer")
        if self.m <= 1:
            raise ValueError("fuzzifier m must exceed 1")
        if len(ds.class_set) < 2:
            raise DatasetError("evaluation needs at least two classes")
        if self.positive_class is not None and self.positive_class not in ds.class_set:
            raise ValueError(f"positive class {self.positive_class!r} is not a dataset label")


@dataclass
class FoldResult:
    fold: int
    train: list[int]
    test: list[int]
    selected_genes: list[str]
    predictions: dict[str, list[str]]
    similarities: list[list[float]] | None
    timings: dict[str, float] = field(default_factory=dict)


def fit_fold(train: ExpressionDataset, config: BenchmarkConfig):
    """Filter ranking and fuzzification fitted on the training split only."""
    if config.top_k is not None:
        ranking = rank_genes(train, config.filter_mode, config.bins)
        genes = list(ranking.gene_ids[: config.top_k])
    else:
        genes = list(train.gene_ids)
    params = fit_params(train.reindex_genes(genes))
    return genes, params


def _run_fold(ds: ExpressionDataset, fold_no: int, train_idx, test_idx, config: BenchmarkConfig) -> FoldResult:
    timings = {}
    t0 = time.perf_counter()
    train = ds.subset(train_idx)
    test = ds.subset(test_idx)
    genes, params = fit_fold(train, config)
    train = train.reindex_genes(genes)
    test = test.reindex_genes(genes)
    timings["filter_fuzzify"] = time.perf_counter() - t0

    predictions: dict[str, list[str]] = {}
    sims = None
    if any(c != "fssc" for c in config.classifiers) and config.k > train.n_samples:
        raise ValueError(f"K={config.k} exceeds the {train.n_samples} training samples of fold {fold_no}")
    for name in config.classifiers:
        t0 = time.perf_counter()
        if name == "fssc":
            model = fss.fit(transform(train, params), params)
            pred, sim = model.predict_many(transform(test, params).grades)
            predictions[name] = pred
            sims = sim.tolist()
        else:
            x_train = minmax_scale(train.values, params.lower, params.upper)
            x_test = minmax_scale(test.values, params.lower, params.upper)
            clf = KNNClassifier(k=config.k, fuzzy=(name == "fknn"), m=config.m)
            clf.fit(x_train, train.labels, classes=ds.class_set)
            predictions[name] = clf.predict(x_test)
        timings[name] = time.perf_counter() - t0
    return FoldResult(
        fold=fold_no,
        train=[int(i) for i in train_idx],
        test=[int(i) for i in test_idx],
        selected_genes=genes,
        predictions=predictions,
        similarities=sims,
        timings=timings,
    )


def make_plan(ds: ExpressionDataset, config: BenchmarkConfig):
    if config.test_fraction is not None:
        return stratified_split(ds, config.test_fraction, config.seed)
    return stratified_kfold(ds, config.folds, config.seed)


def run_benchmark(ds: ExpressionDataset, config: BenchmarkConfig) -> dict:
    """Cross-validated comparison of the configured classifiers.

    Metrics are computed once over the pooled test predictions of all folds.
    Wall-clock timings live under the top-level ``"timings"`` key only.
    """
    config.validate(ds)
    plan = make_plan(ds, config)
    t_start = time.perf_counter()
    jobs = [(i, tr, te) for i, (tr, te) in enumerate(plan.folds)]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            folds = list(pool.map(lambda j: _run_fold(ds, *j, config), jobs))
    else:
        folds = [_run_fold(ds, *j, config) for j in jobs]

    y_true = [ds.labels[i] for f in folds for i in f.test]
    positive = config.positive_class or (ds.class_set[0] if len(ds.class_set) == 2 else None)
    results = {}
    for name in config.classifiers:
        y_pred = [p for f in folds for p in f.predictions[name]]
        counts = confusion(y_true, y_pred, ds.class_set)
        met = metrics(counts)
        results[name] = {
            "accuracy": met["accuracy"],
            "per_class": {
                c: {**met["per_class"][c], **asdict(counts.per_class[c])} for c in ds.class_set
            },
            "confusion_matrix": [list(r) for r in counts.matrix],
        }
        if positive is not None:
            results[name]["positive_class"] = {"class": positive, **met["per_class"][positive]}
        log.info("%s accuracy %.4f", name, met["accuracy"])

    timings = {
        "total_seconds": time.perf_counter() - t_start,
        "folds": [f.timings for f in folds],
    }
    return {
        "config": _config_echo(config, plan.strategy, ds),
        "class_set": list(ds.class_set),
        "positive_class": positive,
        "classifiers": results,
        "folds": [
            {
                "fold": f.fold,
                "train": f.train,
                "test": f.test,
                "test_sample_ids": [ds.sample_ids[i] for i in f.test],
                "selected_genes": f.selected_genes,
                "predictions": f.predictions,
                "fssc_similarities": f.similarities,
            }
            for f in folds
        ],
        "timings": timings,
    }


def _config_echo(config: BenchmarkConfig, strategy: str, ds: ExpressionDataset) -> dict:
    echo = asdict(config)
    # thread count changes scheduling only, never results
    del echo["threads"]
    echo.update(classifiers=list(config.classifiers), strategy=strategy,
                n_samples=ds.n_samples, n_genes=ds.n_genes)
    return echo


def strip_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2)


def _fmt(v):
    return "" if v is None else repr(v)


def write_metrics_csv(report: dict, dest: TextIO):
    """Long format: one row per (classifier, class)."""
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["classifier", "class", "precision", "sensitivity", "specificity", "tp", "fp", "tn", "fn", "accuracy"])
    for name, res in report["classifiers"].items():
        for c, row in res["per_class"].items():
            w.writerow([name, c, _fmt(row["precision"]), _fmt(row["sensitivity"]), _fmt(row["specificity"]),
                        row["tp"], row["fp"], row["tn"], row["fn"], _fmt(res["accuracy"])])


def write_table_csv(report: dict, dest: TextIO):
    """Measure-by-classifier table for the positive class (two-class data)."""
    names = list(report["classifiers"])
    positive = report["positive_class"]
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["measure", *(CLASSIFIER_TITLES[n] for n in names)])
    for measure in ("precision", "sensitivity", "specificity"):
        if positive is None:
            break
        w.writerow([measure.capitalize(), *(_fmt(report["classifiers"][n]["positive_class"][measure]) for n in names)])
    w.writerow(["Accuracy", *(_fmt(report["classifiers"][n]["accuracy"]) for n in names)])


def write_accuracy_csv(report: dict, dest: TextIO, dataset: str = "dataset"):
    """Plot-ready accuracy series, one row per classifier."""
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["dataset", "classifier", "accuracy"])
    for name, res in report["classifiers"].items():
        w.writerow([dataset, name, _fmt(res["accuracy"])])


# ---------------------------------------------------------------------------
# dendrogram
# ---------------------------------------------------------------------------

LINKAGES = ("complete", "average", "single")
METRICS = ("euclidean", "correlation")


def gene_distances(values: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Pairwise distances between the columns (genes) of ``values``."""
    x = np.asarray(values, dtype=float).T
    if metric == "euclidean":
        d = squareform(pdist(x, "euclidean"))
    elif metric == "correlation":
        xc = x - x.mean(axis=1, keepdims=True)
        norm = np.sqrt((xc * xc).sum(axis=1))
        # constant genes are treated as uncorrelated with everything
        safe = np.where(norm > 0, norm, 1.0)
        xn = xc / safe[:, None]
        d = 1.0 - np.clip(xn @ xn.T, -1.0, 1.0)
        d[norm == 0, :] = 1.0
        d[:, norm == 0] = 1.0
    else:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    np.fill_diagonal(d, 0.0)
    return (d + d.T) / 2.0


@dataclass
class Merge:
    left: int
    right: int
    distance: float
    size: int


def agglomerate(dist: np.ndarray, linkage: str = "complete") -> list[Merge]:
    """Agglomerative clustering on a full distance matrix.

    Clusters live in slots 0..n-1; a merge of slots i < j keeps slot i. The
    closest pair is taken each step, ties going to the lexicographically
    smallest (i, j). ``Merge.left``/``right`` use scipy-style ids: leaves are
    0..n-1 and the t-th merge creates cluster n + t.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    d = np.array(dist, dtype=float)
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least two items to cluster")
    d[np.tril_indices(n)] = np.inf  # only i < j entries are live
    size = np.ones(n)
    ident = list(range(n))
    active = np.ones(n, dtype=bool)

    row_min = np.empty(n)
    row_arg = np.zeros(n, dtype=np.intp)

    def refresh(i):
        if i < n - 1:
            j = int(np.argmin(d[i, i + 1:])) + i + 1
            row_arg[i], row_min[i] = j, d[i, j]
        else:
            row_min[i] = np.inf

    for i in range(n):
        refresh(i)

    merges: list[Merge] = []
    for step in range(n - 1):
        i = int(np.argmin(row_min))
        j = int(row_arg[i])
        h = float(d[i, j])
        merges.append(Merge(ident[i], ident[j], h, int(size[i] + size[j])))

        # distances of the merged cluster to every other active slot k
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        di = np.where(others < i, d[others, i], d[i, others])
        dj = np.where(others < j, d[others, j], d[j, others])
        if linkage == "complete":
            new = np.maximum(di, dj)
        elif linkage == "single":
            new = np.minimum(di, dj)
        else:
            new = (size[i] * di + size[j] * dj) / (size[i] + size[j])

        lower = others[others < i]
        upper = others[others > i]
        d[lower, i] = new[others < i]
        d[i, upper] = new[others > i]
        d[j, :] = np.inf
        d[:, j] = np.inf
        active[j] = False
        size[i] += size[j]
        ident[i] = n + step
        row_min[j] = np.inf

        refresh(i)
        for k in others:
            a = row_arg[k]
            if k > i:
                if a == j:
                    refresh(k)
            elif a == i or a == j:
                refresh(k)
            elif d[k, i] < row_min[k] or (d[k, i] == row_min[k] and i < a):
                row_arg[k], row_min[k] = i, d[k, i]
    return merges


def _newick_label(name: str) -> str:
    if any(ch in name for ch in " ()[]':;,\t\n"):
        return "'" + name.replace("'", "''") + "'"
    return name


def to_newick(merges: list[Merge], leaf_names: Sequence[str]) -> str:
    """Newick text; node height is half the merge distance and branch
    lengths are height differences."""
    n = len(leaf_names)
    text = {i: _newick_label(str(name)) for i, name in enumerate(leaf_names)}
    height = {i: 0.0 for i in range(n)}
    for t, mg in enumerate(merges):
        node = n + t
        h = mg.distance / 2.0
        parts = [f"{text.pop(c)}:{h - height[c]!r}" for c in (mg.left, mg.right)]
        text[node] = "(" + ",".join(parts) + ")"
        height[node] = h
    (root,) = text.values()
    return root + ";"


def hcluster_dendrogram(ds: ExpressionDataset, linkage: str = "complete", metric: str = "euclidean") -> str:
    """Cluster the genes of ``ds`` (samples as coordinates) into a Newick tree."""
    if ds.n_genes < 2:
        raise ValueError("dendrogram needs at least two genes")
    merges = agglomerate(gene_distances(ds.values, metric), linkage)
    return to_newick(merges, ds.gene_ids)
