"""Loading, validating and splitting labeled expression datasets.

File layout: one sample per row, a header row, the sample id in the first
column, a label column (default ``class``) and numeric gene columns for
everything else. Values are taken as given; no normalisation or imputation.

Shuffling uses :func:`numpy.random.default_rng` (PCG64) seeded with the
user seed, so a split is reproducible on any platform running the same
numpy bit generator.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or inconsistent datasets."""


@dataclass(frozen=True, eq=False)
class ExpressionDataset:
    sample_ids: tuple[str, ...]
    gene_ids: tuple[str, ...]
    values: np.ndarray
    labels: tuple[str, ...] = ()
    class_set: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.class_set and self.labels:
            object.__setattr__(self, "class_set", tuple(dict.fromkeys(self.labels)))
        else:
            object.__setattr__(self, "class_set", tuple(self.class_set))
        self._validate()

    def _validate(self):
        m, n = len(self.sample_ids), len(self.gene_ids)
        if m == 0:
            raise DatasetError("dataset has no samples")
        if n == 0:
            raise DatasetError("dataset has no gene columns")
        if self.values.shape != (m, n):
            raise DatasetError(f"values have shape {self.values.shape}, expected {(m, n)}")
        if not np.all(np.isfinite(self.values)):
            raise DatasetError("values contain NaN or infinity")
        _check_unique(self.sample_ids, "sample")
        _check_unique(self.gene_ids, "gene")
        if self.labels:
            if len(self.labels) != m:
                raise DatasetError(f"{len(self.labels)} labels for {m} samples")
            missing = set(self.labels) - set(self.class_set)
            if missing:
                raise DatasetError(f"labels not in class_set: {sorted(missing)}")
        elif self.class_set:
            raise DatasetError("class_set given for an unlabeled dataset")

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n_genes(self) -> int:
        return len(self.gene_ids)

    @property
    def is_labeled(self) -> bool:
        return bool(self.labels)

    def label_codes(self) -> np.ndarray:
        """Labels as integer indices into ``class_set``."""
        lookup = {c: i for i, c in enumerate(self.class_set)}
        return np.array([lookup[y] for y in self.labels], dtype=np.intp)

    def subset(self, rows: Sequence[int]) -> ExpressionDataset:
        """Dataset restricted to ``rows``; class_set order is kept."""
        rows = np.asarray(rows, dtype=np.intp)
        return ExpressionDataset(
            sample_ids=[self.sample_ids[i] for i in rows],
            gene_ids=self.gene_ids,
            values=self.values[rows],
            labels=[self.labels[i] for i in rows] if self.labels else (),
            class_set=self.class_set if self.labels else (),
        )

    def select_genes(self, columns: Sequence[int]) -> ExpressionDataset:
        columns = np.asarray(columns, dtype=np.intp)
        return ExpressionDataset(
            sample_ids=self.sample_ids,
            gene_ids=[self.gene_ids[j] for j in columns],
            values=self.values[:, columns],
            labels=self.labels,
            class_set=self.class_set,
        )

    def reindex_genes(self, gene_ids: Sequence[str]) -> ExpressionDataset:
        """Reorder columns to ``gene_ids``; extra columns are dropped."""
        pos = {g: j for j, g in enumerate(self.gene_ids)}
        missing = [g for g in gene_ids if g not in pos]
        if missing:
            raise DatasetError(f"input is missing gene(s): {', '.join(missing[:10])}")
        return self.select_genes([pos[g] for g in gene_ids])

    def __eq__(self, other):
        if not isinstance(other, ExpressionDataset):
            return NotImplemented
        return (
            self.sample_ids == other.sample_ids
            and self.gene_ids == other.gene_ids
            and self.labels == other.labels
            and self.class_set == other.class_set
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _check_unique(ids: Iterable[str], kind: str):
    seen = set()
    for x in ids:
        if x in seen:
            raise DatasetError(f"duplicate {kind} id {x!r}")
        seen.add(x)


def load_csv(
    source: TextIO | Iterable[str],
    delimiter: str = ",",
    label_column: str | None = "class",
) -> ExpressionDataset:
    """Parse a delimiter-separated expression table.

    ``label_column=None`` reads an unlabeled table (every column after the
    id is a gene). Rows are converted as they are read so only one row of
    text is held at a time.
    """
    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty input: no header row") from None
    header = [h.strip() for h in header]
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]
    width = len(header)

    label_pos = None
    if label_column is not None:
        if label_column not in header[1:]:
            raise DatasetError(f"missing label column {label_column!r}")
        label_pos = header.index(label_column, 1)
    gene_pos = [j for j in range(1, width) if j != label_pos]
    gene_ids = [header[j] for j in gene_pos]
    _check_unique(gene_ids, "gene")

    sample_ids: list[str] = []
    labels: list[str] = []
    rows: list[np.ndarray] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise DatasetError(f"line {lineno}: expected {width} fields, found {len(row)}")
        sid = row[0].strip()
        out = np.empty(len(gene_pos))
        for k, j in enumerate(gene_pos):
            cell = row[j]
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"non-numeric value {cell!r} at sample {sid!r}, gene {header[j]!r}"
                ) from None
            if not math.isfinite(v):
                raise DatasetError(
                    f"non-finite value {cell!r} at sample {sid!r}, gene {header[j]!r}"
                )
            out[k] = v
        sample_ids.append(sid)
        rows.append(out)
        if label_pos is not None:
            labels.append(row[label_pos].strip())

    if not rows:
        raise DatasetError("dataset has no sample rows")
    values = np.vstack(rows)
    del rows
    return ExpressionDataset(sample_ids, gene_ids, values, labels)


def read_csv(path: str | Path, delimiter: str = ",", label_column: str | None = "class"):
    with open(path, newline="", encoding="utf-8") as fh:
        return load_csv(fh, delimiter=delimiter, label_column=label_column)


def csv_has_column(path: str | Path, name: str, delimiter: str = ",") -> bool:
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh, delimiter=delimiter), [])
    return name in [h.strip() for h in header[1:]]


def write_csv(ds: ExpressionDataset, dest: TextIO, delimiter: str = ",", label_column: str = "class"):
    """Write ``ds`` so that :func:`load_csv` restores it bit-exactly."""
    writer = csv.writer(dest, delimiter=delimiter, lineterminator="\n")
    header = ["id", *ds.gene_ids]
    if ds.is_labeled:
        header.append(label_column)
    writer.writerow(header)
    for i, sid in enumerate(ds.sample_ids):
        row = [sid, *map(repr, ds.values[i].tolist())]
        if ds.is_labeled:
            row.append(ds.labels[i])
        writer.writerow(row)


def to_csv_text(ds: ExpressionDataset, delimiter: str = ",") -> str:
    buf = io.StringIO()
    write_csv(ds, buf, delimiter=delimiter)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitPlan:
    folds: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    seed: int
    strategy: str

    def to_json(self) -> str:
        doc = {
            "strategy": self.strategy,
            "seed": self.seed,
            "folds": [{"train": list(tr), "test": list(te)} for tr, te in self.folds],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> SplitPlan:
        doc = json.loads(text)
        folds = tuple(
            (tuple(int(i) for i in f["train"]), tuple(int(i) for i in f["test"]))
            for f in doc["folds"]
        )
        return cls(folds=folds, seed=int(doc["seed"]), strategy=doc["strategy"])


def _class_members(ds: ExpressionDataset) -> list[np.ndarray]:
    if not ds.is_labeled:
        raise DatasetError("splitting requires a labeled dataset")
    codes = ds.label_codes()
    return [np.flatnonzero(codes == c) for c in range(len(ds.class_set))]


def stratified_split(ds: ExpressionDataset, test_fraction: float, seed: int) -> SplitPlan:
    """Single stratified holdout split.

    Each class contributes ``round(test_fraction * size)`` samples to the test
    set, so the per-class test count is within half a sample of the exact
    proportion.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    members = _class_members(ds)
    for c, idx in zip(ds.class_set, members):
        if len(idx) < 2:
            raise DatasetError(f"class {c!r} has {len(idx)} sample(s); at least 2 required")
    rng = np.random.default_rng(seed)
    test: list[int] = []
    for idx in members:
        n_test = int(round(test_fraction * len(idx)))
        n_test = min(n_test, len(idx) - 1)
        test.extend(rng.permutation(idx)[:n_test].tolist())
    if not test:
        raise DatasetError("test_fraction too small: test set would be empty")
    test_set = set(test)
    train = tuple(i for i in range(ds.n_samples) if i not in test_set)
    return SplitPlan(folds=((train, tuple(sorted(test))),), seed=seed, strategy="holdout")


def stratified_kfold(ds: ExpressionDataset, k: int, seed: int) -> SplitPlan:
    """Stratified k-fold partition.

    Each class is shuffled and dealt round-robin over the folds; the dealing
    position carries over between classes so fold sizes stay balanced too.
    """
    if k < 2:
        raise DatasetError(f"k must be at least 2, got {k}")
    members = _class_members(ds)
    smallest = min(len(idx) for idx in members)
    if k > smallest:
        raise DatasetError(f"k={k} exceeds the smallest class size ({smallest})")
    rng = np.random.default_rng(seed)
    buckets: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for idx in members:
        for pos, i in enumerate(rng.permutation(idx).tolist()):
            buckets[(offset + pos) % k].append(i)
        offset = (offset + len(idx)) % k
    folds = []
    everything = range(ds.n_samples)
    for bucket in buckets:
        test = set(bucket)
        folds.append((tuple(i for i in everything if i not in test), tuple(sorted(bucket))))
    return SplitPlan(folds=tuple(folds), seed=seed, strategy="kfold")
