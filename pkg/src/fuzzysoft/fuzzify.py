"""S- and Z-shaped membership functions and dataset fuzzification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DatasetError, ExpressionDataset


def smf(x, a, b):
    """S-shaped membership of ``x`` rising from 0 at ``a`` to 1 at ``b``.

    Works elementwise on arrays. A degenerate support (``a == b``) gives 0.5
    everywhere.
    """
    x, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, a, b)))
    if np.any(a > b):
        raise ValueError("smf requires a <= b")
    width = b - a
    safe = np.where(width > 0, width, 1.0)
    mid = (a + b) / 2.0
    # branches not selected below may overflow for tiny supports
    with np.errstate(over="ignore"):
        rising = 2.0 * ((x - a) / safe) ** 2
        falling = 1.0 - 2.0 * ((x - b) / safe) ** 2
    out = np.where(x <= a, 0.0, np.where(x <= mid, rising, np.where(x < b, falling, 1.0)))
    out = np.where(width > 0, out, 0.5)
    return out if out.ndim else float(out)


def zmf(x, a, b):
    """Z-shaped membership, the complement ``1 - smf(x, a, b)``."""
    return 1.0 - smf(x, a, b)


@dataclass(frozen=True, eq=False)
class FuzzificationParams:
    gene_ids: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    fitted_on: int

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        if lower.shape != (len(self.gene_ids),) or upper.shape != lower.shape:
            raise ValueError("one (a, b) pair per gene is required")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("fuzzification bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("fuzzification bounds need a <= b")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __eq__(self, other):
        if not isinstance(other, FuzzificationParams):
            return NotImplemented
        return (
            self.gene_ids == other.gene_ids
            and self.fitted_on == other.fitted_on
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    __hash__ = None

    def bounds(self, gene_ids) -> tuple[np.ndarray, np.ndarray]:
        pos = {g: j for j, g in enumerate(self.gene_ids)}
        missing = [g for g in gene_ids if g not in pos]
        if missing:
            raise DatasetError(f"no fuzzification parameters for gene(s): {', '.join(missing[:10])}")
        idx = np.array([pos[g] for g in gene_ids], dtype=np.intp)
        return self.lower[idx], self.upper[idx]

    def to_dict(self) -> dict:
        return {
            "gene_ids": list(self.gene_ids),
            "a": self.lower.tolist(),
            "b": self.upper.tolist(),
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> FuzzificationParams:
        return cls(doc["gene_ids"], doc["a"], doc["b"], int(doc["fitted_on"]))


def fit_params(train: ExpressionDataset) -> FuzzificationParams:
    """Per-gene support (a, b) = training (min, max)."""
    return FuzzificationParams(
        gene_ids=train.gene_ids,
        lower=train.values.min(axis=0),
        upper=train.values.max(axis=0),
        fitted_on=train.n_samples,
    )


@dataclass(frozen=True, eq=False)
class FuzzifiedDataset:
    sample_ids: tuple[str, ...]
    parameter_ids: tuple[str, ...]
    grades: np.ndarray
    labels: tuple[str, ...]
    class_set: tuple[str, ...]


def parameter_ids_for(gene_ids) -> tuple[str, ...]:
    out = []
    for g in gene_ids:
        out += [f"S:{g}", f"Z:{g}"]
    return tuple(out)


def grade_matrix(values: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Interleaved (S, Z) grades: column 2j is S of gene j, 2j+1 is Z."""
    s = smf(values, lower[None, :], upper[None, :])
    out = np.empty((values.shape[0], 2 * values.shape[1]))
    out[:, 0::2] = s
    out[:, 1::2] = 1.0 - s
    return out


def transform(ds: ExpressionDataset, params: FuzzificationParams) -> FuzzifiedDataset:
    """Fuzzify every gene of ``ds``; out-of-range values saturate to 0 or 1."""
    lower, upper = params.bounds(ds.gene_ids)
    grades = grade_matrix(ds.values, lower, upper)
    grades.setflags(write=False)
    return FuzzifiedDataset(
        sample_ids=ds.sample_ids,
        parameter_ids=parameter_ids_for(ds.gene_ids),
        grades=grades,
        labels=ds.labels,
        class_set=ds.class_set,
    )
