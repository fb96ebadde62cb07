"""Fuzzy soft set similarity classifier.

Each class is summarised by the mean of its fuzzified training vectors (the
class centre). An unknown sample is assigned to the class whose centre is
most similar under

    S(F, G) = 1 - sum|f_j - g_j| / sum(f_j + g_j)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fuzzify import FuzzificationParams, FuzzifiedDataset

MODEL_FORMAT = "fuzzysoft-model"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    """Model document cannot be parsed or is structurally invalid."""


class ModelVersionError(ModelFormatError):
    """Model document carries an unsupported version tag."""


def similarity(f, g) -> float:
    """Fuzzy soft set similarity of two grade vectors, in [0, 1].

    Two all-zero vectors are identical sets and score 1.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape or f.ndim != 1 or f.size == 0:
        raise ValueError(f"grade vectors must be 1-D of equal non-zero length, got {f.shape} and {g.shape}")
    if np.any((f < 0) | (f > 1)) or np.any((g < 0) | (g > 1)):
        raise ValueError("grades must lie in [0, 1]")
    den = float(np.sum(f + g))
    if den == 0.0:
        return 1.0
    return 1.0 - float(np.sum(np.abs(f - g))) / den


def similarity_matrix(samples: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Similarity of every sample (rows) to every centre (columns)."""
    diff = np.abs(samples[:, None, :] - centers[None, :, :]).sum(axis=2)
    den = (samples[:, None, :] + centers[None, :, :]).sum(axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = 1.0 - diff / den
    return np.where(den == 0.0, 1.0, sim)


@dataclass(frozen=True, eq=False)
class FuzzySoftSetModel:
    class_ids: tuple[str, ...]
    parameter_ids: tuple[str, ...]
    centers: np.ndarray
    training_counts: tuple[int, ...]
    params: FuzzificationParams | None = None

    def __post_init__(self):
        centers = np.array(self.centers, dtype=float)
        object.__setattr__(self, "class_ids", tuple(self.class_ids))
        object.__setattr__(self, "parameter_ids", tuple(self.parameter_ids))
        object.__setattr__(self, "training_counts", tuple(int(n) for n in self.training_counts))
        if not self.class_ids or len(set(self.class_ids)) != len(self.class_ids):
            raise ModelFormatError("class_ids must be non-empty and distinct")
        if centers.shape != (len(self.class_ids), len(self.parameter_ids)):
            raise ModelFormatError(
                f"centers have shape {centers.shape}, expected "
                f"{(len(self.class_ids), len(self.parameter_ids))}"
            )
        if len(self.training_counts) != len(self.class_ids):
            raise ModelFormatError("one training count per class is required")
        if np.any(~np.isfinite(centers)) or np.any((centers < 0) | (centers > 1)):
            raise ModelFormatError("center grades must lie in [0, 1]")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    def __eq__(self, other):
        if not isinstance(other, FuzzySoftSetModel):
            return NotImplemented
        return (
            self.class_ids == other.class_ids
            and self.parameter_ids == other.parameter_ids
            and self.training_counts == other.training_counts
            and np.array_equal(self.centers, other.centers)
            and self.params == other.params
        )

    __hash__ = None

    def similarities(self, grades: np.ndarray) -> np.ndarray:
        grades = np.atleast_2d(np.asarray(grades, dtype=float))
        if grades.shape[1] != len(self.parameter_ids):
            raise ValueError(
                f"sample has {grades.shape[1]} grades, model expects {len(self.parameter_ids)}"
            )
        return similarity_matrix(grades, self.centers)

    def predict(self, sample) -> tuple[str, dict[str, float]]:
        """Most similar class for one grade vector, plus every class's similarity."""
        sims = self.similarities(sample)[0]
        # argmax returns the first maximum, i.e. class order breaks ties
        best = int(np.argmax(sims))
        return self.class_ids[best], dict(zip(self.class_ids, sims.tolist()))

    def predict_many(self, grades: np.ndarray) -> tuple[list[str], np.ndarray]:
        sims = self.similarities(grades)
        return [self.class_ids[i] for i in np.argmax(sims, axis=1)], sims


def fit(train: FuzzifiedDataset, params: FuzzificationParams | None = None) -> FuzzySoftSetModel:
    """Class centres as the arithmetic mean of each class's grade vectors."""
    grades = np.asarray(train.grades, dtype=float)
    if grades.ndim != 2 or grades.shape[1] != len(train.parameter_ids):
        raise ValueError("grade rows must all have one entry per parameter")
    labels = np.asarray(train.labels, dtype=object)
    if len(labels) != grades.shape[0]:
        raise ValueError("one label per training sample is required")
    centers, counts = [], []
    for c in train.class_set:
        rows = grades[labels == c]
        if len(rows) == 0:
            raise ValueError(f"class {c!r} has no training samples")
        centers.append(rows.mean(axis=0))
        counts.append(len(rows))
    return FuzzySoftSetModel(
        class_ids=train.class_set,
        parameter_ids=train.parameter_ids,
        centers=np.vstack(centers),
        training_counts=counts,
        params=params,
    )


def predict(model: FuzzySoftSetModel, sample) -> tuple[str, dict[str, float]]:
    return model.predict(sample)


def model_to_dict(model: FuzzySoftSetModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "class_ids": list(model.class_ids),
        "parameter_ids": list(model.parameter_ids),
        "centers": model.centers.tolist(),
        "fuzzification_params": model.params.to_dict() if model.params is not None else None,
        "training_counts": list(model.training_counts),
    }


def save_model(model: FuzzySoftSetModel) -> str:
    """JSON document; floats use shortest round-trip repr so centres reload bit-exactly."""
    return json.dumps(model_to_dict(model), indent=2)


def load_model(text: str) -> FuzzySoftSetModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a fuzzysoft model document")
    if doc.get("version") != MODEL_VERSION:
        raise ModelVersionError(
            f"unsupported model version {doc.get('version')!r} (expected {MODEL_VERSION})"
        )
    try:
        raw_params = doc["fuzzification_params"]
        params = FuzzificationParams.from_dict(raw_params) if raw_params is not None else None
        return FuzzySoftSetModel(
            class_ids=doc["class_ids"],
            parameter_ids=doc["parameter_ids"],
            centers=doc["centers"],
            training_counts=doc["training_counts"],
            params=params,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model document: {exc}") from None


def gene_ids_of(parameter_ids: Sequence[str]) -> list[str]:
    """Gene ids behind (S:g, Z:g) parameter names, in order, without repeats."""
    return list(dict.fromkeys(p.split(":", 1)[1] for p in parameter_ids))
