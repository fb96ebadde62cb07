"""Synthetic two-class expression data with planted informative genes."""

from __future__ import annotations

import numpy as np

from .dataset import ExpressionDataset


def make_expression_data(
    n_samples: int = 100,
    n_genes: int = 2000,
    n_informative: int = 20,
    shift: float = 2.0,
    seed: int = 0,
    classes: tuple[str, str] = ("tumor", "normal"),
) -> tuple[ExpressionDataset, list[str]]:
    """Balanced two-class data: unit-variance Gaussian noise everywhere, and
    on ``n_informative`` randomly placed genes the second class's mean is
    shifted by ``shift``. Returns the dataset and the planted gene ids.
    """
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((n_samples, n_genes))
    y = np.arange(n_samples) % 2
    rng.shuffle(y)
    planted = np.sort(rng.choice(n_genes, size=n_informative, replace=False))
    values[np.ix_(y == 1, planted)] += shift
    gene_ids = [f"g{j:05d}" for j in range(n_genes)]
    ds = ExpressionDataset(
        sample_ids=[f"s{i:04d}" for i in range(n_samples)],
        gene_ids=gene_ids,
        values=values,
        labels=[classes[c] for c in y],
        class_set=classes,
    )
    return ds, [gene_ids[j] for j in planted]


def random_matrix_dataset(n_samples: int, n_genes: int, seed: int = 0) -> ExpressionDataset:
    """Unstructured random data of a given shape with alternating labels."""
    rng = np.random.default_rng(seed)
    return ExpressionDataset(
        sample_ids=[f"s{i}" for i in range(n_samples)],
        gene_ids=[f"g{j}" for j in range(n_genes)],
        values=rng.lognormal(mean=5.0, sigma=1.0, size=(n_samples, n_genes)),
        labels=["tumor" if i % 2 else "normal" for i in range(n_samples)],
    )
