"""Fuzzy soft set similarity classification for gene expression data."""

from .baselines import fknn_memberships, fknn_predict, knn_predict
from .classifier import FuzzySoftSetModel, fit, load_model, predict, save_model, similarity
from .dataset import (
    DatasetError,
    ExpressionDataset,
    SplitPlan,
    load_csv,
    read_csv,
    stratified_kfold,
    stratified_split,
    write_csv,
)
from .evaluation import BenchmarkConfig, confusion, hcluster_dendrogram, metrics, run_benchmark
from .fuzzify import FuzzificationParams, FuzzifiedDataset, fit_params, smf, transform, zmf
from .genefilter import (
    DiscreteDistribution,
    GeneRanking,
    discretize,
    entropy,
    information_gain,
    rank_genes,
    select_top_k,
)

__version__ = "0.1.0"
