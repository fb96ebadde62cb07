import re

import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage as scipy_linkage
from scipy.spatial.distance import squareform

import oracles
from fuzzysoft.dataset import ExpressionDataset
from fuzzysoft.evaluation import agglomerate, gene_distances, hcluster_dendrogram, to_newick


def genes_ds(values, names=None):
    values = np.asarray(values, dtype=float)
    names = names or [f"g{j + 1}" for j in range(values.shape[1])]
    return ExpressionDataset([f"s{i}" for i in range(values.shape[0])], names, values)


def leaves(newick):
    return re.findall(r"[(,]([^(),:;]+):", newick)


def test_two_genes():
    ds = genes_ds([[0.0, 3.0], [0.0, 4.0]])
    assert hcluster_dendrogram(ds) == "(g1:2.5,g2:2.5);"


def test_three_genes_closest_pair_first():
    d = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    merges = agglomerate(d, "complete")
    assert {merges[0].left, merges[0].right} == {0, 1}
    assert merges[0].distance == 1.0
    assert merges[1].distance == 3.0
    assert to_newick(merges, ["a", "b", "c"]) == "((a:0.5,b:0.5):1.0,c:1.5);"


def test_tie_breaks_on_smallest_pair():
    d = np.ones((4, 4)) - np.eye(4)
    merges = agglomerate(d, "average")
    assert (merges[0].left, merges[0].right) == (0, 1)
    # merged cluster 4 keeps slot 0, so (slot 0, slot 2) is the smallest tied pair
    assert (merges[1].left, merges[1].right) == (4, 2)


def test_needs_two_genes():
    with pytest.raises(ValueError):
        hcluster_dendrogram(genes_ds([[1.0], [2.0]]))


@pytest.mark.parametrize("linkage", ["complete", "average", "single"])
def test_matches_naive_oracle(linkage):
    rng = np.random.default_rng(len(linkage))
    for _ in range(20):
        n = int(rng.integers(2, 12))
        x = rng.normal(size=(5, n))
        d = gene_distances(x)
        got = agglomerate(d, linkage)
        ref = oracles.agglomerate(d.tolist(), linkage)
        # reconstruct member sets of each merge
        members = {i: (i,) for i in range(n)}
        for t, mg in enumerate(got):
            members[n + t] = tuple(sorted(members[mg.left] + members[mg.right]))
            assert members[n + t] == ref[t][0]
            assert mg.distance == pytest.approx(ref[t][1], abs=1e-12)


@pytest.mark.parametrize("linkage", ["complete", "average", "single"])
def test_heights_match_scipy(linkage):
    rng = np.random.default_rng(5)
    x = rng.normal(size=(8, 60))
    d = gene_distances(x)
    ours = sorted(m.distance for m in agglomerate(d, linkage))
    theirs = sorted(scipy_linkage(squareform(d, checks=False), method=linkage)[:, 2])
    np.testing.assert_allclose(ours, theirs, atol=1e-12)


@pytest.mark.parametrize("linkage", ["complete", "average", "single"])
@pytest.mark.parametrize("metric", ["euclidean", "correlation"])
def test_monotone_heights_and_leaf_count(linkage, metric):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 40))
    x[:, 3] = 1.0  # constant gene under correlation distance
    d = gene_distances(x, metric)
    merges = agglomerate(d, linkage)
    n = x.shape[1]
    height = {i: 0.0 for i in range(n)}
    for t, mg in enumerate(merges):
        assert mg.distance >= height[mg.left] and mg.distance >= height[mg.right]
        height[n + t] = mg.distance
    text = hcluster_dendrogram(genes_ds(x), linkage, metric)
    assert sorted(leaves(text)) == sorted(f"g{j + 1}" for j in range(n))
    assert text.endswith(";")
    assert not re.search(r":-", text)


def test_correlation_distance_values():
    x = np.array([[1.0, 2.0, -1.0, 5.0], [2.0, 4.0, -2.0, 5.0], [3.0, 6.0, -3.0, 5.0]])
    d = gene_distances(x, "correlation")
    assert d[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert d[0, 2] == pytest.approx(2.0, abs=1e-12)
    assert d[0, 3] == 1.0


def test_quoted_leaf_names():
    ds = genes_ds([[0.0, 1.0], [0.0, 1.0]], names=["gene a", "b"])
    assert hcluster_dendrogram(ds).startswith("('gene a':")
