import numpy as np
import pytest

import oracles
from fuzzysoft.baselines import (
    KNNClassifier,
    fknn_memberships,
    fknn_predict,
    knn_predict,
    minmax_scale,
    nearest_neighbors,
)

POINTS = np.array([[0.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
LABELS = ["A", "A", "B"]


def test_knn_examples():
    assert knn_predict(POINTS, LABELS, [5.0, 5.0], 1) == "B"
    assert knn_predict(POINTS, LABELS, [0.0, 0.4], 3) == "A"


def test_knn_errors():
    with pytest.raises(ValueError):
        knn_predict(POINTS, LABELS, [0.0, 0.0], 0)
    with pytest.raises(ValueError):
        knn_predict(POINTS, LABELS, [0.0, 0.0], 4)
    with pytest.raises(ValueError):
        knn_predict(POINTS, LABELS, [0.0, 0.0, 0.0], 1)


def test_neighbor_ties_by_index():
    pts = np.array([[1.0], [-1.0], [1.0]])
    neigh = nearest_neighbors(pts, ["a", "b", "c"], [0.0], 2)
    assert [n.index for n in neigh] == [0, 1]


def test_vote_tie_uses_distance_then_class_order():
    pts = np.array([[1.0], [-2.0]])
    assert knn_predict(pts, ["a", "b"], [0.0], 2) == "a"
    assert knn_predict(pts, ["b", "a"], [0.0], 2) == "b"
    sym = np.array([[1.0], [-1.0]])
    assert knn_predict(sym, ["x", "y"], [0.0], 2, classes=["y", "x"]) == "y"


def test_knn_matches_exhaustive_oracle():
    rng = np.random.default_rng(31)
    for _ in range(60):
        m = int(rng.integers(1, 51))
        pts = rng.uniform(size=(m, 2))
        labels = [f"c{v}" for v in rng.integers(0, 3, m)]
        q = rng.uniform(size=2)
        for k in range(1, min(10, m) + 1):
            assert knn_predict(pts, labels, q, k) == oracles.knn_predict(pts.tolist(), labels, q.tolist(), k)


def test_knn_permutation_invariant():
    rng = np.random.default_rng(2)
    for _ in range(30):
        pts = rng.uniform(size=(30, 2))
        labels = [f"c{v}" for v in rng.integers(0, 3, 30)]
        classes = ["c0", "c1", "c2"]
        perm = rng.permutation(30)
        q = rng.uniform(size=2)
        for k in (1, 3, 5, 8):
            a = knn_predict(pts, labels, q, k, classes)
            b = knn_predict(pts[perm], [labels[i] for i in perm], q, k, classes)
            assert a == b


def test_fknn_examples():
    pts = np.array([[1.0], [-2.0]])
    u = fknn_memberships(pts, ["A", "B"], [0.0], 2, m=2.0)
    assert abs(u["A"] - 0.8) <= 1e-12 and abs(u["B"] - 0.2) <= 1e-12
    assert fknn_predict(pts, ["A", "B"], [0.0], 2) == "A"
    same = fknn_memberships(POINTS, ["B", "B", "A"], [0.0, 0.5], 2)
    assert same == {"B": 1.0, "A": 0.0}
    hit = fknn_memberships(POINTS, LABELS, [5.0, 5.0], 3)
    assert hit["B"] == pytest.approx(1.0, abs=1e-20)


def test_fknn_rejects_small_m():
    with pytest.raises(ValueError):
        fknn_memberships(POINTS, LABELS, [0.0, 0.0], 1, m=1.0)


def test_fknn_oracle_and_sum():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        m = int(rng.integers(1, 30))
        pts = rng.uniform(size=(m, 3))
        labels = [f"c{v}" for v in rng.integers(0, 3, m)]
        q = rng.uniform(size=3)
        k = int(rng.integers(1, m + 1))
        fm = float(rng.uniform(1.2, 3.0))
        u = fknn_memberships(pts, labels, q, k, fm)
        assert abs(sum(u.values()) - 1.0) <= 1e-9
        ref = oracles.fknn_memberships(pts.tolist(), labels, q.tolist(), k, fm)
        for c in ref:
            assert u[c] == pytest.approx(ref[c], abs=1e-12)
        best = max(ref.values())
        assert fknn_predict(pts, labels, q, k, fm) == next(c for c in ref if ref[c] == best)
        if k == 1:
            assert fknn_predict(pts, labels, q, 1, fm) == knn_predict(pts, labels, q, 1)


def test_single_class_all_neighbours():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(6, 2))
    labels = ["only"] * 6
    assert knn_predict(pts, labels, [0, 0], 6) == "only"
    assert fknn_predict(pts, labels, [0, 0], 6) == "only"


def test_classifier_wrapper_and_scaling():
    lower, upper = np.array([0.0, 1.0]), np.array([10.0, 1.0])
    x = minmax_scale(np.array([[5.0, 3.0], [20.0, 1.0]]), lower, upper)
    np.testing.assert_array_equal(x, [[0.5, 0.5], [1.0, 0.5]])
    clf = KNNClassifier(k=1).fit(POINTS, LABELS)
    assert clf.predict([[0.1, 0.1], [4.0, 4.0]]) == ["A", "B"]
    fclf = KNNClassifier(k=2, fuzzy=True).fit(POINTS, LABELS)
    assert fclf.predict([[0.1, 0.1]]) == ["A"]
