import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzysoft.dataset import ExpressionDataset
from fuzzysoft.evaluation import (
    BenchmarkConfig,
    confusion,
    fit_fold,
    metrics,
    report_json,
    run_benchmark,
    strip_timings,
    write_accuracy_csv,
    write_metrics_csv,
    write_table_csv,
)
from fuzzysoft.synthetic import make_expression_data

labels3 = st.lists(st.sampled_from("ABC"), min_size=1, max_size=40)


def test_confusion_hand_counted():
    c = confusion(list("AAB"), list("ABB"), ["A", "B"])
    a = c.per_class["A"]
    assert (a.tp, a.fn, a.fp, a.tn) == (1, 1, 0, 1)
    b = c.per_class["B"]
    assert (b.tp, b.fn, b.fp, b.tn) == (1, 0, 1, 1)
    assert c.matrix == ((1, 1), (0, 1))
    met = metrics(c)
    assert met["per_class"]["A"] == {"precision": 1.0, "sensitivity": 0.5, "specificity": 1.0}
    assert met["accuracy"] == 2 / 3


def test_confusion_perfect_and_all_wrong():
    c = confusion(list("ABAB"), list("ABAB"), "AB")
    assert all(v.fp == 0 and v.fn == 0 for v in c.per_class.values())
    w = confusion(list("ABAB"), list("BABA"), "AB")
    assert all(v.tp == 0 for v in w.per_class.values())


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion(["A"], ["Z"], ["A", "B"])
    with pytest.raises(ValueError):
        confusion(["A"], [], ["A"])


def test_metric_precision_cases():
    c = confusion(list("AAAB"), list("AAAA"), "AB")
    assert metrics(c)["per_class"]["A"]["precision"] == 0.75
    perfect = confusion(list("AAB"), list("AAB"), "AB")
    assert metrics(perfect)["per_class"]["A"]["precision"] == 1.0
    none_pred = confusion(list("AAB"), list("BBB"), "AB")
    assert metrics(none_pred)["per_class"]["A"]["precision"] is None


@settings(max_examples=200, deadline=None)
@given(labels3, st.randoms())
def test_confusion_invariants(y_true, rnd):
    y_pred = [rnd.choice("ABC") for _ in y_true]
    c = confusion(y_true, y_pred, "ABC")
    for counts in c.per_class.values():
        assert counts.total == len(y_true)
    assert sum(v.tp for v in c.per_class.values()) == sum(t == p for t, p in zip(y_true, y_pred))
    met = metrics(c)
    assert met["accuracy"] == pytest.approx(sum(v.tp for v in c.per_class.values()) / len(y_true), abs=1e-12)
    for row in met["per_class"].values():
        assert all(v is None or 0.0 <= v <= 1.0 for v in row.values())
    # relabelling classes consistently leaves accuracy unchanged
    mapping = dict(zip("ABC", "CAB"))
    relabelled = confusion([mapping[y] for y in y_true], [mapping[y] for y in y_pred], "ABC")
    assert metrics(relabelled)["accuracy"] == met["accuracy"]
    perfect = metrics(confusion(y_true, y_true, "ABC"))
    assert perfect["accuracy"] == 1.0
    for c_ in set(y_true):
        assert perfect["per_class"][c_]["precision"] == 1.0
        assert perfect["per_class"][c_]["sensitivity"] == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("AB"), st.sampled_from("AB")), min_size=1, max_size=30))
def test_two_class_sensitivity_specificity_identity(pairs):
    c = confusion([t for t, _ in pairs], [p for _, p in pairs], "AB")
    met = metrics(c)["per_class"]
    assert met["A"]["sensitivity"] == met["B"]["specificity"]


@pytest.fixture(scope="module")
def synthetic():
    return make_expression_data(n_samples=40, n_genes=200, n_informative=10, seed=3)


def test_benchmark_structure(synthetic):
    ds, _ = synthetic
    report = run_benchmark(ds, BenchmarkConfig(top_k=10, folds=4, seed=1))
    assert set(report["classifiers"]) == {"fssc", "knn", "fknn"}
    for res in report["classifiers"].values():
        pos = res["positive_class"]
        assert pos["class"] == ds.class_set[0]
        assert set(pos) == {"class", "precision", "sensitivity", "specificity"}
        tp = sum(v["tp"] for v in res["per_class"].values())
        assert abs(res["accuracy"] - tp / ds.n_samples) <= 1e-12
    tested = sorted(i for f in report["folds"] for i in f["test"])
    assert tested == list(range(ds.n_samples))
    assert all(len(f["selected_genes"]) == 10 for f in report["folds"])
    json.loads(report_json(report))


def test_benchmark_deterministic(synthetic):
    ds, _ = synthetic
    cfg = BenchmarkConfig(top_k=15, folds=5, seed=9)
    a = report_json(strip_timings(run_benchmark(ds, cfg)))
    b = report_json(strip_timings(run_benchmark(ds, BenchmarkConfig(top_k=15, folds=5, seed=9, threads=3))))
    assert a == b


def test_benchmark_holdout(synthetic):
    ds, _ = synthetic
    report = run_benchmark(ds, BenchmarkConfig(test_fraction=0.25, classifiers=("fssc",), top_k=5))
    assert report["config"]["strategy"] == "holdout"
    assert len(report["folds"]) == 1 and len(report["folds"][0]["test"]) == 10


def test_benchmark_validation(synthetic):
    ds, _ = synthetic
    with pytest.raises(ValueError):
        run_benchmark(ds, BenchmarkConfig(classifiers=("svm",)))
    with pytest.raises(ValueError):
        run_benchmark(ds, BenchmarkConfig(top_k=0))
    single = ExpressionDataset(["a", "b"], ["g"], [[1.0], [2.0]], ["x", "x"])
    with pytest.raises(ValueError, match="two classes"):
        run_benchmark(single, BenchmarkConfig(folds=2))


def test_test_split_cannot_influence_fitted_params(synthetic):
    ds, _ = synthetic
    cfg = BenchmarkConfig(top_k=8)
    train_idx = list(range(30))
    genes, params = fit_fold(ds.subset(train_idx), cfg)
    perturbed = np.array(ds.values)
    perturbed[30:] = np.random.default_rng(0).normal(scale=50, size=perturbed[30:].shape)
    ds2 = ExpressionDataset(ds.sample_ids, ds.gene_ids, perturbed, ds.labels)
    genes2, params2 = fit_fold(ds2.subset(train_idx), cfg)
    assert genes == genes2
    assert params.lower.tobytes() == params2.lower.tobytes()
    assert params.upper.tobytes() == params2.upper.tobytes()


def test_report_csv_writers(synthetic):
    ds, _ = synthetic
    report = run_benchmark(ds, BenchmarkConfig(top_k=10, folds=4))
    buf = io.StringIO()
    write_table_csv(report, buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "measure,Fuzzy Soft Set,KNN,Fuzzy KNN"
    assert [r.split(",")[0] for r in rows[1:]] == ["Precision", "Sensitivity", "Specificity", "Accuracy"]
    buf = io.StringIO()
    write_metrics_csv(report, buf)
    assert len(buf.getvalue().splitlines()) == 1 + 3 * 2
    buf = io.StringIO()
    write_accuracy_csv(report, buf, dataset="toy")
    assert buf.getvalue().splitlines()[1].startswith("toy,fssc,")


def test_undefined_metrics_are_null_in_report():
    # a classifier that never predicts class B on a fold leaves B's precision undefined
    ds = ExpressionDataset(
        [f"s{i}" for i in range(6)], ["g"], [[0.0], [0.1], [0.2], [0.3], [0.4], [10.0]], list("AAAABB")
    )
    report = run_benchmark(ds, BenchmarkConfig(classifiers=("knn",), k=3, folds=2, seed=0))
    prec = report["classifiers"]["knn"]["per_class"]["B"]["precision"]
    assert prec is None
    assert "null" in report_json(report)
