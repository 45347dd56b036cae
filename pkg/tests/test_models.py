import numpy as np
import pytest

from covactive.dataset import SplitSpec, one_hot_encode, split_pools
from covactive.metrics import macro_f1
from covactive.models import (CategoricalDecisionTree, CategoricalRandomForest, FittedModel,
                              ModelSpec, NearestNeighborsClassifier, RBFSupportVectorClassifier,
                              SoftmaxRegression, bootstrap_counts, parse_model, predict, train)

TOKENS = ["rf5", "rf", "dt", "knn", "lr", "svm"]


def _data(n=120, k=5, seed=0, classes=3):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 3, size=(n, k))
    y = (X[:, 0] + X[:, 1] * (X[:, 2] > 0)) % classes
    return X, y


@pytest.mark.parametrize("token", TOKENS)
def test_predict_proba_is_a_distribution(token):
    X, y = _data()
    m = train(parse_model(token), X, y, [3] * 5, class_count=4)
    if token == "svm":
        with pytest.raises(TypeError):
            m.predict_proba(X)
        assert set(m.predict(X)) <= {0, 1, 2}
        return
    P = m.predict_proba(X)
    assert P.shape == (X.shape[0], 4)
    assert np.all(P >= 0) and np.allclose(P.sum(axis=1), 1, atol=1e-9)
    assert np.all(P[:, 3] == 0)


@pytest.mark.parametrize("token", TOKENS)
def test_deterministic(token):
    X, y = _data(seed=1)
    a = train(parse_model(token).with_seed(7), X, y, [3] * 5)
    b = train(parse_model(token).with_seed(7), X, y, [3] * 5)
    assert np.array_equal(a.predict(X), b.predict(X))
    if token != "svm":
        assert np.allclose(a.predict_proba(X), b.predict_proba(X), atol=1e-9)


@pytest.mark.parametrize("token", TOKENS)
def test_dimension_mismatch_raises(token):
    X, y = _data()
    m = train(parse_model(token), X, y, [3] * 5)
    with pytest.raises(ValueError):
        m.predict(X[:, :4])


@pytest.mark.parametrize("token", ["rf5", "dt", "knn", "lr"])
def test_single_class_is_constant_predictor(token):
    X, _ = _data(n=20)
    m = train(parse_model(token), X, np.full(20, 2), [3] * 5, class_count=3)
    P = m.predict_proba(X)
    assert np.all(P[:, 2] == 1) and np.all(m.predict(X) == 2)


def test_svm_single_class():
    X, _ = _data(n=20)
    m = train(parse_model("svm"), X, np.ones(20, dtype=int), [3] * 5, class_count=2)
    assert np.all(m.predict(X) == 1)


def test_empty_training_set():
    with pytest.raises(ValueError):
        train(parse_model("dt"), np.empty((0, 3), dtype=int), np.empty(0, dtype=int), [2, 2, 2])


def test_unconstrained_tree_fits_consistent_data():
    X, y = _data(n=300, k=6, seed=3)
    _, first = np.unique(X, axis=0, return_index=True)
    X, y = X[first], y[first]
    tree = CategoricalDecisionTree().fit(X, y)
    assert np.array_equal(tree.predict(X), y)


@pytest.mark.parametrize("cls", [CategoricalDecisionTree, NearestNeighborsClassifier])
def test_training_order_does_not_matter(cls):
    X, y = _data(n=150, seed=4)
    rng = np.random.default_rng(0)
    y = np.where(rng.random(150) < 0.2, (y + 1) % 3, y)
    Xo = X if cls is CategoricalDecisionTree else one_hot_encode(X, [3] * 5)
    perm = rng.permutation(150)
    a = cls().fit(Xo, y)
    b = cls().fit(Xo[perm], y[perm])
    Q = rng.integers(0, 3, size=(60, 5))
    Q = Q if cls is CategoricalDecisionTree else one_hot_encode(Q, [3] * 5)
    assert np.array_equal(a.predict_proba(Q), b.predict_proba(Q))


def test_forest_of_one_equals_tree_on_bootstrap():
    X, y = _data(n=90, seed=5)
    forest = CategoricalRandomForest(n_estimators=1, max_depth=5, max_features=2,
                                     random_state=13).fit(X, y)
    w = bootstrap_counts(13, X.shape[0], 1)[0]
    tree = CategoricalDecisionTree(max_depth=5, max_features=2, random_state=13).fit(
        X, y, sample_weight=w)
    Q = np.random.default_rng(1).integers(0, 4, size=(50, 5))
    assert np.array_equal(forest.predict_proba(Q), tree.predict_proba(Q))


def test_forest_of_identical_trees_matches_single_tree():
    X, y = _data(n=80, seed=6)
    forest = CategoricalRandomForest(n_estimators=5, bootstrap=False, max_features=None).fit(X, y)
    tree = CategoricalDecisionTree().fit(X, y)
    assert np.allclose(forest.predict_proba(X), tree.predict_proba(X))


def test_unseen_value_stops_descent():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    y = np.array([0, 0, 1, 1])
    tree = CategoricalDecisionTree(n_values=[2, 2]).fit(X, y)
    assert tree.predict_proba([[2, 0]]).tolist() == [[0.5, 0.5]]


def test_knn_one_neighbour_on_training_point():
    X, y = _data(n=40, seed=7)
    _, first = np.unique(X, axis=0, return_index=True)
    Xo = one_hot_encode(X[first], [3] * 5)
    knn = NearestNeighborsClassifier(n_neighbors=1).fit(Xo, y[first])
    P = knn.predict_proba(Xo)
    assert np.array_equal(np.argmax(P, axis=1), np.searchsorted(knn.classes_, y[first]))
    assert np.all(P.max(axis=1) == 1)


def test_predict_tie_goes_to_lowest_class():
    class Fixed:
        classes_ = np.array([0, 1])

        def predict_proba(self, X):
            return np.tile([0.5, 0.5], (len(X), 1))

    m = FittedModel(parse_model("knn"), Fixed(), (2,), 2)
    assert predict(m, [[0], [1]]).tolist() == [0, 0]


def test_logistic_regression_agrees_with_reference():
    sklearn_lm = pytest.importorskip("sklearn.linear_model")
    X, y = _data(n=200, seed=8)
    Xo = one_hot_encode(X, [3] * 5)
    ours = SoftmaxRegression().fit(Xo, y).predict_proba(Xo)
    ref = sklearn_lm.LogisticRegression(C=1.0, tol=1e-10, max_iter=10000).fit(Xo, y).predict_proba(Xo)
    assert np.max(np.abs(ours - ref)) < 1e-4


def test_svm_agrees_with_reference_decisions():
    svm_mod = pytest.importorskip("sklearn.svm")
    X, y = _data(n=200, seed=9, classes=2)
    Xo = one_hot_encode(X, [3] * 5)
    ours = RBFSupportVectorClassifier().fit(Xo, y)
    ref = svm_mod.SVC(C=1.0, gamma="scale").fit(Xo, y)
    assert np.max(np.abs(ours.decision_function(Xo) - ref.decision_function(Xo))) < 5e-3
    assert np.mean(ours.predict(Xo) == ref.predict(Xo)) > 0.99


def test_forest_beats_majority_on_tic_tac_toe(ttt):
    pools = split_pools(ttt, SplitSpec(seed=0))
    train_idx = np.concatenate([pools.labeled, pools.unlabeled])
    m = train(parse_model("rf5"), ttt.rows[train_idx], ttt.labels[train_idx], ttt.cardinalities)
    yt = ttt.labels[pools.test]
    majority = np.bincount(ttt.labels[train_idx]).argmax()
    assert macro_f1(m.predict(ttt.rows[pools.test]), yt) > macro_f1(np.full_like(yt, majority), yt)


def test_model_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("boosting")
    with pytest.raises(ValueError):
        ModelSpec("knn", {"depth": 3})
    with pytest.raises(ValueError):
        parse_model("xgb")
    spec = parse_model({"family": "random_forest", "hyperparameters": {"n_estimators": 10}})
    assert spec.to_dict()["hyperparameters"] == {"n_estimators": 10}


@pytest.mark.parametrize("est", [CategoricalDecisionTree(), CategoricalRandomForest(n_estimators=5),
                                 NearestNeighborsClassifier(), SoftmaxRegression(max_iter=200),
                                 RBFSupportVectorClassifier()])
def test_estimator_params_roundtrip(est):
    from sklearn.base import clone
    c = clone(est)
    assert c.get_params() == est.get_params()
