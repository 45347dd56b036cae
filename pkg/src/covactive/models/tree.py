"""Decision tree and random forest for categorical value-index matrices."""
import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

from ._tree import build_trees

__all__ = ["CategoricalDecisionTree", "CategoricalRandomForest"]


def _resolve_max_features(max_features, k):
    if max_features is None:
        return k
    if max_features == "sqrt":
        return max(1, int(math.sqrt(k)))
    if max_features == "log2":
        return max(1, int(math.log2(k)))
    if isinstance(max_features, (int, np.integer)):
        if max_features < 1:
            raise ValueError("max_features must be >= 1")
        return min(int(max_features), k)
    if isinstance(max_features, float):
        if not 0.0 < max_features <= 1.0:
            raise ValueError("float max_features must lie in (0, 1]")
        return max(1, int(max_features * k))
    raise ValueError(f"unsupported max_features={max_features!r}")


def _tree_rng(seed):
    return np.random.default_rng([0 if seed is None else int(seed), 1])


def _bootstrap_rng(seed):
    return np.random.default_rng([0 if seed is None else int(seed), 0])


def bootstrap_counts(random_state, n_samples, n_estimators):
    """Per-tree bootstrap multiplicities used by :class:`CategoricalRandomForest`."""
    rng = _bootstrap_rng(random_state)
    out = np.empty((n_estimators, n_samples), dtype=np.int64)
    for i in range(n_estimators):
        out[i] = np.bincount(rng.integers(0, n_samples, n_samples), minlength=n_samples)
    return out


class _CategoricalTreeBase(ClassifierMixin, BaseEstimator):

    def _prepare(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.int64)
        check_classification_targets(y)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty training set")
        if X.min() < 0:
            raise ValueError("X must hold non-negative value indices")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if self.n_values is not None:
            radix = np.asarray(self.n_values, dtype=np.int64)
            if radix.shape != (X.shape[1],):
                raise ValueError("n_values must give one cardinality per feature")
            radix = np.maximum(radix, X.max(axis=0) + 1)
        else:
            radix = X.max(axis=0) + 1
        self.n_values_ = radix
        return X, y_enc

    def _fit_arrays(self, X, y_enc, weights, max_features, rng):
        self.tree_ = build_trees(
            X, y_enc, weights, len(self.classes_), self.n_values_,
            self.max_depth, max_features, rng)
        return self

    def predict_proba(self, X):
        """Class distribution of the reached leaves, averaged over trees.

        A value with no training rows at some node (including values never
        seen during fit) stops descent there; that node's distribution is
        used.
        """
        check_is_fitted(self, "tree_")
        X = validate_data(self, X, dtype=np.int64, reset=False)
        return self.tree_.proba(X)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class CategoricalDecisionTree(_CategoricalTreeBase):
    """Gini tree with one branch per value of the split feature.

    Parameters
    ----------
    max_depth : int or None, default=None
        ``None`` grows until leaves are pure or no feature varies.
    max_features : {None, 'sqrt', 'log2'} or int or float, default=None
        Features examined per node, drawn at random among those that vary
        there. ``None`` examines all of them without drawing.
    random_state : int or None
    n_values : sequence of int, optional
        Declared per-feature cardinalities.

    Notes
    -----
    Ties in the split criterion go to the lowest feature index, and node
    numbering depends only on value order, so predictions do not depend on
    the order of the training rows.
    """

    def __init__(self, max_depth=None, max_features=None, random_state=None, n_values=None):
        self.max_depth = max_depth
        self.max_features = max_features
        self.random_state = random_state
        self.n_values = n_values

    def fit(self, X, y, sample_weight=None):
        X, y_enc = self._prepare(X, y)
        if sample_weight is None:
            weights = np.ones((1, X.shape[0]), dtype=np.int64)
        else:
            weights = np.asarray(sample_weight, dtype=np.int64).reshape(1, -1)
            if weights.shape[1] != X.shape[0] or weights.min() < 0:
                raise ValueError("sample_weight must be non-negative integers, one per row")
        m = _resolve_max_features(self.max_features, X.shape[1])
        return self._fit_arrays(X, y_enc, weights, m, _tree_rng(self.random_state))


class CategoricalRandomForest(_CategoricalTreeBase):
    """Bootstrap ensemble of :class:`CategoricalDecisionTree`.

    ``predict_proba`` is the mean of the trees' leaf distributions. With
    ``n_estimators=1`` the forest equals a decision tree with the same
    ``random_state``, ``max_depth`` and ``max_features`` trained on the
    bootstrap sample (see :func:`bootstrap_counts`).
    """

    def __init__(self, n_estimators=100, max_depth=None, max_features="sqrt",
                 bootstrap=True, random_state=None, n_values=None):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.random_state = random_state
        self.n_values = n_values

    def fit(self, X, y):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        X, y_enc = self._prepare(X, y)
        if self.bootstrap:
            weights = bootstrap_counts(self.random_state, X.shape[0], self.n_estimators)
        else:
            weights = np.ones((self.n_estimators, X.shape[0]), dtype=np.int64)
        m = _resolve_max_features(self.max_features, X.shape[1])
        return self._fit_arrays(X, y_enc, weights, m, _tree_rng(self.random_state))
