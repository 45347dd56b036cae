import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

__all__ = ["NearestNeighborsClassifier"]


class NearestNeighborsClassifier(ClassifierMixin, BaseEstimator):
    """k-nearest-neighbour vote with Euclidean distance.

    On one-hot rows squared Euclidean distance is twice the Hamming
    distance, so neighbour order matches Hamming order. Distance ties are
    broken by a canonical order of the training set (lexicographic on the
    row, then the label), which makes predictions independent of the order
    rows were supplied in.

    Parameters
    ----------
    n_neighbors : int, default=5
    chunk_size : int, default=2048
        Query rows processed per distance block.
    """

    def __init__(self, n_neighbors=5, chunk_size=2048):
        self.n_neighbors = n_neighbors
        self.chunk_size = chunk_size

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        check_classification_targets(y)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty training set")
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        order = np.lexsort(np.vstack([y_enc[None, :], X.T[::-1]]))
        self._X = X[order]
        self._y = y_enc[order]
        self._sq = (self._X ** 2).sum(axis=1)
        return self

    def kneighbors(self, X):
        """Indices (into the canonical training order) of the nearest rows."""
        check_is_fitted(self, "classes_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        k = min(self.n_neighbors, self._X.shape[0])
        out = np.empty((X.shape[0], k), dtype=np.int64)
        for start in range(0, X.shape[0], self.chunk_size):
            q = X[start:start + self.chunk_size]
            d = (q ** 2).sum(axis=1)[:, None] + self._sq[None, :] - 2.0 * q @ self._X.T
            d = np.round(d, 9)
            out[start:start + q.shape[0]] = np.argsort(d, axis=1, kind="stable")[:, :k]
        return out

    def predict_proba(self, X):
        nbrs = self.kneighbors(X)
        labels = self._y[nbrs]
        K = len(self.classes_)
        proba = np.zeros((labels.shape[0], K))
        for c in range(K):
            proba[:, c] = (labels == c).sum(axis=1)
        return proba / labels.shape[1]

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
