import numpy as np
from scipy.special import log_softmax, softmax
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

__all__ = ["SoftmaxRegression"]


class SoftmaxRegression(ClassifierMixin, BaseEstimator):
    """Multinomial logistic regression fitted by full-batch gradient descent.

    Minimises ``sum_i CE(x_i, y_i) + alpha/2 * ||W||^2`` (intercepts are not
    penalised) from zero initialisation with step ``1/L``, where ``L`` is a
    Lipschitz bound of the gradient. Stops when the gradient norm drops
    below ``tol`` or after ``max_iter`` steps.
    """

    def __init__(self, alpha=1.0, tol=1e-6, max_iter=5000):
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        check_classification_targets(y)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty training set")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        n, d = X.shape
        K = len(self.classes_)
        Xb = np.hstack([X, np.ones((n, 1))])
        Y = np.zeros((n, K))
        Y[np.arange(n), y_enc] = 1.0
        W = np.zeros((d + 1, K))
        if K == 1:
            self.coef_, self.intercept_, self.n_iter_ = W[:-1].T, W[-1], 0
            return self
        penalty = np.full((d + 1, 1), float(self.alpha))
        penalty[-1] = 0.0
        lipschitz = 0.5 * np.linalg.norm(Xb, 2) ** 2 + self.alpha
        step = 1.0 / lipschitz
        it = 0
        for it in range(1, self.max_iter + 1):
            P = softmax(Xb @ W, axis=1)
            grad = Xb.T @ (P - Y) + penalty * W
            if np.sqrt((grad ** 2).sum()) < self.tol:
                break
            W -= step * grad
        self.coef_ = W[:-1].T
        self.intercept_ = W[-1]
        self.n_iter_ = it
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_.T + self.intercept_

    def predict_log_proba(self, X):
        return log_softmax(self.decision_function(X), axis=1)

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
