"""RBF support vector classifier trained with SMO, one-vs-rest."""
import warnings
from collections import OrderedDict

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data

__all__ = ["RBFSupportVectorClassifier", "smo_solve"]

_TAU = 1e-12
_FULL_KERNEL_LIMIT = 4000


class _KernelColumns:
    """RBF kernel columns over the training rows, cached."""

    def __init__(self, X, gamma, cache_size=512):
        self.X = X
        self.gamma = gamma
        self.sq = (X ** 2).sum(axis=1)
        self.cache_size = cache_size
        self._full = None
        self._cache = OrderedDict()
        if X.shape[0] <= _FULL_KERNEL_LIMIT:
            d = self.sq[:, None] + self.sq[None, :] - 2.0 * X @ X.T
            self._full = np.exp(-gamma * np.maximum(d, 0.0))

    def __call__(self, i):
        if self._full is not None:
            return self._full[i]
        col = self._cache.get(i)
        if col is not None:
            self._cache.move_to_end(i)
            return col
        d = self.sq + self.sq[i] - 2.0 * (self.X @ self.X[i])
        col = np.exp(-self.gamma * np.maximum(d, 0.0))
        self._cache[i] = col
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return col


def smo_solve(kernel_column, diag, y, C, tol=1e-3, max_iter=None):
    """Solve the soft-margin SVM dual with second-order working-set selection.

    Minimises ``1/2 a^T Q a - sum(a)`` subject to ``0 <= a <= C`` and
    ``y^T a = 0`` with ``Q_ij = y_i y_j K_ij``.

    Returns ``(alpha, rho, n_iter)``; the decision value of a point ``x`` is
    ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if max_iter is None:
        max_iter = max(100_000, 100 * n)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    it = 0
    for it in range(1, max_iter + 1):
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        score = -y * grad
        masked = np.where(up, score, -np.inf)
        i = int(np.argmax(masked))
        g_max = masked[i]
        g_min = np.min(np.where(low, score, np.inf))
        if g_max - g_min < tol:
            break
        k_i = kernel_column(i)
        b = g_max - score
        a = diag[i] + diag - 2.0 * k_i
        a = np.where(a > 0, a, _TAU)
        cand = low & (b > 0)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))
        k_j = kernel_column(j)
        lim_i = C - alpha[i] if pos[i] else alpha[i]
        lim_j = alpha[j] if pos[j] else C - alpha[j]
        delta = min(b[j] / a[j], lim_i, lim_j)
        alpha[i] = min(max(alpha[i] + y[i] * delta, 0.0), C)
        alpha[j] = min(max(alpha[j] - y[j] * delta, 0.0), C)
        grad += y * (k_i - k_j) * delta
    else:
        warnings.warn("SMO reached max_iter before convergence", ConvergenceWarning)

    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = yg[free].mean()
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & ~pos) | (~at_upper & pos)
        lb_mask = ~ub_mask
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = (ub + lb) / 2
        else:
            rho = ub if np.isfinite(ub) else lb
    return alpha, float(rho), it


class RBFSupportVectorClassifier(ClassifierMixin, BaseEstimator):
    """Soft-margin SVM with an RBF kernel, one machine per class.

    Parameters
    ----------
    C : float, default=1.0
    gamma : {'scale'} or float, default='scale'
        ``'scale'`` uses ``1 / (n_features * X.var())``.
    tol : float, default=1e-3
        KKT violation tolerance of the SMO solver.
    max_iter : int or None

    Prediction takes the class with the largest decision value. With two
    classes a single machine separates them (class 1 positive). No
    probability estimates are produced.
    """

    def __init__(self, C=1.0, gamma="scale", tol=1e-3, max_iter=None):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        check_classification_targets(y)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty training set")
        if self.C <= 0:
            raise ValueError("C must be positive")
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if self.gamma == "scale":
            var = X.var()
            self._gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        else:
            self._gamma = float(self.gamma)
        self._X = X
        self._sq = (X ** 2).sum(axis=1)
        K = len(self.classes_)
        self.dual_coef_ = np.zeros((0, X.shape[0]))
        self.intercept_ = np.zeros(0)
        if K == 1:
            return self
        kernel = _KernelColumns(X, self._gamma)
        diag = np.ones(X.shape[0])
        targets = [1] if K == 2 else range(K)
        coefs, rhos, iters = [], [], []
        for c in targets:
            yy = np.where(y_enc == c, 1.0, -1.0)
            alpha, rho, it = smo_solve(kernel, diag, yy, self.C, self.tol, self.max_iter)
            coefs.append(alpha * yy)
            rhos.append(rho)
            iters.append(it)
        self.dual_coef_ = np.vstack(coefs)
        self.intercept_ = -np.asarray(rhos)
        self.n_iter_ = np.asarray(iters)
        return self

    def _kernel(self, X):
        d = (X ** 2).sum(axis=1)[:, None] + self._sq[None, :] - 2.0 * X @ self._X.T
        return np.exp(-self._gamma * np.maximum(d, 0.0))

    def decision_function(self, X):
        check_is_fitted(self, "dual_coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        out = np.empty((X.shape[0], self.dual_coef_.shape[0]))
        for start in range(0, X.shape[0], 2048):
            Kx = self._kernel(X[start:start + 2048])
            out[start:start + Kx.shape[0]] = Kx @ self.dual_coef_.T + self.intercept_
        return out[:, 0] if len(self.classes_) == 2 else out

    def predict(self, X):
        if len(self.classes_) == 1:
            X = validate_data(self, X, dtype=np.float64, reset=False)
            return np.repeat(self.classes_, X.shape[0])
        scores = self.decision_function(X)
        if len(self.classes_) == 2:
            return self.classes_[(scores > 0).astype(np.int64)]
        return self.classes_[np.argmax(scores, axis=1)]
