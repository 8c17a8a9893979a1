"""One-vs-rest linear SVM trained by dual coordinate descent."""

from __future__ import annotations

import warnings

import numba
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, validate_data


class NonSeparableWarning(UserWarning):
    pass


@numba.njit(cache=True, nogil=True)
def _dual_cd(X, y, C, tol, max_iter, seed, alpha0):
    """Hinge-loss dual coordinate descent (one binary problem).

    ``X`` already carries the intercept column. Coordinates stuck at a bound
    with a gradient pointing outward are shrunk from the active set, which
    is restored and re-checked once the reduced problem converges.
    ``alpha0`` is the starting dual point (clipped to ``[0, C]``).
    Returns ``(w, alpha, n_epochs)``; ``n_epochs == max_iter`` means the
    projected-gradient gap never fell below ``tol``.
    """
    n, d = X.shape
    alpha = np.minimum(np.maximum(alpha0, 0.0), C)
    w = np.zeros(d)
    for i in range(n):
        if alpha[i] != 0.0:
            for k in range(d):
                w[k] += alpha[i] * y[i] * X[i, k]
    qii = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(d):
            s += X[i, k] * X[i, k]
        qii[i] = s
    index = np.arange(n)
    active = n
    pg_max_old = np.inf
    pg_min_old = -np.inf
    state = np.uint64(seed) * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
    epoch = 0
    while epoch < max_iter:
        # Fisher-Yates with a 64-bit LCG; deterministic and thread-local
        for i in range(active - 1, 0, -1):
            state = state * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
            j = int((state >> np.uint64(33)) % np.uint64(i + 1))
            index[i], index[j] = index[j], index[i]
        pg_max = -np.inf
        pg_min = np.inf
        t = 0
        while t < active:
            i = index[t]
            if qii[i] <= 0.0:
                t += 1
                continue
            g = 0.0
            for k in range(d):
                g += w[k] * X[i, k]
            g = y[i] * g - 1.0
            a = alpha[i]
            pg = 0.0
            if a == 0.0:
                if g > pg_max_old:
                    active -= 1
                    index[t], index[active] = index[active], index[t]
                    continue
                if g < 0.0:
                    pg = g
            elif a == C:
                if g < pg_min_old:
                    active -= 1
                    index[t], index[active] = index[active], index[t]
                    continue
                if g > 0.0:
                    pg = g
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if abs(pg) > 1e-12:
                na = min(max(a - g / qii[i], 0.0), C)
                delta = (na - a) * y[i]
                alpha[i] = na
                for k in range(d):
                    w[k] += delta * X[i, k]
            t += 1
        epoch += 1
        if pg_max - pg_min < tol:
            if active == n:
                break
            active = n
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        pg_max_old = pg_max if pg_max > 0.0 else np.inf
        pg_min_old = pg_min if pg_min < 0.0 else -np.inf
    return w, alpha, epoch


def _has_conflicting_duplicates(X, y) -> bool:
    _, inv = np.unique(X, axis=0, return_inverse=True)
    inv = inv.ravel()
    first = {}
    for g, lab in zip(inv, y):
        if first.setdefault(g, lab) != lab:
            return True
    return False


class LinearSVM(ClassifierMixin, BaseEstimator):
    """Linear SVM with hinge loss, one-vs-rest over the classes.

    Each binary problem is solved in the dual by coordinate descent with the
    intercept handled as an extra constant feature (so it is regularized, as
    in liblinear). Prediction is the argmax of the decision values; ties go
    to the class that sorts first in ``classes_``.

    Parameters
    ----------
    C : float, default=1.0
        Inverse regularization strength.
    tol : float, default=1e-4
        Stopping tolerance on the projected-gradient gap.
    max_iter : int, default=10000
        Maximum number of passes over the data per binary problem.
    fit_intercept : bool, default=True
    random_state : int, default=0
        Seed for the coordinate permutation.
    warm_start : bool, default=False
        Start from the previous dual solution, rescaled by the ratio of the
        new to the old ``C``, when refitting on data of the same shape and
        classes. Walking up a C grid this way cuts the number of epochs by
        orders of magnitude on hard problems.

    Attributes
    ----------
    coef_ : ndarray of shape (n_classes, n_features)
    intercept_ : ndarray of shape (n_classes,)
    dual_coef_ : ndarray of shape (n_classes, n_samples)
        Dual variables of each binary problem.
    n_iter_ : ndarray of shape (n_classes,)
        Epochs used per binary problem.
    """

    def __init__(self, C=1.0, tol=1e-4, max_iter=10_000, fit_intercept=True, random_state=0,
                 warm_start=False):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter
        self.fit_intercept = fit_intercept
        self.random_state = random_state
        self.warm_start = warm_start

    def _initial_dual(self, n, classes):
        prev = getattr(self, "dual_coef_", None)
        if (self.warm_start and prev is not None and prev.shape == (len(classes), n)
                and np.array_equal(self.classes_, classes)):
            return prev * (float(self.C) / self._fitted_C)
        return np.zeros((len(classes), n))

    def fit(self, X, y):
        if not self.C > 0:
            raise ValueError("C must be positive")
        X, y = validate_data(self, X, y, dtype=np.float64, order="C")
        check_classification_targets(y)
        classes = np.unique(y)
        A = self._initial_dual(X.shape[0], classes)
        self.classes_ = classes
        if _has_conflicting_duplicates(X, y):
            warnings.warn("identical samples carry different labels; data are not separable",
                          NonSeparableWarning, stacklevel=2)
        Xa = np.hstack([X, np.ones((X.shape[0], 1))]) if self.fit_intercept else X
        Xa = np.ascontiguousarray(Xa)
        k = len(self.classes_)
        W = np.zeros((k, Xa.shape[1]))
        self.n_iter_ = np.zeros(k, dtype=int)
        if k == 1:
            if self.fit_intercept:
                W[0, -1] = 1.0
        else:
            seed = int(self.random_state or 0)
            for c, cls in enumerate(self.classes_):
                yb = np.where(y == cls, 1.0, -1.0)
                W[c], A[c], self.n_iter_[c] = _dual_cd(Xa, yb, float(self.C), float(self.tol),
                                                       int(self.max_iter), seed + c, A[c])
            if np.any(self.n_iter_ >= self.max_iter):
                warnings.warn("dual coordinate descent did not converge; increase max_iter",
                              ConvergenceWarning, stacklevel=2)
        self.dual_coef_ = A
        self._fitted_C = float(self.C)
        if self.fit_intercept:
            self.coef_, self.intercept_ = W[:, :-1].copy(), W[:, -1].copy()
        else:
            self.coef_, self.intercept_ = W, np.zeros(k)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_.T + self.intercept_

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


def train_linear_svm(X, y, C=1.0, **kwargs) -> LinearSVM:
    return LinearSVM(C=C, **kwargs).fit(X, y)
