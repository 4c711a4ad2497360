"""Minimal estimator plumbing shared by the learners and samplers.

Mirrors the scikit-learn parameter protocol (constructor args are the
parameters; ``get_params``/``set_params`` expose them) without importing
scikit-learn, so the package stays self-contained.
"""

import inspect

import numpy as np


class BaseEstimator:
    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p.name for p in sig.parameters.values()
                if p.name != "self" and p.kind != p.VAR_KEYWORD]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"invalid parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


def check_matrix(X, n_features=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d feature matrix, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"feature dimension mismatch: expected {n_features}, "
                         f"got {X.shape[1]}")
    return X


def check_labels(y, n_rows):
    y = np.asarray(y)
    if y.shape != (n_rows,):
        raise ValueError(f"labels shape {y.shape} does not match {n_rows} rows")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    return y.astype(np.int64)


class StandardScaler(BaseEstimator):
    """Per-feature z-score scaler; constant features pass through as 0."""

    def fit(self, X):
        X = check_matrix(X)
        self.mean_ = X.mean(axis=0)
        self.std_ = X.std(axis=0)
        self.constant_ = self.std_ == 0.0
        return self

    def transform(self, X):
        X = check_matrix(X, self.mean_.shape[0])
        std = np.where(self.constant_, 1.0, self.std_)
        Z = (X - self.mean_) / std
        if self.constant_.any():
            Z[:, self.constant_] = 0.0
        return Z

    def fit_transform(self, X):
        return self.fit(X).transform(X)
