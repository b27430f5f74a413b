"""
scikit-learn style wrappers over the region and attractor machinery.

Inputs are ``(n, 2)`` arrays of ``(b, k)`` rows. Neither estimator learns
anything from data; ``fit`` only validates hyper-parameters and records the
number of features, so both drop into pipelines and grid searches.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._config import TOL
from .map_core import MapParams
from .regions import RegionTag, classify
from .scan import summarize_cell

REGION_LABELS = np.array([t.value for t in RegionTag])


def _check_bk(X):
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (b, k), got {X.shape[1]}")
    return X


class RegionClassifier(ClassifierMixin, BaseEstimator):
    """Labels each ``(b, k)`` row with its analytic region tag."""

    def fit(self, X, y=None):
        X = _check_bk(X)
        self.n_features_in_ = X.shape[1]
        self.classes_ = REGION_LABELS.copy()
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = _check_bk(X)
        return np.array([classify(MapParams(b, k)).value for b, k in X], dtype=object)


class AttractorScanner(TransformerMixin, BaseEstimator):
    """Attractor summary per ``(b, k)`` row from the two critical orbits.

    ``transform`` returns columns ``period1, period2, bistable, lyapunov_max``;
    periods use 0 for chaotic, -1 for unresolved and nan when absent (no
    second attractor, or a row outside P).
    """

    def __init__(self, n_transient=TOL.n_transient, n_sample=TOL.n_sample, p_max=TOL.p_max,
                 seed_policy="critical"):
        self.n_transient = n_transient
        self.n_sample = n_sample
        self.p_max = p_max
        self.seed_policy = seed_policy

    def _validate_params(self):
        if int(self.n_transient) < 0 or int(self.n_sample) < 2:
            raise ValueError("n_transient must be >= 0 and n_sample >= 2")
        if int(self.p_max) < 1 or int(self.p_max) > self.n_sample // 2:
            raise ValueError("p_max must lie in [1, n_sample/2]")
        if self.seed_policy not in ("critical", "verify"):
            raise ValueError("seed_policy must be 'critical' or 'verify'")

    def fit(self, X, y=None):
        self._validate_params()
        X = _check_bk(X)
        self.n_features_in_ = X.shape[1]
        return self

    def _cells(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_bk(X)
        kw = dict(n_transient=int(self.n_transient), n_sample=int(self.n_sample),
                  p_max=int(self.p_max), seed_policy=self.seed_policy)
        return [summarize_cell(MapParams(b, k), **kw) for b, k in X]

    def transform(self, X):
        out = []
        for c in self._cells(X):
            p1 = math.nan if c.period1 is None else float(c.period1)
            p2 = math.nan if c.period2 is None else float(c.period2)
            out.append((p1, p2, float(c.bistable), c.lyapunov_max))
        return np.array(out, dtype=float).reshape(-1, 4)

    def predict(self, X):
        """Period of the first attractor (0 chaotic, -1 unresolved, nan outside P)."""
        return self.transform(X)[:, 0]
