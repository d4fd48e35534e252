"""scikit-learn style wrappers around the certifier.

There is nothing to learn from data here, so ``fit`` only validates input
and records the problem size; the value of the wrappers is composition with
pipelines, ``get_params``/``set_params`` and ``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .certify import DEFAULT_Q, CartanFrameError, Verdict, certify, conjugate_system, diagonalize_cartan
from .hmat import HMatrix
from .quaternion import DEFAULT_TOL
from .validation import check_pairs


class ControllabilityCertifier(ClassifierMixin, BaseEstimator):
    """Label each pair (A, B) with its certificate verdict.

    X is (m, 2, n, n, 4) or (m, 8 n^2); see ``validation.check_pairs``.
    ``predict`` returns the verdict strings; ``score`` compares them with y.
    """

    def __init__(self, tol: float = DEFAULT_TOL, Q: int = DEFAULT_Q, max_depth=None):
        self.tol = tol
        self.Q = Q
        self.max_depth = max_depth

    def fit(self, X, y=None):
        _, n = check_pairs(X)
        if n < 2:
            raise ValueError("certification needs n >= 2")
        self.n_ = n
        self.classes_ = np.array([v.value for v in Verdict])
        return self

    def certify(self, X) -> list:
        check_is_fitted(self, "n_")
        arr, n = check_pairs(X)
        if n != self.n_:
            raise ValueError(f"fitted for n={self.n_}, got n={n}")
        return [certify(HMatrix(p[0]), HMatrix(p[1]), Q=self.Q, tol=self.tol, max_depth=self.max_depth)
                for p in arr]

    def predict(self, X) -> np.ndarray:
        return np.array([c.verdict.value for c in self.certify(X)])


class CartanFrameTransformer(TransformerMixin, BaseEstimator):
    """Map each pair (A, B) to (g A g^-1, g B g^-1) with g B g^-1 complex diagonal.

    Output keeps the input layout. Pairs whose B has no Cartan frame raise
    unless ``on_error="nan"``, which fills them with NaN.
    """

    def __init__(self, on_error: str = "raise"):
        self.on_error = on_error

    def fit(self, X, y=None):
        if self.on_error not in ("raise", "nan"):
            raise ValueError("on_error must be 'raise' or 'nan'")
        _, self.n_ = check_pairs(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_")
        flat = np.asarray(X).ndim == 2
        arr, n = check_pairs(X)
        if n != self.n_:
            raise ValueError(f"fitted for n={self.n_}, got n={n}")
        out = np.empty_like(arr)
        for k, (a, b) in enumerate(arr):
            try:
                frame = diagonalize_cartan(HMatrix(b))
            except CartanFrameError:
                if self.on_error == "raise":
                    raise
                out[k] = np.nan
                continue
            a1, _ = conjugate_system(HMatrix(a), HMatrix(b), frame.g, det_tol=1e-6)
            out[k, 0], out[k, 1] = a1.data, frame.B_diag.data
        return out.reshape(len(arr), -1) if flat else out
