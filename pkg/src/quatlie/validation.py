"""Input checks shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numpy as np

from .hmat import HMatrix


def as_hmatrix(x, name: str = "matrix") -> HMatrix:
    """Accept an HMatrix, an (n, n, 4) real array or the JSON dict form."""
    if isinstance(x, HMatrix):
        return x
    if isinstance(x, dict):
        return HMatrix.from_json(x)
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 4:
        raise ValueError(f"{name} must have shape (n, n, 4), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return HMatrix(arr)


def check_algebra_element(x, name: str = "matrix", tol: float = 1e-12) -> HMatrix:
    """Coerce to HMatrix and require a trace with zero real part."""
    m = as_hmatrix(x, name)
    if not m.is_algebra_element(tol):
        raise ValueError(f"{name} is not in sl(n,H): Re tr = {m.trace().w:.3e}")
    return m


def check_pairs(X) -> tuple[np.ndarray, int]:
    """Normalize a batch of pairs to shape (m, 2, n, n, 4).

    Accepts (m, 2, n, n, 4) arrays, or (m, 8 n^2) rows holding vectorized A
    followed by vectorized B.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 5:
        if arr.shape[1] != 2 or arr.shape[2] != arr.shape[3] or arr.shape[4] != 4:
            raise ValueError(f"expected shape (m, 2, n, n, 4), got {arr.shape}")
        n = arr.shape[2]
    elif arr.ndim == 2:
        n = int(round(np.sqrt(arr.shape[1] / 8)))
        if n < 1 or 8 * n * n != arr.shape[1]:
            raise ValueError(f"row length {arr.shape[1]} is not 8 n^2")
        arr = arr.reshape(arr.shape[0], 2, n, n, 4)
    else:
        raise ValueError(f"expected a 2-d or 5-d array, got {arr.ndim} dimensions")
    if arr.shape[0] == 0:
        raise ValueError("need at least one pair")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input has non-finite entries")
    return arr, n


def pack_pairs(pairs) -> np.ndarray:
    """Stack (A, B) pairs into the (m, 8 n^2) row layout read by ``check_pairs``."""
    rows = [np.concatenate([as_hmatrix(a).data.ravel(), as_hmatrix(b).data.ravel()]) for a, b in pairs]
    return np.stack(rows)
