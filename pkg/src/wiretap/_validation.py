"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array


def check_probability(value, name: str, *, open_low=False, open_high=False) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    v = float(value)
    low_ok = v > 0 if open_low else v >= 0
    high_ok = v < 1 if open_high else v <= 1
    if not (low_ok and high_ok and np.isfinite(v)):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {v}")
    return v


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return int(value)


def check_symbols(X, width: int, p: int, name: str = "X") -> np.ndarray:
    """2-D integer array whose rows are words of ``width`` symbols in Z/p."""
    arr = check_array(X, dtype=None, ensure_2d=True, ensure_min_samples=1)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise ValueError(f"{name} must hold integer symbols")
        arr = arr.astype(np.int64)
    arr = arr.astype(np.int64, copy=False)
    if arr.shape[1] != width:
        raise ValueError(f"{name} must have {width} columns, got {arr.shape[1]}")
    if arr.min() < 0 or arr.max() >= p:
        raise ValueError(f"{name} symbols must lie in [0, {p})")
    return arr
