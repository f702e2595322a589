"""Input-validation helpers shared by the functional core and the estimators."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DegenerateInput, LengthMismatch, MissingData


def as_float_vector(values, name: str = "values", min_len: int = 1) -> np.ndarray:
    """Coerce to a finite 1-D float64 array or raise."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DegenerateInput(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise MissingData(f"{name} needs at least {min_len} value(s), got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DegenerateInput(f"{name} contains NaN or infinity")
    return arr


def as_float_matrix(values, name: str = "matrix", min_rows: int = 1, min_cols: int = 1) -> np.ndarray:
    """Coerce to a finite 2-D float64 array or raise."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise DegenerateInput(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_rows or arr.shape[1] < min_cols:
        raise MissingData(
            f"{name} needs at least {min_rows}x{min_cols}, got {arr.shape[0]}x{arr.shape[1]}"
        )
    if not np.all(np.isfinite(arr)):
        raise DegenerateInput(f"{name} contains NaN or infinity")
    return arr


def check_same_length(x: Sequence, y: Sequence, what: str = "vectors") -> None:
    if len(x) != len(y):
        raise LengthMismatch(f"{what} differ in length: {len(x)} vs {len(y)}")
