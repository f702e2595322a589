"""Grey relational crisis rating.

An observation vector is scored against a four-level benchmark matrix:
weighted absolute deltas, two-level extrema over every cell, relational
coefficients, and a per-level mean (the relational degree gamma). The level
with the largest gamma wins; ties fall toward the more severe level.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .catalog import RATING_NAME_TO_CODE, RATING_ORDER
from .errors import (
    FileUnreadable,
    IncompleteVector,
    InputError,
    InvalidRho,
    LengthMismatch,
    ZeroColumn,
)
from .validation import as_float_vector

LEVELS = (1, 2, 3, 4)
LEVEL_LABELS = ("Giant", "Serious", "Intermediate", "Light")

_DEFAULT_ROWS = (
    (4000, 3700, 3800, 500000, 1e9, 10000, 3.7, 4, 3.7, 4, 700, 1800, 200),
    (3500, 3000, 3000, 30000, 1e7, 4000, 3.5, 3.2, 3, 3.3, 600, 1200, 250),
    (3000, 2000, 1500, 15000, 1e5, 2000, 3, 2.8, 2, 2.5, 800, 600, 280),
    (2000, 1000, 800, 10000, 1e4, 1000, 1.2, 1, 1, 1.5, 500, 200, 350),
)


@dataclass(frozen=True, eq=False)
class BenchmarkMatrix:
    """Four reference rows, one per crisis level, over named indicator columns."""

    indicators: tuple[str, ...]
    labels: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        if rows.shape != (4, len(self.indicators)):
            raise LengthMismatch(
                f"benchmark matrix must be 4x{len(self.indicators)}, got {rows.shape}"
            )
        if len(self.labels) != 4:
            raise LengthMismatch("benchmark matrix needs exactly 4 level labels")
        for i in range(4):
            for j in range(i + 1, 4):
                if np.array_equal(rows[i], rows[j]):
                    raise InputError(
                        f"benchmark rows {i + 1} and {j + 1} are identical"
                    )

    @property
    def n_indicators(self) -> int:
        return len(self.indicators)

    def column_code(self, k: int) -> str:
        """Catalog code addressing column k (bridged when the column is named)."""
        name = self.indicators[k]
        return RATING_NAME_TO_CODE.get(name, name)

    def codes(self) -> tuple[str, ...]:
        return tuple(self.column_code(k) for k in range(self.n_indicators))

    def subset(self, codes) -> tuple["BenchmarkMatrix", tuple[str, ...]]:
        """Restrict to columns whose code is in `codes`.

        Returns the restricted matrix plus the requested codes that have no
        benchmark column (the caller decides whether to warn or fail).
        """
        wanted = set(codes)
        keep = [k for k in range(self.n_indicators) if self.column_code(k) in wanted]
        unmatched = tuple(sorted(wanted - {self.column_code(k) for k in keep}))
        if not keep:
            raise IncompleteVector(
                sorted(wanted), "no requested code has a benchmark column"
            )
        sub = BenchmarkMatrix(
            indicators=tuple(self.indicators[k] for k in keep),
            labels=self.labels,
            rows=self.rows[:, keep],
        )
        return sub, unmatched


def default_benchmarks() -> BenchmarkMatrix:
    """The built-in 13-indicator benchmark matrix."""
    return BenchmarkMatrix(
        indicators=tuple(name for name, _ in RATING_ORDER),
        labels=LEVEL_LABELS,
        rows=np.array(_DEFAULT_ROWS, dtype=float),
    )


@dataclass(frozen=True)
class GraConfig:
    rho: float = 0.5
    weights: tuple[float, ...] | None = None
    normalization: str = "benchmark-max"

    def __post_init__(self):
        if self.normalization not in ("none", "benchmark-max"):
            raise InputError(f"unknown normalization mode {self.normalization!r}")
        if self.weights is not None and any(w <= 0 for w in self.weights):
            raise InputError("weights must all be positive")


@dataclass(frozen=True, eq=False)
class GraBreakdown:
    delta: np.ndarray
    global_min: float
    global_max: float
    xi: np.ndarray


@dataclass(frozen=True, eq=False)
class CrisisAssessment:
    gamma: tuple[float, float, float, float]
    level: int
    label: str
    breakdown: GraBreakdown


def normalize(x0: np.ndarray, rows: np.ndarray, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Column scaling of the observation and the benchmark rows together.

    benchmark-max divides each column by its maximum over the benchmark rows,
    so every benchmark column tops out at 1 and the observation keeps its
    position relative to the references.
    """
    if mode == "none":
        return x0, rows
    if mode != "benchmark-max":
        raise InputError(f"unknown normalization mode {mode!r}")
    tops = rows.max(axis=0)
    zero = np.flatnonzero(tops == 0.0)
    if zero.size:
        raise ZeroColumn(f"benchmark column(s) all zero: {', '.join(map(str, zero))}")
    return x0 / tops, rows / tops


def weighted_deltas(x0, rows, weights) -> np.ndarray:
    """delta[i][k] = w_k * |x0(k) - rows[i][k]|."""
    x0 = as_float_vector(x0, "x0")
    rows = np.asarray(rows, dtype=float)
    weights = as_float_vector(weights, "weights")
    if rows.ndim != 2 or rows.shape[1] != x0.size:
        raise LengthMismatch(
            f"benchmark rows have {rows.shape[-1]} columns, observation has {x0.size}"
        )
    if weights.size != x0.size:
        raise LengthMismatch(
            f"weights have length {weights.size}, observation has {x0.size}"
        )
    return weights[np.newaxis, :] * np.abs(x0[np.newaxis, :] - rows)


def extrema(delta: np.ndarray) -> tuple[float, float]:
    """Two-level extrema: min and max over every cell of the delta matrix."""
    delta = np.asarray(delta, dtype=float)
    return float(delta.min()), float(delta.max())


def relational_coefficients(delta: np.ndarray, ext: tuple[float, float], rho: float) -> np.ndarray:
    """xi[i][k] = (gmin + rho*gmax) / (delta[i][k] + rho*gmax), all ones if gmax = 0."""
    if not 0.0 < rho < 1.0:
        raise InvalidRho(f"rho must be in (0, 1), got {rho}")
    delta = np.asarray(delta, dtype=float)
    gmin, gmax = ext
    if gmax == 0.0:
        return np.ones_like(delta)
    return (gmin + rho * gmax) / (delta + rho * gmax)


def relational_degree(xi: np.ndarray) -> np.ndarray:
    """Row means of the coefficient matrix."""
    return np.asarray(xi, dtype=float).mean(axis=1)


def _align(x0, bm: BenchmarkMatrix) -> np.ndarray:
    """Turn a positional vector or a code/name-keyed mapping into bm order."""
    values = x0
    if not isinstance(values, Mapping) and isinstance(getattr(x0, "values", None), Mapping):
        values = x0.values  # indicator-vector style object
    if isinstance(values, Mapping):
        out = np.empty(bm.n_indicators)
        missing = []
        for k, name in enumerate(bm.indicators):
            code = bm.column_code(k)
            if code in values:
                out[k] = values[code]
            elif name in values:
                out[k] = values[name]
            else:
                missing.append(code)
        if missing:
            raise IncompleteVector(missing)
        return out
    arr = as_float_vector(x0, "x0")
    if arr.size != bm.n_indicators:
        raise LengthMismatch(
            f"observation has {arr.size} values, benchmarks have {bm.n_indicators}"
        )
    return arr


def rate(x0, bm: BenchmarkMatrix | None = None, config: GraConfig | None = None) -> CrisisAssessment:
    """Score one observation: normalize, delta, extrema, coefficients, degree.

    `x0` may be a positional sequence aligned with the benchmark columns, or
    a mapping keyed by catalog codes (or benchmark column names); missing
    codes raise IncompleteVector.
    """
    if bm is None:
        bm = default_benchmarks()
    if config is None:
        config = GraConfig()
    x0 = _align(x0, bm)
    if config.weights is None:
        weights = np.full(bm.n_indicators, 1.0 / bm.n_indicators)
    else:
        weights = as_float_vector(config.weights, "weights")
        if weights.size != bm.n_indicators:
            raise LengthMismatch(
                f"weights have length {weights.size}, benchmarks have {bm.n_indicators}"
            )
    x0n, rowsn = normalize(x0, bm.rows, config.normalization)
    delta = weighted_deltas(x0n, rowsn, weights)
    ext = extrema(delta)
    xi = relational_coefficients(delta, ext, config.rho)
    gamma = relational_degree(xi)
    pick = int(np.argmax(gamma))  # first maximum: ties fall to the severer level
    return CrisisAssessment(
        gamma=tuple(float(g) for g in gamma),
        level=LEVELS[pick],
        label=bm.labels[pick],
        breakdown=GraBreakdown(delta=delta, global_min=ext[0], global_max=ext[1], xi=xi),
    )


def write_benchmark_file(path, bm: BenchmarkMatrix, weights: tuple[float, ...] | None = None) -> None:
    """Plain CSV table: optional header, one row per level, optional weights row."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["indicator", *bm.indicators])
        for label, row in zip(bm.labels, bm.rows):
            writer.writerow([label, *(repr(float(v)) for v in row)])
        if weights is not None:
            writer.writerow(["weights", *(repr(float(w)) for w in weights)])


def read_benchmark_file(path) -> tuple[BenchmarkMatrix, tuple[float, ...] | None]:
    """Parse the table written by write_benchmark_file (header and weights optional)."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    except OSError as exc:
        raise FileUnreadable(f"cannot read benchmark file {path}: {exc}") from exc
    if not rows:
        raise InputError(f"benchmark file {path} is empty")
    names: tuple[str, ...] | None = None
    if rows[0][0].strip().lower() in ("indicator", "indicators"):
        names = tuple(cell.strip() for cell in rows[0][1:])
        rows = rows[1:]
    weights: tuple[float, ...] | None = None
    if rows and rows[-1][0].strip().lower() == "weights":
        weights = tuple(float(cell) for cell in rows[-1][1:])
        rows = rows[:-1]
    if len(rows) != 4:
        raise InputError(f"benchmark file {path} must have 4 level rows, found {len(rows)}")
    labels = tuple(r[0].strip() for r in rows)
    values = np.array([[float(cell) for cell in r[1:]] for r in rows])
    if names is None:
        if values.shape[1] == len(RATING_ORDER):
            names = tuple(name for name, _ in RATING_ORDER)
        else:
            names = tuple(f"x{k + 1}" for k in range(values.shape[1]))
    if len(names) != values.shape[1]:
        raise InputError(f"benchmark file {path}: header and row widths differ")
    if weights is not None and len(weights) != values.shape[1]:
        raise InputError(f"benchmark file {path}: weights row width differs")
    return BenchmarkMatrix(indicators=names, labels=labels, rows=values), weights


class CrisisRater(BaseEstimator):
    """Estimator wrapper over the rating chain.

    Benchmarks are reference data rather than anything learned, so fit()
    validates configuration and materializes them. predict() maps each row
    of X (aligned with the benchmark columns) to a level in 1..4.
    """

    def __init__(self, rho: float = 0.5, normalization: str = "benchmark-max",
                 weights: tuple[float, ...] | None = None,
                 benchmarks: BenchmarkMatrix | None = None):
        self.rho = rho
        self.normalization = normalization
        self.weights = weights
        self.benchmarks = benchmarks

    def fit(self, X=None, y=None) -> "CrisisRater":
        config = GraConfig(rho=self.rho, weights=self.weights, normalization=self.normalization)
        if not 0.0 < self.rho < 1.0:
            raise InvalidRho(f"rho must be in (0, 1), got {self.rho}")
        self.config_ = config
        self.benchmarks_ = self.benchmarks if self.benchmarks is not None else default_benchmarks()
        self.n_features_in_ = self.benchmarks_.n_indicators
        return self

    def _check_fitted(self):
        if not hasattr(self, "benchmarks_"):
            raise NotFittedError("CrisisRater is not fitted; call fit() first")

    def assess(self, x0) -> CrisisAssessment:
        self._check_fitted()
        return rate(x0, self.benchmarks_, self.config_)

    def relational_degrees(self, X) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        return np.array([self.assess(row).gamma for row in X])

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        return np.array([self.assess(row).level for row in X], dtype=int)
