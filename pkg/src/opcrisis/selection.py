"""Index-system screening: rank correlation pruning followed by PCA retention.

The screening runs per indicator group. Within a group, members whose rank
correlation reaches the threshold are redundant and the one carrying less
distinct information is dropped; the survivors are then compressed with a
principal-component analysis and only the indexes carrying the leading
components are retained. All linear algebra that embodies the method itself
(rank correlation, Jacobi eigendecomposition) is written out here; numpy is
used only as an array substrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .catalog import IndicatorCatalog, resolve_catalog
from .errors import (
    CatalogMismatch,
    ConfigError,
    DegenerateInput,
    NoConvergence,
    NotSymmetric,
)
from .validation import as_float_matrix, as_float_vector, check_same_length

DEFAULT_CORR_THRESHOLD = 0.84
DEFAULT_CUM_THRESHOLD = 0.90

# Slack applied to the cumulative-contribution cut so a component set whose
# running total equals the threshold up to rounding is still accepted.
_CUM_EPS = 1e-9


def rank_with_ties(values) -> np.ndarray:
    """1-based ranks; tied values share the average of their positions."""
    arr = as_float_vector(values, "values")
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=float)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        # positions i..j (0-based) share rank mean of i+1..j+1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Rank correlation coefficient in [-1, 1].

    Tie-free inputs use the closed form 1 - 6*sum(d^2)/(n(n^2-1)); inputs with
    ties fall back to the product-moment coefficient of the average ranks.
    Constant inputs have no rank ordering and are rejected.
    """
    xv = as_float_vector(x, "x", min_len=2)
    yv = as_float_vector(y, "y", min_len=2)
    check_same_length(xv, yv, "rank correlation inputs")
    if np.all(xv == xv[0]):
        raise DegenerateInput("x is constant; rank correlation undefined")
    if np.all(yv == yv[0]):
        raise DegenerateInput("y is constant; rank correlation undefined")
    rx = rank_with_ties(xv)
    ry = rank_with_ties(yv)
    n = xv.size
    if np.unique(xv).size == n and np.unique(yv).size == n:
        d = rx - ry
        return float(1.0 - 6.0 * float(d @ d) / (n * (n * n - 1.0)))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    return float(float(dx @ dy) / math.sqrt(float(dx @ dx) * float(dy @ dy)))


def standardize(X, codes: tuple[str, ...] | None = None) -> np.ndarray:
    """Column-wise z-scores with sample (ddof=1) standard deviation."""
    arr = as_float_matrix(X, "observation matrix", min_rows=2)
    std = arr.std(axis=0, ddof=1)
    dead = np.flatnonzero(std == 0.0)
    if dead.size:
        names = [codes[k] if codes else f"column {k}" for k in dead]
        raise DegenerateInput(f"constant column(s), cannot standardize: {', '.join(names)}")
    return (arr - arr.mean(axis=0)) / std


def correlation_matrix(Z: np.ndarray) -> np.ndarray:
    """Sample correlation matrix of already-standardized columns."""
    arr = as_float_matrix(Z, "standardized matrix", min_rows=2)
    r = arr.T @ arr / (arr.shape[0] - 1)
    return (r + r.T) / 2.0


def eigen_sym(
    R, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues descending, eigenvectors as columns in the same
    order). Each eigenvector is oriented so its largest-magnitude entry is
    positive, making the decomposition deterministic.
    """
    a = as_float_matrix(R, "symmetric matrix")
    n = a.shape[0]
    if a.shape[1] != n:
        raise NotSymmetric(f"matrix is {a.shape[0]}x{a.shape[1]}, not square")
    if n > 1 and float(np.max(np.abs(a - a.T))) > 1e-9:
        raise NotSymmetric("matrix is not symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                off = max(off, abs(apq))
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                mask = np.ones(n, dtype=bool)
                mask[p] = mask[q] = False
                akp = a[mask, p].copy()
                akq = a[mask, q].copy()
                a[mask, p] = a[p, mask] = c * akp - s * akq
                a[mask, q] = a[q, mask] = s * akp + c * akq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if off <= tol:
            break
    else:
        raise NoConvergence(f"Jacobi sweep limit {max_sweeps} reached")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(v[:, j])))
        if v[k, j] < 0.0:
            v[:, j] = -v[:, j]
    return w, v


@dataclass(frozen=True)
class RemovalStep:
    """One index dropped during correlation pruning."""

    code: str
    partner: str
    coefficient: float
    mean_abs: float


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    group: str
    codes: tuple[str, ...]
    matrix: np.ndarray
    threshold: float
    removed: tuple[RemovalStep, ...]
    kept: tuple[str, ...]


def prune_correlated(
    X, codes: tuple[str, ...], threshold: float = DEFAULT_CORR_THRESHOLD, group: str = ""
) -> CorrelationReport:
    """Drop redundant indexes until no pair's |rank correlation| reaches threshold.

    The pairwise coefficients are computed once up front: a pair's rank
    correlation does not depend on which other indexes are present. Each pass
    takes the strongest remaining pair and drops the member with the larger
    mean absolute coefficient against the other surviving members (ties drop
    the later catalog position). A group is never emptied below one index.
    """
    codes = tuple(codes)
    arr = as_float_matrix(X, "observation matrix", min_rows=2)
    if arr.shape[1] != len(codes):
        raise CatalogMismatch(
            f"matrix has {arr.shape[1]} columns for {len(codes)} codes"
        )
    m = len(codes)
    matrix = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            try:
                matrix[i, j] = matrix[j, i] = spearman(arr[:, i], arr[:, j])
            except DegenerateInput:
                dead = i if np.all(arr[:, i] == arr[0, i]) else j
                raise DegenerateInput(
                    f"constant column, rank correlation undefined: {codes[dead]}"
                ) from None

    active = list(range(m))
    removed: list[RemovalStep] = []
    while len(active) > 1:
        pairs = [
            (i, j)
            for ai, i in enumerate(active)
            for j in active[ai + 1 :]
            if abs(matrix[i, j]) >= threshold
        ]
        if not pairs:
            break
        i, j = min(pairs, key=lambda ij: (-abs(matrix[ij[0], ij[1]]), ij[0], ij[1]))
        mean_i = float(np.mean([abs(matrix[i, k]) for k in active if k != i]))
        mean_j = float(np.mean([abs(matrix[j, k]) for k in active if k != j]))
        drop, keep = (i, j) if mean_i > mean_j else (j, i)  # tie: j is later
        drop_mean = mean_i if drop == i else mean_j
        removed.append(
            RemovalStep(
                code=codes[drop],
                partner=codes[keep],
                coefficient=float(matrix[i, j]),
                mean_abs=drop_mean,
            )
        )
        active.remove(drop)
    return CorrelationReport(
        group=group,
        codes=codes,
        matrix=matrix,
        threshold=float(threshold),
        removed=tuple(removed),
        kept=tuple(codes[k] for k in active),
    )


@dataclass(frozen=True, eq=False)
class PcaReport:
    group: str
    codes: tuple[str, ...]
    eigenvalues: np.ndarray
    contributions: np.ndarray  # percent of total variance per component
    cumulative: np.ndarray
    loadings: np.ndarray  # eigenvectors as columns, component order
    assignment: tuple[tuple[int, str], ...]  # component index -> carrier code
    retained: tuple[str, ...]


def pca_select(
    X,
    codes: tuple[str, ...],
    cum_threshold: float = DEFAULT_CUM_THRESHOLD,
    group: str = "",
) -> PcaReport:
    """Retain the indexes carrying the leading principal components.

    Components are kept until their cumulative variance contribution reaches
    cum_threshold. Each component is assigned the not-yet-taken index with the
    largest absolute loading; the retained set is the assigned indexes of the
    kept components, reported in catalog order.
    """
    codes = tuple(codes)
    if not 0.0 < cum_threshold <= 1.0:
        raise ConfigError(f"cumulative threshold must be in (0, 1], got {cum_threshold}")
    arr = as_float_matrix(X, "observation matrix", min_rows=2)
    if arr.shape[1] != len(codes):
        raise CatalogMismatch(
            f"matrix has {arr.shape[1]} columns for {len(codes)} codes"
        )
    z = standardize(arr, codes)
    r = correlation_matrix(z)
    w, v = eigen_sym(r)
    total = float(w.sum())
    contributions = 100.0 * w / total
    cumulative = np.cumsum(contributions)
    target = 100.0 * cum_threshold - _CUM_EPS
    n_keep = int(np.searchsorted(cumulative, target, side="left")) + 1
    n_keep = min(n_keep, len(codes))

    assignment: list[tuple[int, str]] = []
    taken: set[str] = set()
    for comp in range(len(codes)):
        for k in np.argsort(-np.abs(v[:, comp]), kind="stable"):
            if codes[k] not in taken:
                assignment.append((comp, codes[k]))
                taken.add(codes[k])
                break
    chosen = {code for comp, code in assignment if comp < n_keep}
    return PcaReport(
        group=group,
        codes=codes,
        eigenvalues=w,
        contributions=contributions,
        cumulative=cumulative,
        loadings=v,
        assignment=tuple(assignment),
        retained=tuple(c for c in codes if c in chosen),
    )


@dataclass(frozen=True)
class SelectionConfig:
    corr_threshold: float = DEFAULT_CORR_THRESHOLD
    cum_threshold: float = DEFAULT_CUM_THRESHOLD
    mode: str = "per-group"  # or "global"

    def __post_init__(self):
        if not 0.0 < self.corr_threshold <= 1.0:
            raise ConfigError(
                f"correlation threshold must be in (0, 1], got {self.corr_threshold}"
            )
        if not 0.0 < self.cum_threshold <= 1.0:
            raise ConfigError(
                f"cumulative threshold must be in (0, 1], got {self.cum_threshold}"
            )
        if self.mode not in ("per-group", "global"):
            raise ConfigError(f"selection mode must be 'per-group' or 'global', got {self.mode!r}")


@dataclass(frozen=True, eq=False)
class SelectionResult:
    catalog: IndicatorCatalog
    correlation: tuple[CorrelationReport, ...]
    pca: tuple[PcaReport, ...]


def select_catalog(
    X, catalog: IndicatorCatalog, config: SelectionConfig | None = None
) -> SelectionResult:
    """Screen a catalog against observations: correlation pruning, then PCA.

    In "per-group" mode each indicator group is screened on its own;
    single-member groups pass through untouched. "global" mode treats the
    whole catalog as one group. The result catalog preserves catalog order.
    """
    config = config or SelectionConfig()
    arr = as_float_matrix(X, "observation matrix", min_rows=2)
    all_codes = catalog.codes()
    if arr.shape[1] != len(all_codes):
        raise CatalogMismatch(
            f"matrix has {arr.shape[1]} columns, catalog {catalog.name!r} "
            f"has {len(all_codes)} indicators"
        )
    if config.mode == "global":
        blocks = {"all": tuple(catalog.indicators)}
    else:
        blocks = catalog.groups()

    corr_reports: list[CorrelationReport] = []
    pca_reports: list[PcaReport] = []
    surviving: list[str] = []
    for group, members in blocks.items():
        codes = tuple(ind.code for ind in members)
        if len(codes) == 1:
            surviving.extend(codes)
            continue
        cols = [catalog.position(c) for c in codes]
        sub = arr[:, cols]
        corr = prune_correlated(sub, codes, threshold=config.corr_threshold, group=group)
        corr_reports.append(corr)
        if len(corr.kept) == 1:
            surviving.extend(corr.kept)
            continue
        kept_cols = [catalog.position(c) for c in corr.kept]
        pca = pca_select(
            arr[:, kept_cols], corr.kept, cum_threshold=config.cum_threshold, group=group
        )
        pca_reports.append(pca)
        surviving.extend(pca.retained)

    selected = catalog.subset(surviving, name=f"{catalog.name}-selected")
    return SelectionResult(
        catalog=selected,
        correlation=tuple(corr_reports),
        pca=tuple(pca_reports),
    )


class IndexSelector(TransformerMixin, BaseEstimator):
    """Estimator wrapper around select_catalog.

    fit learns which catalog columns survive screening; transform keeps only
    those columns. Column order of X must match the configured catalog.
    """

    def __init__(
        self,
        catalog: str = "initial",
        codes: tuple[str, ...] | None = None,
        corr_threshold: float = DEFAULT_CORR_THRESHOLD,
        cum_threshold: float = DEFAULT_CUM_THRESHOLD,
        mode: str = "per-group",
    ):
        self.catalog = catalog
        self.codes = codes
        self.corr_threshold = corr_threshold
        self.cum_threshold = cum_threshold
        self.mode = mode

    def fit(self, X, y=None):
        cat = resolve_catalog(self.catalog, self.codes)
        arr = as_float_matrix(X, "X", min_rows=2)
        if arr.shape[1] != len(cat):
            raise CatalogMismatch(
                f"X has {arr.shape[1]} columns, catalog {cat.name!r} has {len(cat)}"
            )
        config = SelectionConfig(
            corr_threshold=self.corr_threshold,
            cum_threshold=self.cum_threshold,
            mode=self.mode,
        )
        self.result_ = select_catalog(arr, cat, config)
        self.selected_codes_ = self.result_.catalog.codes()
        picked = set(self.selected_codes_)
        self.support_ = np.array([c in picked for c in cat.codes()], dtype=bool)
        self.n_features_in_ = arr.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "support_"):
            raise NotFittedError(
                "this IndexSelector is not fitted yet; call fit before using it"
            )

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        arr = as_float_matrix(X, "X")
        if arr.shape[1] != self.n_features_in_:
            raise CatalogMismatch(
                f"X has {arr.shape[1]} columns, expected {self.n_features_in_}"
            )
        return arr[:, self.support_]

    def get_support(self) -> np.ndarray:
        self._check_fitted()
        return self.support_.copy()
