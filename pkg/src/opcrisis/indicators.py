"""Per-bucket indicator computation.

Each time bucket yields one indicator vector over a catalog: trimmed-mean
author statistics (original-blog authors only), cumulative event totals,
change rates against the previous bucket, and sentiment class counts. Missing
values are explicit markers — never silent zeros — because downstream rating
needs complete vectors.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import IndicatorCatalog
from .errors import (
    CatalogMismatch,
    FileUnreadable,
    InvalidWindow,
    MissingData,
    NoCompleteRows,
    OutputUnwritable,
    SchemaViolation,
)
from .records import TimeBucket
from .validation import as_float_vector

logger = logging.getLogger(__name__)

# change-rate code -> the cumulative total it differentiates
RATE_BASE = {
    "C221": "C124",
    "C222": "C123",
    "C223": "C122",
    "C224": "C121",
    "C225": "C126",
    "C314": "C312",
}

SENTIMENT_CODES = ("C311", "C312", "C313")


@dataclass(frozen=True)
class IndicatorVector:
    bucket_index: int
    values: dict[str, float]  # catalog order
    missing: frozenset[str]


@dataclass(frozen=True, eq=False)
class IndicatorMatrix:
    data: np.ndarray  # (n_rows, n_codes), catalog column order
    codes: tuple[str, ...]
    bucket_indices: tuple[int, ...]
    excluded: tuple[tuple[int, tuple[str, ...]], ...]  # (bucket, absent codes)


def trimmed_mean(values) -> float:
    """Mean after dropping exactly one maximal and one minimal element.

    The n-2 denominator only makes sense from three values up; one or two
    values fall back to the plain mean.
    """
    arr = np.sort(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise MissingData("trimmed mean needs at least one value")
    as_float_vector(arr, "values")
    if arr.size < 3:
        return float(arr.mean())
    return float(arr[1:-1].sum() / (arr.size - 2))


def rate_of_change(prev_total: float, cur_total: float, dt_hours: float) -> float:
    """Change per hour between two running totals."""
    if not (isinstance(dt_hours, (int, float)) and math.isfinite(dt_hours)) or dt_hours <= 0:
        raise InvalidWindow(f"dt must be a positive number of hours, got {dt_hours!r}")
    return (float(cur_total) - float(prev_total)) / float(dt_hours)


def _original_authors(bucket: TimeBucket):
    """Distinct authors of original blogs, in first-appearance order.

    Records carry no author id, so two identical profiles are treated as the
    same person; that is the finest distinction the data supports.
    """
    return tuple(
        dict.fromkeys(b.author for b in bucket.blogs if b.is_original)
    )


def _cumulative_totals(bucket: TimeBucket) -> dict[str, float]:
    return {
        "C121": float(sum(b.like_count for b in bucket.blogs)),
        "C122": float(sum(b.comment_count for b in bucket.blogs)),
        "C123": float(sum(b.forward_count for b in bucket.blogs)),
        "C124": float(len(bucket.blogs)),
        "C125": float(sum(1 for b in bucket.blogs if b.is_government)),
        "C126": float(sum(c.response_count for c in bucket.comments)),
    }


def _base_values(
    bucket: TimeBucket, sentiment_counts: tuple[int, int, int] | None
) -> tuple[dict[str, float], set[str]]:
    """All non-rate values derivable from one bucket, plus what's absent."""
    values = dict(_cumulative_totals(bucket))
    absent: set[str] = set()

    authors = _original_authors(bucket)
    values["C113"] = float(sum(1 for a in authors if a.is_verified))
    if authors:
        values["C111"] = trimmed_mean([a.follower_count for a in authors])
        values["C112"] = trimmed_mean([a.attention_count for a in authors])
        values["C114"] = trimmed_mean([a.historical_blog_count for a in authors])
        values["C115"] = trimmed_mean([a.grade for a in authors])
    else:
        absent |= {"C111", "C112", "C114", "C115"}

    snap = bucket.snapshot_at_end
    if snap is None:
        absent |= {"C211", "C212"}
    else:
        values["C211"] = float(snap.total_reads)
        values["C212"] = float(snap.total_discussions)

    if sentiment_counts is not None:
        pos, neg, neu = sentiment_counts
        values["C311"] = float(pos)
        values["C312"] = float(neg)
        values["C313"] = float(neu)
    else:
        absent |= {"C311", "C312", "C313"}
    return values, absent


def compute_vector(
    bucket: TimeBucket,
    prev_bucket: TimeBucket | None,
    catalog: IndicatorCatalog,
    sentiment_counts: tuple[int, int, int] | None = None,
    prev_sentiment_counts: tuple[int, int, int] | None = None,
) -> IndicatorVector:
    """One indicator vector for a bucket, over the given catalog.

    Rate indicators need a predecessor bucket (and, for the sentiment rate,
    the predecessor's class counts); without one they are marked missing.
    sentiment_counts are (positive, negative, neutral) over the bucket's
    cumulative texts.
    """
    wanted = catalog.codes()
    needs_sentiment = any(c in catalog for c in SENTIMENT_CODES + ("C314",))
    if needs_sentiment and sentiment_counts is None:
        raise CatalogMismatch(
            f"catalog {catalog.name!r} includes sentiment indicators but no "
            "sentiment counts were given"
        )
    for counts in (sentiment_counts, prev_sentiment_counts):
        if counts is not None and len(counts) != 3:
            raise CatalogMismatch(
                "sentiment counts must be (positive, negative, neutral)"
            )

    base, absent = _base_values(bucket, sentiment_counts)
    if prev_bucket is None:
        absent |= set(RATE_BASE)
    else:
        prev_base, prev_absent = _base_values(prev_bucket, prev_sentiment_counts)
        dt_hours = (bucket.end - prev_bucket.end) / 3600.0
        for code, total_code in RATE_BASE.items():
            if total_code in prev_base and total_code in base:
                base[code] = rate_of_change(prev_base[total_code], base[total_code], dt_hours)
            else:
                absent.add(code)

    values: dict[str, float] = {}
    missing: set[str] = set()
    for code in wanted:
        if code in base and code not in absent:
            values[code] = base[code]
        else:
            missing.add(code)
    return IndicatorVector(
        bucket_index=bucket.index, values=values, missing=frozenset(missing)
    )


def build_matrix(vectors, catalog: IndicatorCatalog) -> IndicatorMatrix:
    """Stack complete vectors into a matrix in catalog column order.

    Rows lacking any requested column are excluded (and logged), keeping the
    matrix rectangular; bucket order is restored regardless of input order.
    """
    codes = catalog.codes()
    rows: list[tuple[int, list[float]]] = []
    excluded: list[tuple[int, tuple[str, ...]]] = []
    for vec in sorted(vectors, key=lambda v: v.bucket_index):
        unaccounted = [
            c for c in codes if c not in vec.values and c not in vec.missing
        ]
        if unaccounted:
            raise CatalogMismatch(
                f"vector for bucket {vec.bucket_index} was not computed over "
                f"catalog {catalog.name!r}: no entry for {', '.join(unaccounted)}"
            )
        absent = tuple(c for c in codes if c not in vec.values)
        if absent:
            excluded.append((vec.bucket_index, absent))
            logger.info(
                "bucket %d excluded from matrix: missing %s",
                vec.bucket_index,
                ", ".join(absent),
            )
            continue
        rows.append((vec.bucket_index, [vec.values[c] for c in codes]))
    if not rows:
        raise NoCompleteRows(
            f"no vector provides every indicator of catalog {catalog.name!r}"
        )
    return IndicatorMatrix(
        data=np.array([r[1] for r in rows], dtype=float),
        codes=codes,
        bucket_indices=tuple(r[0] for r in rows),
        excluded=tuple(excluded),
    )


def write_indicator_csv(vectors, catalog: IndicatorCatalog, path) -> None:
    """One row per bucket, header = catalog codes, missing cells empty."""
    codes = catalog.codes()
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bucket", *codes])
            for vec in vectors:
                writer.writerow(
                    [vec.bucket_index]
                    + [repr(vec.values[c]) if c in vec.values else "" for c in codes]
                )
    except OSError as err:
        raise OutputUnwritable(f"cannot write {path}: {err}") from None


def read_indicator_csv(path) -> tuple[tuple[str, ...], list[IndicatorVector]]:
    """Inverse of write_indicator_csv."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise FileUnreadable(f"cannot read {path}: {err}") from None
    rows = list(csv.reader(text.splitlines()))
    if not rows or not rows[0] or rows[0][0] != "bucket":
        raise SchemaViolation(1, "bucket", "indicator CSV must start with a 'bucket' header")
    codes = tuple(rows[0][1:])
    vectors: list[IndicatorVector] = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(codes) + 1:
            raise SchemaViolation(line_no, "row", f"expected {len(codes) + 1} cells, got {len(row)}")
        try:
            bucket = int(row[0])
        except ValueError:
            raise SchemaViolation(line_no, "bucket", f"not an integer: {row[0]!r}") from None
        values: dict[str, float] = {}
        missing: set[str] = set()
        for code, cell in zip(codes, row[1:]):
            if cell == "":
                missing.add(code)
                continue
            try:
                values[code] = float(cell)
            except ValueError:
                raise SchemaViolation(line_no, code, f"not a number: {cell!r}") from None
        vectors.append(IndicatorVector(bucket, values, frozenset(missing)))
    return codes, vectors
