"""Event record ingestion, validation, and time bucketing.

Raw material is a line-delimited file of blog, comment, and snapshot
records. Loading parses and screens every line, validation reports dataset
invariant breaks without modifying anything, and bucketing slices the event
timeline into fixed-width half-open windows whose views are cumulative from
the event start.

Live page fetching is deliberately just a declared interface: everything
testable starts from files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .errors import (
    EmptyDataset,
    FileUnreadable,
    InvalidWindow,
    OutputUnwritable,
    SchemaViolation,
)


class PageFetcher(Protocol):
    """Source of raw page bytes; no implementation ships."""

    def fetch(self, page_address: str) -> bytes: ...


@dataclass(frozen=True)
class AuthorProfile:
    follower_count: int
    attention_count: int
    grade: int
    is_verified: bool
    historical_blog_count: int


@dataclass(frozen=True)
class BlogRecord:
    id: str
    author: AuthorProfile
    timestamp: int
    text: str
    like_count: int
    comment_count: int
    forward_count: int
    is_original: bool
    is_government: bool


@dataclass(frozen=True)
class CommentRecord:
    id: str
    parent_blog_id: str
    timestamp: int
    text: str
    response_count: int


@dataclass(frozen=True)
class SnapshotStats:
    timestamp: int
    total_reads: int
    total_discussions: int


@dataclass(frozen=True)
class EventDataset:
    event_id: str
    blogs: tuple[BlogRecord, ...]
    comments: tuple[CommentRecord, ...]
    snapshots: tuple[SnapshotStats, ...]
    start_time: int


@dataclass(frozen=True)
class RejectedLine:
    line_no: int
    reason: str


@dataclass(frozen=True)
class IngestResult:
    dataset: EventDataset
    rejects: tuple[RejectedLine, ...]

    def rejection_report(self) -> str:
        return "\n".join(f"line {r.line_no}: {r.reason}" for r in self.rejects)


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.findings


@dataclass(frozen=True)
class TimeBucket:
    """Fixed-width window [start, end) with cumulative views of the event.

    blogs/comments hold every record with timestamp < end (running totals,
    not per-window slices); snapshot_at_end is the latest platform snapshot
    strictly before end, carried forward from earlier windows when needed.
    """

    index: int
    start: float
    end: float
    blogs: tuple[BlogRecord, ...]
    comments: tuple[CommentRecord, ...]
    snapshot_at_end: SnapshotStats | None


class _FieldError(Exception):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"field {field!r}: {reason}")


def _require(obj: dict, field: str):
    if field not in obj:
        raise _FieldError(field, "missing")
    return obj[field]


def _as_int(obj: dict, field: str, minimum: int = 0) -> int:
    value = _require(obj, field)
    if isinstance(value, bool) or not isinstance(value, int):
        raise _FieldError(field, f"expected integer, got {value!r}")
    if value < minimum:
        raise _FieldError(field, f"must be >= {minimum}, got {value}")
    return value


def _as_str(obj: dict, field: str) -> str:
    value = _require(obj, field)
    if not isinstance(value, str):
        raise _FieldError(field, f"expected string, got {value!r}")
    return value


def _as_bool(obj: dict, field: str) -> bool:
    value = _require(obj, field)
    if not isinstance(value, bool):
        raise _FieldError(field, f"expected boolean, got {value!r}")
    return value


def _parse_author(obj: dict) -> AuthorProfile:
    raw = _require(obj, "author")
    if not isinstance(raw, dict):
        raise _FieldError("author", f"expected object, got {raw!r}")
    try:
        return AuthorProfile(
            follower_count=_as_int(raw, "followers"),
            attention_count=_as_int(raw, "attentions"),
            grade=_as_int(raw, "grade", minimum=1),
            is_verified=_as_bool(raw, "verified"),
            historical_blog_count=_as_int(raw, "historical_blogs"),
        )
    except _FieldError as err:
        raise _FieldError(f"author.{err.field}", err.reason) from None


def _parse_line(obj: dict):
    kind = _as_str(obj, "kind")
    if kind == "blog":
        return BlogRecord(
            id=_as_str(obj, "id"),
            author=_parse_author(obj),
            timestamp=_as_int(obj, "ts", minimum=-(2**62)),
            text=_as_str(obj, "text"),
            like_count=_as_int(obj, "likes"),
            comment_count=_as_int(obj, "comments"),
            forward_count=_as_int(obj, "forwards"),
            is_original=_as_bool(obj, "original"),
            is_government=_as_bool(obj, "government"),
        )
    if kind == "comment":
        return CommentRecord(
            id=_as_str(obj, "id"),
            parent_blog_id=_as_str(obj, "blog_id"),
            timestamp=_as_int(obj, "ts", minimum=-(2**62)),
            text=_as_str(obj, "text"),
            response_count=_as_int(obj, "responses"),
        )
    if kind == "snapshot":
        return SnapshotStats(
            timestamp=_as_int(obj, "ts", minimum=-(2**62)),
            total_reads=_as_int(obj, "reads"),
            total_discussions=_as_int(obj, "discussions"),
        )
    raise _FieldError("kind", f"unknown kind {kind!r}")


def load_records(path, strict: bool = True, event_id: str | None = None) -> IngestResult:
    """Parse a line-delimited record file into a dataset.

    strict=True raises SchemaViolation at the first bad line; strict=False
    collects bad lines into the rejection report instead. Either way the
    returned dataset satisfies validate(): duplicate ids, dangling comment
    parents, and non-monotone snapshots count as bad lines.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise FileUnreadable(f"cannot read {path}: {err}") from None

    rejects: list[RejectedLine] = []

    def bad(line_no: int, field: str, reason: str):
        if strict:
            raise SchemaViolation(line_no, field, reason)
        rejects.append(RejectedLine(line_no, f"field {field!r}: {reason}"))

    blogs: list[BlogRecord] = []
    comments: list[tuple[int, CommentRecord]] = []
    snapshots: list[SnapshotStats] = []
    seen_ids: dict[str, int] = {}
    last_snapshot: SnapshotStats | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            bad(line_no, "line", "blank line")
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as err:
            bad(line_no, "line", f"invalid JSON: {err.msg}")
            continue
        if not isinstance(obj, dict):
            bad(line_no, "line", "expected a JSON object")
            continue
        try:
            record = _parse_line(obj)
        except _FieldError as err:
            bad(line_no, err.field, err.reason)
            continue
        if isinstance(record, (BlogRecord, CommentRecord)):
            if record.id in seen_ids:
                bad(line_no, "id", f"duplicate id {record.id!r} (first at line {seen_ids[record.id]})")
                continue
            seen_ids[record.id] = line_no
        if isinstance(record, BlogRecord):
            blogs.append(record)
        elif isinstance(record, CommentRecord):
            comments.append((line_no, record))
        else:
            if last_snapshot is not None and (
                record.timestamp <= last_snapshot.timestamp
                or record.total_reads < last_snapshot.total_reads
                or record.total_discussions < last_snapshot.total_discussions
            ):
                bad(line_no, "ts", "snapshot not monotone with its predecessor")
                continue
            last_snapshot = record
            snapshots.append(record)

    blog_ids = {b.id for b in blogs}
    kept_comments: list[CommentRecord] = []
    for line_no, comment in comments:
        if comment.parent_blog_id not in blog_ids:
            bad(line_no, "blog_id", f"references missing blog {comment.parent_blog_id!r}")
            continue
        kept_comments.append(comment)

    if not blogs:
        raise EmptyDataset(f"{path}: no valid blog records")

    timestamps = (
        [b.timestamp for b in blogs]
        + [c.timestamp for c in kept_comments]
        + [s.timestamp for s in snapshots]
    )
    dataset = EventDataset(
        event_id=event_id if event_id is not None else path.stem,
        blogs=tuple(blogs),
        comments=tuple(kept_comments),
        snapshots=tuple(snapshots),
        start_time=min(timestamps),
    )
    return IngestResult(dataset=dataset, rejects=tuple(rejects))


def save_records(dataset: EventDataset, path) -> None:
    """Write a dataset back to the line-delimited format (blogs, comments, snapshots)."""
    lines = []
    for b in dataset.blogs:
        lines.append(
            json.dumps(
                {
                    "kind": "blog",
                    "id": b.id,
                    "author": {
                        "followers": b.author.follower_count,
                        "attentions": b.author.attention_count,
                        "grade": b.author.grade,
                        "verified": b.author.is_verified,
                        "historical_blogs": b.author.historical_blog_count,
                    },
                    "ts": b.timestamp,
                    "text": b.text,
                    "likes": b.like_count,
                    "comments": b.comment_count,
                    "forwards": b.forward_count,
                    "original": b.is_original,
                    "government": b.is_government,
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    for c in dataset.comments:
        lines.append(
            json.dumps(
                {
                    "kind": "comment",
                    "id": c.id,
                    "blog_id": c.parent_blog_id,
                    "ts": c.timestamp,
                    "text": c.text,
                    "responses": c.response_count,
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    for s in dataset.snapshots:
        lines.append(
            json.dumps(
                {
                    "kind": "snapshot",
                    "ts": s.timestamp,
                    "reads": s.total_reads,
                    "discussions": s.total_discussions,
                },
                sort_keys=True,
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as err:
        raise OutputUnwritable(f"cannot write {path}: {err}") from None


def validate(dataset: EventDataset) -> ValidationReport:
    """Report every dataset invariant break; the dataset is left untouched."""
    findings: list[str] = []
    seen: set[str] = set()
    for record in list(dataset.blogs) + list(dataset.comments):
        if record.id in seen:
            findings.append(f"duplicate record id {record.id!r}")
        seen.add(record.id)
    blog_ids = {b.id for b in dataset.blogs}
    for comment in dataset.comments:
        if comment.parent_blog_id not in blog_ids:
            findings.append(
                f"comment {comment.id!r} references missing blog {comment.parent_blog_id!r}"
            )
    prev = None
    for snap in dataset.snapshots:
        if prev is not None:
            if snap.timestamp <= prev.timestamp:
                findings.append(
                    f"snapshot timestamps not strictly increasing at ts={snap.timestamp}"
                )
            if snap.total_reads < prev.total_reads:
                findings.append(f"total_reads decreases at ts={snap.timestamp}")
            if snap.total_discussions < prev.total_discussions:
                findings.append(f"total_discussions decreases at ts={snap.timestamp}")
        prev = snap
    for record in list(dataset.blogs) + list(dataset.comments) + list(dataset.snapshots):
        if record.timestamp < dataset.start_time:
            findings.append(
                f"timestamp {record.timestamp} is before the event start {dataset.start_time}"
            )
    return ValidationReport(findings=tuple(findings))


def bucketize(dataset: EventDataset, window_hours: float) -> list[TimeBucket]:
    """Slice the event into fixed-width half-open windows [start, end).

    A record exactly on a boundary belongs to the later bucket, so every
    bucket's view is a function of strictly earlier data. Buckets run from
    the event start through the last record or snapshot timestamp.
    """
    if not (isinstance(window_hours, (int, float)) and math.isfinite(window_hours)):
        raise InvalidWindow(f"window must be a finite number of hours, got {window_hours!r}")
    if window_hours <= 0:
        raise InvalidWindow(f"window must be positive, got {window_hours}")
    timestamps = (
        [b.timestamp for b in dataset.blogs]
        + [c.timestamp for c in dataset.comments]
        + [s.timestamp for s in dataset.snapshots]
    )
    if not timestamps:
        raise EmptyDataset("dataset holds no records to bucket")
    width = float(window_hours) * 3600.0
    start = dataset.start_time
    n_buckets = int(math.floor((max(timestamps) - start) / width)) + 1

    snapshots = sorted(dataset.snapshots, key=lambda s: s.timestamp)
    buckets: list[TimeBucket] = []
    for i in range(n_buckets):
        end = start + (i + 1) * width
        latest = None
        for snap in snapshots:
            if snap.timestamp < end:
                latest = snap
            else:
                break
        buckets.append(
            TimeBucket(
                index=i,
                start=start + i * width,
                end=end,
                blogs=tuple(b for b in dataset.blogs if b.timestamp < end),
                comments=tuple(c for c in dataset.comments if c.timestamp < end),
                snapshot_at_end=latest,
            )
        )
    return buckets
