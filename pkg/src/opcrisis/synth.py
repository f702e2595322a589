"""Deterministic synthetic event generator.

Produces a 48-hour record file plus a ground-truth manifest of per-bucket
statistics. The manifest is computed here with independent plain arithmetic
(its own sums, its own sorted-and-trimmed means, its own carry-forward scan)
so tests can hold the indicator pipeline against it without circularity —
this module never imports the indicator code.

A second mode emits a four-row indicator CSV whose rows equal the default
benchmark vectors in escalating order (level 4 -> 1), giving the rating CLI a
known-answer timeline.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import OutputUnwritable

DEFAULT_SEED = 7
DEFAULT_HOURS = 48.0
DEFAULT_START_TS = 1_555_200_000  # arbitrary fixed instant
WINDOW_HOURS = 2.0

# class-tagged phrase banks; tokens deliberately overlap the bundled training
# corpus so a model trained on it recognizes most of them
_POS_TOKENS = ("wonderful", "excellent", "love", "great", "happy", "praise", "支", "持", "赞", "好")
_NEG_TOKENS = ("terrible", "awful", "angry", "hate", "disaster", "protest", "怒", "差", "坏", "退")
_NEU_TOKENS = ("update", "report", "notice", "schedule", "info", "statement", "讯", "告", "时", "记")
_BANKS = (_POS_TOKENS, _NEG_TOKENS, _NEU_TOKENS)


def _author_pool(rng: np.random.Generator) -> list[dict]:
    """Forty pairwise-distinct author profiles."""
    pool = []
    for i in range(40):
        pool.append(
            {
                "followers": 120 + 97 * i + int(rng.integers(0, 50)),
                "attentions": 40 + 13 * i,
                "grade": 1 + (i % 16),
                "verified": bool(i % 5 < 2),
                "historical_blogs": 25 + 31 * i,
            }
        )
    return pool


def _trimmed(values) -> float:
    """Local oracle arithmetic: drop one max and one min, mean the rest."""
    ordered = sorted(values)
    if len(ordered) < 3:
        return sum(ordered) / len(ordered)
    return sum(ordered[1:-1]) / (len(ordered) - 2)


def _text(rng: np.random.Generator, klass: int) -> str:
    bank = _BANKS[klass]
    n = int(rng.integers(3, 7))
    return " ".join(bank[int(rng.integers(0, len(bank)))] for _ in range(n))


def generate_event(
    seed: int = DEFAULT_SEED,
    hours: float = DEFAULT_HOURS,
    start_ts: int = DEFAULT_START_TS,
) -> tuple[list[str], dict]:
    """Record lines plus the ground-truth manifest for 2-hour buckets."""
    rng = np.random.default_rng(seed)
    pool = _author_pool(rng)
    n_buckets = int(hours / WINDOW_HOURS)
    width = int(WINDOW_HOURS * 3600)

    blogs: list[dict] = []
    comments: list[dict] = []
    blog_no = 0
    comment_no = 0
    for b in range(n_buckets):
        # single-peak activity curve with deterministic jitter
        intensity = 8 + int(round(30.0 * float(np.exp(-(((b - 9) / 5.0) ** 2)))))
        n_blogs = intensity + int(rng.integers(0, 4))
        # sentiment mix drifts negative as the event peaks
        neg_weight = 0.2 + 0.5 * float(np.exp(-(((b - 11) / 6.0) ** 2)))
        pos_weight = max(0.15, 0.6 - neg_weight / 2.0)
        neu_weight = max(0.1, 1.0 - neg_weight - pos_weight)
        weights = np.array([pos_weight, neg_weight, neu_weight])
        weights = weights / weights.sum()
        bucket_start = start_ts + b * width
        for _ in range(n_blogs):
            blog_no += 1
            author_idx = int(rng.integers(0, len(pool)))
            klass = int(rng.choice(3, p=weights))
            ts = bucket_start + int(rng.integers(0, width))
            if blog_no == 1:
                ts = start_ts  # anchor: bucket boundaries hang off the earliest record
            blog = {
                "kind": "blog",
                "id": f"b{blog_no:05d}",
                "author_idx": author_idx,
                "ts": ts,
                "klass": klass,
                "text": _text(rng, klass),
                "likes": int(rng.integers(0, 120)),
                "comments": 0,
                "forwards": int(rng.integers(0, 40)),
                "original": bool(rng.random() < 0.75),
                "government": bool(rng.random() < 0.08),
            }
            n_comments = int(rng.integers(0, 4))
            blog["comments"] = n_comments
            blogs.append(blog)
            for _ in range(n_comments):
                comment_no += 1
                cts = min(ts + int(rng.integers(60, 5400)), start_ts + int(hours * 3600) - 1)
                cklass = int(rng.choice(3, p=weights))
                comments.append(
                    {
                        "kind": "comment",
                        "id": f"c{comment_no:05d}",
                        "blog_id": blog["id"],
                        "ts": cts,
                        "klass": cklass,
                        "text": _text(rng, cklass),
                        "responses": int(rng.integers(0, 6)),
                    }
                )

    # platform snapshots every 30 minutes, strictly increasing totals,
    # ending before the final bucket boundary
    snapshots: list[dict] = []
    reads = 0
    discussions = 0
    t = start_ts + 900
    last = start_ts + int((hours - 0.75) * 3600)
    while t <= last:
        reads += int(rng.integers(500, 4000))
        discussions += int(rng.integers(20, 200))
        snapshots.append(
            {"kind": "snapshot", "ts": t, "reads": reads, "discussions": discussions}
        )
        t += 1800

    lines = []
    for blog in blogs:
        author = pool[blog["author_idx"]]
        lines.append(
            json.dumps(
                {
                    "kind": "blog",
                    "id": blog["id"],
                    "author": author,
                    "ts": blog["ts"],
                    "text": blog["text"],
                    "likes": blog["likes"],
                    "comments": blog["comments"],
                    "forwards": blog["forwards"],
                    "original": blog["original"],
                    "government": blog["government"],
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    for comment in comments:
        lines.append(
            json.dumps(
                {
                    "kind": "comment",
                    "id": comment["id"],
                    "blog_id": comment["blog_id"],
                    "ts": comment["ts"],
                    "text": comment["text"],
                    "responses": comment["responses"],
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    for snap in snapshots:
        lines.append(json.dumps(snap, sort_keys=True))

    manifest = _manifest(seed, hours, start_ts, pool, blogs, comments, snapshots)
    return lines, manifest


def _manifest(seed, hours, start_ts, pool, blogs, comments, snapshots) -> dict:
    n_buckets = int(hours / WINDOW_HOURS)
    width = int(WINDOW_HOURS * 3600)
    bucket_rows = []
    for b in range(n_buckets):
        end = start_ts + (b + 1) * width
        in_blogs = [x for x in blogs if x["ts"] < end]
        in_comments = [x for x in comments if x["ts"] < end]
        original_idx = []
        for x in in_blogs:
            if x["original"] and x["author_idx"] not in original_idx:
                original_idx.append(x["author_idx"])
        authors = [pool[i] for i in original_idx]
        author_stats = None
        if authors:
            author_stats = {
                "C111": _trimmed([a["followers"] for a in authors]),
                "C112": _trimmed([a["attentions"] for a in authors]),
                "C113": float(sum(1 for a in authors if a["verified"])),
                "C114": _trimmed([a["historical_blogs"] for a in authors]),
                "C115": _trimmed([a["grade"] for a in authors]),
            }
        snap = None
        for s in snapshots:
            if s["ts"] < end:
                snap = {"C211": s["reads"], "C212": s["discussions"]}
        sentiment = {
            "pos": sum(1 for x in in_blogs + in_comments if x["klass"] == 0),
            "neg": sum(1 for x in in_blogs + in_comments if x["klass"] == 1),
            "neu": sum(1 for x in in_blogs + in_comments if x["klass"] == 2),
        }
        bucket_rows.append(
            {
                "index": b,
                "end_ts": end,
                "totals": {
                    "C121": sum(x["likes"] for x in in_blogs),
                    "C122": sum(x["comments"] for x in in_blogs),
                    "C123": sum(x["forwards"] for x in in_blogs),
                    "C124": len(in_blogs),
                    "C125": sum(1 for x in in_blogs if x["government"]),
                    "C126": sum(x["responses"] for x in in_comments),
                },
                "author_stats": author_stats,
                "snapshot": snap,
                "sentiment": sentiment,
            }
        )
    return {
        "seed": seed,
        "hours": hours,
        "start_ts": start_ts,
        "window_hours": WINDOW_HOURS,
        "n_buckets": n_buckets,
        "n_blogs": len(blogs),
        "n_comments": len(comments),
        "n_snapshots": len(snapshots),
        "buckets": bucket_rows,
    }


def write_event(
    output_dir,
    seed: int = DEFAULT_SEED,
    hours: float = DEFAULT_HOURS,
    start_ts: int = DEFAULT_START_TS,
    basename: str = "synthetic_event",
) -> tuple[Path, Path]:
    """Write the record file and manifest; returns both paths."""
    out = Path(output_dir)
    lines, manifest = generate_event(seed=seed, hours=hours, start_ts=start_ts)
    records_path = out / f"{basename}.jsonl"
    manifest_path = out / f"{basename}.manifest.json"
    try:
        out.mkdir(parents=True, exist_ok=True)
        records_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        manifest_path.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as err:
        raise OutputUnwritable(f"cannot write into {out}: {err}") from None
    return records_path, manifest_path


def escalation_csv_lines() -> list[str]:
    """Indicator CSV whose four rows walk the benchmark levels 4 -> 1.

    Rating each row reproduces the fixed-point property: a vector equal to a
    benchmark row gets that row's level.
    """
    from .rating import default_benchmarks

    bm = default_benchmarks()
    codes = [bm.column_code(k) for k in range(bm.n_indicators)]
    order = sorted(range(len(codes)), key=lambda k: codes[k])
    header = "bucket," + ",".join(codes[k] for k in order)
    lines = [header]
    for row_no, level_idx in enumerate((3, 2, 1, 0)):  # levels 4, 3, 2, 1
        row = bm.rows[level_idx]
        lines.append(f"{row_no}," + ",".join(repr(float(row[k])) for k in order))
    return lines


def write_escalation(output_dir, basename: str = "escalation") -> Path:
    out = Path(output_dir)
    path = out / f"{basename}.csv"
    try:
        out.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(escalation_csv_lines()) + "\n", encoding="utf-8")
    except OSError as err:
        raise OutputUnwritable(f"cannot write {path}: {err}") from None
    return path
