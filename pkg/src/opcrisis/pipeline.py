"""End-to-end monitoring pipeline.

Chains record ingestion, sentiment classification, per-bucket indicator
computation and crisis rating behind one config object. Any error escaping a
stage is tagged with the stage name (an attribute on the exception, message
untouched) so callers can report where the run died.

The config file is INI-style: section headers group keys for readability,
but keys live in one flat namespace — each may appear once and each can be
overridden by a command-line flag of the same name.
"""

from __future__ import annotations

import configparser
import logging
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path

from . import __version__
from .catalog import INITIAL_CATALOG, MONITOR_SUBSETS, IndicatorCatalog, resolve_catalog
from .errors import CatalogMismatch, ConfigError, OpcrisisError
from .indicators import IndicatorVector, compute_vector
from .rating import BenchmarkMatrix, GraConfig, default_benchmarks, rate, read_benchmark_file
from .records import bucketize, load_records
from .sentiment import Hyperparams, classify, load_model, load_pretrained_embeddings, read_corpus, train

logger = logging.getLogger(__name__)

CATALOG_CHOICES = ("initial", "final", "codes") + tuple(
    str(n) for n in sorted(MONITOR_SUBSETS)
)
FORMAT_CHOICES = ("csv", "svg")


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_str_tuple(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def _parse_float_tuple(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.split(",") if part.strip())


# config key -> parser from the file's string form
_KEY_PARSERS = {
    "records": str,
    "event_id": str,
    "window_hours": float,
    "strict": _parse_bool,
    "catalog": str,
    "codes": _parse_str_tuple,
    "model": str,
    "train_corpus": str,
    "embeddings": str,
    "d": int,
    "h": int,
    "learning_rate": float,
    "epochs": int,
    "min_count": int,
    "clip_norm": float,
    "benchmarks": str,
    "rho": float,
    "weights": _parse_float_tuple,
    "normalization": str,
    "corr_threshold": float,
    "cum_threshold": float,
    "output_dir": str,
    "formats": _parse_str_tuple,
    "seed": int,
}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a monitoring run needs; every field has a config-file key."""

    records: str | None = None
    event_id: str | None = None
    window_hours: float = 2.0
    strict: bool = False
    catalog: str = "codes"
    codes: tuple[str, ...] = ("C124", "C211", "C212")
    model: str | None = None
    train_corpus: str | None = None
    embeddings: str | None = None
    d: int = 16
    h: int = 16
    learning_rate: float = 0.5
    epochs: int = 200
    min_count: int = 1
    clip_norm: float | None = None
    benchmarks: str = "default"
    rho: float = 0.5
    weights: tuple[float, ...] | None = None
    normalization: str = "benchmark-max"
    corr_threshold: float = 0.84
    cum_threshold: float = 0.90
    output_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "svg")
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.window_hours, (int, float)) and self.window_hours > 0):
            raise ConfigError(f"window_hours must be positive, got {self.window_hours!r}")
        if self.catalog not in CATALOG_CHOICES:
            raise ConfigError(
                f"catalog must be one of {', '.join(CATALOG_CHOICES)}, got {self.catalog!r}"
            )
        if self.catalog == "codes" and not self.codes:
            raise ConfigError("catalog 'codes' needs a non-empty codes list")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho!r}")
        if self.normalization not in ("none", "benchmark-max"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        unknown = [f for f in self.formats if f not in FORMAT_CHOICES]
        if unknown:
            raise ConfigError(f"unknown output format(s): {', '.join(unknown)}")
        if not self.formats:
            raise ConfigError("formats must name at least one of csv, svg")

    @classmethod
    def from_mapping(cls, mapping, source: str = "config") -> "PipelineConfig":
        kwargs = {}
        for key, raw in mapping.items():
            if key not in _KEY_PARSERS:
                raise ConfigError(f"{source}: unknown key {key!r}")
            if raw is None or raw == "":
                continue
            try:
                kwargs[key] = _KEY_PARSERS[key](raw) if isinstance(raw, str) else raw
            except ValueError as err:
                raise ConfigError(f"{source}: bad value for {key!r}: {err}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config file {path}: {err}") from None
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as err:
            raise ConfigError(f"config file {path}: {err}") from None
        flat: dict[str, str] = {}
        for section in parser.sections():
            for key, value in parser.items(section):
                if key in flat:
                    raise ConfigError(
                        f"config file {path}: key {key!r} appears in more than one section"
                    )
                flat[key] = value
        return cls.from_mapping(flat, source=f"config file {path}")

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """Non-None overrides win over file values (flag > file semantics)."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        for key in changes:
            if key not in _KEY_PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
        return replace(self, **changes) if changes else self

    def echo(self) -> tuple[str, ...]:
        """Deterministic key=value lines for report metadata."""
        out = []
        for field in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, field.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            out.append(f"{field.name}={value}")
        return tuple(out)


@dataclass(frozen=True)
class MonitorRow:
    bucket_index: int
    start: float  # epoch seconds, bucket boundaries
    end: float
    values: dict[str, float]  # over the resolved catalog
    sentiment: tuple[int, int, int]  # positive, negative, neutral
    gamma: tuple[float, float, float, float]
    level: int
    label: str


@dataclass(frozen=True)
class SkippedBucket:
    bucket_index: int
    reason: str


@dataclass(frozen=True)
class MonitorReport:
    rows: tuple[MonitorRow, ...]
    skipped: tuple[SkippedBucket, ...]
    catalog_codes: tuple[str, ...]
    rating_codes: tuple[str, ...]  # catalog codes that have benchmark columns
    metadata: tuple[str, ...]


@contextmanager
def _stage(name: str):
    """Tag any escaping pipeline error with the stage that raised it."""
    try:
        yield
    except OpcrisisError as err:
        if getattr(err, "stage", None) is None:
            err.stage = name
        raise


def bundled_corpus_path():
    return resources.files("opcrisis.data") / "toy_sentiment.tsv"


def bundled_records_path():
    return resources.files("opcrisis.data") / "synthetic_event.jsonl"


def resolve_monitor_catalog(config: PipelineConfig) -> IndicatorCatalog:
    """Map the config's catalog choice to a concrete catalog."""
    choice, codes = config.catalog, config.codes
    if choice in MONITOR_SUBSETS_BY_NAME:
        choice, codes = "codes", MONITOR_SUBSETS_BY_NAME[config.catalog]
    try:
        return resolve_catalog(choice, codes)
    except CatalogMismatch as err:
        raise ConfigError(f"codes: {err}") from None


MONITOR_SUBSETS_BY_NAME = {str(n): codes for n, codes in MONITOR_SUBSETS.items()}


def _sentiment_model(config: PipelineConfig):
    if config.model is not None:
        return load_model(config.model)
    corpus_path = config.train_corpus if config.train_corpus is not None else bundled_corpus_path()
    corpus = read_corpus(corpus_path)
    hp = Hyperparams(
        d=config.d,
        h=config.h,
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        seed=config.seed,
        min_count=config.min_count,
        clip_norm=config.clip_norm,
    )
    pretrained = None
    if config.embeddings is not None:
        pretrained, _ = load_pretrained_embeddings(config.embeddings)
    return train(corpus, hp, pretrained)


def _benchmarks(config: PipelineConfig) -> tuple[BenchmarkMatrix, tuple[float, ...] | None]:
    if config.benchmarks == "default":
        return default_benchmarks(), None
    return read_benchmark_file(config.benchmarks)


def run_monitor(config: PipelineConfig) -> MonitorReport:
    """Ingest, classify, compute indicators and rate every complete bucket."""
    records = config.records if config.records is not None else bundled_records_path()

    with _stage("ingest"):
        result = load_records(records, strict=config.strict, event_id=config.event_id)
        dataset = result.dataset
        if result.rejects:
            logger.info("ingest: %d line(s) rejected", len(result.rejects))

    with _stage("sentiment"):
        model = _sentiment_model(config)
        label_by_id: dict[str, int] = {}
        for blog in dataset.blogs:
            label_by_id[blog.id] = classify(blog.text, model)
        for comment in dataset.comments:
            label_by_id[comment.id] = classify(comment.text, model)

    with _stage("indicators"):
        catalog = resolve_monitor_catalog(config)
        buckets = bucketize(dataset, config.window_hours)

        def counts_of(bucket) -> tuple[int, int, int]:
            tally = [0, 0, 0]
            for rec in bucket.blogs:
                tally[label_by_id[rec.id]] += 1
            for rec in bucket.comments:
                tally[label_by_id[rec.id]] += 1
            return tuple(tally)

        counts = [counts_of(b) for b in buckets]
        vectors: list[IndicatorVector] = []
        for k, bucket in enumerate(buckets):
            vectors.append(
                compute_vector(
                    bucket,
                    buckets[k - 1] if k else None,
                    catalog,
                    sentiment_counts=counts[k],
                    prev_sentiment_counts=counts[k - 1] if k else None,
                )
            )

    with _stage("rating"):
        bm_full, file_weights = _benchmarks(config)
        bm, unmatched = bm_full.subset(catalog.codes())
        if unmatched:
            logger.info(
                "rating: no benchmark column for %s; rated on %s",
                ", ".join(unmatched),
                ", ".join(bm.codes()),
            )
        weights = config.weights if config.weights is not None else file_weights
        gra = GraConfig(rho=config.rho, weights=weights, normalization=config.normalization)
        rows: list[MonitorRow] = []
        skipped: list[SkippedBucket] = []
        for bucket, vec, sent in zip(buckets, vectors, counts):
            absent = sorted(c for c in bm.codes() if c not in vec.values)
            if absent:
                reason = f"missing {', '.join(absent)}"
                logger.info("bucket %d not rated: %s", bucket.index, reason)
                skipped.append(SkippedBucket(bucket.index, reason))
                continue
            assessment = rate({c: vec.values[c] for c in bm.codes()}, bm, gra)
            rows.append(
                MonitorRow(
                    bucket_index=bucket.index,
                    start=bucket.start,
                    end=bucket.end,
                    values=dict(vec.values),
                    sentiment=sent,
                    gamma=assessment.gamma,
                    level=assessment.level,
                    label=assessment.label,
                )
            )

    metadata = (
        f"version={__version__}",
        *config.echo(),
        f"records_loaded={len(dataset.blogs) + len(dataset.comments) + len(dataset.snapshots)}",
        f"lines_rejected={len(result.rejects)}",
        f"buckets={len(buckets)}",
    )
    return MonitorReport(
        rows=tuple(rows),
        skipped=tuple(skipped),
        catalog_codes=catalog.codes(),
        rating_codes=bm.codes(),
        metadata=metadata,
    )
