"""Crisis rating of online public opinion events.

Pipeline: JSONL event records -> time buckets -> indicator vectors ->
LSTM sentiment counts -> (optional) correlation/PCA index selection ->
grey relational rating against four-level benchmarks -> CSV/SVG reports.
"""

__version__ = "0.1.0"

from .catalog import (
    FINAL_CATALOG,
    INITIAL_CATALOG,
    MONITOR_SUBSETS,
    IndicatorCatalog,
    resolve_catalog,
)
from .errors import ConfigError, InputError, NumericError, OpcrisisError
from .indicators import (
    IndicatorMatrix,
    IndicatorVector,
    build_matrix,
    compute_vector,
    read_indicator_csv,
    write_indicator_csv,
)
from .pipeline import MonitorReport, MonitorRow, PipelineConfig, run_monitor
from .rating import (
    BenchmarkMatrix,
    CrisisAssessment,
    CrisisRater,
    GraConfig,
    default_benchmarks,
    rate,
    read_benchmark_file,
    write_benchmark_file,
)
from .records import EventDataset, bucketize, load_records, save_records, validate
from .report import render_report
from .selection import (
    IndexSelector,
    SelectionConfig,
    SelectionResult,
    eigen_sym,
    pca_select,
    prune_correlated,
    select_catalog,
    spearman,
)
from .sentiment import (
    Hyperparams,
    SentimentClassifier,
    SentimentModel,
    classify,
    evaluate,
    load_model,
    predict_proba,
    read_corpus,
    save_model,
    softmax,
    train,
)
from .synth import generate_event, write_escalation, write_event

__all__ = [
    "__version__",
    # catalogs
    "FINAL_CATALOG",
    "INITIAL_CATALOG",
    "MONITOR_SUBSETS",
    "IndicatorCatalog",
    "resolve_catalog",
    # errors
    "ConfigError",
    "InputError",
    "NumericError",
    "OpcrisisError",
    # records
    "EventDataset",
    "bucketize",
    "load_records",
    "save_records",
    "validate",
    # indicators
    "IndicatorMatrix",
    "IndicatorVector",
    "build_matrix",
    "compute_vector",
    "read_indicator_csv",
    "write_indicator_csv",
    # sentiment
    "Hyperparams",
    "SentimentClassifier",
    "SentimentModel",
    "classify",
    "evaluate",
    "load_model",
    "predict_proba",
    "read_corpus",
    "save_model",
    "softmax",
    "train",
    # selection
    "IndexSelector",
    "SelectionConfig",
    "SelectionResult",
    "eigen_sym",
    "pca_select",
    "prune_correlated",
    "select_catalog",
    "spearman",
    # rating
    "BenchmarkMatrix",
    "CrisisAssessment",
    "CrisisRater",
    "GraConfig",
    "default_benchmarks",
    "rate",
    "read_benchmark_file",
    "write_benchmark_file",
    # pipeline and reporting
    "MonitorReport",
    "MonitorRow",
    "PipelineConfig",
    "run_monitor",
    "render_report",
    # synthetic data
    "generate_event",
    "write_escalation",
    "write_event",
]
