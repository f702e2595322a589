"""Command-line front end.

One subcommand per pipeline stage (plus `monitor` for the whole chain and
`synth` for test data), so every stage can be driven standalone on
intermediate files. Exit codes: 0 success, 1 input error, 2 numeric error,
3 configuration/usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .catalog import INITIAL_CATALOG, resolve_catalog
from .errors import ConfigError, FileUnreadable, NoCompleteRows, OpcrisisError
from .indicators import SENTIMENT_CODES, compute_vector, read_indicator_csv, write_indicator_csv
from .pipeline import (
    MONITOR_SUBSETS_BY_NAME,
    PipelineConfig,
    _parse_float_tuple,
    _parse_str_tuple,
    _stage,
    bundled_corpus_path,
    resolve_monitor_catalog,
    run_monitor,
)
from .rating import GraConfig, default_benchmarks, rate, read_benchmark_file
from .records import bucketize, load_records, validate
from .report import (
    overlay_levels_chart,
    read_monitor_csv,
    render_report,
    sentiment_chart_from_csv,
)
from .sentiment import (
    Hyperparams,
    classify,
    evaluate,
    load_model,
    load_pretrained_embeddings,
    predict_proba,
    read_corpus,
    save_model,
    train,
)
from .sentiment.text import LABEL_NAMES
from .synth import DEFAULT_HOURS, DEFAULT_SEED, write_escalation, write_event

OUTPUT_DIR_ENV = "OPCRISIS_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    """Usage mistakes are configuration errors (exit 3), not exit 2."""

    def error(self, message):
        raise ConfigError(message)


def _output_dir(flag_value: str | None, config_value: str | None = None) -> str:
    """Precedence: flag, then environment, then config file, then ./out."""
    env = os.environ.get(OUTPUT_DIR_ENV)
    for candidate in (flag_value, env, config_value):
        if candidate:
            return candidate
    return "out"


def _add_gra_flags(sub):
    sub.add_argument("--benchmarks", default=None, help="benchmark CSV path or 'default'")
    sub.add_argument("--rho", type=float, default=None, help="distinguishing coefficient in (0,1)")
    sub.add_argument("--weights", type=_parse_float_tuple, default=None,
                     help="comma-separated indicator weights")
    sub.add_argument("--normalization", choices=["none", "benchmark-max"], default=None)


def _add_train_flags(sub):
    sub.add_argument("--d", type=int, default=None, help="embedding width")
    sub.add_argument("--h", type=int, default=None, help="hidden state width")
    sub.add_argument("--learning-rate", type=float, default=None)
    sub.add_argument("--epochs", type=int, default=None)
    sub.add_argument("--min-count", type=int, default=None, help="vocabulary frequency floor")
    sub.add_argument("--clip-norm", type=float, default=None, help="global gradient norm cap")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--embeddings", default=None, help="pretrained word-vector file")


def _resolve_benchmarks(choice: str | None):
    if choice is None or choice == "default":
        return default_benchmarks(), None
    return read_benchmark_file(choice)


def _catalog_from_args(args):
    choice = args.catalog if args.catalog is not None else "initial"
    codes = args.codes
    if choice in MONITOR_SUBSETS_BY_NAME:
        choice, codes = "codes", MONITOR_SUBSETS_BY_NAME[args.catalog]
    return resolve_catalog(choice, codes)


def cmd_synth(args) -> int:
    out = _output_dir(args.output_dir)
    if args.escalation:
        path = write_escalation(out)
        print(path)
    else:
        records_path, manifest_path = write_event(out, seed=args.seed, hours=args.hours)
        print(records_path)
        print(manifest_path)
    return 0


def cmd_ingest(args) -> int:
    out = Path(_output_dir(args.output_dir))
    with _stage("ingest"):
        result = load_records(args.records, strict=args.strict, event_id=args.event_id)
        dataset = result.dataset
        report = validate(dataset)
    print(
        f"{dataset.event_id}: {len(dataset.blogs)} blogs, {len(dataset.comments)} comments, "
        f"{len(dataset.snapshots)} snapshots, {len(result.rejects)} rejected line(s)"
    )
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"cannot create output directory {out}: {err}") from None
    if result.rejects:
        (out / "rejected_lines.txt").write_text(result.rejection_report() + "\n", encoding="utf-8")
        print(out / "rejected_lines.txt")
    for finding in report.findings:
        print(f"warning: {finding}", file=sys.stderr)

    with _stage("sentiment"):
        model = load_model(args.model) if args.model else None
    with _stage("indicators"):
        catalog = _catalog_from_args(args)
        if model is None:
            kept = [c for c in catalog.codes() if c not in SENTIMENT_CODES + ("C314",)]
            if kept != list(catalog.codes()):
                catalog = catalog.subset(kept, name=f"{catalog.name}-no-sentiment")
                print("note: no --model given; sentiment indicators left out", file=sys.stderr)
        buckets = bucketize(dataset, args.window_hours)
        counts = None
        if model is not None:
            labels = {}
            for rec in (*dataset.blogs, *dataset.comments):
                labels[rec.id] = classify(rec.text, model)
            counts = []
            for bucket in buckets:
                tally = [0, 0, 0]
                for rec in (*bucket.blogs, *bucket.comments):
                    tally[labels[rec.id]] += 1
                counts.append(tuple(tally))
        vectors = [
            compute_vector(
                bucket,
                buckets[k - 1] if k else None,
                catalog,
                sentiment_counts=counts[k] if counts else None,
                prev_sentiment_counts=counts[k - 1] if counts and k else None,
            )
            for k, bucket in enumerate(buckets)
        ]
        csv_path = out / "indicators.csv"
        write_indicator_csv(vectors, catalog, csv_path)
    print(csv_path)
    return 0


def cmd_train_sentiment(args) -> int:
    out = Path(_output_dir(args.output_dir))
    with _stage("sentiment"):
        corpus_path = args.corpus if args.corpus else bundled_corpus_path()
        corpus = read_corpus(corpus_path)
        flag_values = {
            "d": args.d,
            "h": args.h,
            "learning_rate": args.learning_rate,
            "epochs": args.epochs,
            "seed": args.seed,
            "min_count": args.min_count,
            "clip_norm": args.clip_norm,
        }
        hp = Hyperparams(**{k: v for k, v in flag_values.items() if v is not None})
        pretrained = None
        if args.embeddings:
            pretrained, _ = load_pretrained_embeddings(args.embeddings)
        model = train(corpus, hp, pretrained)
        model_path = Path(args.model_out) if args.model_out else out / "sentiment_model.npz"
        model_path.parent.mkdir(parents=True, exist_ok=True)
        save_model(model, model_path)
        on_train = evaluate(model, corpus)
    print(f"trained on {len(corpus)} examples, final loss {model.loss_trajectory[-1]:.6f}")
    print(f"train accuracy {on_train.accuracy:.4f}")
    print(model_path)
    if args.eval_corpus:
        with _stage("evaluation"):
            held_out = evaluate(model, read_corpus(args.eval_corpus))
        print(held_out.summary_row("LSTM"))
    return 0


def cmd_classify(args) -> int:
    with _stage("sentiment"):
        model = load_model(args.model)
        if args.text is not None:
            texts = [args.text]
        else:
            try:
                texts = [
                    line
                    for line in Path(args.input).read_text(encoding="utf-8").splitlines()
                    if line.strip()
                ]
            except OSError as err:
                raise FileUnreadable(f"cannot read {args.input}: {err}") from None
        for text in texts:
            if args.proba:
                p = predict_proba(text, model)
                cells = "\t".join(repr(float(v)) for v in p)
                print(f"{LABEL_NAMES[int(p.argmax())]}\t{cells}\t{text}")
            else:
                print(f"{LABEL_NAMES[classify(text, model)]}\t{text}")
    return 0


def cmd_select_indexes(args) -> int:
    from .indicators import build_matrix
    from .selection import SelectionConfig, select_catalog

    out = Path(_output_dir(args.output_dir))
    with _stage("selection"):
        csv_codes, vectors = read_indicator_csv(args.indicators)
        catalog = INITIAL_CATALOG.subset(csv_codes, name="from-csv")
        matrix = build_matrix(vectors, catalog)
        config = SelectionConfig(
            corr_threshold=args.corr_threshold if args.corr_threshold is not None else 0.84,
            cum_threshold=args.cum_threshold if args.cum_threshold is not None else 0.90,
            mode=args.mode,
        )
        result = select_catalog(matrix.data, catalog, config)
    for report in result.correlation:
        for step in report.removed:
            print(
                f"dropped {step.code}: |Rs|={abs(step.coefficient):.4f} with {step.partner}"
            )
    for report in result.pca:
        kept = ", ".join(report.retained)
        print(
            f"group {report.group or 'all'}: {len(report.retained)} of "
            f"{len(report.codes)} kept ({kept})"
        )
    final = result.catalog.codes()
    print("selected:", ", ".join(final))
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "selected_codes.txt"
        path.write_text("\n".join(final) + "\n", encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot create output directory {out}: {err}") from None
    print(path)
    return 0


def cmd_rate(args) -> int:
    out = Path(_output_dir(args.output_dir))
    with _stage("rating"):
        csv_codes, vectors = read_indicator_csv(args.indicators)
        bm_full, file_weights = _resolve_benchmarks(args.benchmarks)
        weights = args.weights if args.weights is not None else file_weights
        gra = GraConfig(
            rho=args.rho if args.rho is not None else 0.5,
            weights=weights,
            normalization=args.normalization if args.normalization else "benchmark-max",
        )
        # rate every row over the same columns: CSV header ∩ benchmark columns
        bm, _ = bm_full.subset([c for c in bm_full.codes() if c in csv_codes])
        lines = ["bucket,gamma1,gamma2,gamma3,gamma4,level,label"]
        rated = 0
        for vec in vectors:
            absent = sorted(c for c in bm.codes() if c not in vec.values)
            if absent:
                print(
                    f"bucket {vec.bucket_index}: not rated (missing {', '.join(absent)})",
                    file=sys.stderr,
                )
                continue
            assessment = rate({c: vec.values[c] for c in bm.codes()}, bm, gra)
            rated += 1
            gammas = ",".join(repr(g) for g in assessment.gamma)
            lines.append(
                f"{vec.bucket_index},{gammas},{assessment.level},{assessment.label}"
            )
            print(f"bucket {vec.bucket_index}: level {assessment.level} ({assessment.label})")
        if not rated:
            raise NoCompleteRows("no CSV row provides a complete rated vector")
        try:
            out.mkdir(parents=True, exist_ok=True)
            path = out / "assessment.csv"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot create output directory {out}: {err}") from None
    print(path)
    return 0


def cmd_monitor(args) -> int:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    file_output_dir = config.output_dir
    config = config.with_overrides(
        records=args.records,
        event_id=args.event_id,
        window_hours=args.window_hours,
        strict=args.strict,
        catalog=args.catalog,
        codes=args.codes,
        model=args.model,
        train_corpus=args.train_corpus,
        embeddings=args.embeddings,
        d=args.d,
        h=args.h,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        min_count=args.min_count,
        clip_norm=args.clip_norm,
        benchmarks=args.benchmarks,
        rho=args.rho,
        weights=args.weights,
        normalization=args.normalization,
        formats=args.formats,
        seed=args.seed,
        output_dir=_output_dir(args.output_dir, file_output_dir),
    )
    report = run_monitor(config)
    for skip in report.skipped:
        print(f"bucket {skip.bucket_index} not rated: {skip.reason}", file=sys.stderr)
    with _stage("report"):
        written = render_report(report, config.formats, config.output_dir)
    print(f"{len(report.rows)} bucket(s) rated over {', '.join(report.rating_codes)}")
    for path in written:
        print(path)
    return 0


def cmd_report(args) -> int:
    out = Path(_output_dir(args.output_dir))
    with _stage("report"):
        parsed = []
        for input_path in args.inputs:
            _, rows = read_monitor_csv(input_path)
            parsed.append((Path(input_path).stem, rows))
        try:
            out.mkdir(parents=True, exist_ok=True)
            written = []
            if len(parsed) == 1:
                name, rows = parsed[0]
                path = out / f"{name}_sentiment.svg"
                path.write_text(sentiment_chart_from_csv(rows), encoding="utf-8")
                written.append(path)
                path = out / f"{name}_levels.svg"
                path.write_text(
                    overlay_levels_chart([(name, rows)]), encoding="utf-8"
                )
                written.append(path)
            else:
                path = out / "levels_comparison.svg"
                path.write_text(overlay_levels_chart(parsed), encoding="utf-8")
                written.append(path)
        except OSError as err:
            raise ConfigError(f"cannot create output directory {out}: {err}") from None
    for path in written:
        print(path)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="opcrisis", description="Public-opinion crisis monitoring pipeline")
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="write the deterministic synthetic corpus")
    synth.add_argument("--seed", type=int, default=DEFAULT_SEED)
    synth.add_argument("--hours", type=float, default=DEFAULT_HOURS)
    synth.add_argument("--escalation", action="store_true",
                       help="write the four-row benchmark-walk indicator CSV instead")
    synth.add_argument("--output-dir", default=None)
    synth.set_defaults(func=cmd_synth)

    ingest = subs.add_parser("ingest", help="records file -> indicator CSV")
    ingest.add_argument("--records", required=True)
    ingest.add_argument("--event-id", default=None)
    ingest.add_argument("--window-hours", type=float, default=2.0)
    ingest.add_argument("--strict", action="store_true")
    ingest.add_argument("--catalog", default=None,
                        help="initial, final, codes, or a subset size (3/7/11/14/18)")
    ingest.add_argument("--codes", type=_parse_str_tuple, default=None)
    ingest.add_argument("--model", default=None, help="sentiment model for C31x indicators")
    ingest.add_argument("--output-dir", default=None)
    ingest.set_defaults(func=cmd_ingest)

    train_p = subs.add_parser("train-sentiment", help="train the classifier on a labeled corpus")
    train_p.add_argument("--corpus", default=None, help="label<TAB>text file; bundled corpus if omitted")
    train_p.add_argument("--model-out", default=None)
    train_p.add_argument("--eval-corpus", default=None,
                         help="held-out corpus; prints a name/precision/recall/F1 row")
    _add_train_flags(train_p)
    train_p.add_argument("--output-dir", default=None)
    train_p.set_defaults(func=cmd_train_sentiment)

    classify_p = subs.add_parser("classify", help="label texts with a trained model")
    classify_p.add_argument("--model", required=True)
    group = classify_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", default=None)
    group.add_argument("--input", default=None, help="file with one text per line")
    classify_p.add_argument("--proba", action="store_true", help="also print class probabilities")
    classify_p.set_defaults(func=cmd_classify)

    select = subs.add_parser("select-indexes", help="correlation + PCA screening of an indicator CSV")
    select.add_argument("--indicators", required=True)
    select.add_argument("--corr-threshold", type=float, default=None)
    select.add_argument("--cum-threshold", type=float, default=None)
    select.add_argument("--mode", choices=["per-group", "global"], default="per-group")
    select.add_argument("--output-dir", default=None)
    select.set_defaults(func=cmd_select_indexes)

    rate_p = subs.add_parser("rate", help="crisis-rate each complete row of an indicator CSV")
    rate_p.add_argument("--indicators", required=True)
    _add_gra_flags(rate_p)
    rate_p.add_argument("--output-dir", default=None)
    rate_p.set_defaults(func=cmd_rate)

    monitor = subs.add_parser("monitor", help="full pipeline: records -> rated buckets + charts")
    monitor.add_argument("--config", default=None, help="INI-style config file")
    monitor.add_argument("--records", default=None)
    monitor.add_argument("--event-id", default=None)
    monitor.add_argument("--window-hours", type=float, default=None)
    monitor.add_argument("--strict", action="store_const", const=True, default=None)
    monitor.add_argument("--catalog", default=None)
    monitor.add_argument("--codes", type=_parse_str_tuple, default=None)
    monitor.add_argument("--train-corpus", default=None)
    monitor.add_argument("--model", default=None)
    monitor.add_argument("--formats", type=_parse_str_tuple, default=None)
    _add_train_flags(monitor)
    _add_gra_flags(monitor)
    monitor.add_argument("--output-dir", default=None)
    monitor.set_defaults(func=cmd_monitor)

    report_p = subs.add_parser("report", help="re-render charts from monitor CSV files")
    report_p.add_argument("inputs", nargs="+", help="monitor CSV file(s)")
    report_p.add_argument("--output-dir", default=None)
    report_p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except OpcrisisError as err:
        stage = getattr(err, "stage", None)
        where = f"stage {stage}: " if stage else ""
        print(f"opcrisis: error: {where}{err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
