"""Pipeline config parsing and the end-to-end monitoring run."""

import dataclasses

import pytest

from opcrisis.catalog import INITIAL_CATALOG, MONITOR_SUBSETS
from opcrisis.errors import ConfigError, FileUnreadable
from opcrisis.pipeline import (
    MonitorReport,
    PipelineConfig,
    bundled_records_path,
    resolve_monitor_catalog,
    run_monitor,
)
from opcrisis.sentiment import Hyperparams, read_corpus, save_model, train


@pytest.fixture(scope="module")
def small_model_path(tmp_path_factory):
    """A quickly trained model reused by every monitor run in this module."""
    from opcrisis.pipeline import bundled_corpus_path

    corpus = read_corpus(bundled_corpus_path())
    model = train(corpus, Hyperparams(d=4, h=4, epochs=40, seed=0))
    path = tmp_path_factory.mktemp("model") / "model.npz"
    save_model(model, path)
    return str(path)


@pytest.fixture(scope="module")
def default_report(small_model_path) -> MonitorReport:
    return run_monitor(PipelineConfig(model=small_model_path))


class TestConfigDefaults:
    def test_defaults(self):
        config = PipelineConfig()
        assert config.window_hours == 2.0
        assert config.catalog == "codes"
        assert config.codes == ("C124", "C211", "C212")
        assert config.rho == 0.5
        assert config.normalization == "benchmark-max"
        assert config.formats == ("csv", "svg")
        assert config.benchmarks == "default"

    @pytest.mark.parametrize(
        "field,value",
        [
            ("window_hours", 0.0),
            ("window_hours", -1.0),
            ("rho", 0.0),
            ("rho", 1.0),
            ("catalog", "bogus"),
            ("normalization", "zscore"),
            ("formats", ("pdf",)),
            ("formats", ()),
        ],
    )
    def test_rejects_bad_values(self, field, value):
        with pytest.raises(ConfigError):
            PipelineConfig(**{field: value})

    def test_codes_catalog_needs_codes(self):
        with pytest.raises(ConfigError):
            PipelineConfig(catalog="codes", codes=())


class TestConfigFile:
    def test_sections_flatten_into_one_namespace(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "[input]\nrecords = event.jsonl\nwindow_hours = 4\n"
            "[rating]\nrho = 0.3\nnormalization = none\n"
            "[output]\noutput_dir = results\nformats = csv\n",
            encoding="utf-8",
        )
        config = PipelineConfig.from_file(path)
        assert config.records == "event.jsonl"
        assert config.window_hours == 4.0
        assert config.rho == 0.3
        assert config.normalization == "none"
        assert config.output_dir == "results"
        assert config.formats == ("csv",)

    def test_duplicate_key_across_sections(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("[a]\nrho = 0.4\n[b]\nrho = 0.5\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="more than one section"):
            PipelineConfig.from_file(path)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("[a]\nturbo = yes\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="turbo"):
            PipelineConfig.from_file(path)

    def test_bad_value_names_the_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("[a]\nwindow_hours = soon\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="window_hours"):
            PipelineConfig.from_file(path)

    def test_key_without_section_header(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("rho = 0.4\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            PipelineConfig.from_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            PipelineConfig.from_file(tmp_path / "absent.cfg")

    def test_tuple_values_parse(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "[a]\ncodes = C124, C211, C212\nweights = 0.5,0.25,0.25\nstrict = true\n",
            encoding="utf-8",
        )
        config = PipelineConfig.from_file(path)
        assert config.codes == ("C124", "C211", "C212")
        assert config.weights == (0.5, 0.25, 0.25)
        assert config.strict is True


class TestOverrides:
    def test_flag_beats_file_value(self):
        config = PipelineConfig(rho=0.3).with_overrides(rho=0.7)
        assert config.rho == 0.7

    def test_none_means_keep(self):
        config = PipelineConfig(rho=0.3).with_overrides(rho=None, window_hours=None)
        assert config.rho == 0.3
        assert config.window_hours == 2.0

    def test_unknown_override_rejected(self):
        with pytest.raises(ConfigError):
            PipelineConfig().with_overrides(gain=2)

    def test_override_still_validated(self):
        with pytest.raises(ConfigError):
            PipelineConfig().with_overrides(rho=1.5)

    def test_echo_is_sorted_and_complete(self):
        lines = PipelineConfig().echo()
        keys = [line.split("=", 1)[0] for line in lines]
        assert keys == sorted(keys)
        assert len(keys) == len(dataclasses.fields(PipelineConfig))


class TestResolveCatalog:
    def test_named_subsets(self):
        for n, codes in MONITOR_SUBSETS.items():
            catalog = resolve_monitor_catalog(PipelineConfig(catalog=str(n)))
            assert catalog.codes() == codes

    def test_full_catalogs(self):
        assert len(resolve_monitor_catalog(PipelineConfig(catalog="initial")).codes()) == 22
        assert len(resolve_monitor_catalog(PipelineConfig(catalog="final")).codes()) == 18

    def test_explicit_codes(self):
        catalog = resolve_monitor_catalog(
            PipelineConfig(catalog="codes", codes=("C211", "C124"))
        )
        assert catalog.codes() == ("C124", "C211")  # catalog order, not input order

    def test_unknown_code_is_config_error(self):
        with pytest.raises(ConfigError, match="C999"):
            resolve_monitor_catalog(PipelineConfig(catalog="codes", codes=("C999",)))


class TestRunMonitor:
    def test_default_run_rates_every_bucket(self, default_report):
        assert len(default_report.rows) == 24
        assert default_report.skipped == ()
        assert [r.bucket_index for r in default_report.rows] == list(range(24))

    def test_levels_within_range(self, default_report):
        for row in default_report.rows:
            assert row.level in (1, 2, 3, 4)
            assert len(row.gamma) == 4
            assert max(row.gamma) == row.gamma[row.level - 1]

    def test_bucket_boundaries(self, default_report):
        for row in default_report.rows:
            assert row.end - row.start == pytest.approx(7200.0)

    def test_catalog_and_rating_codes(self, default_report):
        assert default_report.catalog_codes == ("C124", "C211", "C212")
        # rating codes follow the benchmark column order
        assert set(default_report.rating_codes) == {"C124", "C211", "C212"}

    def test_rows_complete_over_catalog(self, default_report):
        for row in default_report.rows:
            assert set(row.values) == set(default_report.catalog_codes)

    def test_sentiment_counts_are_cumulative(self, default_report):
        previous = (0, 0, 0)
        for row in default_report.rows:
            assert all(c >= p for c, p in zip(row.sentiment, previous))
            previous = row.sentiment
        assert sum(default_report.rows[-1].sentiment) == 493 + 769

    def test_metadata_mentions_version_and_seed(self, default_report):
        assert any(line.startswith("version=") for line in default_report.metadata)
        assert any(line == "seed=0" for line in default_report.metadata)

    def test_deterministic(self, small_model_path, default_report):
        again = run_monitor(PipelineConfig(model=small_model_path))
        assert again == default_report

    def test_default_records_are_the_bundled_corpus(self, small_model_path):
        explicit = run_monitor(
            PipelineConfig(model=small_model_path, records=str(bundled_records_path()))
        )
        implicit = run_monitor(PipelineConfig(model=small_model_path))
        # config echo differs (records path vs None); the results must not
        assert explicit.rows == implicit.rows
        assert explicit.skipped == implicit.skipped
        assert explicit.rating_codes == implicit.rating_codes

    def test_rate_bearing_subset_skips_first_bucket(self, small_model_path):
        report = run_monitor(PipelineConfig(model=small_model_path, catalog="11"))
        assert len(report.rows) == 23
        assert len(report.skipped) == 1
        assert report.skipped[0].bucket_index == 0
        assert "C221" in report.skipped[0].reason

    def test_explicit_rateless_codes_rate_all_buckets(self, small_model_path):
        report = run_monitor(
            PipelineConfig(model=small_model_path, catalog="codes", codes=("C121", "C124"))
        )
        assert len(report.rows) == 24


class TestStageAnnotation:
    def test_missing_records_tagged_ingest(self, tmp_path):
        config = PipelineConfig(records=str(tmp_path / "absent.jsonl"))
        with pytest.raises(FileUnreadable) as info:
            run_monitor(config)
        assert info.value.stage == "ingest"

    def test_missing_model_tagged_sentiment(self, tmp_path):
        config = PipelineConfig(model=str(tmp_path / "absent.npz"))
        with pytest.raises(Exception) as info:
            run_monitor(config)
        assert getattr(info.value, "stage", None) == "sentiment"

    def test_bad_codes_tagged_indicators(self, small_model_path):
        config = PipelineConfig(
            model=small_model_path, catalog="codes", codes=("C999",)
        )
        with pytest.raises(ConfigError) as info:
            run_monitor(config)
        assert info.value.stage == "indicators"

    def test_missing_benchmark_file_tagged_rating(self, small_model_path, tmp_path):
        config = PipelineConfig(
            model=small_model_path, benchmarks=str(tmp_path / "absent.csv")
        )
        with pytest.raises(FileUnreadable) as info:
            run_monitor(config)
        assert info.value.stage == "rating"
